#pragma once
// Group-fairness and accuracy metrics: per-group confusion counts, positive
// rates, the disparate-impact ratio PR_{s=0}/PR_{s=1}, TPR/TNR ratios, and
// mean/std aggregation over repeated runs. Rates with a zero denominator are
// carried as absent values (serialized null), never NaN.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairlr/core.hpp"

namespace fairlr {

struct ConfusionCell {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
};

struct GroupConfusion {
  std::array<ConfusionCell, 2> by_group;

  const ConfusionCell& at(Group g) const { return by_group[group_index(g)]; }
};

GroupConfusion confusion_by_group(const std::vector<int>& predictions,
                                  const std::vector<int>& labels,
                                  const std::vector<Group>& groups);

struct FairnessReport {
  double accuracy = 0.0;
  std::array<double, 2> positive_rate{0.0, 0.0};
  std::optional<double> di_ratio;  // PR_{s=0} / PR_{s=1}
  std::array<std::optional<double>, 2> tpr;
  std::array<std::optional<double>, 2> tnr;
  std::optional<double> tpr_ratio;  // TPR_{s=0} / TPR_{s=1}
  std::optional<double> tnr_ratio;
  std::array<std::int64_t, 2> n_by_group{0, 0};
};

FairnessReport fairness_report(const GroupConfusion& confusion);

// Mean and unbiased (n-1) standard deviation of one metric over repeats;
// absent observations are excluded and counted.
struct MetricAgg {
  std::optional<double> mean;
  std::optional<double> stddev;  // 0 when a single value is present
  int n_used = 0;
  int n_missing = 0;
};

struct AggregateReport {
  int repeats = 0;
  MetricAgg accuracy;
  MetricAgg pr_s0, pr_s1;
  MetricAgg di_ratio;
  MetricAgg tpr_s0, tpr_s1;
  MetricAgg tnr_s0, tnr_s1;
  MetricAgg tpr_ratio, tnr_ratio;
};

AggregateReport aggregate_runs(const std::vector<FairnessReport>& reports);

// Structured-text serialization with fixed field names; absent values are
// emitted as null.
std::string fairness_report_to_json_string(const FairnessReport& report);
std::string aggregate_report_to_json_string(const AggregateReport& report);

}  // namespace fairlr
