#include "fairlr/metrics.hpp"

#include <cmath>

#include <json.hpp>

namespace fairlr {

using ordered_json = nlohmann::ordered_json;

GroupConfusion confusion_by_group(const std::vector<int>& predictions,
                                  const std::vector<int>& labels,
                                  const std::vector<Group>& groups) {
  if (predictions.size() != labels.size() || predictions.size() != groups.size())
    throw LengthMismatchError("predictions/labels/groups differ in length");

  GroupConfusion out;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int pred = predictions[i];
    const int label = labels[i];
    if ((pred != 0 && pred != 1) || (label != 0 && label != 1))
      throw DataError("predictions and labels must be binary");
    ConfusionCell& cell = out.by_group[group_index(groups[i])];
    if (pred == 1)
      (label == 1 ? cell.tp : cell.fp) += 1;
    else
      (label == 1 ? cell.fn : cell.tn) += 1;
  }
  return out;
}

namespace {

std::optional<double> safe_ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> safe_div(std::optional<double> num, std::optional<double> den) {
  if (!num || !den || *den == 0.0) return std::nullopt;
  return *num / *den;
}

}  // namespace

FairnessReport fairness_report(const GroupConfusion& confusion) {
  const ConfusionCell& c0 = confusion.at(Group::s0);
  const ConfusionCell& c1 = confusion.at(Group::s1);
  if (c0.total() == 0 || c1.total() == 0)
    throw EmptyGroupError("fairness report needs both groups non-empty");

  FairnessReport r;
  r.n_by_group = {c0.total(), c1.total()};
  r.accuracy = static_cast<double>(c0.tp + c0.tn + c1.tp + c1.tn) /
               static_cast<double>(c0.total() + c1.total());
  r.positive_rate = {static_cast<double>(c0.tp + c0.fp) / static_cast<double>(c0.total()),
                     static_cast<double>(c1.tp + c1.fp) / static_cast<double>(c1.total())};
  r.di_ratio = r.positive_rate[1] == 0.0
                   ? std::nullopt
                   : std::optional<double>(r.positive_rate[0] / r.positive_rate[1]);
  r.tpr = {safe_ratio(c0.tp, c0.tp + c0.fn), safe_ratio(c1.tp, c1.tp + c1.fn)};
  r.tnr = {safe_ratio(c0.tn, c0.tn + c0.fp), safe_ratio(c1.tn, c1.tn + c1.fp)};
  r.tpr_ratio = safe_div(r.tpr[0], r.tpr[1]);
  r.tnr_ratio = safe_div(r.tnr[0], r.tnr[1]);
  return r;
}

namespace {

MetricAgg aggregate_metric(const std::vector<std::optional<double>>& values) {
  MetricAgg agg;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++agg.n_used;
    } else {
      ++agg.n_missing;
    }
  }
  if (agg.n_used == 0) return agg;
  const double mean = sum / agg.n_used;
  agg.mean = mean;
  if (agg.n_used == 1) {
    agg.stddev = 0.0;
    return agg;
  }
  double ss = 0.0;
  for (const auto& v : values) {
    if (!v) continue;
    const double d = *v - mean;
    ss += d * d;
  }
  agg.stddev = std::sqrt(ss / (agg.n_used - 1));
  return agg;
}

}  // namespace

AggregateReport aggregate_runs(const std::vector<FairnessReport>& reports) {
  if (reports.empty()) throw EmptyBatchError("aggregate over zero reports");

  auto collect = [&](auto getter) {
    std::vector<std::optional<double>> values;
    values.reserve(reports.size());
    for (const auto& r : reports) values.push_back(getter(r));
    return aggregate_metric(values);
  };

  AggregateReport agg;
  agg.repeats = static_cast<int>(reports.size());
  agg.accuracy = collect([](const FairnessReport& r) { return std::optional<double>(r.accuracy); });
  agg.pr_s0 = collect([](const FairnessReport& r) { return std::optional<double>(r.positive_rate[0]); });
  agg.pr_s1 = collect([](const FairnessReport& r) { return std::optional<double>(r.positive_rate[1]); });
  agg.di_ratio = collect([](const FairnessReport& r) { return r.di_ratio; });
  agg.tpr_s0 = collect([](const FairnessReport& r) { return r.tpr[0]; });
  agg.tpr_s1 = collect([](const FairnessReport& r) { return r.tpr[1]; });
  agg.tnr_s0 = collect([](const FairnessReport& r) { return r.tnr[0]; });
  agg.tnr_s1 = collect([](const FairnessReport& r) { return r.tnr[1]; });
  agg.tpr_ratio = collect([](const FairnessReport& r) { return r.tpr_ratio; });
  agg.tnr_ratio = collect([](const FairnessReport& r) { return r.tnr_ratio; });
  return agg;
}

namespace {

ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

ordered_json fairness_report_to_json(const FairnessReport& r) {
  ordered_json j;
  j["accuracy"] = r.accuracy;
  j["pr_s0"] = r.positive_rate[0];
  j["pr_s1"] = r.positive_rate[1];
  j["di_ratio"] = opt_json(r.di_ratio);
  j["tpr_s0"] = opt_json(r.tpr[0]);
  j["tpr_s1"] = opt_json(r.tpr[1]);
  j["tnr_s0"] = opt_json(r.tnr[0]);
  j["tnr_s1"] = opt_json(r.tnr[1]);
  j["tpr_ratio"] = opt_json(r.tpr_ratio);
  j["tnr_ratio"] = opt_json(r.tnr_ratio);
  j["n_s0"] = r.n_by_group[0];
  j["n_s1"] = r.n_by_group[1];
  return j;
}

ordered_json aggregate_report_to_json(const AggregateReport& a) {
  auto metric = [](const MetricAgg& m) {
    ordered_json j;
    j["mean"] = opt_json(m.mean);
    j["std"] = opt_json(m.stddev);
    j["n_used"] = m.n_used;
    j["n_missing"] = m.n_missing;
    return j;
  };
  ordered_json j;
  j["repeats"] = a.repeats;
  j["accuracy"] = metric(a.accuracy);
  j["pr_s0"] = metric(a.pr_s0);
  j["pr_s1"] = metric(a.pr_s1);
  j["di_ratio"] = metric(a.di_ratio);
  j["tpr_s0"] = metric(a.tpr_s0);
  j["tpr_s1"] = metric(a.tpr_s1);
  j["tnr_s0"] = metric(a.tnr_s0);
  j["tnr_s1"] = metric(a.tnr_s1);
  j["tpr_ratio"] = metric(a.tpr_ratio);
  j["tnr_ratio"] = metric(a.tnr_ratio);
  return j;
}

std::string fairness_report_to_json_string(const FairnessReport& report) {
  return fairness_report_to_json(report).dump(2) + "\n";
}

std::string aggregate_report_to_json_string(const AggregateReport& report) {
  return aggregate_report_to_json(report).dump(2) + "\n";
}

}  // namespace fairlr
