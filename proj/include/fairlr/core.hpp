#pragma once
// Shared domain model: examples, datasets, group rates, debiasing parameters
// and fairness targets. Everything here is an immutable value type once
// constructed; validation happens eagerly and throws.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairlr/errors.hpp"

namespace fairlr {

// Binary sensitive attribute. Exactly two groups exist.
enum class Group : std::uint8_t { s0 = 0, s1 = 1 };

constexpr std::size_t group_index(Group g) { return static_cast<std::size_t>(g); }
constexpr Group other_group(Group g) { return g == Group::s0 ? Group::s1 : Group::s0; }

inline Group group_from_int(int v) {
  if (v != 0 && v != 1) throw DataError("group value must be 0 or 1, got " + std::to_string(v));
  return v == 0 ? Group::s0 : Group::s1;
}

struct LabeledExample {
  std::vector<double> features;  // post-encoding
  int label = 0;                 // y in {0,1}
  Group group = Group::s0;
};

// A fully encoded dataset. `continuous[j]` tells the normalizer whether
// encoded column j is a real-valued column (z-scored) or a one-hot/binary
// indicator column (left untouched).
struct Dataset {
  std::vector<LabeledExample> examples;
  std::vector<std::string> feature_names;
  std::size_t dim = 0;
  std::vector<bool> continuous;
  std::size_t dropped_rows = 0;  // rows removed at load time (missing values)

  std::size_t size() const { return examples.size(); }
};

// Throws unless: both groups non-empty, both label values present within each
// group, all feature vectors have length `dim`, metadata arity matches.
const Dataset& validate_dataset(const Dataset& ds);

// Stable partition by group. Does not require a validated dataset.
std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> partition_by_group(
    const Dataset& ds);

// Empirical P(y=1|s=i) with group sizes. Degenerate rates (0 or 1) are
// rejected at construction since every debiasing formula divides by them.
struct GroupRates {
  double p0 = 0.0;
  double p1 = 0.0;
  std::int64_t n0 = 0;
  std::int64_t n1 = 0;

  double rate(Group g) const { return g == Group::s0 ? p0 : p1; }
  std::int64_t count(Group g) const { return g == Group::s0 ? n0 : n1; }

  void validate() const;
};

// The four conditionals d^{s=i}_{ybar=j} = P(y=1 | ybar=j, s=i).
struct DebiasingParams {
  double d_y0_s0 = 0.0;
  double d_y1_s0 = 1.0;
  double d_y0_s1 = 0.0;
  double d_y1_s1 = 1.0;

  static DebiasingParams identity() { return {0.0, 1.0, 0.0, 1.0}; }

  double d_y0(Group g) const { return g == Group::s0 ? d_y0_s0 : d_y0_s1; }
  double d_y1(Group g) const { return g == Group::s0 ? d_y1_s0 : d_y1_s1; }

  // Affine coefficients of the score mapping: P(y=1) = slope * cbar + offset.
  double slope(Group g) const { return d_y1(g) - d_y0(g); }
  double offset(Group g) const { return d_y0(g); }

  // Each value in [0,1]; within each group d_y1 >= d_y0 (a positive fair
  // prediction never lowers the chance of a positive observed label).
  void validate() const;
};

enum class TargetKind : std::uint8_t { none, positive_rate, tpr_tnr };

enum class PrStrategy : std::uint8_t { explicit_value, average, minimum, maximum };

std::string to_string(TargetKind k);
std::string to_string(PrStrategy s);

// User intent: no fairness adjustment, a positive-rate target (explicit value
// or a strategy resolved against the biased rates), or a TPR/TNR target pair
// (TNR may be auto-selected from a baseline model).
struct TargetSpec {
  TargetKind kind = TargetKind::none;

  // positive_rate kind
  PrStrategy pr_strategy = PrStrategy::explicit_value;
  std::optional<double> pr_value;

  // tpr_tnr kind; tnr_value empty means auto-select
  double tpr_value = 1.0;
  std::optional<double> tnr_value;

  static TargetSpec none() { return {}; }
  static TargetSpec positive_rate(double value);
  static TargetSpec positive_rate(PrStrategy strategy);
  static TargetSpec tpr_tnr(double tpr, std::optional<double> tnr = std::nullopt);

  // True once strategy tags / auto-TNR have been replaced by numeric values.
  bool resolved() const;

  // Explicit probabilities must be in range: pr in (0,1), tpr/tnr in (0,1].
  void validate() const;
};

}  // namespace fairlr
