#include "fairlr/core.hpp"

#include <cmath>

namespace fairlr {

const Dataset& validate_dataset(const Dataset& ds) {
  if (ds.dim == 0) throw DimMismatchError("dataset declares dim 0");
  if (!ds.feature_names.empty() && ds.feature_names.size() != ds.dim)
    throw DimMismatchError("feature_names arity " + std::to_string(ds.feature_names.size()) +
                           " != dim " + std::to_string(ds.dim));
  if (!ds.continuous.empty() && ds.continuous.size() != ds.dim)
    throw DimMismatchError("continuous-flag arity " + std::to_string(ds.continuous.size()) +
                           " != dim " + std::to_string(ds.dim));

  std::array<std::int64_t, 2> n{0, 0};
  std::array<std::array<std::int64_t, 2>, 2> label_count{{{0, 0}, {0, 0}}};
  for (std::size_t i = 0; i < ds.examples.size(); ++i) {
    const auto& ex = ds.examples[i];
    if (ex.features.size() != ds.dim)
      throw DimMismatchError("example " + std::to_string(i) + " has " +
                             std::to_string(ex.features.size()) + " features, expected " +
                             std::to_string(ds.dim));
    if (ex.label != 0 && ex.label != 1)
      throw DataError("example " + std::to_string(i) + " has non-binary label");
    ++n[group_index(ex.group)];
    ++label_count[group_index(ex.group)][static_cast<std::size_t>(ex.label)];
  }
  for (int g = 0; g < 2; ++g) {
    if (n[g] == 0) throw EmptyGroupError("group " + std::to_string(g) + " has no examples");
    if (label_count[g][0] == 0 || label_count[g][1] == 0)
      throw DegenerateLabelsError("group " + std::to_string(g) + " has only label " +
                                  std::to_string(label_count[g][0] == 0 ? 1 : 0));
  }
  return ds;
}

std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> partition_by_group(
    const Dataset& ds) {
  std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> out;
  for (const auto& ex : ds.examples) {
    (ex.group == Group::s0 ? out.first : out.second).push_back(ex);
  }
  return out;
}

void GroupRates::validate() const {
  if (n0 < 1 || n1 < 1) throw EmptyGroupError("group counts must be >= 1");
  if (!(p0 > 0.0 && p0 < 1.0) || !(p1 > 0.0 && p1 < 1.0))
    throw DegenerateLabelsError("group rates must be strictly inside (0,1), got p0=" +
                                std::to_string(p0) + " p1=" + std::to_string(p1));
}

void DebiasingParams::validate() const {
  const double d[4] = {d_y0_s0, d_y1_s0, d_y0_s1, d_y1_s1};
  for (double v : d) {
    if (!(std::isfinite(v) && v >= 0.0 && v <= 1.0))
      throw DegenerateTargetError("debiasing parameter outside [0,1]");
  }
  if (d_y1_s0 < d_y0_s0 || d_y1_s1 < d_y0_s1)
    throw DegenerateTargetError("d_y1 < d_y0 within a group; targets are below chance level");
}

std::string to_string(TargetKind k) {
  switch (k) {
    case TargetKind::none: return "none";
    case TargetKind::positive_rate: return "positive_rate";
    case TargetKind::tpr_tnr: return "tpr_tnr";
  }
  return "?";
}

std::string to_string(PrStrategy s) {
  switch (s) {
    case PrStrategy::explicit_value: return "explicit";
    case PrStrategy::average: return "avg";
    case PrStrategy::minimum: return "min";
    case PrStrategy::maximum: return "max";
  }
  return "?";
}

TargetSpec TargetSpec::positive_rate(double value) {
  TargetSpec t;
  t.kind = TargetKind::positive_rate;
  t.pr_strategy = PrStrategy::explicit_value;
  t.pr_value = value;
  t.validate();
  return t;
}

TargetSpec TargetSpec::positive_rate(PrStrategy strategy) {
  TargetSpec t;
  t.kind = TargetKind::positive_rate;
  t.pr_strategy = strategy;
  return t;
}

TargetSpec TargetSpec::tpr_tnr(double tpr, std::optional<double> tnr) {
  TargetSpec t;
  t.kind = TargetKind::tpr_tnr;
  t.tpr_value = tpr;
  t.tnr_value = tnr;
  t.validate();
  return t;
}

bool TargetSpec::resolved() const {
  switch (kind) {
    case TargetKind::none: return true;
    case TargetKind::positive_rate:
      return pr_strategy == PrStrategy::explicit_value && pr_value.has_value();
    case TargetKind::tpr_tnr: return tnr_value.has_value();
  }
  return false;
}

void TargetSpec::validate() const {
  switch (kind) {
    case TargetKind::none:
      return;
    case TargetKind::positive_rate:
      if (pr_strategy == PrStrategy::explicit_value) {
        if (!pr_value) throw TargetOutOfRangeError("positive-rate target missing a value");
        if (!(*pr_value > 0.0 && *pr_value < 1.0))
          throw TargetOutOfRangeError("positive-rate target must be in (0,1), got " +
                                      std::to_string(*pr_value));
      }
      return;
    case TargetKind::tpr_tnr:
      if (!(tpr_value > 0.0 && tpr_value <= 1.0))
        throw TargetOutOfRangeError("TPR target must be in (0,1], got " +
                                    std::to_string(tpr_value));
      if (tnr_value && !(*tnr_value > 0.0 && *tnr_value <= 1.0))
        throw TargetOutOfRangeError("TNR target must be in (0,1], got " +
                                    std::to_string(*tnr_value));
      return;
  }
}

}  // namespace fairlr
