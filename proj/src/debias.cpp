#include "fairlr/debias.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fairlr {

namespace {

void check_prob_open(double v, const char* name) {
  if (!(std::isfinite(v) && v > 0.0 && v < 1.0))
    throw TargetOutOfRangeError(std::string(name) + " must be in (0,1), got " + std::to_string(v));
}

void check_prob_half_open(double v, const char* name) {
  if (!(std::isfinite(v) && v > 0.0 && v <= 1.0))
    throw TargetOutOfRangeError(std::string(name) + " must be in (0,1], got " + std::to_string(v));
}

}  // namespace

GroupRates estimate_biased_rates(const Dataset& ds) {
  std::array<std::int64_t, 2> n{0, 0};
  std::array<std::int64_t, 2> pos{0, 0};
  for (const auto& ex : ds.examples) {
    ++n[group_index(ex.group)];
    pos[group_index(ex.group)] += ex.label;
  }
  for (int g = 0; g < 2; ++g) {
    if (n[g] == 0) throw EmptyGroupError("group " + std::to_string(g) + " has no examples");
    if (pos[g] == 0 || pos[g] == n[g])
      throw DegenerateLabelsError("group " + std::to_string(g) + " has a degenerate rate " +
                                  std::to_string(pos[g]) + "/" + std::to_string(n[g]));
  }
  GroupRates rates;
  rates.p0 = static_cast<double>(pos[0]) / static_cast<double>(n[0]);
  rates.p1 = static_cast<double>(pos[1]) / static_cast<double>(n[1]);
  rates.n0 = n[0];
  rates.n1 = n[1];
  rates.validate();
  return rates;
}

PrResolution resolve_pr_target(const GroupRates& rates, PrStrategy strategy,
                               std::optional<double> explicit_value) {
  rates.validate();
  PrResolution out;
  out.strategy = strategy;
  out.source = rates;
  switch (strategy) {
    case PrStrategy::explicit_value:
      if (!explicit_value) throw TargetOutOfRangeError("explicit positive-rate target missing");
      check_prob_open(*explicit_value, "positive-rate target");
      out.resolved_pr = *explicit_value;
      return out;
    case PrStrategy::average:
      out.resolved_pr = (rates.p0 + rates.p1) / 2.0;
      return out;
    case PrStrategy::minimum:
      out.resolved_pr = std::min(rates.p0, rates.p1);
      return out;
    case PrStrategy::maximum:
      out.resolved_pr = std::max(rates.p0, rates.p1);
      return out;
  }
  throw ConfigError("unknown positive-rate strategy");
}

PrResolution resolve_pr_target(const GroupRates& rates, const TargetSpec& target) {
  if (target.kind != TargetKind::positive_rate)
    throw ConfigError("resolve_pr_target called with a non positive-rate spec");
  return resolve_pr_target(rates, target.pr_strategy, target.pr_value);
}

GroupDebias debias_for_positive_rate(double pr_target, double biased_rate_p) {
  check_prob_open(pr_target, "positive-rate target");
  check_prob_open(biased_rate_p, "biased acceptance rate");

  GroupDebias d;
  if (pr_target >= biased_rate_p) {
    // biased TPR maxed at 1: every observed positive stays positive.
    d.d_y1 = biased_rate_p / pr_target;
    d.d_y0 = 0.0;
  } else {
    // biased TNR maxed at 1: every observed negative stays negative.
    d.d_y1 = 1.0;
    d.d_y0 = (biased_rate_p - pr_target) / (1.0 - pr_target);
  }
  return d;
}

GroupDebias debias_for_tpr_tnr(double tpr_target, double tnr_target, double biased_rate_p) {
  check_prob_half_open(tpr_target, "TPR target");
  check_prob_half_open(tnr_target, "TNR target");
  check_prob_open(biased_rate_p, "biased acceptance rate");

  const double q1 = (1.0 - tnr_target) * (1.0 - biased_rate_p) + tpr_target * biased_rate_p;
  if (!(q1 > 0.0 && q1 < 1.0))
    throw DegenerateTargetError("induced positive rate q1=" + std::to_string(q1) +
                                " outside (0,1)");
  if (tpr_target + tnr_target < 1.0)
    throw DegenerateTargetError("TPR + TNR below chance level (" + std::to_string(tpr_target) +
                                " + " + std::to_string(tnr_target) + " < 1)");

  GroupDebias d;
  d.d_y1 = tpr_target * biased_rate_p / q1;
  d.d_y0 = biased_rate_p * (1.0 - tpr_target) / (1.0 - q1);
  return d;
}

TnrSelection select_target_tnr(double baseline_tnr_s0, double baseline_tnr_s1) {
  check_prob_half_open(baseline_tnr_s0, "baseline TNR (s=0)");
  check_prob_half_open(baseline_tnr_s1, "baseline TNR (s=1)");
  TnrSelection sel;
  sel.tnr_by_group = {baseline_tnr_s0, baseline_tnr_s1};
  sel.selected_tnr = std::min(baseline_tnr_s0, baseline_tnr_s1);
  return sel;
}

DebiasingParams build_params(const TargetSpec& target, const GroupRates& rates) {
  rates.validate();
  target.validate();
  if (!target.resolved())
    throw ConfigError("build_params requires a resolved target (no strategy tags, no auto TNR)");

  DebiasingParams params = DebiasingParams::identity();
  switch (target.kind) {
    case TargetKind::none:
      break;
    case TargetKind::positive_rate: {
      const GroupDebias d0 = debias_for_positive_rate(*target.pr_value, rates.p0);
      const GroupDebias d1 = debias_for_positive_rate(*target.pr_value, rates.p1);
      params = {d0.d_y0, d0.d_y1, d1.d_y0, d1.d_y1};
      break;
    }
    case TargetKind::tpr_tnr: {
      const GroupDebias d0 = debias_for_tpr_tnr(target.tpr_value, *target.tnr_value, rates.p0);
      const GroupDebias d1 = debias_for_tpr_tnr(target.tpr_value, *target.tnr_value, rates.p1);
      params = {d0.d_y0, d0.d_y1, d1.d_y0, d1.d_y1};
      break;
    }
  }
  params.validate();
  return params;
}

double consistency_residual(const DebiasingParams& params, const TargetSpec& target,
                            const GroupRates& rates) {
  if (!target.resolved()) throw ConfigError("consistency_residual requires a resolved target");

  double worst = 0.0;
  for (Group g : {Group::s0, Group::s1}) {
    const double p = rates.rate(g);
    double q1 = 0.0;
    switch (target.kind) {
      case TargetKind::none:
        q1 = p;
        break;
      case TargetKind::positive_rate:
        q1 = *target.pr_value;
        break;
      case TargetKind::tpr_tnr:
        q1 = (1.0 - *target.tnr_value) * (1.0 - p) + target.tpr_value * p;
        break;
    }
    const double reconstructed = params.d_y1(g) * q1 + params.d_y0(g) * (1.0 - q1);
    worst = std::max(worst, std::abs(reconstructed - p));
  }
  return worst;
}

}  // namespace fairlr
