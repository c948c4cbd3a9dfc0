#pragma once
// Derivation of debiasing parameters from target rates. Given the biased
// acceptance rate p = P(y=1|s) of a group and a target rate, these routines
// produce the pair (d_y0, d_y1) = (P(y=1|ybar=0,s), P(y=1|ybar=1,s)) such
// that the law of total probability d_y1*q1 + d_y0*(1-q1) = p holds, where
// q1 = P(ybar=1|s) is the target positive rate (or the rate induced by a
// TPR/TNR pair). The slack left by that constraint is spent on maximizing
// accuracy against the biased labels.

#include <array>
#include <optional>

#include "fairlr/core.hpp"

namespace fairlr {

// Outcome of turning a positive-rate strategy tag into a number.
struct PrResolution {
  double resolved_pr = 0.0;
  PrStrategy strategy = PrStrategy::explicit_value;
  GroupRates source;
};

// Choice of the shared target TNR from per-group baseline observations.
struct TnrSelection {
  std::array<double, 2> tnr_by_group{0.0, 0.0};
  double selected_tnr = 0.0;  // min of the two
};

// Per-group result of a targeting computation.
struct GroupDebias {
  double d_y0 = 0.0;
  double d_y1 = 1.0;
};

// p_i = (count of y=1 in group i) / (count in group i). Throws
// DegenerateLabels when a computed rate is 0 or 1.
GroupRates estimate_biased_rates(const Dataset& ds);

// avg -> (p0+p1)/2, min/max -> extreme of the two rates, explicit -> the
// value after a range check.
PrResolution resolve_pr_target(const GroupRates& rates, PrStrategy strategy,
                               std::optional<double> explicit_value = std::nullopt);
PrResolution resolve_pr_target(const GroupRates& rates, const TargetSpec& target);

// Positive-rate targeting for one group. If pr_target >= p the positive
// branch caps d_y1 at p/pr_target and zeroes d_y0; otherwise d_y1 is 1 and
// d_y0 absorbs the surplus (p - pr_target)/(1 - pr_target).
GroupDebias debias_for_positive_rate(double pr_target, double biased_rate_p);

// TPR/TNR targeting for one group. q1 = (1-tnr)(1-p) + tpr*p must lie in
// (0,1) and the pair must be at least chance level (tpr + tnr >= 1), else
// DegenerateTarget.
GroupDebias debias_for_tpr_tnr(double tpr_target, double tnr_target, double biased_rate_p);

// Shared target TNR = min of the two achievable baseline TNRs.
TnrSelection select_target_tnr(double baseline_tnr_s0, double baseline_tnr_s1);

// Applies the appropriate per-group targeting for a fully resolved spec.
// kind none yields the identity parameters (0,1,0,1).
DebiasingParams build_params(const TargetSpec& target, const GroupRates& rates);

// max over groups of |d_y1*q1 + d_y0*(1-q1) - p_i|; outputs of build_params
// satisfy this below 1e-12.
double consistency_residual(const DebiasingParams& params, const TargetSpec& target,
                            const GroupRates& rates);

}  // namespace fairlr
