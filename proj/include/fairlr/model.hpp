#pragma once
// Logistic-regression classifier trained by maximizing the likelihood of the
// observed labels after the fair score has been mapped through the debiasing
// parameters: P(y=1|x,s) = d_y0 * (1-cbar) + d_y1 * cbar with
// cbar = sigmoid(<x,theta> + theta0). Identity parameters (0,1,0,1) make
// this the ordinary logistic-regression objective. Optimization is
// epoch-wise minibatch Adam with L2 on the weights (bias unpenalized).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairlr/core.hpp"
#include "fairlr/data.hpp"

namespace fairlr {

struct ModelParams {
  std::vector<double> weights;
  double bias = 0.0;
};

struct TrainConfig {
  int epochs = 500;
  int batch_size = 0;  // 0 = full batch
  double learning_rate = 1e-2;
  double l2 = 0.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  bool use_s = false;

  void validate() const;
};

struct Model {
  ModelParams params;
  DebiasingParams debias;
  Normalizer norm;
  std::vector<std::string> feature_names;  // includes the appended "s" column when use_s
  bool use_s = false;
  TrainConfig config;
  double final_train_loss = 0.0;
  std::vector<double> epoch_losses;  // in-memory only, not serialized

  std::size_t input_dim() const { return params.weights.size(); }
  std::size_t raw_dim() const { return input_dim() - (use_s ? 1 : 0); }
};

// Numerically stable logistic function; no overflow for any finite input.
double sigmoid(double z);

// sigmoid(<x, weights> + bias)
double score(const ModelParams& params, std::span<const double> x);

// Affine score mapping P(y=1|x,s) = slope_s * cbar + offset_s; identity
// parameters return cbar bit-exactly.
double marginalize(double cbar, Group s, const DebiasingParams& debias);

// Mean negative log of the observed-label likelihood, clamped to
// [1e-12, 1-1e-12] before the log, plus l2 * |weights|^2.
double nll_loss(const std::vector<LabeledExample>& batch, const ModelParams& params,
                const DebiasingParams& debias, double l2);

struct Gradient {
  std::vector<double> weights;
  double bias = 0.0;
};

// Analytic gradient of nll_loss over (weights, bias). Zero contribution from
// examples whose likelihood sits in a clamped region.
Gradient grad_nll(const std::vector<LabeledExample>& batch, const ModelParams& params,
                  const DebiasingParams& debias, double l2);

struct AdamState {
  std::vector<double> m_w;
  std::vector<double> v_w;
  double m_b = 0.0;
  double v_b = 0.0;
  std::int64_t step = 0;

  static AdamState init(std::size_t dim);
};

// One bias-corrected Adam update; deterministic given inputs.
void adam_step(AdamState& state, ModelParams& params, std::span<const double> grad_w,
               double grad_b, const TrainConfig& config);

// Full training pipeline: optional s-augmentation, z-score normalization
// fitted on this data, zero-initialized parameters, seeded epoch-wise
// minibatch Adam. Identical (dataset, debias, config) produce bit-identical
// models. Throws NonFinite if the loss leaves the reals.
Model train(const Dataset& dataset, const DebiasingParams& debias, const TrainConfig& config);

struct Prediction {
  int label = 0;      // 1 iff score > 0.5
  double score = 0.0;  // P(ybar=1|x)
};

// Applies stored normalization to a raw feature vector and thresholds the
// fair score at 0.5 (ties map to 0). `s` is required iff the model uses it.
Prediction predict(const Model& model, std::span<const double> x,
                   std::optional<Group> s = std::nullopt);

// Single structured text file; all real fields round-trip bit-exactly.
std::string model_to_json_string(const Model& model);
Model model_from_json_string(const std::string& text);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace fairlr
