#include "fairlr/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairlr/kernels.hpp"
#include "fairlr/rng.hpp"

namespace fairlr {

using ordered_json = nlohmann::ordered_json;

namespace {
constexpr double kLikelihoodClamp = 1e-12;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 0) throw ConfigError("batch size must be >= 0 (0 = full batch)");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(l2 >= 0.0)) throw ConfigError("l2 must be nonnegative");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
    throw ConfigError("adam betas must lie in (0,1)");
  if (!(adam_eps > 0.0)) throw ConfigError("adam eps must be positive");
}

double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double score(const ModelParams& params, std::span<const double> x) {
  if (x.size() != params.weights.size())
    throw DimMismatchError("score: input arity " + std::to_string(x.size()) +
                           " != weight arity " + std::to_string(params.weights.size()));
  return sigmoid(kernels::dot(params.weights, x) + params.bias);
}

double marginalize(double cbar, Group s, const DebiasingParams& debias) {
  return debias.slope(s) * cbar + debias.offset(s);
}

namespace {

// Row-major design matrix view of a batch; training flattens once and works
// here, the public batch operations flatten per call.
struct FlatBatch {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> x;      // n * d
  std::vector<std::int8_t> y;
  std::vector<std::uint8_t> s;
};

FlatBatch flatten(const std::vector<LabeledExample>& batch, std::size_t dim) {
  FlatBatch f;
  f.n = batch.size();
  f.d = dim;
  f.x.resize(f.n * f.d);
  f.y.resize(f.n);
  f.s.resize(f.n);
  for (std::size_t i = 0; i < f.n; ++i) {
    if (batch[i].features.size() != dim)
      throw DimMismatchError("batch example " + std::to_string(i) + " has arity " +
                             std::to_string(batch[i].features.size()) + ", expected " +
                             std::to_string(dim));
    std::copy(batch[i].features.begin(), batch[i].features.end(), f.x.begin() + i * f.d);
    f.y[i] = static_cast<std::int8_t>(batch[i].label);
    f.s[i] = static_cast<std::uint8_t>(group_index(batch[i].group));
  }
  return f;
}

// Mean NLL over the indexed rows (all rows when idx is empty) plus the L2
// term; optionally accumulates the analytic gradient.
double eval_nll(const FlatBatch& data, std::span<const std::size_t> idx,
                const ModelParams& params, const DebiasingParams& debias, double l2,
                std::vector<double>* grad_w, double* grad_b) {
  const std::size_t n = idx.empty() ? data.n : idx.size();
  if (n == 0) throw EmptyBatchError("loss over an empty batch");
  const std::size_t d = data.d;
  const std::span<const double> w(params.weights);

  const double slope[2] = {debias.slope(Group::s0), debias.slope(Group::s1)};
  const double offset[2] = {debias.offset(Group::s0), debias.offset(Group::s1)};

  if (grad_w) {
    grad_w->assign(d, 0.0);
    *grad_b = 0.0;
  }

  double loss_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = idx.empty() ? k : idx[k];
    const std::span<const double> row(data.x.data() + i * d, d);
    const double z = kernels::dot(w, row) + params.bias;
    const double c = sigmoid(z);
    const int g = data.s[i];
    const double p = slope[g] * c + offset[g];
    const double lik = data.y[i] ? p : 1.0 - p;
    const double clamped = std::clamp(lik, kLikelihoodClamp, 1.0 - kLikelihoodClamp);
    loss_sum += -std::log(clamped);

    if (grad_w) {
      // gradient of the clamped objective: zero where the clamp binds
      if (lik >= kLikelihoodClamp && lik <= 1.0 - kLikelihoodClamp) {
        const double sign = data.y[i] ? -1.0 : 1.0;
        const double coeff = sign * slope[g] * (c * (1.0 - c)) / lik;
        kernels::axpy(coeff, row, *grad_w);
        *grad_b += coeff;
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = loss_sum * inv_n;
  if (l2 != 0.0) loss += l2 * kernels::dot(w, w);
  if (grad_w) {
    for (std::size_t j = 0; j < d; ++j)
      (*grad_w)[j] = (*grad_w)[j] * inv_n + 2.0 * l2 * params.weights[j];
    *grad_b *= inv_n;
  }
  return loss;
}

}  // namespace

double nll_loss(const std::vector<LabeledExample>& batch, const ModelParams& params,
                const DebiasingParams& debias, double l2) {
  if (batch.empty()) throw EmptyBatchError("nll_loss on an empty batch");
  const FlatBatch f = flatten(batch, params.weights.size());
  return eval_nll(f, {}, params, debias, l2, nullptr, nullptr);
}

Gradient grad_nll(const std::vector<LabeledExample>& batch, const ModelParams& params,
                  const DebiasingParams& debias, double l2) {
  if (batch.empty()) throw EmptyBatchError("grad_nll on an empty batch");
  const FlatBatch f = flatten(batch, params.weights.size());
  Gradient g;
  eval_nll(f, {}, params, debias, l2, &g.weights, &g.bias);
  return g;
}

AdamState AdamState::init(std::size_t dim) {
  AdamState st;
  st.m_w.assign(dim, 0.0);
  st.v_w.assign(dim, 0.0);
  return st;
}

void adam_step(AdamState& state, ModelParams& params, std::span<const double> grad_w,
               double grad_b, const TrainConfig& config) {
  if (grad_w.size() != params.weights.size() || grad_w.size() != state.m_w.size())
    throw DimMismatchError("adam_step: gradient arity mismatch");

  state.step += 1;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  auto update = [&](double& m, double& v, double& p, double g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / corr1;
    const double v_hat = v / corr2;
    p -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
  };

  for (std::size_t j = 0; j < grad_w.size(); ++j)
    update(state.m_w[j], state.v_w[j], params.weights[j], grad_w[j]);
  update(state.m_b, state.v_b, params.bias, grad_b);
}

namespace {

Dataset append_sensitive_column(const Dataset& ds) {
  Dataset out = ds;
  out.dim = ds.dim + 1;
  out.feature_names.push_back("s");
  out.continuous.push_back(false);  // binary column, left unscaled
  for (auto& ex : out.examples)
    ex.features.push_back(static_cast<double>(group_index(ex.group)));
  return out;
}

}  // namespace

Model train(const Dataset& dataset, const DebiasingParams& debias, const TrainConfig& config) {
  config.validate();
  debias.validate();
  validate_dataset(dataset);

  const Dataset augmented = config.use_s ? append_sensitive_column(dataset) : dataset;
  const Normalizer norm = fit_normalizer(augmented);
  const Dataset prepared = apply_normalizer(norm, augmented);
  const FlatBatch data = flatten(prepared.examples, prepared.dim);

  Model model;
  model.params.weights.assign(data.d, 0.0);  // convex objective, zero init
  model.params.bias = 0.0;
  model.debias = debias;
  model.norm = norm;
  model.feature_names = prepared.feature_names;
  model.use_s = config.use_s;
  model.config = config;

  AdamState adam = AdamState::init(data.d);
  Rng rng(config.seed);

  const std::size_t n = data.n;
  const std::size_t batch =
      (config.batch_size == 0 || static_cast<std::size_t>(config.batch_size) >= n)
          ? n
          : static_cast<std::size_t>(config.batch_size);
  const bool minibatch = batch < n;

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;

  std::vector<double> grad_w(data.d, 0.0);
  double grad_b = 0.0;
  model.epoch_losses.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (minibatch) rng.shuffle(idx);
    double epoch_loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t end = std::min(begin + batch, n);
      const std::span<const std::size_t> slice(idx.data() + begin, end - begin);
      const double loss = eval_nll(data, slice, model.params, debias, config.l2, &grad_w, &grad_b);
      if (!std::isfinite(loss))
        throw NonFiniteError("loss diverged at epoch " + std::to_string(epoch));
      adam_step(adam, model.params, grad_w, grad_b, config);
      epoch_loss_sum += loss;
      ++n_batches;
    }
    model.epoch_losses.push_back(epoch_loss_sum / static_cast<double>(n_batches));
  }

  model.final_train_loss = eval_nll(data, {}, model.params, debias, config.l2, nullptr, nullptr);
  if (!std::isfinite(model.final_train_loss)) throw NonFiniteError("final loss is not finite");
  return model;
}

Prediction predict(const Model& model, std::span<const double> x, std::optional<Group> s) {
  if (model.use_s && !s)
    throw MissingSensitiveError("model was trained with s as an input feature");
  if (x.size() != model.raw_dim())
    throw DimMismatchError("predict: input arity " + std::to_string(x.size()) + ", expected " +
                           std::to_string(model.raw_dim()));

  std::vector<double> row(x.begin(), x.end());
  if (model.use_s) row.push_back(static_cast<double>(group_index(*s)));
  normalize_row(model.norm, row);

  Prediction out;
  out.score = score(model.params, row);
  out.label = out.score > 0.5 ? 1 : 0;
  return out;
}

std::string model_to_json_string(const Model& model) {
  for (double w : model.params.weights)
    if (!std::isfinite(w)) throw NonFiniteError("model weights are not finite");
  if (!std::isfinite(model.params.bias)) throw NonFiniteError("model bias is not finite");

  ordered_json j;
  j["format_version"] = 1;
  j["weights"] = model.params.weights;
  j["bias"] = model.params.bias;
  j["normalization"] = {{"mean", model.norm.mean}, {"scale", model.norm.scale}};
  j["feature_names"] = model.feature_names;
  j["use_s"] = model.use_s;
  j["debias"] = {{"d_y0_s0", model.debias.d_y0_s0},
                 {"d_y1_s0", model.debias.d_y1_s0},
                 {"d_y0_s1", model.debias.d_y0_s1},
                 {"d_y1_s1", model.debias.d_y1_s1}};
  j["config"] = {{"epochs", model.config.epochs},
                 {"batch_size", model.config.batch_size},
                 {"learning_rate", model.config.learning_rate},
                 {"l2", model.config.l2},
                 {"adam_beta1", model.config.adam_beta1},
                 {"adam_beta2", model.config.adam_beta2},
                 {"adam_eps", model.config.adam_eps},
                 {"seed", model.config.seed},
                 {"use_s", model.config.use_s}};
  j["final_train_loss"] = model.final_train_loss;
  return j.dump(2) + "\n";
}

Model model_from_json_string(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  Model m;
  try {
    if (j.at("format_version").get<int>() != 1)
      throw DataError("unsupported model format version");
    m.params.weights = j.at("weights").get<std::vector<double>>();
    m.params.bias = j.at("bias").get<double>();
    m.norm.mean = j.at("normalization").at("mean").get<std::vector<double>>();
    m.norm.scale = j.at("normalization").at("scale").get<std::vector<double>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.use_s = j.at("use_s").get<bool>();
    const auto& d = j.at("debias");
    m.debias = {d.at("d_y0_s0").get<double>(), d.at("d_y1_s0").get<double>(),
                d.at("d_y0_s1").get<double>(), d.at("d_y1_s1").get<double>()};
    const auto& c = j.at("config");
    m.config.epochs = c.at("epochs").get<int>();
    m.config.batch_size = c.at("batch_size").get<int>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.l2 = c.at("l2").get<double>();
    m.config.adam_beta1 = c.at("adam_beta1").get<double>();
    m.config.adam_beta2 = c.at("adam_beta2").get<double>();
    m.config.adam_eps = c.at("adam_eps").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.use_s = c.at("use_s").get<bool>();
    m.final_train_loss = j.at("final_train_loss").get<double>();
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(std::string("model file missing field: ") + e.what());
  }
  if (m.params.weights.size() != m.norm.mean.size() ||
      m.params.weights.size() != m.norm.scale.size() ||
      m.params.weights.size() != m.feature_names.size())
    throw DimMismatchError("model file arity mismatch between weights, normalization and names");
  return m;
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file " + path);
  out << model_to_json_string(model);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json_string(buf.str());
}

}  // namespace fairlr
