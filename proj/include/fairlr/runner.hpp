#pragma once
// Experiment orchestration behind the CLI: repeated train/evaluate runs with
// per-repeat seeds, target-rate resolution against the training split,
// baseline runs, TNR auto-selection, sweeps over target grids, and the
// structured output files. All outputs are deterministic given the
// configuration; identical invocations produce byte-identical files.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairlr/core.hpp"
#include "fairlr/data.hpp"
#include "fairlr/debias.hpp"
#include "fairlr/metrics.hpp"
#include "fairlr/model.hpp"

namespace fairlr {

struct RunConfig {
  std::string data_path;
  std::optional<std::string> schema_path;  // exactly one of schema_path / recipe
  std::optional<std::string> recipe;       // "adult" | "compas"
  SensitiveAttr sensitive = SensitiveAttr::race;

  TargetSpec target;
  TrainConfig train;
  double test_fraction = 0.3;
  int repeats = 1;
  std::uint64_t base_seed = 0;  // repeat k runs with seed base_seed + k
  std::string out_dir;
  bool paper_protocol = false;  // measure baseline TNRs on the test split
  bool write_models = true;

  void validate() const;
};

struct SweepGrid {
  std::vector<TargetSpec> points;

  void validate() const;
};

// Numeric targets actually used for one repeat, echoed into every output.
struct ResolvedTargetInfo {
  TargetKind kind = TargetKind::none;
  std::optional<double> pr;
  std::optional<std::string> pr_strategy;
  std::optional<double> tpr;
  std::optional<double> tnr;
  bool tnr_auto = false;
  std::optional<double> baseline_tnr_s0;
  std::optional<double> baseline_tnr_s1;

  TargetSpec as_spec() const;
};

struct RepeatResult {
  std::uint64_t seed = 0;
  GroupRates rates;  // biased acceptance rates on the training portion
  ResolvedTargetInfo resolved;
  DebiasingParams debias;
  double consistency = 0.0;
  double final_train_loss = 0.0;
  FairnessReport report;                    // on the held-out test split
  std::optional<FairnessReport> baseline_eval;  // identity-model observations, when computed
};

struct CommandOutput {
  std::vector<RepeatResult> repeats;
  AggregateReport aggregate;
  std::vector<Model> models;  // one per repeat when kept
};

struct SweepPoint {
  TargetSpec target;
  CommandOutput output;
};

// Loads the configured dataset (schema file or named recipe).
Dataset load_input(const RunConfig& cfg);

// Evaluates a stored model on an encoded dataset; throws FeatureMismatch
// when the feature names disagree.
FairnessReport evaluate_model(const Model& model, const Dataset& ds);

// Identity-debias runs; writes baseline_rates.json and baseline_report.json.
CommandOutput cmd_baseline(const RunConfig& cfg);

// Fair runs; writes report.json and model_r<k>.json per repeat.
CommandOutput cmd_train(const RunConfig& cfg);

// One cmd_train pipeline per grid point; writes sweep.json, flushed after
// every point.
std::vector<SweepPoint> cmd_sweep(const RunConfig& cfg, const SweepGrid& grid);

// Generates a synthetic dataset from a spec file; writes synth.csv and
// synth_truth.json.
SynthResult cmd_synth(const std::string& spec_path, const std::string& out_dir);

// Evaluates a stored model on a dataset; writes eval.json.
FairnessReport cmd_eval(const std::string& model_path, const RunConfig& data_cfg);

}  // namespace fairlr
