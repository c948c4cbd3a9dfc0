#include "fairlr/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_detail.hpp"

namespace fairlr {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void RunConfig::validate() const {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("test fraction must be in (0,1)");
  if (data_path.empty()) throw ConfigError("no input data path");
  if (schema_path.has_value() == recipe.has_value())
    throw ConfigError("exactly one of --schema and --recipe is required");
  if (recipe && *recipe != "adult" && *recipe != "compas")
    throw ConfigError("recipe must be 'adult' or 'compas', got '" + *recipe + "'");
  if (out_dir.empty()) throw ConfigError("no output directory");
  train.validate();
  target.validate();
}

void SweepGrid::validate() const {
  if (points.empty()) throw ConfigError("sweep grid is empty");
  for (const auto& t : points) t.validate();
}

TargetSpec ResolvedTargetInfo::as_spec() const {
  switch (kind) {
    case TargetKind::none:
      return TargetSpec::none();
    case TargetKind::positive_rate:
      return TargetSpec::positive_rate(*pr);
    case TargetKind::tpr_tnr:
      return TargetSpec::tpr_tnr(*tpr, *tnr);
  }
  throw ConfigError("unresolved target");
}

Dataset load_input(const RunConfig& cfg) {
  Schema schema;
  if (cfg.schema_path) {
    schema = Schema::load(*cfg.schema_path);
  } else if (*cfg.recipe == "adult") {
    schema = adult_recipe(cfg.sensitive);
  } else {
    schema = propublica_recipe(cfg.sensitive);
  }
  return load_csv(cfg.data_path, schema);
}

FairnessReport evaluate_model(const Model& model, const Dataset& ds) {
  validate_dataset(ds);
  std::vector<std::string> expected(model.feature_names.begin(),
                                    model.feature_names.end() - (model.use_s ? 1 : 0));
  if (ds.feature_names != expected) {
    std::string detail = "model expects " + std::to_string(expected.size()) +
                         " features, data has " + std::to_string(ds.feature_names.size());
    throw FeatureMismatchError(detail);
  }

  std::vector<int> predictions, labels;
  std::vector<Group> groups;
  predictions.reserve(ds.size());
  for (const auto& ex : ds.examples) {
    predictions.push_back(predict(model, ex.features, ex.group).label);
    labels.push_back(ex.label);
    groups.push_back(ex.group);
  }
  return fairness_report(confusion_by_group(predictions, labels, groups));
}

namespace {

constexpr std::uint64_t kValidationSeedSalt = 0xD1B54A32D192ED03ULL;

void write_text_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

ordered_json rates_to_json(const GroupRates& r) {
  return {{"p0", r.p0}, {"p1", r.p1}, {"n0", r.n0}, {"n1", r.n1}};
}

ordered_json debias_to_json(const DebiasingParams& d) {
  return {{"d_y0_s0", d.d_y0_s0},
          {"d_y1_s0", d.d_y1_s0},
          {"d_y0_s1", d.d_y0_s1},
          {"d_y1_s1", d.d_y1_s1}};
}

ordered_json opt_to_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json target_spec_to_json(const TargetSpec& t) {
  ordered_json j;
  j["kind"] = to_string(t.kind);
  if (t.kind == TargetKind::positive_rate) {
    j["pr_strategy"] = to_string(t.pr_strategy);
    j["pr_value"] = opt_to_json(t.pr_value);
  } else if (t.kind == TargetKind::tpr_tnr) {
    j["tpr"] = t.tpr_value;
    j["tnr"] = t.tnr_value ? ordered_json(*t.tnr_value) : ordered_json("auto");
  }
  return j;
}

ordered_json resolved_to_json(const ResolvedTargetInfo& r) {
  ordered_json j;
  j["kind"] = to_string(r.kind);
  if (r.kind == TargetKind::positive_rate) {
    j["pr"] = opt_to_json(r.pr);
    j["pr_strategy"] = r.pr_strategy ? ordered_json(*r.pr_strategy) : ordered_json(nullptr);
  } else if (r.kind == TargetKind::tpr_tnr) {
    j["tpr"] = opt_to_json(r.tpr);
    j["tnr"] = opt_to_json(r.tnr);
    j["tnr_auto"] = r.tnr_auto;
    if (r.tnr_auto) {
      j["baseline_tnr_s0"] = opt_to_json(r.baseline_tnr_s0);
      j["baseline_tnr_s1"] = opt_to_json(r.baseline_tnr_s1);
    }
  }
  return j;
}

ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["data"] = cfg.data_path;
  if (cfg.schema_path) j["schema"] = *cfg.schema_path;
  if (cfg.recipe) j["recipe"] = *cfg.recipe;
  j["sensitive"] = to_string(cfg.sensitive);
  j["target"] = target_spec_to_json(cfg.target);
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"l2", cfg.train.l2},
                {"adam_beta1", cfg.train.adam_beta1},
                {"adam_beta2", cfg.train.adam_beta2},
                {"adam_eps", cfg.train.adam_eps},
                {"use_s", cfg.train.use_s}};
  j["test_fraction"] = cfg.test_fraction;
  j["repeats"] = cfg.repeats;
  j["base_seed"] = cfg.base_seed;
  j["paper_protocol"] = cfg.paper_protocol;
  return j;
}

ordered_json repeat_to_json(const RepeatResult& r) {
  ordered_json j;
  j["seed"] = r.seed;
  j["rates"] = rates_to_json(r.rates);
  j["resolved_target"] = resolved_to_json(r.resolved);
  j["debias"] = debias_to_json(r.debias);
  j["consistency_residual"] = r.consistency;
  j["final_train_loss"] = r.final_train_loss;
  j["report"] = fairness_report_to_json(r.report);
  if (r.baseline_eval) j["baseline_eval"] = fairness_report_to_json(*r.baseline_eval);
  return j;
}

// One train/evaluate repetition. `identity` forces the unfair baseline.
RepeatResult run_repeat(const Dataset& full, const RunConfig& cfg, std::uint64_t seed,
                        bool identity, Model* model_out) {
  RepeatResult result;
  result.seed = seed;

  auto [rest, test] = split(full, SplitSpec{cfg.test_fraction, seed});

  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = seed;

  const bool want_auto_tnr =
      !identity && cfg.target.kind == TargetKind::tpr_tnr && !cfg.target.tnr_value;

  Dataset train_part = std::move(rest);
  std::optional<Dataset> validation;
  if (want_auto_tnr && !cfg.paper_protocol) {
    // carve a validation split out of the training portion so the TNR
    // selection never sees the test set
    auto [tr, val] = split(train_part, SplitSpec{cfg.test_fraction, seed ^ kValidationSeedSalt});
    train_part = std::move(tr);
    validation = std::move(val);
  }

  result.rates = estimate_biased_rates(train_part);

  if (identity || cfg.target.kind == TargetKind::none) {
    result.resolved.kind = TargetKind::none;
  } else if (cfg.target.kind == TargetKind::positive_rate) {
    const PrResolution res = resolve_pr_target(result.rates, cfg.target);
    result.resolved.kind = TargetKind::positive_rate;
    result.resolved.pr = res.resolved_pr;
    result.resolved.pr_strategy = to_string(res.strategy);
  } else {
    result.resolved.kind = TargetKind::tpr_tnr;
    result.resolved.tpr = cfg.target.tpr_value;
    if (cfg.target.tnr_value) {
      result.resolved.tnr = *cfg.target.tnr_value;
    } else {
      const Model baseline = train(train_part, DebiasingParams::identity(), train_cfg);
      const Dataset& eval_on = cfg.paper_protocol ? test : *validation;
      const FairnessReport base_report = evaluate_model(baseline, eval_on);
      result.baseline_eval = base_report;
      if (!base_report.tnr[0] || !base_report.tnr[1])
        throw DataError("baseline TNR undefined in a group; cannot auto-select target TNR");
      const TnrSelection sel = select_target_tnr(*base_report.tnr[0], *base_report.tnr[1]);
      result.resolved.tnr = sel.selected_tnr;
      result.resolved.tnr_auto = true;
      result.resolved.baseline_tnr_s0 = sel.tnr_by_group[0];
      result.resolved.baseline_tnr_s1 = sel.tnr_by_group[1];
    }
  }

  const TargetSpec resolved_spec = result.resolved.as_spec();
  result.debias = build_params(resolved_spec, result.rates);
  result.consistency = consistency_residual(result.debias, resolved_spec, result.rates);

  Model model = train(train_part, result.debias, train_cfg);
  result.final_train_loss = model.final_train_loss;
  result.report = evaluate_model(model, test);

  if (identity) result.baseline_eval = result.report;
  if (model_out) *model_out = std::move(model);
  return result;
}

CommandOutput run_command(const Dataset& full, const RunConfig& cfg, bool identity,
                          bool keep_models) {
  CommandOutput out;
  std::vector<FairnessReport> reports;
  for (int k = 0; k < cfg.repeats; ++k) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(k);
    Model model;
    out.repeats.push_back(run_repeat(full, cfg, seed, identity, keep_models ? &model : nullptr));
    if (keep_models) out.models.push_back(std::move(model));
    reports.push_back(out.repeats.back().report);
  }
  out.aggregate = aggregate_runs(reports);
  return out;
}

ordered_json command_output_to_json(const RunConfig& cfg, const std::string& command,
                                    const CommandOutput& out) {
  ordered_json j;
  j["format_version"] = 1;
  j["command"] = command;
  j["config"] = config_to_json(cfg);
  j["repeats"] = ordered_json::array();
  for (const auto& r : out.repeats) j["repeats"].push_back(repeat_to_json(r));
  j["aggregate"] = aggregate_report_to_json(out.aggregate);
  return j;
}

}  // namespace

CommandOutput cmd_baseline(const RunConfig& cfg) {
  RunConfig base_cfg = cfg;
  base_cfg.target = TargetSpec::none();
  base_cfg.validate();

  const Dataset full = load_input(base_cfg);
  CommandOutput out = run_command(full, base_cfg, /*identity=*/true, /*keep_models=*/false);

  ordered_json rates_file;
  rates_file["format_version"] = 1;
  rates_file["command"] = "baseline";
  rates_file["config"] = config_to_json(base_cfg);
  rates_file["repeats"] = ordered_json::array();
  for (const auto& r : out.repeats) {
    ordered_json entry;
    entry["seed"] = r.seed;
    entry["rates"] = rates_to_json(r.rates);
    entry["eval_split"] = "test";
    entry["tpr_s0"] = opt_to_json(r.report.tpr[0]);
    entry["tpr_s1"] = opt_to_json(r.report.tpr[1]);
    entry["tnr_s0"] = opt_to_json(r.report.tnr[0]);
    entry["tnr_s1"] = opt_to_json(r.report.tnr[1]);
    rates_file["repeats"].push_back(entry);
  }
  write_text_file(fs::path(cfg.out_dir) / "baseline_rates.json", rates_file.dump(2) + "\n");
  write_text_file(fs::path(cfg.out_dir) / "baseline_report.json",
                  command_output_to_json(base_cfg, "baseline", out).dump(2) + "\n");
  return out;
}

CommandOutput cmd_train(const RunConfig& cfg) {
  cfg.validate();
  const Dataset full = load_input(cfg);
  CommandOutput out = run_command(full, cfg, /*identity=*/false, cfg.write_models);

  fs::create_directories(cfg.out_dir);
  for (std::size_t k = 0; k < out.models.size(); ++k)
    save_model(out.models[k],
               (fs::path(cfg.out_dir) / ("model_r" + std::to_string(k) + ".json")).string());
  write_text_file(fs::path(cfg.out_dir) / "report.json",
                  command_output_to_json(cfg, "train", out).dump(2) + "\n");
  return out;
}

std::vector<SweepPoint> cmd_sweep(const RunConfig& cfg, const SweepGrid& grid) {
  grid.validate();
  RunConfig point_cfg = cfg;
  point_cfg.target = grid.points.front();
  point_cfg.validate();

  const Dataset full = load_input(cfg);

  std::vector<SweepPoint> points;
  ordered_json j;
  j["format_version"] = 1;
  j["command"] = "sweep";
  j["config"] = config_to_json(cfg);
  j["grid"] = ordered_json::array();

  for (const auto& target : grid.points) {
    point_cfg.target = target;
    point_cfg.validate();
    CommandOutput out = run_command(full, point_cfg, /*identity=*/false, /*keep_models=*/false);

    ordered_json entry;
    entry["target"] = target_spec_to_json(target);
    entry["repeats"] = ordered_json::array();
    for (const auto& r : out.repeats) entry["repeats"].push_back(repeat_to_json(r));
    entry["aggregate"] = aggregate_report_to_json(out.aggregate);
    j["grid"].push_back(entry);

    // partial results survive an interrupted sweep
    write_text_file(fs::path(cfg.out_dir) / "sweep.json", j.dump(2) + "\n");
    points.push_back({target, std::move(out)});
  }
  return points;
}

SynthResult cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  const SynthSpec spec = SynthSpec::load(spec_path);
  SynthResult synth = gen_synthetic(spec);

  std::ostringstream csv;
  write_synth_csv(synth, csv);
  write_text_file(fs::path(out_dir) / "synth.csv", csv.str());

  ordered_json truth;
  truth["format_version"] = 1;
  truth["command"] = "synth";
  truth["spec"] = ordered_json::parse(spec.to_json_string());
  truth["realized"] = {
      {"biased_rate", synth.biased_rate},
      {"true_rate", synth.true_rate},
      {"flip_fraction", synth.flip_fraction},
  };
  truth["true_labels"] = synth.true_labels;
  write_text_file(fs::path(out_dir) / "synth_truth.json", truth.dump(2) + "\n");
  return synth;
}

FairnessReport cmd_eval(const std::string& model_path, const RunConfig& data_cfg) {
  if (data_cfg.out_dir.empty()) throw ConfigError("no output directory");
  const Model model = load_model(model_path);
  RunConfig cfg = data_cfg;
  cfg.validate();
  const Dataset ds = load_input(cfg);
  const FairnessReport report = evaluate_model(model, ds);

  ordered_json j;
  j["format_version"] = 1;
  j["command"] = "eval";
  j["model"] = model_path;
  j["data"] = cfg.data_path;
  j["debias"] = debias_to_json(model.debias);
  j["report"] = fairness_report_to_json(report);
  write_text_file(fs::path(cfg.out_dir) / "eval.json", j.dump(2) + "\n");
  return report;
}

}  // namespace fairlr
