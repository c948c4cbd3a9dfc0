// Command-line front end: baseline / train / eval / sweep / synth.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairlr/kernels.hpp"
#include "fairlr/runner.hpp"

namespace {

using namespace fairlr;

struct CommonArgs {
  std::string data;
  std::string schema;
  std::string recipe;
  std::string sensitive = "race";
  std::string fairness = "none";
  std::string target_pr;   // float | avg | min | max; comma list for sweep
  std::string target_tpr;  // float; comma list for sweep
  std::string target_tnr = "auto";
  bool use_s = false;
  int epochs = 500;
  std::string batch_size = "full";
  double lr = 1e-2;
  double l2 = -1.0;  // <0 = recipe default (adult 0.00035, compas 0.0024), else 0
  double test_fraction = 0.3;
  int repeats = 1;
  std::uint64_t seed = 0;
  std::string out;
  bool paper_protocol = false;
  std::string kernel = "auto";
};

void add_data_options(CLI::App* cmd, CommonArgs& a, bool need_out = true) {
  cmd->add_option("--data", a.data, "input CSV file")->required();
  auto* schema = cmd->add_option("--schema", a.schema, "schema JSON file");
  auto* recipe =
      cmd->add_option("--recipe", a.recipe, "named dataset recipe")->check(CLI::IsMember({"adult", "compas"}));
  schema->excludes(recipe);
  cmd->add_option("--sensitive", a.sensitive, "sensitive attribute for recipes")
      ->check(CLI::IsMember({"race", "gender"}));
  if (need_out) cmd->add_option("--out", a.out, "output directory")->required();
  cmd->add_option("--kernel", a.kernel, "force a kernel implementation")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
}

void add_train_options(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--fairness", a.fairness, "fairness criterion")
      ->check(CLI::IsMember({"none", "dp", "eqopp"}));
  cmd->add_option("--target-pr", a.target_pr, "positive-rate target: float or avg|min|max");
  cmd->add_option("--target-tpr", a.target_tpr, "TPR target: float");
  cmd->add_option("--target-tnr", a.target_tnr, "TNR target: float or auto");
  cmd->add_flag("--use-s", a.use_s, "feed s to the classifier at train and test time");
  cmd->add_option("--epochs", a.epochs, "training epochs");
  cmd->add_option("--batch-size", a.batch_size, "minibatch size or 'full'");
  cmd->add_option("--lr", a.lr, "Adam learning rate");
  cmd->add_option("--l2", a.l2, "L2 regularization coefficient");
  cmd->add_option("--test-fraction", a.test_fraction, "held-out test fraction");
  cmd->add_option("--repeats", a.repeats, "independent repeats (seed = base seed + index)");
  cmd->add_option("--seed", a.seed, "base seed");
  cmd->add_flag("--paper-protocol", a.paper_protocol,
                "measure baseline TNRs on the test split instead of a validation split");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

TargetSpec parse_pr_target(const std::string& value) {
  if (value.empty() || value == "avg") return TargetSpec::positive_rate(PrStrategy::average);
  if (value == "min") return TargetSpec::positive_rate(PrStrategy::minimum);
  if (value == "max") return TargetSpec::positive_rate(PrStrategy::maximum);
  try {
    return TargetSpec::positive_rate(std::stod(value));
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot parse --target-pr value '" + value + "'");
  }
}

TargetSpec parse_tpr_target(const std::string& tpr, const std::string& tnr) {
  if (tpr.empty()) throw ConfigError("--fairness eqopp requires --target-tpr");
  double tpr_v = 0.0;
  try {
    tpr_v = std::stod(tpr);
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot parse --target-tpr value '" + tpr + "'");
  }
  if (tnr == "auto" || tnr.empty()) return TargetSpec::tpr_tnr(tpr_v);
  try {
    return TargetSpec::tpr_tnr(tpr_v, std::stod(tnr));
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot parse --target-tnr value '" + tnr + "'");
  }
}

std::vector<TargetSpec> parse_grid(const CommonArgs& a) {
  std::vector<TargetSpec> grid;
  if (a.fairness == "dp") {
    for (const auto& v : split_list(a.target_pr.empty() ? "avg" : a.target_pr))
      grid.push_back(parse_pr_target(v));
  } else if (a.fairness == "eqopp") {
    for (const auto& v : split_list(a.target_tpr))
      grid.push_back(parse_tpr_target(v, a.target_tnr));
  } else {
    throw ConfigError("sweep requires --fairness dp or eqopp");
  }
  return grid;
}

RunConfig to_run_config(const CommonArgs& a, bool parse_target) {
  RunConfig cfg;
  cfg.data_path = a.data;
  if (!a.schema.empty()) cfg.schema_path = a.schema;
  if (!a.recipe.empty()) cfg.recipe = a.recipe;
  if (cfg.schema_path.has_value() == cfg.recipe.has_value())
    throw ConfigError("exactly one of --schema and --recipe is required");
  cfg.sensitive = sensitive_attr_from_string(a.sensitive);

  if (parse_target) {
    if (a.fairness == "none")
      cfg.target = TargetSpec::none();
    else if (a.fairness == "dp")
      cfg.target = parse_pr_target(a.target_pr);
    else
      cfg.target = parse_tpr_target(a.target_tpr, a.target_tnr);
  }

  cfg.train.epochs = a.epochs;
  if (a.batch_size == "full") {
    cfg.train.batch_size = 0;
  } else {
    try {
      cfg.train.batch_size = std::stoi(a.batch_size);
    } catch (const std::invalid_argument&) {
      throw ConfigError("cannot parse --batch-size value '" + a.batch_size + "'");
    }
    if (cfg.train.batch_size < 1) throw ConfigError("--batch-size must be positive or 'full'");
  }
  cfg.train.learning_rate = a.lr;
  if (a.l2 >= 0.0)
    cfg.train.l2 = a.l2;
  else if (a.recipe == "adult")
    cfg.train.l2 = 0.00035;
  else if (a.recipe == "compas")
    cfg.train.l2 = 0.0024;
  else
    cfg.train.l2 = 0.0;
  cfg.train.use_s = a.use_s;

  cfg.test_fraction = a.test_fraction;
  cfg.repeats = a.repeats;
  cfg.base_seed = a.seed;
  cfg.out_dir = a.out;
  cfg.paper_protocol = a.paper_protocol;
  return cfg;
}

void apply_kernel_choice(const std::string& kernel) {
  if (kernel == "auto")
    kernels::set_mode(kernels::Mode::automatic);
  else if (kernel == "scalar")
    kernels::set_mode(kernels::Mode::scalar);
  else
    kernels::set_mode(kernels::Mode::avx2);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairness-tunable binary classification via latent target labels"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string model_path, spec_path;

  auto* baseline = app.add_subcommand("baseline", "train unfair reference models, record rates");
  add_data_options(baseline, args);
  add_train_options(baseline, args);

  auto* train_cmd = app.add_subcommand("train", "train fair models and evaluate them");
  add_data_options(train_cmd, args);
  add_train_options(train_cmd, args);

  auto* sweep = app.add_subcommand("sweep", "run the train pipeline over a grid of targets");
  add_data_options(sweep, args);
  add_train_options(sweep, args);

  auto* eval = app.add_subcommand("eval", "evaluate a stored model on a dataset");
  eval->add_option("--model", model_path, "model JSON file")->required();
  add_data_options(eval, args);

  auto* synth = app.add_subcommand("synth", "generate a synthetic biased dataset");
  synth->add_option("--spec", spec_path, "synthetic spec JSON file")->required();
  synth->add_option("--out", args.out, "output directory")->required();
  synth->add_option("--kernel", args.kernel, "force a kernel implementation")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    apply_kernel_choice(args.kernel);
    if (baseline->parsed()) {
      cmd_baseline(to_run_config(args, /*parse_target=*/false));
    } else if (train_cmd->parsed()) {
      cmd_train(to_run_config(args, /*parse_target=*/true));
    } else if (sweep->parsed()) {
      SweepGrid grid{parse_grid(args)};
      cmd_sweep(to_run_config(args, /*parse_target=*/false), grid);
    } else if (eval->parsed()) {
      cmd_eval(model_path, to_run_config(args, /*parse_target=*/false));
    } else if (synth->parsed()) {
      cmd_synth(spec_path, args.out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
