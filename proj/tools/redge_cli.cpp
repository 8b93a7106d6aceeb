// redge: train, evaluate, sweep and oracle-check robust edge allocators.
//
// Exit codes: 0 success, 1 usage or runtime error, 2 training divergence.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "redge/experiment_config.hpp"
#include "redge/oracle.hpp"
#include "redge/parallel.hpp"
#include "redge/sweep.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitDiverged = 2;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  bool desk = false;
  bool deterministic = false;
  int workers = 1;
};

void add_common(CLI::App* app, CommonFlags& flags) {
  app->add_option("-c,--config", flags.config_path, "experiment INI file (default: full profile)");
  app->add_option("-s,--seed", flags.seed, "training seed (overrides sweep.seeds)");
  app->add_option("-o,--out", flags.out_dir, "output directory");
  app->add_flag("--desk", flags.desk, "apply the desk-scale profile");
  app->add_flag("--deterministic", flags.deterministic,
                "single-threaded execution with fixed reduction order");
  app->add_option("-j,--workers", flags.workers, "worker threads (0 = hardware concurrency)");
}

redge::ExperimentConfig load(const CommonFlags& flags) {
  redge::ExperimentConfig config = flags.config_path.empty()
                                       ? redge::ExperimentConfig::full_profile()
                                       : redge::load_experiment_config(flags.config_path);
  if (flags.desk && !config.desk_scale) config.apply_desk_profile();
  if (flags.seed) config.seeds = {*flags.seed};
  config.training.workers = flags.deterministic ? 1 : redge::resolve_workers(flags.workers);
  config.validate();
  return config;
}

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

int cmd_train(const CommonFlags& flags, const std::string& scheme_text,
              std::optional<double> axis_value) {
  const redge::ExperimentConfig config = load(flags);
  redge::SweepOptions options;
  options.out_dir = flags.out_dir;
  options.use_cache = false;
  options.log = log_line;
  const redge::Scheme scheme = redge::parse_scheme(scheme_text);
  const redge::CellResult r =
      redge::run_cell(config, scheme, axis_value, config.seeds.front(), options);
  if (r.record.diverged) return kExitDiverged;
  std::cout << "checkpoint " << r.report.checkpoint << '\n'
            << "test_tgamma_s " << redge::format_double(r.record.tgamma_s) << '\n'
            << "test_comm_s " << redge::format_double(r.record.comm_s) << '\n'
            << "test_comp_s " << redge::format_double(r.record.comp_s) << '\n';
  return r.feasibility_violations > 0 ? kExitError : 0;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& checkpoint,
                 std::optional<double> axis_value) {
  const redge::ExperimentConfig config = load(flags);
  const redge::SystemParams system = config.system(axis_value);
  const redge::AllocatorModel model = redge::load_checkpoint(checkpoint);
  const redge::EvaluationSet test = redge::build_test_set(config, system);
  const redge::EvaluationSummary s =
      redge::evaluate(model, system, test, config.training.gamma, config.training.workers);
  std::cout << "realizations " << test.realizations.size() << '\n'
            << "tgamma_s " << redge::format_double(s.mean_t_gamma) << '\n'
            << "tgamma_std_s " << redge::format_double(s.std_t_gamma) << '\n'
            << "comm_s " << redge::format_double(s.mean_comm) << '\n'
            << "comp_s " << redge::format_double(s.mean_comp) << '\n'
            << "feasibility_violations " << s.feasibility_violations << '\n';
  return s.feasibility_violations > 0 ? kExitError : 0;
}

int cmd_sweep(const CommonFlags& flags, int jobs, bool no_cache) {
  const redge::ExperimentConfig config = load(flags);
  redge::SweepOptions options;
  options.out_dir = flags.out_dir;
  options.use_cache = !no_cache;
  options.workers = flags.deterministic ? 1 : redge::resolve_workers(jobs);
  options.log = log_line;
  const redge::SweepOutcome outcome = redge::run_sweep(config, options);
  std::cout << outcome.csv_path.string() << '\n';
  return outcome.any_diverged ? kExitDiverged : 0;
}

int cmd_oracle(const CommonFlags& flags, const std::string& scheme_text, bool symmetric,
               int batches) {
  const redge::ExperimentConfig config = load(flags);
  redge::OracleComparisonOptions options;
  options.scheme = redge::parse_scheme(scheme_text);
  options.seed = config.seeds.front();
  options.test_batches = batches;
  options.symmetric = symmetric;
  options.workers = config.training.workers;
  options.log = log_line;
  const redge::OracleReport report = redge::run_oracle_comparison(config, options);
  std::cout << redge::oracle_report_text(report);
  return report.diverged ? kExitDiverged : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust joint communication and computing allocation"};
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags, sweep_flags, oracle_flags;
  std::string train_scheme = "joint";
  std::optional<double> train_axis_value, eval_axis_value;
  std::string checkpoint;
  int jobs = 1;
  bool no_cache = false;
  std::string oracle_scheme = "joint";
  bool symmetric = false;
  int batches = 20;

  CLI::App* train = app.add_subcommand("train", "train one scheme and evaluate it on the test set");
  add_common(train, train_flags);
  train->add_option("--scheme", train_scheme, "joint, comm, comp or regular");
  train->add_option("--axis-value", train_axis_value, "value of the configured sweep axis");

  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on the test set");
  add_common(evaluate, eval_flags);
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  evaluate->add_option("--axis-value", eval_axis_value, "value of the configured sweep axis");

  CLI::App* sweep = app.add_subcommand("sweep", "train and evaluate every scheme x grid x seed cell");
  add_common(sweep, sweep_flags);
  sweep->add_option("--jobs", jobs, "concurrent cells (0 = hardware concurrency)");
  sweep->add_flag("--no-cache", no_cache, "retrain even if a cached checkpoint exists");

  CLI::App* oracle = app.add_subcommand("oracle", "compare a tiny trained model with grid search");
  add_common(oracle, oracle_flags);
  oracle->add_option("--scheme", oracle_scheme, "training scheme");
  oracle->add_flag("--symmetric", symmetric, "use the symmetric two-device instance");
  oracle->add_option("--batches", batches, "fixed uncertainty batches to compare on");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(train_flags, train_scheme, train_axis_value);
    if (*evaluate) return cmd_evaluate(eval_flags, checkpoint, eval_axis_value);
    if (*sweep) return cmd_sweep(sweep_flags, jobs, no_cache);
    if (*oracle) return cmd_oracle(oracle_flags, oracle_scheme, symmetric, batches);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
