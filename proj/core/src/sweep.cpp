#include "redge/sweep.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "redge/parallel.hpp"

namespace redge {

namespace {

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

std::string cell_name(Scheme scheme, std::optional<double> axis_value, std::uint64_t seed) {
  std::string name(scheme_key(scheme));
  if (axis_value) name += "_" + format_double(*axis_value);
  name += "_s" + std::to_string(seed);
  return name;
}

TrainingConfig cell_training(const ExperimentConfig& config, Scheme scheme, std::uint64_t seed,
                             int workers) {
  TrainingConfig t = config.training;
  t.scheme = scheme;
  t.seed = seed;
  t.workers = workers;
  return t;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

AllocatorModel build_model(const ExperimentConfig& config, const SystemParams& system,
                           std::uint64_t seed) {
  Rng rng = make_stream(seed, StreamTag::kModelInit);
  AllocatorModel model =
      AllocatorModel::initialize(system.devices, system.antennas, config.shape, rng);
  fit_input_normalization(model, system, seed, config.normalization_draws);
  return model;
}

EvaluationSet build_test_set(const ExperimentConfig& config, const SystemParams& system) {
  return make_evaluation_set(system, config.training.test_size, config.training.samples,
                             Scheme::kJoint, config.test_seed, StreamTag::kTest);
}

std::uint64_t cell_hash(const ExperimentConfig& config, Scheme scheme,
                        std::optional<double> axis_value, std::uint64_t seed) {
  // Worker count and the sweep's lists of other cells do not affect this cell.
  ExperimentConfig c = config;
  c.training.workers = 1;
  c.grid.clear();
  c.schemes = {scheme};
  c.seeds = {seed};
  std::string text = c.to_ini();
  text += "\n[cell]\nscheme = ";
  text += scheme_key(scheme);
  text += "\naxis_value = " + (axis_value ? format_double(*axis_value) : std::string("none"));
  text += "\nseed = " + std::to_string(seed) + "\n";
  return fnv1a64(text);
}

DelayDecomposition decompose_delays(const AllocatorModel& model, const SystemParams& system,
                                    const EvaluationSet& set, double gamma, int workers) {
  const EvaluationSummary s = evaluate(model, system, set, gamma, workers);
  return {s.mean_t_gamma, s.mean_comm, s.mean_comp};
}

CellResult run_cell(const ExperimentConfig& config, Scheme scheme,
                    std::optional<double> axis_value, std::uint64_t seed,
                    const SweepOptions& options) {
  const SystemParams system = config.system(axis_value);
  system.validate();
  const TrainingConfig training =
      cell_training(config, scheme, seed, config.training.workers);

  CellResult result;
  result.record.scheme = scheme;
  result.record.axis = config.axis;
  result.record.axis_value = axis_value;
  result.record.seed = seed;
  result.record.realizations = config.training.test_size;

  const std::string name = cell_name(scheme, axis_value, seed);
  const std::filesystem::path ckpt = options.out_dir / "checkpoints" /
                                     (hex64(cell_hash(config, scheme, axis_value, seed)) + ".json");
  auto log = [&options](const std::string& msg) {
    if (options.log) options.log(msg);
  };

  if (options.use_cache && std::filesystem::exists(ckpt)) {
    result.model = load_checkpoint(ckpt);
    result.from_cache = true;
    result.report.checkpoint = ckpt.string();
    log("cell " + name + ": loaded cached checkpoint " + ckpt.filename().string());
  } else {
    try {
      TrainingResult trained = train(training, system, build_model(config, system, seed));
      result.model = std::move(trained.model);
      result.report = std::move(trained.report);
      save_checkpoint(result.model, ckpt);
      result.report.checkpoint = ckpt.string();
      write_file_atomic(options.out_dir / "reports" / (name + ".csv"), result.report.to_csv());
      std::ostringstream msg;
      msg << "cell " << name << ": trained in " << result.report.wall_seconds
          << " s, best epoch " << result.report.best_epoch << ", val t_gamma "
          << result.report.best_val_tgamma_s;
      log(msg.str());
    } catch (const TrainingDiverged& e) {
      result.record.diverged = true;
      result.record.tgamma_s = result.record.comm_s = result.record.comp_s =
          std::numeric_limits<double>::quiet_NaN();
      log("cell " + name + ": diverged: " + e.what());
      return result;
    }
  }

  const EvaluationSet test = build_test_set(config, system);
  const EvaluationSummary s =
      evaluate(result.model, system, test, config.training.gamma, config.training.workers);
  result.record.tgamma_s = s.mean_t_gamma;
  result.record.comm_s = s.mean_comm;
  result.record.comp_s = s.mean_comp;
  result.feasibility_violations = s.feasibility_violations;
  if (s.feasibility_violations > 0) {
    log("cell " + name + ": " + std::to_string(s.feasibility_violations) +
        " allocations violated the budgets");
  }
  return result;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::string out = "scheme,axis,axis_value,seed,realizations,tgamma_s,comm_s,comp_s,status\n";
  for (const auto& r : records) {
    out += scheme_key(r.scheme);
    out += ',';
    out += axis_key(r.axis);
    out += ',';
    if (r.axis_value) out += format_double(*r.axis_value);
    out += ',' + std::to_string(r.seed) + ',' + std::to_string(r.realizations) + ',';
    out += format_double(r.tgamma_s) + ',' + format_double(r.comm_s) + ',' +
           format_double(r.comp_s) + ',';
    out += r.diverged ? "diverged" : "ok";
    out += '\n';
  }
  return out;
}

SweepOutcome run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
  config.validate();
  struct Cell {
    Scheme scheme;
    std::optional<double> axis_value;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& g : config.grid_points()) {
    for (Scheme s : config.schemes) {
      for (std::uint64_t seed : config.seeds) cells.push_back({s, g, seed});
    }
  }

  // Parallel cells each train single-threaded.
  ExperimentConfig cell_config = config;
  const int pool = std::max(1, options.workers);
  if (pool > 1) cell_config.training.workers = 1;

  SweepOutcome outcome;
  outcome.records.resize(cells.size());
  std::vector<int> violations(cells.size(), 0);
  parallel_for(cells.size(), pool, [&](std::size_t i) {
    const Cell& c = cells[i];
    CellResult r = run_cell(cell_config, c.scheme, c.axis_value, c.seed, options);
    outcome.records[i] = r.record;
    violations[i] = r.feasibility_violations;
  });
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (outcome.records[i].diverged) outcome.any_diverged = true;
    if (violations[i] > 0) {
      throw std::runtime_error("allocation budget violated in a sweep cell");
    }
  }
  outcome.csv_path = options.out_dir / "sweep.csv";
  write_file_atomic(outcome.csv_path, sweep_csv(outcome.records));
  return outcome;
}

}  // namespace redge
