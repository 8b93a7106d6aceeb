#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "redge/allocator.hpp"
#include "redge/experiment_config.hpp"
#include "redge/trainer.hpp"

namespace redge {

// One trained-and-evaluated (scheme, grid point, seed) cell.
struct SweepRecord {
  Scheme scheme = Scheme::kJoint;
  SweepAxis axis = SweepAxis::kNone;
  std::optional<double> axis_value;
  std::uint64_t seed = 0;
  int realizations = 0;
  double tgamma_s = 0.0;  // mean robust worst-case delay over the test set
  double comm_s = 0.0;    // mean worst-case communication delay of the selected sample
  double comp_s = 0.0;    // mean worst-case computation delay of the selected sample
  bool diverged = false;
};

using LogFn = std::function<void(const std::string&)>;

struct SweepOptions {
  std::filesystem::path out_dir = "out";
  bool use_cache = true;
  int workers = 1;  // concurrent cells
  LogFn log;
};

struct SweepOutcome {
  std::vector<SweepRecord> records;
  std::filesystem::path csv_path;
  bool any_diverged = false;
};

// Fresh model for the given system: initialized from `seed`, with input
// normalization fitted on pilot draws.
AllocatorModel build_model(const ExperimentConfig& config, const SystemParams& system,
                           std::uint64_t seed);

// Held-out test set for a grid point; always carries joint uncertainty.
EvaluationSet build_test_set(const ExperimentConfig& config, const SystemParams& system);

// Content hash of everything that determines a cell's trained parameters.
std::uint64_t cell_hash(const ExperimentConfig& config, Scheme scheme,
                        std::optional<double> axis_value, std::uint64_t seed);

struct CellResult {
  SweepRecord record;
  AllocatorModel model;
  TrainingReport report;
  bool from_cache = false;
  int feasibility_violations = 0;
};

// Trains (or loads the cached checkpoint of) one cell and evaluates it on the
// grid point's test set. Divergence is reported in record.diverged.
CellResult run_cell(const ExperimentConfig& config, Scheme scheme,
                    std::optional<double> axis_value, std::uint64_t seed,
                    const SweepOptions& options);

// All schemes x grid points x seeds; writes <out_dir>/sweep.csv.
SweepOutcome run_sweep(const ExperimentConfig& config, const SweepOptions& options);

// Header: scheme,axis,axis_value,seed,realizations,tgamma_s,comm_s,comp_s,status
std::string sweep_csv(const std::vector<SweepRecord>& records);

struct DelayDecomposition {
  double tgamma_s = 0.0;
  double comm_s = 0.0;
  double comp_s = 0.0;
};

// Means over the set of the quantile-selected sample's max_k communication and
// max_k computation delays; the two maxima may come from different devices.
DelayDecomposition decompose_delays(const AllocatorModel& model, const SystemParams& system,
                                    const EvaluationSet& set, double gamma, int workers = 1);

// Writes `contents` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace redge
