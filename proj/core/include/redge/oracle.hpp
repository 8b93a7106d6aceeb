#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "redge/experiment_config.hpp"
#include "redge/robust_objective.hpp"
#include "redge/sweep.hpp"

namespace redge {

// Injected sample states of one (realization, batch) pair, computed once so
// that many candidate allocations can be scored cheaply.
class BatchEvaluator {
 public:
  BatchEvaluator(const NetworkRealization& realization, const UncertaintyBatch& batch,
                 const SystemParams& params);

  Vector worst_case(const ResourceAllocation& alloc) const;
  double t_gamma(const ResourceAllocation& alloc, double gamma) const;

 private:
  const NetworkRealization* realization_;
  const SystemParams* params_;
  std::vector<SampleState> states_;
  int samples_ = 0;
};

// power_shares (K + 1 entries: p_tx then p_co) and cycle_shares (K entries)
// are nonnegative fractions summing to one.
ResourceAllocation allocation_from_shares(const Vector& power_shares, const Vector& cycle_shares,
                                          double p_max_mw, const CpuModel& cpu);

struct GridOracleOptions {
  int coarse_steps = 40;  // per free coordinate on the unit box
  int refinements = 6;
  int refine_steps = 8;   // per side of the current best point
  bool symmetric = false; // restrict to equal per-device shares
};

struct GridOracleResult {
  double t_gamma = 0.0;
  Vector power_shares;
  Vector cycle_shares;
  ResourceAllocation allocation;
  long evaluations = 0;
};

// Coarse-to-fine grid search of the allocation simplices for the minimum
// empirical gamma-quantile worst-case delay. Requires K <= 2.
GridOracleResult grid_search_oracle(const BatchEvaluator& evaluator, int devices,
                                    const SystemParams& params, double gamma,
                                    const GridOracleOptions& options = {});

// Two devices with orthogonal, equal-norm channel estimates and equal mean
// intensities. Requires params.devices == 2 and params.antennas >= 2.
NetworkRealization symmetric_instance(const SystemParams& params);

struct OracleComparisonOptions {
  Scheme scheme = Scheme::kNone;
  std::uint64_t seed = 1;
  int test_batches = 20;
  bool symmetric = false;  // symmetric_instance instead of a drawn fixed realization
  GridOracleOptions grid{};
  int workers = 1;
  LogFn log;
};

struct OracleReport {
  int devices = 0;
  int antennas = 0;
  Scheme scheme = Scheme::kNone;
  int batches = 0;
  double mean_trained_s = 0.0;
  double mean_oracle_s = 0.0;
  double gap = 0.0;  // mean_trained / mean_oracle - 1
  std::optional<double> mean_symmetric_s;
  std::optional<double> symmetric_gap;  // mean_trained / mean_symmetric - 1
  Vector oracle_power_shares;           // first batch
  Vector oracle_cycle_shares;
  Vector trained_power_shares;
  Vector trained_cycle_shares;
  bool diverged = false;
  double train_seconds = 0.0;
};

// Trains an allocator on one fixed tiny instance (K <= 2, L <= 2) and compares
// its robust delay with the grid-search oracle on fixed uncertainty batches
// drawn in the training scheme's mode.
OracleReport run_oracle_comparison(const ExperimentConfig& config,
                                   const OracleComparisonOptions& options);

std::string oracle_report_text(const OracleReport& report);

}  // namespace redge
