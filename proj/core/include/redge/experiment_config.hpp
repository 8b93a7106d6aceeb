#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "redge/allocator.hpp"
#include "redge/network.hpp"
#include "redge/robust_objective.hpp"
#include "redge/trainer.hpp"

namespace redge {

enum class SweepAxis { kNone, kSigmaHSq, kSigmaWSq, kPMaxDbm };

std::string_view axis_key(SweepAxis axis);  // none, sigma_h_sq, sigma_w_sq, p_max_dbm
SweepAxis parse_axis(std::string_view text);

// Everything needed to train and evaluate the schemes on one or more grid
// points. Physical quantities are kept in the units used by the config file
// (dBm, dBm/Hz, SI) and converted by system().
struct ExperimentConfig {
  int antennas = 8;
  int devices = 6;
  double p_max_dbm = 38.0;
  double bandwidth_hz = 1e6;
  double noise_psd_dbm_per_hz = -75.0;
  double f_max_cycles = 4.6e9;
  double d_in_bits = 5e4;
  double d_out_bits = 7.5e4;
  double rzf_alpha = 0.2;
  double cpu_tau = 1e-28;
  double cpu_mu = 3.0;
  double gamma_shape = 2.0;
  double gamma_scale = 200.0;
  double sigma_h_sq = 0.05;
  double sigma_w_sq = 6400.0;

  NetworkShape shape{10, 400, InputMode::kEffectiveChannels};
  TrainingConfig training{};
  int normalization_draws = 10000;

  SweepAxis axis = SweepAxis::kNone;
  std::vector<double> grid;
  std::vector<Scheme> schemes{Scheme::kNone, Scheme::kCommOnly, Scheme::kCompOnly,
                              Scheme::kJoint};
  std::vector<std::uint64_t> seeds{1};
  std::uint64_t test_seed = 424242;
  bool desk_scale = false;

  // The full-size parameter set: L = 8, K = 6, 10 x 400 network, 500 epochs
  // of 50 minibatches with 1000 realizations, N = 1000, gamma = 0.05.
  static ExperimentConfig full_profile();

  // Reduced sizes for a single workstation: K = 4, L = 6, 4 x 128 network,
  // 50 epochs of 10 minibatches with 100 realizations, N = 200, step size 1e-3.
  void apply_desk_profile();

  // Physical parameters with the sweep axis (if given) overriding its field.
  SystemParams system(std::optional<double> axis_value = std::nullopt) const;

  // Grid values, or a single empty entry when no axis is configured.
  std::vector<std::optional<double>> grid_points() const;

  void validate() const;

  // Canonical INI rendering; parse_experiment_config(to_ini()) reproduces the
  // configuration exactly.
  std::string to_ini() const;
};

ExperimentConfig parse_experiment_config(const std::string& ini_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace redge
