#pragma once

#include "redge/random.hpp"
#include "redge/types.hpp"

namespace redge {

// Lower clamp applied to sampled computing intensities (cycles/bit).
inline constexpr double kOmegaFloor = 1.0;

struct TaskSizes {
  double d_in_bits = 5e4;
  double d_out_bits = 7.5e4;
};

struct TaskProfile {
  Vector omega_true;  // cycles/bit
  Vector omega_est;   // cycles/bit
  Vector d_in;        // bits
  Vector d_out;       // bits
  double sigma_w_sq = 0.0;
  int clamped = 0;    // entries of omega_true/omega_est raised to kOmegaFloor

  int devices() const { return static_cast<int>(omega_est.size()); }
};

// CPU power law p = tau * F^mu with tau in SI units (W s^mu / cycles^mu).
struct CpuModel {
  double tau = 1e-28;
  double mu = 3.0;
  double f_max = 4.6e9;  // cycles/s
};

// omega ~ Gamma(shape, scale); omega_est = omega - N(0, sigma_w_sq), both
// clamped to kOmegaFloor.
TaskProfile sample_task_profile(int devices, double gamma_shape, double gamma_scale,
                                double sigma_w_sq, const TaskSizes& sizes, Rng& rng);

// Power (mW) needed to run `total_cycles` cycles/s.
double compute_power_from_cycles(double total_cycles, const CpuModel& cpu);

// Cycles/s sustainable with `p_co_mw` of computing power; inverse of
// compute_power_from_cycles.
double cycles_from_compute_power(double p_co_mw, const CpuModel& cpu);

// omega_k D_in_k / f_k; +inf where f_k == 0.
Vector computation_delays(const Vector& omega, const Vector& d_in, const Vector& f_co);

// D_out_k / r_k; +inf where r_k == 0.
Vector communication_delays(const Vector& d_out, const Vector& rates);

// Total per-device delay in seconds.
Vector total_delays(const Vector& omega, const Vector& d_in, const Vector& d_out,
                    const Vector& f_co, const Vector& rates);

}  // namespace redge
