#include "redge/compute_model.hpp"

#include <cmath>
#include <limits>

#include "redge/units.hpp"

namespace redge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_size(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw StructuralError("per-device vectors differ in length");
}

}  // namespace

TaskProfile sample_task_profile(int devices, double gamma_shape, double gamma_scale,
                                double sigma_w_sq, const TaskSizes& sizes, Rng& rng) {
  if (!(gamma_shape > 0.0) || !(gamma_scale > 0.0)) {
    throw ParameterError("Gamma shape and scale must be > 0");
  }
  if (!(sigma_w_sq >= 0.0)) throw ParameterError("sigma_w_sq must be >= 0");
  if (devices < 1) throw ParameterError("device count must be >= 1");
  if (!(sizes.d_in_bits > 0.0) || !(sizes.d_out_bits > 0.0)) {
    throw ParameterError("task sizes must be > 0");
  }

  TaskProfile task;
  task.sigma_w_sq = sigma_w_sq;
  task.omega_true.resize(devices);
  task.omega_est.resize(devices);
  task.d_in = Vector::Constant(devices, sizes.d_in_bits);
  task.d_out = Vector::Constant(devices, sizes.d_out_bits);

  std::gamma_distribution<double> gamma(gamma_shape, gamma_scale);
  StandardNormal normal;
  const double sigma = std::sqrt(sigma_w_sq);
  for (int k = 0; k < devices; ++k) {
    double omega = gamma(rng);
    if (omega < kOmegaFloor) {
      omega = kOmegaFloor;
      ++task.clamped;
    }
    double est = omega - sigma * normal(rng);
    if (est < kOmegaFloor) {
      est = kOmegaFloor;
      ++task.clamped;
    }
    task.omega_true[k] = omega;
    task.omega_est[k] = est;
  }
  return task;
}

double compute_power_from_cycles(double total_cycles, const CpuModel& cpu) {
  if (total_cycles <= 0.0) return 0.0;
  return watts_to_mw(cpu.tau * std::pow(total_cycles, cpu.mu));
}

double cycles_from_compute_power(double p_co_mw, const CpuModel& cpu) {
  if (p_co_mw <= 0.0) return 0.0;
  return std::pow(mw_to_watts(p_co_mw) / cpu.tau, 1.0 / cpu.mu);
}

Vector computation_delays(const Vector& omega, const Vector& d_in, const Vector& f_co) {
  require_same_size(omega, d_in);
  require_same_size(omega, f_co);
  Vector t(omega.size());
  for (Eigen::Index k = 0; k < omega.size(); ++k) {
    t[k] = f_co[k] > 0.0 ? omega[k] * d_in[k] / f_co[k] : kInf;
  }
  return t;
}

Vector communication_delays(const Vector& d_out, const Vector& rates) {
  require_same_size(d_out, rates);
  Vector t(d_out.size());
  for (Eigen::Index k = 0; k < d_out.size(); ++k) {
    t[k] = rates[k] > 0.0 ? d_out[k] / rates[k] : kInf;
  }
  return t;
}

Vector total_delays(const Vector& omega, const Vector& d_in, const Vector& d_out,
                    const Vector& f_co, const Vector& rates) {
  return computation_delays(omega, d_in, f_co) + communication_delays(d_out, rates);
}

}  // namespace redge
