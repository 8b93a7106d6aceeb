#include "redge/robust_objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace redge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_batch(const NetworkRealization& realization, const UncertaintyBatch& batch) {
  if (batch.devices != realization.devices() || batch.antennas != realization.antennas()) {
    throw StructuralError("uncertainty batch dimensions do not match the realization");
  }
  if (batch.samples < 1) throw StructuralError("uncertainty batch is empty");
}

// Worst-case delay of one sample without materializing the breakdown.
double worst_delay(const SampleState& s, const ResourceAllocation& a, const Vector& d_in,
                   const Vector& d_out, double bandwidth, double noise, std::size_t* argmax) {
  const Eigen::Index k_count = s.gains.rows();
  double worst = -kInf;
  std::size_t worst_k = 0;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    double interference = 0.0;
    for (Eigen::Index j = 0; j < k_count; ++j) {
      if (j != k) interference += s.gains(k, j) * a.p_tx_mw[j];
    }
    const double sinr = s.gains(k, k) * a.p_tx_mw[k] / (interference + noise);
    const double rate = bandwidth * std::log1p(sinr) / std::numbers::ln2;
    const double comm = rate > 0.0 ? d_out[k] / rate : kInf;
    const double comp = a.f_co[k] > 0.0 ? s.omega[k] * d_in[k] / a.f_co[k] : kInf;
    const double t = comm + comp;
    if (t > worst || (std::isnan(t) && !std::isnan(worst))) {
      worst = t;
      worst_k = static_cast<std::size_t>(k);
    }
  }
  if (argmax) *argmax = worst_k;
  return worst;
}

std::size_t argmax_of(const Vector& v) {
  std::size_t best = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k) {
    if (v[k] > v[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(k);
  }
  return best;
}

}  // namespace

std::string_view scheme_key(Scheme scheme) {
  switch (scheme) {
    case Scheme::kJoint: return "joint";
    case Scheme::kCommOnly: return "comm";
    case Scheme::kCompOnly: return "comp";
    case Scheme::kNone: return "regular";
  }
  return "?";
}

std::string_view scheme_label(Scheme scheme) {
  switch (scheme) {
    case Scheme::kJoint: return "Joint UI";
    case Scheme::kCommOnly: return "Comm UI";
    case Scheme::kCompOnly: return "Comp UI";
    case Scheme::kNone: return "Regular DNN";
  }
  return "?";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "joint") return Scheme::kJoint;
  if (text == "comm") return Scheme::kCommOnly;
  if (text == "comp") return Scheme::kCompOnly;
  if (text == "regular" || text == "none") return Scheme::kNone;
  throw ParameterError("unknown scheme '" + std::string(text) + "'");
}

bool injects_channel_errors(Scheme scheme) {
  return scheme == Scheme::kJoint || scheme == Scheme::kCommOnly;
}

bool injects_compute_errors(Scheme scheme) {
  return scheme == Scheme::kJoint || scheme == Scheme::kCompOnly;
}

UncertaintyBatch sample_uncertainty_batch(int samples, int devices, int antennas,
                                          double sigma_h_sq, double sigma_w_sq, Scheme mode,
                                          Rng& rng) {
  if (samples < 1 || devices < 1 || antennas < 1) {
    throw ParameterError("batch dimensions must be >= 1");
  }
  if (!(sigma_h_sq >= 0.0) || !(sigma_w_sq >= 0.0)) {
    throw ParameterError("error variances must be >= 0");
  }
  UncertaintyBatch b;
  b.samples = samples;
  b.devices = devices;
  b.antennas = antennas;
  b.mode = mode;
  b.h_err = CMatrix::Zero(static_cast<Eigen::Index>(samples) * devices, antennas);
  b.w_err = Matrix::Zero(samples, devices);
  StandardNormal normal;
  if (injects_channel_errors(mode)) {
    for (int n = 0; n < samples; ++n) {
      for (int k = 0; k < devices; ++k) {
        for (int l = 0; l < antennas; ++l) {
          b.h_err(n * devices + k, l) = complex_normal(rng, normal, sigma_h_sq);
        }
      }
    }
  }
  if (injects_compute_errors(mode)) {
    const double sigma = std::sqrt(sigma_w_sq);
    for (int n = 0; n < samples; ++n) {
      for (int k = 0; k < devices; ++k) b.w_err(n, k) = sigma * normal(rng);
    }
  }
  return b;
}

void sample_state(const NetworkRealization& realization, const UncertaintyBatch& batch, int n,
                  SampleState& out) {
  const int k_count = realization.devices();
  const int l_count = realization.antennas();
  const CMatrix& h_est = realization.channels.h_est;
  const CMatrix& v = realization.beams.v;
  out.gains.resize(k_count, k_count);
  out.omega.resize(k_count);
  const Eigen::Index row0 = static_cast<Eigen::Index>(n) * k_count;
  for (int k = 0; k < k_count; ++k) {
    for (int j = 0; j < k_count; ++j) {
      Complex acc{0.0, 0.0};
      for (int l = 0; l < l_count; ++l) {
        acc += std::conj(h_est(k, l) + batch.h_err(row0 + k, l)) * v(l, j);
      }
      out.gains(k, j) = std::norm(acc);
    }
    out.omega[k] = std::max(realization.tasks.omega_est[k] + batch.w_err(n, k), kOmegaFloor);
  }
}

DelayBreakdown delays_for_state(const SampleState& state, const ResourceAllocation& alloc,
                                const NetworkRealization& realization,
                                const SystemParams& params) {
  DelayBreakdown d;
  d.rates = rates_from_gains(state.gains, alloc.p_tx_mw, params.bandwidth_hz,
                             params.noise_power_mw());
  d.communication = communication_delays(realization.tasks.d_out, d.rates);
  d.computation = computation_delays(state.omega, realization.tasks.d_in, alloc.f_co);
  d.total = d.communication + d.computation;
  return d;
}

DelayBreakdown sample_delays(const ResourceAllocation& alloc,
                             const NetworkRealization& realization,
                             const UncertaintyBatch& batch, int n, const SystemParams& params) {
  check_batch(realization, batch);
  if (n < 0 || n >= batch.samples) throw StructuralError("sample index out of range");
  SampleState state;
  sample_state(realization, batch, n, state);
  return delays_for_state(state, alloc, realization, params);
}

Vector worst_case_delays(const ResourceAllocation& alloc, const NetworkRealization& realization,
                         const UncertaintyBatch& batch, const SystemParams& params) {
  check_batch(realization, batch);
  if (alloc.p_tx_mw.size() != realization.devices() || alloc.f_co.size() != realization.devices()) {
    throw StructuralError("allocation dimensions do not match the realization");
  }
  Vector t(batch.samples);
  SampleState state;
  const double noise = params.noise_power_mw();
  const int distinct = batch.mode == Scheme::kNone ? 1 : batch.samples;
  for (int n = 0; n < distinct; ++n) {
    sample_state(realization, batch, n, state);
    t[n] = worst_delay(state, alloc, realization.tasks.d_in, realization.tasks.d_out,
                       params.bandwidth_hz, noise, nullptr);
  }
  if (distinct == 1) t.setConstant(t[0]);
  return t;
}

std::size_t quantile_rank(std::size_t n, double gamma) {
  const double x = gamma * static_cast<double>(n);
  const double nearest = std::round(x);
  double r = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  r = std::clamp(r, 1.0, static_cast<double>(n));
  return static_cast<std::size_t>(r);
}

RobustDelayResult empirical_quantile(const Vector& t_all, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ParameterError("quantile level gamma must lie in (0, 1)");
  }
  if (t_all.size() < 1) throw ParameterError("empirical quantile of an empty sample");
  const std::size_t n = static_cast<std::size_t>(t_all.size());
  RobustDelayResult r;
  r.t_all = t_all;
  r.rank = quantile_rank(n, gamma);

  auto key = [&t_all](std::size_t i) {
    const double v = t_all[static_cast<Eigen::Index>(i)];
    return std::isnan(v) ? kInf : v;
  };
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&key](std::size_t a, std::size_t b) {
    const double ka = key(a);
    const double kb = key(b);
    return ka > kb || (ka == kb && a < b);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r.rank - 1),
                   order.end(), before);
  r.selected_sample = order[r.rank - 1];
  r.t_gamma = t_all[static_cast<Eigen::Index>(r.selected_sample)];
  return r;
}

OutputLoss robust_loss_from_output(const Vector& x, const NetworkRealization& realization,
                                   const UncertaintyBatch& batch, const SystemParams& params,
                                   double gamma, bool with_gradient) {
  const int k_count = realization.devices();
  if (x.size() != 2 * k_count + 1) throw StructuralError("allocator output has the wrong length");
  const ResourceAllocation alloc = map_to_allocation(x, params.p_max_mw, params.cpu);

  OutputLoss out;
  out.detail = empirical_quantile(worst_case_delays(alloc, realization, batch, params), gamma);
  out.value = out.detail.t_gamma;
  out.selected = sample_delays(alloc, realization, batch,
                               static_cast<int>(out.detail.selected_sample), params);
  const std::size_t k_star = argmax_of(out.selected.total);
  out.detail.argmax_device = k_star;
  out.grad_output = Vector::Zero(x.size());
  if (!with_gradient || !std::isfinite(out.value)) return out;

  // t = omega D_in / f_k + D_out / r_k for the selected sample and device.
  SampleState state;
  sample_state(realization, batch, static_cast<int>(out.detail.selected_sample), state);
  const Eigen::Index k = static_cast<Eigen::Index>(k_star);
  const double noise = params.noise_power_mw();
  const Vector& p = alloc.p_tx_mw;

  double interference = 0.0;
  for (Eigen::Index j = 0; j < k_count; ++j) {
    if (j != k) interference += state.gains(k, j) * p[j];
  }
  const double denom_b = interference + noise;
  const double denom_a = denom_b + state.gains(k, k) * p[k];
  const double rate = out.selected.rates[k];
  const double dt_drate = -realization.tasks.d_out[k] / (rate * rate);
  const double scale = params.bandwidth_hz / std::numbers::ln2;

  AllocationGradient g;
  g.p_tx_mw = Vector::Zero(k_count);
  g.f_co = Vector::Zero(k_count);
  for (Eigen::Index j = 0; j < k_count; ++j) {
    const double dr_dp = j == k ? scale * state.gains(k, k) / denom_a
                                : scale * state.gains(k, j) * (1.0 / denom_a - 1.0 / denom_b);
    g.p_tx_mw[j] = dt_drate * dr_dp;
  }
  const double f = alloc.f_co[k];
  g.f_co[k] = -state.omega[k] * realization.tasks.d_in[k] / (f * f);

  out.grad_output = map_to_allocation_backward(x, params.p_max_mw, params.cpu, g);
  return out;
}

ModelLoss robust_loss(const AllocatorModel& model, const NetworkRealization& realization,
                      const UncertaintyBatch& batch, const SystemParams& params, double gamma) {
  ForwardCache cache;
  const Matrix input = model_input(model, realization);
  const Matrix output = forward_batch(model, input, &cache);
  OutputLoss head = robust_loss_from_output(output.col(0), realization, batch, params, gamma);
  ModelLoss out;
  out.value = head.value;
  out.detail = std::move(head.detail);
  out.gradient = backward_batch(model, cache, head.grad_output);
  return out;
}

}  // namespace redge
