#pragma once

#include <cstddef>
#include <string_view>

#include "redge/allocator.hpp"
#include "redge/network.hpp"
#include "redge/random.hpp"
#include "redge/types.hpp"

namespace redge {

// Which estimation errors are injected after the allocator output.
enum class Scheme {
  kJoint,     // channel and computing errors ("Joint UI")
  kCommOnly,  // channel errors only ("Comm UI")
  kCompOnly,  // computing errors only ("Comp UI")
  kNone,      // nominal objective ("Regular DNN")
};

std::string_view scheme_key(Scheme scheme);    // joint, comm, comp, regular
std::string_view scheme_label(Scheme scheme);  // Joint UI, Comm UI, Comp UI, Regular DNN
// Accepts the keys above plus "none"; throws ParameterError otherwise.
Scheme parse_scheme(std::string_view text);
bool injects_channel_errors(Scheme scheme);
bool injects_compute_errors(Scheme scheme);

// N sampled error realizations. Sample n's channel error is the K x L block
// h_err.middleRows(n * K, K); its intensity error is row n of w_err.
struct UncertaintyBatch {
  int samples = 0;
  int devices = 0;
  int antennas = 0;
  CMatrix h_err;
  Matrix w_err;
  Scheme mode = Scheme::kJoint;

  auto channel_error(int n) const { return h_err.middleRows(n * devices, devices); }
};

// Channel errors ~ CN(0, sigma_h_sq), intensity errors ~ N(0, sigma_w_sq);
// the sources the mode excludes are exactly zero and consume no draws.
UncertaintyBatch sample_uncertainty_batch(int samples, int devices, int antennas,
                                          double sigma_h_sq, double sigma_w_sq, Scheme mode,
                                          Rng& rng);

// Channel gains |h_n,k^H v_j|^2 and intensities of one injected sample, where
// h_n = h_est + err_n and omega_n = max(omega_est + err_n, kOmegaFloor).
struct SampleState {
  Matrix gains;
  Vector omega;
};

void sample_state(const NetworkRealization& realization, const UncertaintyBatch& batch, int n,
                  SampleState& out);

struct DelayBreakdown {
  Vector rates;          // bit/s
  Vector communication;  // s
  Vector computation;    // s
  Vector total;          // s
};

DelayBreakdown delays_for_state(const SampleState& state, const ResourceAllocation& alloc,
                                const NetworkRealization& realization,
                                const SystemParams& params);

DelayBreakdown sample_delays(const ResourceAllocation& alloc,
                             const NetworkRealization& realization,
                             const UncertaintyBatch& batch, int n, const SystemParams& params);

// Worst-case (max over devices) delay of every sample, evaluated with the
// fixed beamformers of the realization.
Vector worst_case_delays(const ResourceAllocation& alloc, const NetworkRealization& realization,
                         const UncertaintyBatch& batch, const SystemParams& params);

struct RobustDelayResult {
  double t_gamma = 0.0;
  Vector t_all;
  std::size_t rank = 0;             // t_gamma is the rank-th largest entry
  std::size_t selected_sample = 0;  // index of that entry in t_all
  std::size_t argmax_device = 0;    // filled by the loss evaluators
};

// max(1, ceil(gamma * n)), with gamma * n values within 1e-9 of an integer
// snapped to that integer.
std::size_t quantile_rank(std::size_t n, double gamma);

// The ceil(gamma N)-th largest entry. Equal values are ordered by ascending
// sample index. Throws ParameterError unless 0 < gamma < 1.
RobustDelayResult empirical_quantile(const Vector& t_all, double gamma);

struct OutputLoss {
  double value = 0.0;
  RobustDelayResult detail;
  DelayBreakdown selected;  // delays of the selected sample
  Vector grad_output;       // d value / d allocator output (zero if not requested)
};

// Robust gamma-quantile worst-case delay of the allocation encoded by the raw
// output x. The gradient follows only the selected sample and, within it, the
// device attaining the maximum.
OutputLoss robust_loss_from_output(const Vector& x, const NetworkRealization& realization,
                                   const UncertaintyBatch& batch, const SystemParams& params,
                                   double gamma, bool with_gradient = true);

struct ModelLoss {
  double value = 0.0;
  RobustDelayResult detail;
  LayerStack gradient;
};

// allocate -> worst_case_delays -> empirical_quantile with the parameter
// gradient of the resulting scalar.
ModelLoss robust_loss(const AllocatorModel& model, const NetworkRealization& realization,
                      const UncertaintyBatch& batch, const SystemParams& params, double gamma);

}  // namespace redge
