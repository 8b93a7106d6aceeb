#include "redge/network.hpp"

#include <utility>

namespace redge {

void SystemParams::validate() const {
  if (antennas < 1 || devices < 1) throw ParameterError("antennas and devices must be >= 1");
  if (!(p_max_mw > 0.0)) throw ParameterError("p_max must be > 0");
  if (!(bandwidth_hz > 0.0)) throw ParameterError("bandwidth must be > 0");
  if (!(noise_psd_mw_per_hz > 0.0)) throw ParameterError("noise PSD must be > 0");
  if (!(task_sizes.d_in_bits > 0.0) || !(task_sizes.d_out_bits > 0.0)) {
    throw ParameterError("task sizes must be > 0");
  }
  if (!(rzf_alpha > 0.0)) throw ParameterError("rzf_alpha must be > 0");
  if (!(cpu.tau > 0.0) || !(cpu.mu > 1.0) || !(cpu.f_max > 0.0)) {
    throw ParameterError("CPU model needs tau > 0, mu > 1, f_max > 0");
  }
  if (!(gamma_shape > 0.0) || !(gamma_scale > 0.0)) {
    throw ParameterError("Gamma shape and scale must be > 0");
  }
  if (!(sigma_h_sq >= 0.0 && sigma_h_sq <= 1.0)) throw ParameterError("sigma_h_sq must be in [0, 1]");
  if (!(sigma_w_sq >= 0.0)) throw ParameterError("sigma_w_sq must be >= 0");
}

NetworkRealization make_realization(ChannelPair channels, TaskProfile tasks, double alpha) {
  if (channels.devices() != tasks.devices()) {
    throw StructuralError("channel and task device counts differ");
  }
  NetworkRealization r;
  r.beams = rzf_beamformers(channels.h_est, alpha);
  r.channels = std::move(channels);
  r.tasks = std::move(tasks);
  return r;
}

NetworkRealization sample_realization(const SystemParams& params, Rng& rng) {
  ChannelPair channels =
      sample_channel_pair(params.antennas, params.devices, params.sigma_h_sq, rng);
  TaskProfile tasks = sample_task_profile(params.devices, params.gamma_shape, params.gamma_scale,
                                          params.sigma_w_sq, params.task_sizes, rng);
  return make_realization(std::move(channels), std::move(tasks), params.rzf_alpha);
}

}  // namespace redge
