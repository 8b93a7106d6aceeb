#pragma once

#include "redge/channel_model.hpp"
#include "redge/compute_model.hpp"
#include "redge/random.hpp"

namespace redge {

// Physical parameters of one single-cell edge-computing network. Powers are
// in mW, frequencies in cycles/s, sizes in bits.
struct SystemParams {
  int antennas = 8;
  int devices = 6;
  double p_max_mw = 6309.573444801933;  // 38 dBm
  double bandwidth_hz = 1e6;
  double noise_psd_mw_per_hz = 3.1622776601683794e-8;  // -75 dBm/Hz
  TaskSizes task_sizes{};
  double rzf_alpha = 0.2;
  CpuModel cpu{};
  double gamma_shape = 2.0;
  double gamma_scale = 200.0;
  double sigma_h_sq = 0.05;
  double sigma_w_sq = 6400.0;

  double noise_power_mw() const { return noise_psd_mw_per_hz * bandwidth_hz; }
  double omega_mean() const { return gamma_shape * gamma_scale; }
  // Throws ParameterError when any field is outside its admissible range.
  void validate() const;
};

// One draw of the network: channels, tasks and the RZF beamformers that the
// base station derives from the estimated channels.
struct NetworkRealization {
  ChannelPair channels;
  TaskProfile tasks;
  BeamformingMatrix beams;

  int devices() const { return channels.devices(); }
  int antennas() const { return channels.antennas(); }
};

NetworkRealization sample_realization(const SystemParams& params, Rng& rng);

// Assembles a realization from given channels and tasks, computing RZF beams.
NetworkRealization make_realization(ChannelPair channels, TaskProfile tasks, double alpha);

}  // namespace redge
