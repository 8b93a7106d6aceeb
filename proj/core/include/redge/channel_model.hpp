#pragma once

#include "redge/random.hpp"
#include "redge/types.hpp"

namespace redge {

// Ground-truth and estimated downlink channels. Row k holds device k's
// channel vector over the L antennas, i.e. entry (k, l) is h_{l,k}.
struct ChannelPair {
  CMatrix h_true;
  CMatrix h_est;
  double sigma_h_sq = 0.0;

  int devices() const { return static_cast<int>(h_est.rows()); }
  int antennas() const { return static_cast<int>(h_est.cols()); }
};

// Unit-norm beamformers, one column per device (L x K).
struct BeamformingMatrix {
  CMatrix v;
  double alpha = 0.0;
};

struct RateInputs {
  double bandwidth_hz = 0.0;
  double noise_power_mw = 0.0;
  Vector p_tx_mw;
};

// Draws (h_true, h_est) with h_est ~ CN(0, 1 - sigma_h_sq) and an independent
// error ~ CN(0, sigma_h_sq), so h_true = h_est + err has unit variance and
// h_est is its MMSE estimate. Throws ParameterError if sigma_h_sq is outside
// [0, 1] or a dimension is < 1.
ChannelPair sample_channel_pair(int antennas, int devices, double sigma_h_sq, Rng& rng);

// Regularized zero-forcing V = H (H^H H + alpha I_K)^{-1} with H = h_est^T
// (L x K), followed by column normalization. A column that comes out exactly
// zero (device with an all-zero estimate) is replaced by the canonical basis
// vector e_{k mod L}.
BeamformingMatrix rzf_beamformers(const CMatrix& h_est, double alpha);

// Effective channels E(i, j) = h_i^H v_j for a K x L channel matrix.
CMatrix effective_channels(const CMatrix& channels, const CMatrix& v);

// Per-device rates in bit/s: W log2(1 + SINR_k).
Vector achievable_rates(const CMatrix& channels, const BeamformingMatrix& beams,
                        const RateInputs& inputs);

// Same as achievable_rates but starting from the gain matrix
// gains(k, j) = |h_k^H v_j|^2.
Vector rates_from_gains(const Matrix& gains, const Vector& p_tx_mw, double bandwidth_hz,
                        double noise_power_mw);

}  // namespace redge
