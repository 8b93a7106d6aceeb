#include "redge/channel_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace redge {

ChannelPair sample_channel_pair(int antennas, int devices, double sigma_h_sq, Rng& rng) {
  if (!(sigma_h_sq >= 0.0 && sigma_h_sq <= 1.0)) {
    throw ParameterError("sigma_h_sq must lie in [0, 1], got " + std::to_string(sigma_h_sq));
  }
  if (antennas < 1 || devices < 1) {
    throw ParameterError("antenna and device counts must be >= 1");
  }
  ChannelPair pair;
  pair.sigma_h_sq = sigma_h_sq;
  pair.h_est.resize(devices, antennas);
  pair.h_true.resize(devices, antennas);
  StandardNormal normal;
  const double est_var = 1.0 - sigma_h_sq;
  for (int k = 0; k < devices; ++k) {
    for (int l = 0; l < antennas; ++l) {
      const Complex est = complex_normal(rng, normal, est_var);
      const Complex err = complex_normal(rng, normal, sigma_h_sq);
      pair.h_est(k, l) = est;
      pair.h_true(k, l) = est + err;
    }
  }
  return pair;
}

BeamformingMatrix rzf_beamformers(const CMatrix& h_est, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("RZF regularizer alpha must be > 0");
  const Eigen::Index devices = h_est.rows();
  const Eigen::Index antennas = h_est.cols();
  if (devices < 1 || antennas < 1) throw StructuralError("empty channel matrix");

  const CMatrix h = h_est.transpose();  // L x K, columns are channel vectors
  CMatrix gram = h.adjoint() * h;
  gram.diagonal().array() += alpha;
  BeamformingMatrix out;
  out.alpha = alpha;
  out.v = h * gram.partialPivLu().inverse();
  for (Eigen::Index k = 0; k < devices; ++k) {
    const double norm = out.v.col(k).norm();
    if (norm > 0.0) {
      out.v.col(k) /= norm;
    } else {
      out.v.col(k).setZero();
      out.v(k % antennas, k) = 1.0;
    }
  }
  return out;
}

CMatrix effective_channels(const CMatrix& channels, const CMatrix& v) {
  if (channels.cols() != v.rows()) {
    throw StructuralError("channel/beamformer antenna dimension mismatch");
  }
  return channels.conjugate() * v;
}

Vector rates_from_gains(const Matrix& gains, const Vector& p_tx_mw, double bandwidth_hz,
                        double noise_power_mw) {
  const Eigen::Index k_count = gains.rows();
  if (gains.cols() != k_count || p_tx_mw.size() != k_count) {
    throw StructuralError("gain matrix and power vector dimensions differ");
  }
  Vector rates(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    double interference = 0.0;
    for (Eigen::Index j = 0; j < k_count; ++j) {
      if (j != k) interference += gains(k, j) * p_tx_mw[j];
    }
    const double sinr = gains(k, k) * p_tx_mw[k] / (interference + noise_power_mw);
    rates[k] = bandwidth_hz * std::log1p(sinr) / std::numbers::ln2;
  }
  return rates;
}

Vector achievable_rates(const CMatrix& channels, const BeamformingMatrix& beams,
                        const RateInputs& inputs) {
  if (channels.rows() != beams.v.cols()) {
    throw StructuralError("channel/beamformer device dimension mismatch");
  }
  const Matrix gains = effective_channels(channels, beams.v).cwiseAbs2();
  return rates_from_gains(gains, inputs.p_tx_mw, inputs.bandwidth_hz, inputs.noise_power_mw);
}

}  // namespace redge
