#include "redge/allocator.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace redge {

int feature_count(InputMode mode, int devices, int antennas) {
  switch (mode) {
    case InputMode::kEffectiveChannels:
      return 2 * devices * devices + devices;
    case InputMode::kRawChannels:
      return 2 * antennas * devices + devices;
  }
  return 0;
}

AllocatorModel AllocatorModel::initialize(int devices, int antennas, const NetworkShape& shape,
                                          Rng& rng) {
  if (devices < 1 || antennas < 1) throw ParameterError("devices and antennas must be >= 1");
  if (shape.hidden_depth < 1 || shape.hidden_width < 1) {
    throw ParameterError("hidden depth and width must be >= 1");
  }
  AllocatorModel m;
  m.devices_ = devices;
  m.antennas_ = antennas;
  m.shape_ = shape;
  StandardNormal normal;
  int fan_in = m.input_dim();
  for (int layer = 0; layer <= shape.hidden_depth; ++layer) {
    const int fan_out = layer == shape.hidden_depth ? m.output_dim() : shape.hidden_width;
    DenseLayer d;
    d.weight.resize(fan_out, fan_in);
    const bool output = layer == shape.hidden_depth;
    const double stddev = (output ? kOutputInitGain : 1.0) * std::sqrt(2.0 / fan_in);
    for (Eigen::Index c = 0; c < d.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < d.weight.rows(); ++r) d.weight(r, c) = stddev * normal(rng);
    }
    d.bias = Vector::Zero(fan_out);
    m.layers_.push_back(std::move(d));
    fan_in = fan_out;
  }
  m.feature_shift_ = Vector::Zero(m.input_dim());
  m.feature_scale_ = Vector::Ones(m.input_dim());
  return m;
}

AllocatorModel AllocatorModel::from_parts(int devices, int antennas, const NetworkShape& shape,
                                          LayerStack layers, Vector feature_shift,
                                          Vector feature_scale) {
  AllocatorModel m;
  m.devices_ = devices;
  m.antennas_ = antennas;
  m.shape_ = shape;
  if (static_cast<int>(layers.size()) != shape.hidden_depth + 1) {
    throw StructuralError("layer count does not match hidden depth");
  }
  Eigen::Index fan_in = m.input_dim();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Eigen::Index fan_out =
        i + 1 == layers.size() ? m.output_dim() : shape.hidden_width;
    if (layers[i].weight.rows() != fan_out || layers[i].weight.cols() != fan_in ||
        layers[i].bias.size() != fan_out) {
      throw StructuralError("layer " + std::to_string(i) + " has inconsistent dimensions");
    }
    fan_in = fan_out;
  }
  m.layers_ = std::move(layers);
  m.set_normalization(std::move(feature_shift), std::move(feature_scale));
  return m;
}

void AllocatorModel::set_normalization(Vector shift, Vector scale) {
  if (shift.size() != input_dim() || scale.size() != input_dim()) {
    throw StructuralError("normalization constants must match the input dimension");
  }
  if ((scale.array() <= 0.0).any()) throw ParameterError("feature scales must be > 0");
  feature_shift_ = std::move(shift);
  feature_scale_ = std::move(scale);
}

Vector AllocatorModel::normalize(const Vector& raw) const {
  if (raw.size() != input_dim()) throw StructuralError("feature length does not match model");
  return ((raw - feature_shift_).array() / feature_scale_.array()).matrix();
}

bool AllocatorModel::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return feature_shift_.allFinite() && feature_scale_.allFinite();
}

std::size_t AllocatorModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Vector effective_channel_features(const CMatrix& h_est, const BeamformingMatrix& beams,
                                  const Vector& omega_est) {
  const Eigen::Index k_count = h_est.rows();
  if (beams.v.cols() != k_count || omega_est.size() != k_count) {
    throw StructuralError("feature inputs disagree on the device count");
  }
  const CMatrix eff = effective_channels(h_est, beams.v);
  Vector f(2 * k_count * k_count + k_count);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < k_count; ++i) {
    for (Eigen::Index j = 0; j < k_count; ++j) f[idx++] = eff(i, j).real();
  }
  for (Eigen::Index i = 0; i < k_count; ++i) {
    for (Eigen::Index j = 0; j < k_count; ++j) f[idx++] = eff(i, j).imag();
  }
  f.tail(k_count) = omega_est;
  return f;
}

Vector raw_channel_features(const CMatrix& h_est, const Vector& omega_est) {
  const Eigen::Index k_count = h_est.rows();
  const Eigen::Index l_count = h_est.cols();
  if (omega_est.size() != k_count) throw StructuralError("omega_est length mismatch");
  Vector f(2 * k_count * l_count + k_count);
  Eigen::Index idx = 0;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    for (Eigen::Index l = 0; l < l_count; ++l) f[idx++] = h_est(k, l).real();
  }
  for (Eigen::Index k = 0; k < k_count; ++k) {
    for (Eigen::Index l = 0; l < l_count; ++l) f[idx++] = h_est(k, l).imag();
  }
  f.tail(k_count) = omega_est;
  return f;
}

Vector raw_features(InputMode mode, const NetworkRealization& realization) {
  switch (mode) {
    case InputMode::kEffectiveChannels:
      return effective_channel_features(realization.channels.h_est, realization.beams,
                                        realization.tasks.omega_est);
    case InputMode::kRawChannels:
      return raw_channel_features(realization.channels.h_est, realization.tasks.omega_est);
  }
  throw StructuralError("unknown input mode");
}

Vector model_input(const AllocatorModel& model, const NetworkRealization& realization) {
  if (realization.devices() != model.devices() || realization.antennas() != model.antennas()) {
    throw StructuralError("realization dimensions do not match the model");
  }
  return model.normalize(raw_features(model.shape().input_mode, realization));
}

void fit_input_normalization(AllocatorModel& model, const SystemParams& params,
                             std::uint64_t seed, int draws) {
  if (draws < 2) throw ParameterError("normalization needs at least 2 draws");
  const int k_count = model.devices();
  const int dim = model.input_dim();
  const int channel_dim = dim - k_count;
  Rng rng = make_stream(seed, StreamTag::kNormalization);
  const Vector no_omega = Vector::Zero(k_count);

  // Welford accumulation per feature.
  Vector mean = Vector::Zero(channel_dim);
  Vector m2 = Vector::Zero(channel_dim);
  for (int n = 0; n < draws; ++n) {
    const ChannelPair ch =
        sample_channel_pair(model.antennas(), k_count, params.sigma_h_sq, rng);
    Vector f;
    if (model.shape().input_mode == InputMode::kEffectiveChannels) {
      f = effective_channel_features(ch.h_est, rzf_beamformers(ch.h_est, params.rzf_alpha),
                                     no_omega);
    } else {
      f = raw_channel_features(ch.h_est, no_omega);
    }
    const Vector x = f.head(channel_dim);
    const Vector delta = x - mean;
    mean += delta / static_cast<double>(n + 1);
    m2.array() += delta.array() * (x - mean).array();
  }
  Vector shift = Vector::Zero(dim);
  Vector scale = Vector::Ones(dim);
  for (int i = 0; i < channel_dim; ++i) {
    const double sd = std::sqrt(m2[i] / (draws - 1));
    shift[i] = mean[i];
    scale[i] = sd > 1e-12 ? sd : 1.0;
  }
  scale.tail(k_count).setConstant(params.omega_mean());
  model.set_normalization(std::move(shift), std::move(scale));
}

Vector forward(const AllocatorModel& model, const Vector& features) {
  if (features.size() != model.input_dim()) {
    throw StructuralError("feature length " + std::to_string(features.size()) +
                          " does not match model input " + std::to_string(model.input_dim()));
  }
  Vector a = features;
  const auto& layers = model.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Vector z = layers[i].weight * a + layers[i].bias;
    if (i + 1 < layers.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Matrix forward_batch(const AllocatorModel& model, const Matrix& features, ForwardCache* cache) {
  if (features.rows() != model.input_dim()) {
    throw StructuralError("feature batch rows do not match model input");
  }
  const auto& layers = model.layers();
  if (cache) {
    cache->activations.clear();
    cache->activations.reserve(layers.size());
    cache->activations.push_back(features);
  }
  Matrix a = features;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Matrix z = layers[i].weight * a;
    z.colwise() += layers[i].bias;
    if (i + 1 < layers.size()) {
      z = z.cwiseMax(0.0);
      if (cache) cache->activations.push_back(z);
    }
    a = std::move(z);
  }
  return a;
}

LayerStack backward_batch(const AllocatorModel& model, const ForwardCache& cache,
                          const Matrix& grad_output) {
  const auto& layers = model.layers();
  if (cache.activations.size() != layers.size()) {
    throw StructuralError("forward cache does not match the model depth");
  }
  if (grad_output.rows() != model.output_dim() ||
      grad_output.cols() != cache.activations.front().cols()) {
    throw StructuralError("output gradient has the wrong shape");
  }
  LayerStack grads(layers.size());
  Matrix delta = grad_output;
  for (std::size_t i = layers.size(); i-- > 0;) {
    const Matrix& input = cache.activations[i];
    grads[i].weight.noalias() = delta * input.transpose();
    grads[i].bias = delta.rowwise().sum();
    if (i > 0) {
      Matrix back = layers[i].weight.transpose() * delta;
      back.array() *= (input.array() > 0.0).cast<double>();
      delta = std::move(back);
    }
  }
  return grads;
}

LayerStack zeros_like(const LayerStack& layers) {
  LayerStack out(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out[i].weight = Matrix::Zero(layers[i].weight.rows(), layers[i].weight.cols());
    out[i].bias = Vector::Zero(layers[i].bias.size());
  }
  return out;
}

Vector softmax(const Eigen::Ref<const Vector>& logits) {
  const double peak = logits.maxCoeff();
  Vector e = (logits.array() - peak).exp().matrix();
  return e / e.sum();
}

ResourceAllocation map_to_allocation(const Vector& x, double p_max_mw, const CpuModel& cpu) {
  if (!(p_max_mw > 0.0)) throw ParameterError("p_max must be > 0");
  if (x.size() < 3 || x.size() % 2 == 0) {
    throw StructuralError("allocator output must have odd length 2K + 1");
  }
  const Eigen::Index k_count = (x.size() - 1) / 2;
  const Vector power_share = softmax(x.head(k_count + 1));
  const Vector cycle_share = softmax(x.tail(k_count));

  ResourceAllocation a;
  a.p_tx_mw = p_max_mw * power_share.head(k_count);
  a.p_co_mw = p_max_mw * power_share[k_count];
  a.f_pow = cycles_from_compute_power(a.p_co_mw, cpu);
  a.power_limited = a.f_pow <= cpu.f_max;
  a.f_limit = a.power_limited ? a.f_pow : cpu.f_max;
  a.f_co = a.f_limit * cycle_share;
  return a;
}

Vector map_to_allocation_backward(const Vector& x, double p_max_mw, const CpuModel& cpu,
                                  const AllocationGradient& upstream) {
  const Eigen::Index k_count = (x.size() - 1) / 2;
  if (upstream.p_tx_mw.size() != k_count || upstream.f_co.size() != k_count) {
    throw StructuralError("allocation gradient has the wrong shape");
  }
  const Vector power_share = softmax(x.head(k_count + 1));
  const Vector cycle_share = softmax(x.tail(k_count));
  const double p_co = p_max_mw * power_share[k_count];
  const double f_pow = cycles_from_compute_power(p_co, cpu);
  const bool power_limited = f_pow <= cpu.f_max;
  const double f_limit = power_limited ? f_pow : cpu.f_max;

  // f_co = f_limit * s  =>  dL/ds = f_limit * g,  dL/df_limit = s . g
  const Vector d_share = f_limit * upstream.f_co;
  const double d_limit = cycle_share.dot(upstream.f_co);
  double d_pco = upstream.p_co_mw;
  if (power_limited && p_co > 0.0) d_pco += d_limit * f_pow / (cpu.mu * p_co);

  Vector grad(x.size());
  grad.tail(k_count) =
      (cycle_share.array() * (d_share.array() - cycle_share.dot(d_share))).matrix();

  Vector d_power(k_count + 1);
  d_power.head(k_count) = p_max_mw * upstream.p_tx_mw;
  d_power[k_count] = p_max_mw * d_pco;
  grad.head(k_count + 1) =
      (power_share.array() * (d_power.array() - power_share.dot(d_power))).matrix();
  return grad;
}

ResourceAllocation allocate(const AllocatorModel& model, const NetworkRealization& realization,
                            double p_max_mw, const CpuModel& cpu) {
  return map_to_allocation(forward(model, model_input(model, realization)), p_max_mw, cpu);
}

}  // namespace redge
