#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "redge/network.hpp"
#include "redge/random.hpp"
#include "redge/types.hpp"

namespace redge {

enum class InputMode {
  kEffectiveChannels,  // Re/Im of h_i^H v_j plus intensities: 2K^2 + K inputs
  kRawChannels,        // Re/Im of every h_{l,k} plus intensities: 2LK + K inputs
};

struct NetworkShape {
  int hidden_depth = 4;
  int hidden_width = 128;
  InputMode input_mode = InputMode::kEffectiveChannels;
};

// Fully-connected layer y = W x + b, W is (out x in).
struct DenseLayer {
  Matrix weight;
  Vector bias;
};

using LayerStack = std::vector<DenseLayer>;

int feature_count(InputMode mode, int devices, int antennas);

inline constexpr double kOutputInitGain = 0.1;

// Feed-forward allocator: `hidden_depth` ReLU layers of `hidden_width`
// followed by a linear output layer of 2K + 1 logits.
class AllocatorModel {
 public:
  AllocatorModel() = default;

  // He-style initialization (N(0, 2/fan_in) weights, zero biases) and an
  // identity input normalization. The linear output layer's weights are
  // additionally scaled by kOutputInitGain so the initial allocation is close
  // to the uniform split.
  static AllocatorModel initialize(int devices, int antennas, const NetworkShape& shape,
                                   Rng& rng);

  // Builds a model from explicit parameters; validates every dimension.
  static AllocatorModel from_parts(int devices, int antennas, const NetworkShape& shape,
                                   LayerStack layers, Vector feature_shift,
                                   Vector feature_scale);

  int devices() const { return devices_; }
  int antennas() const { return antennas_; }
  const NetworkShape& shape() const { return shape_; }
  int input_dim() const { return feature_count(shape_.input_mode, devices_, antennas_); }
  int output_dim() const { return 2 * devices_ + 1; }

  const LayerStack& layers() const { return layers_; }
  LayerStack& layers() { return layers_; }

  const Vector& feature_shift() const { return feature_shift_; }
  const Vector& feature_scale() const { return feature_scale_; }
  void set_normalization(Vector shift, Vector scale);

  Vector normalize(const Vector& raw) const;
  bool all_finite() const;
  std::size_t parameter_count() const;

 private:
  int devices_ = 0;
  int antennas_ = 0;
  NetworkShape shape_{};
  LayerStack layers_;
  Vector feature_shift_;
  Vector feature_scale_;
};

// Unnormalized effective-channel features: Re(h_i^H v_j) for all (i, j)
// row-major, then Im(h_i^H v_j) in the same order, then omega_est.
Vector effective_channel_features(const CMatrix& h_est, const BeamformingMatrix& beams,
                                  const Vector& omega_est);

// Unnormalized raw-channel features: Re(h_{l,k}) for k-major (k, l), then
// Im(h_{l,k}), then omega_est.
Vector raw_channel_features(const CMatrix& h_est, const Vector& omega_est);

Vector raw_features(InputMode mode, const NetworkRealization& realization);

// Normalized network input for one realization.
Vector model_input(const AllocatorModel& model, const NetworkRealization& realization);

// Channel features get per-feature mean/std over `draws` pilot realizations;
// intensity features are divided by the Gamma mean. Features with zero spread
// keep scale 1.
void fit_input_normalization(AllocatorModel& model, const SystemParams& params,
                             std::uint64_t seed, int draws = 10000);

Vector forward(const AllocatorModel& model, const Vector& features);

// Post-activation values of every layer for a batch; activations[0] is the
// input batch (features x batch).
struct ForwardCache {
  std::vector<Matrix> activations;
};

Matrix forward_batch(const AllocatorModel& model, const Matrix& features,
                     ForwardCache* cache = nullptr);

// Parameter gradients for a batch given dLoss/dOutput (output_dim x batch).
LayerStack backward_batch(const AllocatorModel& model, const ForwardCache& cache,
                          const Matrix& grad_output);

LayerStack zeros_like(const LayerStack& layers);

// Numerically stable softmax (max subtraction).
Vector softmax(const Eigen::Ref<const Vector>& logits);

struct ResourceAllocation {
  Vector p_tx_mw;
  double p_co_mw = 0.0;
  Vector f_co;           // cycles/s
  double f_pow = 0.0;    // cycles/s sustainable with p_co
  double f_limit = 0.0;  // min(F_max, f_pow)
  bool power_limited = true;

  double total_power_mw() const { return p_tx_mw.sum() + p_co_mw; }
};

// Softmax heads: [p_tx; p_co] = P_max softmax(x_1..x_{K+1}),
// f_co = min(F_max, F_pow(p_co)) softmax(x_{K+2}..x_{2K+1}).
ResourceAllocation map_to_allocation(const Vector& x, double p_max_mw, const CpuModel& cpu);

// Upstream derivative with respect to each allocation quantity.
struct AllocationGradient {
  Vector p_tx_mw;
  double p_co_mw = 0.0;
  Vector f_co;
};

// Vector-Jacobian product of map_to_allocation. At the F_max == F_pow tie the
// power branch is differentiated.
Vector map_to_allocation_backward(const Vector& x, double p_max_mw, const CpuModel& cpu,
                                  const AllocationGradient& upstream);

ResourceAllocation allocate(const AllocatorModel& model, const NetworkRealization& realization,
                            double p_max_mw, const CpuModel& cpu);

// Checkpoints are JSON documents tagged with a format name and version.
inline constexpr int kCheckpointVersion = 1;
std::string checkpoint_to_string(const AllocatorModel& model);
AllocatorModel checkpoint_from_string(const std::string& text);
// Writes via a temporary file and rename.
void save_checkpoint(const AllocatorModel& model, const std::filesystem::path& path);
AllocatorModel load_checkpoint(const std::filesystem::path& path);

}  // namespace redge
