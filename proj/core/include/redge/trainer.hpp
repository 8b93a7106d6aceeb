#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "redge/allocator.hpp"
#include "redge/network.hpp"
#include "redge/robust_objective.hpp"

namespace redge {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive moment estimation over a LayerStack.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig config = {}) : config_(config) {}

  void step(LayerStack& params, const LayerStack& grads);
  long steps_taken() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  LayerStack m_;
  LayerStack v_;
  long t_ = 0;
};

struct TrainingConfig {
  int epochs = 50;
  int minibatches_per_epoch = 10;
  int realizations_per_minibatch = 100;
  int samples = 200;  // N, injected error realizations per network realization
  double gamma = 0.05;
  Scheme scheme = Scheme::kJoint;
  AdamConfig adam{};
  std::uint64_t seed = 1;
  int validation_size = 200;
  int test_size = 200;
  int workers = 1;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss_s = 0.0;
  double val_tgamma_s = 0.0;
};

struct TrainingReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_tgamma_s = 0.0;
  double initial_val_tgamma_s = 0.0;
  std::string checkpoint;  // path of the saved best model, if any
  double wall_seconds = 0.0;

  // epoch,train_loss_s,val_tgamma_s
  std::string to_csv() const;
};

struct TrainingResult {
  TrainingReport report;
  AllocatorModel model;  // parameters with the best validation metric
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(long step, std::uint64_t realization_seed, const std::string& what)
      : std::runtime_error(what), step_(step), realization_seed_(realization_seed) {}
  long step() const { return step_; }
  std::uint64_t realization_seed() const { return realization_seed_; }

 private:
  long step_;
  std::uint64_t realization_seed_;
};

// Produces one network realization from a random stream.
using RealizationSource = std::function<NetworkRealization(Rng&)>;

RealizationSource default_source(const SystemParams& params);

// Held-out realizations with fixed uncertainty batches. Batches are
// regenerated from per-realization seeds so large sets stay small in memory.
struct EvaluationSet {
  std::vector<NetworkRealization> realizations;
  std::vector<std::uint64_t> batch_seeds;
  int samples = 0;
  Scheme mode = Scheme::kJoint;

  UncertaintyBatch batch(std::size_t i, const SystemParams& params) const;
};

EvaluationSet make_evaluation_set(const SystemParams& params, int size, int samples, Scheme mode,
                                  std::uint64_t seed, StreamTag tag = StreamTag::kTest,
                                  const RealizationSource& source = {});

struct EvaluationSummary {
  Vector t_gamma;  // per realization
  Vector comm;     // max_k communication delay of the selected sample
  Vector comp;     // max_k computation delay of the selected sample
  double mean_t_gamma = 0.0;
  double std_t_gamma = 0.0;
  double mean_comm = 0.0;
  double mean_comp = 0.0;
  int feasibility_violations = 0;  // allocations breaking the power/cycle budgets
};

EvaluationSummary evaluate(const AllocatorModel& model, const SystemParams& params,
                           const EvaluationSet& set, double gamma, int workers = 1);

struct MinibatchResult {
  double mean_loss = 0.0;
  LayerStack gradient;  // gradient of mean_loss
  std::vector<double> losses;
};

class Trainer {
 public:
  Trainer(TrainingConfig config, SystemParams params, AllocatorModel model);

  // Mean robust loss and its gradient over paired realizations and batches.
  MinibatchResult loss_and_gradient(std::span<const NetworkRealization> realizations,
                                    std::span<const UncertaintyBatch> batches) const;

  // One optimizer step on the mean loss; returns the mean loss before the step.
  double step(std::span<const NetworkRealization> realizations,
              std::span<const UncertaintyBatch> batches);

  // Optimizer update with an externally computed gradient.
  void apply_gradient(const LayerStack& gradient);

  const AllocatorModel& model() const { return model_; }
  AllocatorModel& model() { return model_; }
  const TrainingConfig& config() const { return config_; }
  const SystemParams& params() const { return params_; }

 private:
  TrainingConfig config_;
  SystemParams params_;
  AllocatorModel model_;
  AdamOptimizer optimizer_;
};

// Online minibatch training with per-epoch validation and best-model
// selection. Throws TrainingDiverged on a non-finite loss or gradient.
TrainingResult train(const TrainingConfig& config, const SystemParams& params,
                     AllocatorModel model, const RealizationSource& source = {});

}  // namespace redge
