#include "redge/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>

#include "redge/parallel.hpp"

namespace redge {

namespace {

bool finite_stack(const LayerStack& s) {
  for (const auto& l : s) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

int batch_samples(const TrainingConfig& config, Scheme mode) {
  // Without injection every sample is identical, one suffices.
  return mode == Scheme::kNone ? 1 : config.samples;
}

bool within(double value, double target) {
  return std::abs(value - target) <= 1e-9 * std::abs(target);
}

}  // namespace

void AdamOptimizer::step(LayerStack& params, const LayerStack& grads) {
  if (grads.size() != params.size()) throw StructuralError("gradient/parameter depth mismatch");
  if (m_.empty()) {
    m_ = zeros_like(params);
    v_ = zeros_like(params);
  }
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m.array() = b1 * m.array() + (1.0 - b1) * g.array();
    v.array() = b2 * v.array() + (1.0 - b2) * g.array().square();
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    update(params[i].weight, m_[i].weight, v_[i].weight, grads[i].weight);
    update(params[i].bias, m_[i].bias, v_[i].bias, grads[i].bias);
  }
}

void TrainingConfig::validate() const {
  if (epochs < 0) throw ParameterError("epochs must be >= 0");
  if (minibatches_per_epoch < 1 || realizations_per_minibatch < 1 || samples < 1) {
    throw ParameterError("minibatch, realization and sample counts must be >= 1");
  }
  if (validation_size < 1 || test_size < 1) throw ParameterError("validation/test sizes must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0, 1)");
  if (gamma * samples < 1.0 - 1e-9) throw ParameterError("gamma * N must be >= 1");
  if (!(adam.learning_rate >= 0.0) || !(adam.epsilon > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ParameterError("invalid optimizer hyperparameters");
  }
}

std::string TrainingReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss_s,val_tgamma_s\n";
  for (const auto& e : epochs) {
    out << e.epoch << ',' << e.train_loss_s << ',' << e.val_tgamma_s << '\n';
  }
  return out.str();
}

RealizationSource default_source(const SystemParams& params) {
  return [params](Rng& rng) { return sample_realization(params, rng); };
}

UncertaintyBatch EvaluationSet::batch(std::size_t i, const SystemParams& params) const {
  const NetworkRealization& r = realizations.at(i);
  Rng rng(batch_seeds.at(i));
  return sample_uncertainty_batch(samples, r.devices(), r.antennas(), params.sigma_h_sq,
                                  params.sigma_w_sq, mode, rng);
}

EvaluationSet make_evaluation_set(const SystemParams& params, int size, int samples, Scheme mode,
                                  std::uint64_t seed, StreamTag tag,
                                  const RealizationSource& source) {
  if (size < 1 || samples < 1) throw ParameterError("evaluation set size and N must be >= 1");
  params.validate();
  const RealizationSource draw = source ? source : default_source(params);
  EvaluationSet set;
  set.samples = samples;
  set.mode = mode;
  set.realizations.reserve(static_cast<std::size_t>(size));
  set.batch_seeds.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    Rng rng = make_stream(seed, tag, {idx});
    set.realizations.push_back(draw(rng));
    set.batch_seeds.push_back(derive_seed(seed, tag, {idx, 1}));
  }
  return set;
}

EvaluationSummary evaluate(const AllocatorModel& model, const SystemParams& params,
                           const EvaluationSet& set, double gamma, int workers) {
  const std::size_t count = set.realizations.size();
  EvaluationSummary s;
  s.t_gamma.resize(static_cast<Eigen::Index>(count));
  s.comm.resize(static_cast<Eigen::Index>(count));
  s.comp.resize(static_cast<Eigen::Index>(count));
  std::vector<int> violations(count, 0);
  parallel_for(count, workers, [&](std::size_t i) {
    const NetworkRealization& r = set.realizations[i];
    const Vector x = forward(model, model_input(model, r));
    const UncertaintyBatch batch = set.batch(i, params);
    const OutputLoss loss = robust_loss_from_output(x, r, batch, params, gamma, false);
    const auto idx = static_cast<Eigen::Index>(i);
    s.t_gamma[idx] = loss.value;
    s.comm[idx] = loss.selected.communication.maxCoeff();
    s.comp[idx] = loss.selected.computation.maxCoeff();
    const ResourceAllocation a = map_to_allocation(x, params.p_max_mw, params.cpu);
    if (!within(a.total_power_mw(), params.p_max_mw) || !within(a.f_co.sum(), a.f_limit)) {
      violations[i] = 1;
    }
  });
  const double n = static_cast<double>(count);
  s.mean_t_gamma = s.t_gamma.mean();
  s.mean_comm = s.comm.mean();
  s.mean_comp = s.comp.mean();
  s.std_t_gamma =
      count > 1 ? std::sqrt((s.t_gamma.array() - s.mean_t_gamma).square().sum() / (n - 1.0)) : 0.0;
  for (int v : violations) s.feasibility_violations += v;
  return s;
}

Trainer::Trainer(TrainingConfig config, SystemParams params, AllocatorModel model)
    : config_(std::move(config)),
      params_(std::move(params)),
      model_(std::move(model)),
      optimizer_(config_.adam) {
  config_.validate();
  params_.validate();
  if (model_.devices() != params_.devices || model_.antennas() != params_.antennas) {
    throw StructuralError("model dimensions do not match the system parameters");
  }
}

MinibatchResult Trainer::loss_and_gradient(std::span<const NetworkRealization> realizations,
                                           std::span<const UncertaintyBatch> batches) const {
  if (realizations.size() != batches.size() || realizations.empty()) {
    throw StructuralError("need one uncertainty batch per realization");
  }
  const std::size_t count = realizations.size();
  Matrix features(model_.input_dim(), static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    features.col(static_cast<Eigen::Index>(i)) = model_input(model_, realizations[i]);
  }
  ForwardCache cache;
  const Matrix output = forward_batch(model_, features, &cache);

  MinibatchResult result;
  result.losses.assign(count, 0.0);
  Matrix grad_output(output.rows(), output.cols());
  parallel_for(count, config_.workers, [&](std::size_t i) {
    const auto col = static_cast<Eigen::Index>(i);
    const OutputLoss loss = robust_loss_from_output(output.col(col), realizations[i], batches[i],
                                                    params_, config_.gamma, true);
    result.losses[i] = loss.value;
    grad_output.col(col) = loss.grad_output;
  });
  // Fixed-order reduction.
  double sum = 0.0;
  for (double l : result.losses) sum += l;
  const double inv = 1.0 / static_cast<double>(count);
  result.mean_loss = sum * inv;
  grad_output *= inv;
  result.gradient = backward_batch(model_, cache, grad_output);
  return result;
}

double Trainer::step(std::span<const NetworkRealization> realizations,
                     std::span<const UncertaintyBatch> batches) {
  MinibatchResult r = loss_and_gradient(realizations, batches);
  if (!std::isfinite(r.mean_loss) || !finite_stack(r.gradient)) {
    throw TrainingDiverged(optimizer_.steps_taken(), 0, "non-finite loss or gradient");
  }
  optimizer_.step(model_.layers(), r.gradient);
  return r.mean_loss;
}

void Trainer::apply_gradient(const LayerStack& gradient) {
  optimizer_.step(model_.layers(), gradient);
}

TrainingResult train(const TrainingConfig& config, const SystemParams& params,
                     AllocatorModel model, const RealizationSource& source) {
  const auto start = std::chrono::steady_clock::now();
  Trainer trainer(config, params, std::move(model));
  const RealizationSource draw = source ? source : default_source(params);
  const Scheme mode = config.scheme;
  const int samples = batch_samples(config, mode);

  const EvaluationSet validation = make_evaluation_set(
      params, config.validation_size, samples, mode, config.seed, StreamTag::kValidation, draw);
  auto validate_model = [&](const AllocatorModel& m) {
    return evaluate(m, params, validation, config.gamma, config.workers).mean_t_gamma;
  };

  TrainingResult result;
  result.model = trainer.model();
  result.report.initial_val_tgamma_s = validate_model(trainer.model());
  result.report.best_val_tgamma_s = result.report.initial_val_tgamma_s;
  result.report.best_epoch = 0;

  const auto batch_size = static_cast<std::size_t>(config.realizations_per_minibatch);
  std::vector<NetworkRealization> realizations(batch_size);
  std::vector<UncertaintyBatch> batches(batch_size);
  std::vector<std::uint64_t> realization_seeds(batch_size);
  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (int mb = 0; mb < config.minibatches_per_epoch; ++mb, ++step) {
      parallel_for(batch_size, config.workers, [&](std::size_t i) {
        const auto s = static_cast<std::uint64_t>(step);
        const auto idx = static_cast<std::uint64_t>(i);
        realization_seeds[i] = derive_seed(config.seed, StreamTag::kTrainRealization, {s, idx});
        Rng rng(realization_seeds[i]);
        realizations[i] = draw(rng);
        Rng batch_rng = make_stream(config.seed, StreamTag::kTrainBatch, {s, idx});
        batches[i] = sample_uncertainty_batch(samples, params.devices, params.antennas,
                                              params.sigma_h_sq, params.sigma_w_sq, mode,
                                              batch_rng);
      });
      MinibatchResult r = trainer.loss_and_gradient(realizations, batches);
      if (!std::isfinite(r.mean_loss) || !finite_stack(r.gradient)) {
        std::size_t bad = 0;
        while (bad + 1 < r.losses.size() && std::isfinite(r.losses[bad])) ++bad;
        std::ostringstream msg;
        msg << "non-finite loss or gradient at step " << step << " (realization seed "
            << realization_seeds[bad] << ")";
        throw TrainingDiverged(step, realization_seeds[bad], msg.str());
      }
      trainer.apply_gradient(r.gradient);
      epoch_loss += r.mean_loss;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss_s = epoch_loss / config.minibatches_per_epoch;
    rec.val_tgamma_s = validate_model(trainer.model());
    result.report.epochs.push_back(rec);
    if (rec.val_tgamma_s < result.report.best_val_tgamma_s) {
      result.report.best_val_tgamma_s = rec.val_tgamma_s;
      result.report.best_epoch = epoch;
      result.model = trainer.model();
    }
  }
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace redge
