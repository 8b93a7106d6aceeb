#include "redge/oracle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "redge/parallel.hpp"

namespace redge {

BatchEvaluator::BatchEvaluator(const NetworkRealization& realization,
                               const UncertaintyBatch& batch, const SystemParams& params)
    : realization_(&realization), params_(&params) {
  const int distinct = batch.mode == Scheme::kNone ? 1 : batch.samples;
  states_.resize(static_cast<std::size_t>(distinct));
  for (int n = 0; n < distinct; ++n) {
    sample_state(realization, batch, n, states_[static_cast<std::size_t>(n)]);
  }
  samples_ = batch.samples;
}

Vector BatchEvaluator::worst_case(const ResourceAllocation& alloc) const {
  Vector t(samples_);
  for (std::size_t n = 0; n < states_.size(); ++n) {
    const DelayBreakdown d = delays_for_state(states_[n], alloc, *realization_, *params_);
    t[static_cast<Eigen::Index>(n)] = d.total.maxCoeff();
  }
  if (states_.size() == 1) t.setConstant(t[0]);
  return t;
}

double BatchEvaluator::t_gamma(const ResourceAllocation& alloc, double gamma) const {
  return empirical_quantile(worst_case(alloc), gamma).t_gamma;
}

ResourceAllocation allocation_from_shares(const Vector& power_shares, const Vector& cycle_shares,
                                          double p_max_mw, const CpuModel& cpu) {
  const Eigen::Index k = cycle_shares.size();
  if (power_shares.size() != k + 1) throw StructuralError("need K + 1 power shares for K devices");
  ResourceAllocation a;
  a.p_tx_mw = p_max_mw * power_shares.head(k);
  a.p_co_mw = p_max_mw * power_shares[k];
  a.f_pow = cycles_from_compute_power(a.p_co_mw, cpu);
  a.power_limited = a.f_pow <= cpu.f_max;
  a.f_limit = std::min(cpu.f_max, a.f_pow);
  a.f_co = a.f_limit * cycle_shares;
  return a;
}

namespace {

constexpr double kShareSlack = 1e-12;

// Free coordinates -> share vectors. Full layout: K power fractions for p_tx,
// then K - 1 cycle fractions; the last entry of each simplex is implied.
// Symmetric layout: one coordinate, the total transmit fraction.
bool shares_from_free(const std::vector<double>& z, int devices, bool symmetric, Vector& power,
                      Vector& cycles) {
  const Eigen::Index k = devices;
  power.resize(k + 1);
  cycles.resize(k);
  if (symmetric) {
    if (z[0] < 0.0 || z[0] > 1.0) return false;
    power.head(k).setConstant(z[0] / static_cast<double>(k));
    power[k] = 1.0 - z[0];
    cycles.setConstant(1.0 / static_cast<double>(k));
    return true;
  }
  double sp = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double u = z[static_cast<std::size_t>(i)];
    if (u < 0.0) return false;
    power[i] = u;
    sp += u;
  }
  if (sp > 1.0 + kShareSlack) return false;
  power[k] = std::max(0.0, 1.0 - sp);
  double sc = 0.0;
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    const double c = z[static_cast<std::size_t>(k + i)];
    if (c < 0.0) return false;
    cycles[i] = c;
    sc += c;
  }
  if (sc > 1.0 + kShareSlack) return false;
  cycles[k - 1] = std::max(0.0, 1.0 - sc);
  return true;
}

}  // namespace

GridOracleResult grid_search_oracle(const BatchEvaluator& evaluator, int devices,
                                    const SystemParams& params, double gamma,
                                    const GridOracleOptions& options) {
  if (devices < 1 || devices > 2) throw ParameterError("grid oracle supports K = 1 or K = 2");
  if (options.coarse_steps < 1 || options.refinements < 0 || options.refine_steps < 1) {
    throw ParameterError("invalid grid oracle resolution");
  }
  const std::size_t dims = options.symmetric ? 1 : static_cast<std::size_t>(2 * devices - 1);

  GridOracleResult best;
  best.t_gamma = std::numeric_limits<double>::infinity();
  Vector power, cycles;
  std::vector<double> z(dims);

  // Evaluates every point of the product grid center +- steps * h (or the
  // unit box when center is empty).
  auto scan = [&](const std::vector<double>& center, int steps, double h) {
    std::vector<int> idx(dims, center.empty() ? 0 : -steps);
    for (;;) {
      for (std::size_t d = 0; d < dims; ++d) {
        z[d] = center.empty() ? idx[d] * h : center[d] + idx[d] * h;
      }
      if (shares_from_free(z, devices, options.symmetric, power, cycles)) {
        const ResourceAllocation a =
            allocation_from_shares(power, cycles, params.p_max_mw, params.cpu);
        const double t = evaluator.t_gamma(a, gamma);
        ++best.evaluations;
        if (t < best.t_gamma) {
          best.t_gamma = t;
          best.power_shares = power;
          best.cycle_shares = cycles;
          best.allocation = a;
        }
      }
      std::size_t d = 0;
      while (d < dims && ++idx[d] > steps) {
        idx[d] = center.empty() ? 0 : -steps;
        ++d;
      }
      if (d == dims) break;
    }
  };

  double h = 1.0 / options.coarse_steps;
  scan({}, options.coarse_steps, h);
  if (!std::isfinite(best.t_gamma)) return best;
  for (int r = 0; r < options.refinements; ++r) {
    std::vector<double> center(dims);
    if (options.symmetric) {
      center[0] = 1.0 - best.power_shares[devices];
    } else {
      for (int i = 0; i < devices; ++i) center[static_cast<std::size_t>(i)] = best.power_shares[i];
      for (int i = 0; i + 1 < devices; ++i) {
        center[static_cast<std::size_t>(devices + i)] = best.cycle_shares[i];
      }
    }
    h /= options.refine_steps;
    scan(center, options.refine_steps, h);
  }
  return best;
}

NetworkRealization symmetric_instance(const SystemParams& params) {
  if (params.devices != 2 || params.antennas < 2) {
    throw ParameterError("the symmetric instance needs K = 2 and L >= 2");
  }
  const double s = std::sqrt(params.antennas * (1.0 - params.sigma_h_sq));
  ChannelPair channels;
  channels.sigma_h_sq = params.sigma_h_sq;
  channels.h_est = CMatrix::Zero(2, params.antennas);
  channels.h_est(0, 0) = s;
  channels.h_est(1, 1) = s;
  channels.h_true = channels.h_est;

  TaskProfile tasks;
  tasks.omega_est = Vector::Constant(2, params.omega_mean());
  tasks.omega_true = tasks.omega_est;
  tasks.d_in = Vector::Constant(2, params.task_sizes.d_in_bits);
  tasks.d_out = Vector::Constant(2, params.task_sizes.d_out_bits);
  tasks.sigma_w_sq = params.sigma_w_sq;
  return make_realization(std::move(channels), std::move(tasks), params.rzf_alpha);
}

OracleReport run_oracle_comparison(const ExperimentConfig& config,
                                   const OracleComparisonOptions& options) {
  config.validate();
  if (config.devices > 2 || config.antennas > 2) {
    throw ParameterError("oracle comparison needs K <= 2 and L <= 2");
  }
  if (options.test_batches < 1) throw ParameterError("test_batches must be >= 1");
  auto log = [&options](const std::string& msg) {
    if (options.log) options.log(msg);
  };

  const SystemParams system = config.system();
  NetworkRealization instance;
  if (options.symmetric) {
    instance = symmetric_instance(system);
  } else {
    Rng rng = make_stream(options.seed, StreamTag::kOracle, {0});
    instance = sample_realization(system, rng);
  }
  const RealizationSource fixed = [instance](Rng&) { return instance; };

  OracleReport report;
  report.devices = system.devices;
  report.antennas = system.antennas;
  report.scheme = options.scheme;
  report.batches = options.test_batches;

  TrainingConfig training = config.training;
  training.scheme = options.scheme;
  training.seed = options.seed;
  training.workers = options.workers;
  AllocatorModel model;
  try {
    TrainingResult trained =
        train(training, system, build_model(config, system, options.seed), fixed);
    model = std::move(trained.model);
    report.train_seconds = trained.report.wall_seconds;
    std::ostringstream msg;
    msg << "trained in " << trained.report.wall_seconds << " s, best epoch "
        << trained.report.best_epoch << ", val t_gamma " << trained.report.best_val_tgamma_s;
    log(msg.str());
  } catch (const TrainingDiverged& e) {
    report.diverged = true;
    log(std::string("training diverged: ") + e.what());
    return report;
  }

  const ResourceAllocation alloc = allocate(model, instance, system.p_max_mw, system.cpu);
  report.trained_power_shares.resize(system.devices + 1);
  report.trained_power_shares.head(system.devices) = alloc.p_tx_mw / system.p_max_mw;
  report.trained_power_shares[system.devices] = alloc.p_co_mw / system.p_max_mw;
  report.trained_cycle_shares = alloc.f_co / alloc.f_limit;

  const EvaluationSet set =
      make_evaluation_set(system, options.test_batches, training.samples, options.scheme,
                          options.seed, StreamTag::kOracle, fixed);
  const auto count = static_cast<std::size_t>(options.test_batches);
  std::vector<double> trained_t(count), oracle_t(count), symmetric_t(count);
  std::vector<GridOracleResult> firsts(1);
  GridOracleOptions sym_grid = options.grid;
  sym_grid.symmetric = true;
  parallel_for(count, options.workers, [&](std::size_t i) {
    const UncertaintyBatch batch = set.batch(i, system);
    const BatchEvaluator evaluator(set.realizations[i], batch, system);
    trained_t[i] = evaluator.t_gamma(alloc, training.gamma);
    GridOracleResult o =
        grid_search_oracle(evaluator, system.devices, system, training.gamma, options.grid);
    oracle_t[i] = o.t_gamma;
    if (options.symmetric) {
      symmetric_t[i] =
          grid_search_oracle(evaluator, system.devices, system, training.gamma, sym_grid).t_gamma;
    }
    if (i == 0) firsts[0] = std::move(o);
  });

  double tr = 0.0, orc = 0.0, sym = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    tr += trained_t[i];
    orc += oracle_t[i];
    sym += symmetric_t[i];
  }
  const double n = static_cast<double>(count);
  report.mean_trained_s = tr / n;
  report.mean_oracle_s = orc / n;
  report.gap = report.mean_trained_s / report.mean_oracle_s - 1.0;
  if (options.symmetric) {
    report.mean_symmetric_s = sym / n;
    report.symmetric_gap = report.mean_trained_s / *report.mean_symmetric_s - 1.0;
  }
  report.oracle_power_shares = firsts[0].power_shares;
  report.oracle_cycle_shares = firsts[0].cycle_shares;
  return report;
}

std::string oracle_report_text(const OracleReport& report) {
  std::ostringstream out;
  out.precision(10);
  auto vec = [&out](const Vector& v) {
    out << '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
    out << ']';
  };
  out << "devices " << report.devices << ", antennas " << report.antennas << ", scheme "
      << scheme_key(report.scheme) << ", batches " << report.batches << '\n';
  if (report.diverged) {
    out << "status diverged\n";
    return out.str();
  }
  out << "trained_tgamma_s " << report.mean_trained_s << '\n';
  out << "oracle_tgamma_s " << report.mean_oracle_s << '\n';
  out << "gap " << report.gap << '\n';
  if (report.mean_symmetric_s) {
    out << "symmetric_tgamma_s " << *report.mean_symmetric_s << '\n';
    out << "symmetric_gap " << *report.symmetric_gap << '\n';
  }
  out << "oracle_power_shares ";
  vec(report.oracle_power_shares);
  out << "\noracle_cycle_shares ";
  vec(report.oracle_cycle_shares);
  out << "\ntrained_power_shares ";
  vec(report.trained_power_shares);
  out << "\ntrained_cycle_shares ";
  vec(report.trained_cycle_shares);
  out << '\n';
  return out.str();
}

}  // namespace redge
