#include "mupf/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mupf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_loglik_value(double v) {
  if (std::isnan(v) || (std::isinf(v) && v > 0.0)) {
    throw std::invalid_argument("log-likelihood must be finite or -infinity");
  }
}

// Per-axis sample standard deviation of the particle states.
Vec3 state_stddev(const ParticleSet& particles) {
  const double n = static_cast<double>(particles.size());
  Vec3 mean;
  for (const auto& s : particles.states) mean += s;
  mean = mean * (1.0 / n);
  Vec3 var;
  for (const auto& s : particles.states) {
    const Vec3 d = s - mean;
    var += Vec3{d.x * d.x, d.y * d.y, d.z * d.z};
  }
  var = var * (1.0 / n);
  return {std::sqrt(var.x), std::sqrt(var.y), std::sqrt(var.z)};
}

// Post-resample diversity restoration between stages: multinomial resampling
// only duplicates states, so the next, sharper stage could otherwise choose
// only among points that happened to land near its peaks. Jitter at the
// scale the just-applied stage leaves unresolved (its nominal sigma) rebuilds
// candidates across that whole neighborhood every epoch, which also lets a
// cloud stuck on a spurious carrier lobe rediscover the true one. An axis
// whose spread is exactly zero stays untouched so noise-free runs stay exact.
void roughen(ParticleSet& particles, double scale, double stage_sigma, Rng& rng) {
  const Vec3 sd = state_stddev(particles);
  const Vec3 jitter{sd.x > 0.0 ? scale * stage_sigma : 0.0,
                    sd.y > 0.0 ? scale * stage_sigma : 0.0,
                    sd.z > 0.0 ? scale * stage_sigma : 0.0};
  if (jitter.x == 0.0 && jitter.y == 0.0 && jitter.z == 0.0) return;
  std::normal_distribution<double> n01(0.0, 1.0);
  for (auto& s : particles.states) {
    s.x += jitter.x * n01(rng);
    s.y += jitter.y * n01(rng);
    s.z += jitter.z * n01(rng);
  }
}

LogLikelihoodFn combined_loglik(const UpdateSchedule& schedule) {
  return [&schedule](const EcefPosition& x) {
    double total = 0.0;
    for (const auto& stage : schedule.stages) total += stage.log_likelihood(x);
    return total;
  };
}

void check_annealing_exponents(const std::vector<double>& exponents) {
  if (exponents.empty()) throw std::invalid_argument("annealing exponents must be nonempty");
  double prev = 0.0;
  for (double e : exponents) {
    if (!(e > 0.0) || e > 1.0) throw std::invalid_argument("annealing exponents must lie in (0, 1]");
    if (e < prev) throw std::invalid_argument("annealing exponents must be nondecreasing");
    prev = e;
  }
  if (exponents.back() != 1.0) throw std::invalid_argument("annealing exponents must end at exactly 1.0");
}

}  // namespace

void GaussianPrior::validate() const {
  if (sigma.x < 0.0 || sigma.y < 0.0 || sigma.z < 0.0) {
    throw std::invalid_argument("prior sigma must be nonnegative per axis");
  }
}

void MotionModel::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("motion model dt must be positive");
  if (process_noise_sigma.x < 0.0 || process_noise_sigma.y < 0.0 || process_noise_sigma.z < 0.0) {
    throw std::invalid_argument("process noise sigma must be nonnegative per axis");
  }
}

void UpdateSchedule::validate() const {
  if (stages.empty()) throw ScheduleError("update schedule has no stages");
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& stage : stages) {
    if (!(stage.nominal_sigma > 0.0)) {
      throw ScheduleError("stage '" + stage.stage_id + "' has nonpositive nominal sigma");
    }
    if (!(stage.nominal_sigma < prev)) {
      throw ScheduleError("stage sigmas must be strictly decreasing (stage '" + stage.stage_id + "')");
    }
    if (!stage.log_likelihood) {
      throw ScheduleError("stage '" + stage.stage_id + "' has no likelihood evaluator");
    }
    prev = stage.nominal_sigma;
  }
}

void FilterConfig::validate() const {
  if (n_particles < 1) throw std::invalid_argument("n_particles must be >= 1");
  if (regularization_scale < 0.0) throw std::invalid_argument("regularization_scale must be >= 0");
  if (strategy == Strategy::kAnnealed) check_annealing_exponents(annealing_exponents);
}

ParticleSet init_particles(const GaussianPrior& prior, std::size_t n, Rng& rng) {
  prior.validate();
  if (n < 1) throw std::invalid_argument("particle count must be >= 1");
  ParticleSet out;
  out.states.reserve(n);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.states.push_back({prior.mean.x + prior.sigma.x * n01(rng),
                          prior.mean.y + prior.sigma.y * n01(rng),
                          prior.mean.z + prior.sigma.z * n01(rng)});
  }
  out.log_weights.assign(n, -std::log(static_cast<double>(n)));
  return out;
}

ParticleSet init_particles(const GaussianPrior& prior, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return init_particles(prior, n, rng);
}

void predict(ParticleSet& particles, const MotionModel& model, Rng& rng) {
  model.validate();
  const Vec3 shift = model.velocity * model.dt;
  const Vec3& q = model.process_noise_sigma;
  if (q.x == 0.0 && q.y == 0.0 && q.z == 0.0) {
    for (auto& s : particles.states) s += shift;
    return;
  }
  std::normal_distribution<double> n01(0.0, 1.0);
  for (auto& s : particles.states) {
    s.x += shift.x + q.x * n01(rng);
    s.y += shift.y + q.y * n01(rng);
    s.z += shift.z + q.z * n01(rng);
  }
}

void predict(ParticleSet& particles, const MotionModel& model, std::uint64_t seed) {
  Rng rng(seed);
  predict(particles, model, rng);
}

void weight_stage(ParticleSet& particles, const LogLikelihoodFn& log_likelihood) {
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const double v = log_likelihood(particles.states[i]);
    check_loglik_value(v);
    particles.log_weights[i] += v;
  }
}

NormalizeResult normalize_weights(ParticleSet& particles, DegeneracyPolicy policy,
                                  std::string_view stage_id) {
  auto& lw = particles.log_weights;
  double max_lw = kNegInf;
  for (double v : lw) {
    if (std::isnan(v)) throw std::invalid_argument("log-weight is NaN");
    max_lw = std::max(max_lw, v);
  }
  const double n = static_cast<double>(lw.size());
  if (!std::isfinite(max_lw)) {
    // Every stable-normalized weight is zero.
    if (policy == DegeneracyPolicy::kAbort) throw DegeneracyError(std::string(stage_id));
    std::fill(lw.begin(), lw.end(), -std::log(n));
    return {true, n};
  }
  double sum = 0.0;
  for (double& v : lw) {
    v -= max_lw;
    sum += std::exp(v);
  }
  const double log_sum = std::log(sum);
  double sum_sq = 0.0;
  for (double& v : lw) {
    v -= log_sum;
    const double w = std::exp(v);
    sum_sq += w * w;
  }
  return {false, 1.0 / sum_sq};
}

void resample_multinomial(ParticleSet& particles, Rng& rng) {
  const std::size_t n = particles.size();
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += std::exp(particles.log_weights[i]);
    cumulative[i] = total;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::logic_error("resample_multinomial requires normalized, non-degenerate weights");
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<EcefPosition> picked(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = u01(rng) * total;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
    const std::size_t idx = std::min<std::size_t>(it - cumulative.begin(), n - 1);
    picked[i] = particles.states[idx];
  }
  particles.states = std::move(picked);
  std::fill(particles.log_weights.begin(), particles.log_weights.end(),
            -std::log(static_cast<double>(n)));
}

void resample_multinomial(ParticleSet& particles, std::uint64_t seed) {
  Rng rng(seed);
  resample_multinomial(particles, rng);
}

UpdateDiagnostics update_normal(ParticleSet& particles, const UpdateSchedule& schedule,
                                const FilterConfig& config, Rng& rng) {
  if (schedule.stages.empty()) throw ScheduleError("update schedule has no stages");
  UpdateDiagnostics diag;
  weight_stage(particles, combined_loglik(schedule));
  const auto norm = normalize_weights(particles, config.degeneracy_policy, "combined");
  diag.stages.push_back({"combined", norm.ess, norm.degenerate});
  resample_multinomial(particles, rng);
  return diag;
}

UpdateDiagnostics update_multiple(ParticleSet& particles, const UpdateSchedule& schedule,
                                  const FilterConfig& config, Rng& rng) {
  schedule.validate();
  UpdateDiagnostics diag;
  const std::size_t m_total = schedule.stages.size();
  for (std::size_t m = 0; m < m_total; ++m) {
    const auto& stage = schedule.stages[m];
    weight_stage(particles, stage.log_likelihood);
    const auto norm = normalize_weights(particles, config.degeneracy_policy, stage.stage_id);
    diag.stages.push_back({stage.stage_id, norm.ess, norm.degenerate});
    resample_multinomial(particles, rng);
    if (m + 1 < m_total && config.regularization_scale > 0.0) {
      roughen(particles, config.regularization_scale, stage.nominal_sigma, rng);
    }
  }
  return diag;
}

UpdateDiagnostics update_annealed(ParticleSet& particles, const UpdateSchedule& schedule,
                                  const FilterConfig& config, Rng& rng) {
  if (schedule.stages.empty()) throw ScheduleError("update schedule has no stages");
  check_annealing_exponents(config.annealing_exponents);
  UpdateDiagnostics diag;
  const auto combined = combined_loglik(schedule);
  // The tempered combined likelihood can be no sharper than the schedule's
  // sharpest component widened by the cumulative exponent.
  double sharpest = schedule.stages.front().nominal_sigma;
  for (const auto& stage : schedule.stages) sharpest = std::min(sharpest, stage.nominal_sigma);
  const std::size_t m_total = config.annealing_exponents.size();
  double prev_beta = 0.0;
  for (std::size_t m = 0; m < m_total; ++m) {
    const double beta = config.annealing_exponents[m];
    const double beta_inc = beta - prev_beta;
    prev_beta = beta;
    weight_stage(particles, [beta_inc, &combined](const EcefPosition& x) {
      return beta_inc * combined(x);
    });
    const std::string stage_id = "anneal" + std::to_string(m + 1);
    const auto norm = normalize_weights(particles, config.degeneracy_policy, stage_id);
    diag.stages.push_back({stage_id, norm.ess, norm.degenerate});
    resample_multinomial(particles, rng);
    if (m + 1 < m_total && config.regularization_scale > 0.0) {
      roughen(particles, config.regularization_scale, sharpest / std::sqrt(beta), rng);
    }
  }
  return diag;
}

UpdateDiagnostics run_update(ParticleSet& particles, const UpdateSchedule& schedule,
                             const FilterConfig& config, Rng& rng) {
  switch (config.strategy) {
    case Strategy::kNormal:
      return update_normal(particles, schedule, config, rng);
    case Strategy::kMultipleUpdate:
      return update_multiple(particles, schedule, config, rng);
    case Strategy::kAnnealed:
      return update_annealed(particles, schedule, config, rng);
  }
  throw std::logic_error("unknown strategy");
}

UpdateDiagnostics run_update(ParticleSet& particles, const UpdateSchedule& schedule,
                             const FilterConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  return run_update(particles, schedule, config, rng);
}

EcefPosition estimate_state(const ParticleSet& particles) {
  if (particles.size() == 0) throw std::invalid_argument("empty particle set");
  double max_lw = kNegInf;
  for (double v : particles.log_weights) {
    if (std::isnan(v)) throw std::invalid_argument("log-weight is NaN");
    max_lw = std::max(max_lw, v);
  }
  if (!std::isfinite(max_lw)) throw DegeneracyError("estimate_state");
  Vec3 acc;
  double total = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const double w = std::exp(particles.log_weights[i] - max_lw);
    acc += particles.states[i] * w;
    total += w;
  }
  return acc * (1.0 / total);
}

double effective_sample_size(const ParticleSet& particles) {
  double max_lw = kNegInf;
  for (double v : particles.log_weights) max_lw = std::max(max_lw, v);
  if (!std::isfinite(max_lw)) return 0.0;
  double sum = 0.0, sum_sq = 0.0;
  for (double v : particles.log_weights) {
    const double w = std::exp(v - max_lw);
    sum += w;
    sum_sq += w * w;
  }
  return sum * sum / sum_sq;
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kNormal: return "normal";
    case Strategy::kMultipleUpdate: return "multiple_update";
    case Strategy::kAnnealed: return "annealed";
  }
  return "unknown";
}

Strategy strategy_from_name(std::string_view name) {
  if (name == "normal") return Strategy::kNormal;
  if (name == "multiple_update") return Strategy::kMultipleUpdate;
  if (name == "annealed") return Strategy::kAnnealed;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

const char* degeneracy_policy_name(DegeneracyPolicy p) {
  return p == DegeneracyPolicy::kResetUniform ? "reset_uniform" : "abort";
}

DegeneracyPolicy degeneracy_policy_from_name(std::string_view name) {
  if (name == "reset_uniform") return DegeneracyPolicy::kResetUniform;
  if (name == "abort") return DegeneracyPolicy::kAbort;
  throw std::invalid_argument("unknown degeneracy policy '" + std::string(name) + "'");
}

}  // namespace mupf
