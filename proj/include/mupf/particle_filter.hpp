#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mupf/geometry.hpp"
#include "mupf/rng.hpp"

namespace mupf {

// Axis-aligned Gaussian over ECEF position; sigma is the per-axis standard
// deviation in meters.
struct GaussianPrior {
  EcefPosition mean;
  Vec3 sigma{2.0, 2.0, 2.0};

  void validate() const;
};

// Constant-velocity transition with independent per-axis diffusion.
struct MotionModel {
  Vec3 velocity;                         // m/s, zero for static scenarios
  Vec3 process_noise_sigma;              // m per step
  double dt = 1.0;                       // s, > 0

  void validate() const;
};

struct ParticleSet {
  std::vector<EcefPosition> states;
  std::vector<double> log_weights;       // natural log, unnormalized between updates

  std::size_t size() const { return states.size(); }
};

using LogLikelihoodFn = std::function<double(const EcefPosition&)>;

// One weight-update stage: a log-likelihood evaluator plus the nominal spread
// of that likelihood, expressed in meters of equivalent ranging accuracy.
struct StageDescriptor {
  std::string stage_id;
  double nominal_sigma = 0.0;
  LogLikelihoodFn log_likelihood;
};

// Ordered update stages; nominal_sigma must be strictly decreasing so the
// broadest likelihood is applied first and the sharpest last.
struct UpdateSchedule {
  std::vector<StageDescriptor> stages;

  void validate() const;
};

enum class Strategy { kNormal, kMultipleUpdate, kAnnealed };
enum class DegeneracyPolicy { kResetUniform, kAbort };

struct FilterConfig {
  std::size_t n_particles = 2000;
  Strategy strategy = Strategy::kMultipleUpdate;
  std::vector<double> annealing_exponents{0.125, 0.25, 0.5, 1.0};
  std::uint64_t rng_seed = 0;
  DegeneracyPolicy degeneracy_policy = DegeneracyPolicy::kResetUniform;
  // Between-stage roughening for the staged strategies: after every resample
  // except the last, particles are jittered by this fraction of the nominal
  // sigma of the stage just applied (for annealing, of the tempered combined
  // likelihood's width). 0 disables. Multinomial resampling only duplicates
  // existing states, so without the jitter the sharper later stages could
  // only choose among points that happened to land near their peaks. Axes
  // with exactly zero spread are left untouched.
  double regularization_scale = 0.85;

  void validate() const;
};

class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(std::string stage)
      : std::runtime_error("all particle weights vanished at stage '" + stage + "'"),
        stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class ScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StageDiagnostics {
  std::string stage_id;
  double ess = 0.0;                      // after normalization, before resampling
  bool degenerate = false;
};

struct UpdateDiagnostics {
  std::vector<StageDiagnostics> stages;

  bool any_degenerate() const {
    for (const auto& s : stages)
      if (s.degenerate) return true;
    return false;
  }
};

struct NormalizeResult {
  bool degenerate = false;
  double ess = 0.0;
};

// Draws n particles from the prior with uniform weights -ln(n).
ParticleSet init_particles(const GaussianPrior& prior, std::size_t n, Rng& rng);
ParticleSet init_particles(const GaussianPrior& prior, std::size_t n, std::uint64_t seed);

// Shifts every state by velocity*dt and adds per-axis Gaussian diffusion.
// Weights are untouched.
void predict(ParticleSet& particles, const MotionModel& model, Rng& rng);
void predict(ParticleSet& particles, const MotionModel& model, std::uint64_t seed);

// Adds log_likelihood(state) to each particle's log-weight. The evaluator must
// return a finite value or -infinity; anything else is rejected.
void weight_stage(ParticleSet& particles, const LogLikelihoodFn& log_likelihood);

// Stable normalization: subtracts the max log-weight before exponentiation.
// A set whose weights all vanish is degenerate; the policy then either resets
// the weights to uniform (flagging the event) or throws DegeneracyError.
NormalizeResult normalize_weights(ParticleSet& particles,
                                  DegeneracyPolicy policy = DegeneracyPolicy::kResetUniform,
                                  std::string_view stage_id = "");

// N independent draws with replacement, probability proportional to weight.
// Requires normalized weights; leaves the output uniform at -ln(n).
void resample_multinomial(ParticleSet& particles, Rng& rng);
void resample_multinomial(ParticleSet& particles, std::uint64_t seed);

// Single update from the product of all stage likelihoods.
UpdateDiagnostics update_normal(ParticleSet& particles, const UpdateSchedule& schedule,
                                const FilterConfig& config, Rng& rng);

// One weight/resample pass per stage, in schedule order (broadest first).
UpdateDiagnostics update_multiple(ParticleSet& particles, const UpdateSchedule& schedule,
                                  const FilterConfig& config, Rng& rng);

// Annealing on the combined likelihood: stage m applies the exponent
// increment beta_m - beta_{m-1}, so the cumulative power ends at exactly 1.
UpdateDiagnostics update_annealed(ParticleSet& particles, const UpdateSchedule& schedule,
                                  const FilterConfig& config, Rng& rng);

// Dispatch on config.strategy.
UpdateDiagnostics run_update(ParticleSet& particles, const UpdateSchedule& schedule,
                             const FilterConfig& config, Rng& rng);
UpdateDiagnostics run_update(ParticleSet& particles, const UpdateSchedule& schedule,
                             const FilterConfig& config, std::uint64_t seed);

// Weighted mean of the states. Requires normalized weights.
EcefPosition estimate_state(const ParticleSet& particles);

// 1 / sum(w^2) of the normalized weights.
double effective_sample_size(const ParticleSet& particles);

const char* strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);
const char* degeneracy_policy_name(DegeneracyPolicy p);
DegeneracyPolicy degeneracy_policy_from_name(std::string_view name);

}  // namespace mupf
