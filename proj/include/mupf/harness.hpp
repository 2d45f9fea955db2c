#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mupf/epoch_file.hpp"
#include "mupf/gnss_observation.hpp"
#include "mupf/particle_filter.hpp"
#include "mupf/scene_simulator.hpp"

namespace mupf {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Static convergence battery: n_trials independent scenes, each replayed
// once per strategy over the same epochs, seeds, and initial particles, so
// strategies differ only in how they apply the likelihood.
struct TrialBatteryConfig {
  int n_trials = 100;
  int epochs_per_trial = 20;
  FilterConfig filter;  // strategy field ignored; strategies below
  GaussianPrior prior;  // mean is an offset from truth
  SceneConfig scene;
  std::vector<Strategy> strategies{Strategy::kMultipleUpdate, Strategy::kAnnealed,
                                   Strategy::kNormal};
  BandSigmas band_sigmas;
  Vec3 process_noise_sigma{0.02, 0.02, 0.02};
  double dt = 1.0;
  double fixed_threshold_m = 0.10;
  std::uint64_t master_seed = 0;

  void validate() const;
};

struct DegeneracyEvent {
  int epoch = 0;
  std::string stage;
};

struct TrialResult {
  int trial_id = 0;
  Strategy strategy = Strategy::kMultipleUpdate;
  std::vector<double> per_epoch_3d_error;  // meters
  std::vector<char> fixed_at;              // error <= threshold, per epoch
  std::vector<DegeneracyEvent> degeneracy_events;
};

struct EpochStats {
  double mean_err_m = 0.0;
  double q25_m = 0.0;
  double median_m = 0.0;
  double q75_m = 0.0;
  double q90_m = 0.0;
  double fixed_pct = 0.0;
};

struct StrategySummary {
  Strategy strategy = Strategy::kMultipleUpdate;
  double epoch1_err_cm = 0.0;  // mean over trials
  double epoch1_fix_pct = 0.0;
  double final_err_cm = 0.0;
  double final_fix_pct = 0.0;
  std::vector<EpochStats> per_epoch;
};

struct BatteryResult {
  std::vector<StrategySummary> summary;  // config strategy order
  std::vector<TrialResult> trials;       // strategy-major, trial_id ascending
};

BatteryResult run_static_battery(const TrialBatteryConfig& cfg);

// Truth used when a scene config supplies no trajectory: a fixed short
// baseline offset from the base station.
EcefPosition default_truth_position(const SceneConfig& scene);

const StrategySummary& summary_for(const BatteryResult& result, Strategy strategy);

struct SweepResult {
  std::vector<int> counts;
  std::vector<BatteryResult> batteries;  // parallel to counts
};

// run_static_battery once per particle count, same seeds throughout.
SweepResult run_particle_sweep(TrialBatteryConfig cfg, const std::vector<int>& counts);

struct KinematicConfig {
  FilterConfig filter;  // strategy honored (default multiple-update)
  GaussianPrior prior;
  // When true (default), prior.mean offsets the first epoch's truth; the
  // file must then carry truth. When false, prior.mean is absolute.
  bool prior_mean_is_offset = true;
  BandSigmas band_sigmas;
  Vec3 process_noise_sigma{0.1, 0.1, 0.1};
  double dt = 1.0;
  double fixed_threshold_m = 0.10;
  std::uint64_t master_seed = 0;

  void validate() const;
};

struct CdfRow {
  double threshold_m = 0.0;
  double fraction_within = 0.0;
};

struct KinematicResult {
  std::vector<double> times;
  std::vector<EcefPosition> estimates;
  bool has_truth = false;
  std::vector<double> errors_m;  // empty unless has_truth
  std::vector<CdfRow> cdf;       // errors after the first epoch
  std::vector<DegeneracyEvent> degeneracy_events;
};

// File-driven run: per epoch, predict with the record's velocity (first
// epoch diffuses only) and apply the configured update strategy. Velocity
// defaults to zero when a record omits it.
KinematicResult run_kinematic(const std::vector<EpochRecord>& records,
                              const KinematicConfig& cfg);

// Config files are JSON mirroring the config structs; unknown keys are
// errors. Failures throw ConfigError.
TrialBatteryConfig battery_config_from_json(const std::string& text);
KinematicConfig kinematic_config_from_json(const std::string& text);
std::string battery_config_to_json(const TrialBatteryConfig& cfg);    // canonical
std::string kinematic_config_to_json(const KinematicConfig& cfg);     // canonical

// FNV-1a over the canonical config serialization; stamped into manifests.
std::uint64_t config_hash(const std::string& canonical_json);

// Exports. All writers are deterministic in their inputs and throw
// std::runtime_error on I/O failure.
void write_summary_csv(const BatteryResult& result, const std::string& path);
void write_epoch_series_csv(const BatteryResult& result, const std::string& path);
void write_trials_csv(const BatteryResult& result, const std::string& path);
void write_sweep_csv(const SweepResult& result, const std::string& path);
void write_trajectory_csv(const KinematicResult& result, const std::string& path);
void write_cdf_csv(const KinematicResult& result, const std::string& path);
void write_manifest(const std::string& command, const std::string& canonical_config,
                    std::uint64_t master_seed, const std::vector<std::string>& outputs,
                    const std::string& path);

}  // namespace mupf
