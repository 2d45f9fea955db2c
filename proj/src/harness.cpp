#include "mupf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "mupf/rng.hpp"

namespace mupf {

namespace {

using nlohmann::json;

// Per-trial RNG stream tags under derive_seed(master_seed, trial_id).
constexpr std::uint64_t kSceneStream = 1;
constexpr std::uint64_t kPriorStream = 2;
constexpr std::uint64_t kFilterStream = 3;
constexpr std::uint64_t kEpochNoiseBase = 1'000'000;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

struct PreparedEpoch {
  double time = 0.0;
  UpdateSchedule schedule;
  Vec3 velocity;
  std::optional<EcefPosition> truth;
};

TrialResult run_prepared_trial(const std::vector<PreparedEpoch>& epochs,
                               const GaussianPrior& prior, FilterConfig filter,
                               const Vec3& process_noise, double default_dt, double threshold,
                               std::uint64_t prior_seed, std::uint64_t filter_seed,
                               std::vector<EcefPosition>* estimates_out) {
  TrialResult result;
  ParticleSet particles = init_particles(prior, static_cast<std::size_t>(filter.n_particles),
                                         prior_seed);
  Rng rng(filter_seed);
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    MotionModel motion;
    motion.velocity = e == 0 ? Vec3{} : epochs[e].velocity;
    motion.process_noise_sigma = process_noise;
    motion.dt = default_dt;
    if (e > 0 && epochs[e].time > epochs[e - 1].time) {
      motion.dt = epochs[e].time - epochs[e - 1].time;
    }
    predict(particles, motion, rng);
    const UpdateDiagnostics diag = run_update(particles, epochs[e].schedule, filter, rng);
    for (const auto& stage : diag.stages) {
      if (stage.degenerate) result.degeneracy_events.push_back({static_cast<int>(e), stage.stage_id});
    }
    const EcefPosition est = estimate_state(particles);
    if (estimates_out) estimates_out->push_back(est);
    if (epochs[e].truth) {
      const double err = distance(est, *epochs[e].truth);
      result.per_epoch_3d_error.push_back(err);
      result.fixed_at.push_back(err <= threshold ? 1 : 0);
    }
  }
  return result;
}

double quantile(std::vector<double> sorted, double q) {
  // nearest-rank on an already sorted copy
  if (sorted.empty()) return 0.0;
  const std::size_t n = sorted.size();
  const std::size_t rank = static_cast<std::size_t>(std::ceil(q * n));
  return sorted[std::min(rank == 0 ? 0 : rank - 1, n - 1)];
}

StrategySummary summarize_strategy(Strategy strategy, const std::vector<TrialResult>& trials,
                                   int epochs_per_trial) {
  StrategySummary s;
  s.strategy = strategy;
  s.per_epoch.resize(epochs_per_trial);
  for (int e = 0; e < epochs_per_trial; ++e) {
    std::vector<double> errs;
    errs.reserve(trials.size());
    int fixed = 0;
    for (const auto& t : trials) {
      errs.push_back(t.per_epoch_3d_error[e]);
      fixed += t.fixed_at[e] ? 1 : 0;
    }
    EpochStats& st = s.per_epoch[e];
    double sum = 0.0;
    for (double v : errs) sum += v;
    st.mean_err_m = sum / errs.size();
    std::sort(errs.begin(), errs.end());
    st.q25_m = quantile(errs, 0.25);
    st.median_m = quantile(errs, 0.50);
    st.q75_m = quantile(errs, 0.75);
    st.q90_m = quantile(errs, 0.90);
    st.fixed_pct = 100.0 * fixed / trials.size();
  }
  s.epoch1_err_cm = s.per_epoch.front().mean_err_m * 100.0;
  s.epoch1_fix_pct = s.per_epoch.front().fixed_pct;
  s.final_err_cm = s.per_epoch.back().mean_err_m * 100.0;
  s.final_fix_pct = s.per_epoch.back().fixed_pct;
  return s;
}

}  // namespace

void TrialBatteryConfig::validate() const {
  if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
  if (epochs_per_trial < 1) throw ConfigError("epochs_per_trial must be >= 1");
  if (strategies.empty()) throw ConfigError("strategies must be nonempty");
  if (!(fixed_threshold_m > 0.0)) throw ConfigError("fixed_threshold_m must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (process_noise_sigma.x < 0.0 || process_noise_sigma.y < 0.0 || process_noise_sigma.z < 0.0) {
    throw ConfigError("process_noise_sigma must be nonnegative");
  }
  try {
    FilterConfig f = filter;
    for (Strategy s : strategies) {
      f.strategy = s;
      f.validate();
    }
    prior.validate();
    scene.validate();
    band_sigmas.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!scene.true_trajectory.empty() &&
      scene.true_trajectory.size() < static_cast<std::size_t>(epochs_per_trial)) {
    throw ConfigError("scene trajectory shorter than epochs_per_trial");
  }
}

EcefPosition default_truth_position(const SceneConfig& scene) {
  return EnuFrame::at(scene.base_position).to_ecef(5.0, 3.0, 1.0);
}

BatteryResult run_static_battery(const TrialBatteryConfig& cfg) {
  cfg.validate();

  std::vector<TrajectoryPoint> trajectory = cfg.scene.true_trajectory;
  if (trajectory.empty()) {
    trajectory = static_trajectory(default_truth_position(cfg.scene), cfg.epochs_per_trial, cfg.dt);
  }

  std::vector<std::vector<TrialResult>> per_strategy(cfg.strategies.size());
  for (auto& v : per_strategy) v.reserve(cfg.n_trials);

  for (int trial = 0; trial < cfg.n_trials; ++trial) {
    const std::uint64_t trial_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(trial));
    SceneConfig scene = cfg.scene;
    scene.seed = derive_seed(trial_seed, kSceneStream);

    std::vector<PreparedEpoch> epochs;
    epochs.reserve(cfg.epochs_per_trial);
    for (int e = 0; e < cfg.epochs_per_trial; ++e) {
      const auto& point = trajectory[e];
      const ObservationEpoch obs = synthesize_epoch(
          scene, point.time, point.position, derive_seed(trial_seed, kEpochNoiseBase + e));
      PreparedEpoch pe;
      pe.time = point.time;
      pe.schedule = build_update_schedule(obs, cfg.band_sigmas);
      pe.velocity = point.velocity;
      pe.truth = point.position;
      epochs.push_back(std::move(pe));
    }

    GaussianPrior prior = cfg.prior;
    prior.mean = trajectory.front().position + cfg.prior.mean;

    for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
      FilterConfig filter = cfg.filter;
      filter.strategy = cfg.strategies[si];
      TrialResult r = run_prepared_trial(epochs, prior, filter, cfg.process_noise_sigma, cfg.dt,
                                         cfg.fixed_threshold_m, derive_seed(trial_seed, kPriorStream),
                                         derive_seed(trial_seed, kFilterStream), nullptr);
      r.trial_id = trial;
      r.strategy = cfg.strategies[si];
      per_strategy[si].push_back(std::move(r));
    }
  }

  BatteryResult result;
  for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
    result.summary.push_back(
        summarize_strategy(cfg.strategies[si], per_strategy[si], cfg.epochs_per_trial));
    for (auto& t : per_strategy[si]) result.trials.push_back(std::move(t));
  }
  return result;
}

const StrategySummary& summary_for(const BatteryResult& result, Strategy strategy) {
  for (const auto& s : result.summary) {
    if (s.strategy == strategy) return s;
  }
  throw std::invalid_argument(std::string("no summary for strategy ") + strategy_name(strategy));
}

SweepResult run_particle_sweep(TrialBatteryConfig cfg, const std::vector<int>& counts) {
  if (counts.empty()) throw ConfigError("particle sweep needs at least one count");
  SweepResult result;
  for (int n : counts) {
    if (n < 1) throw ConfigError("particle counts must be >= 1");
    cfg.filter.n_particles = n;
    result.counts.push_back(n);
    result.batteries.push_back(run_static_battery(cfg));
  }
  return result;
}

void KinematicConfig::validate() const {
  if (!(fixed_threshold_m > 0.0)) throw ConfigError("fixed_threshold_m must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (process_noise_sigma.x < 0.0 || process_noise_sigma.y < 0.0 || process_noise_sigma.z < 0.0) {
    throw ConfigError("process_noise_sigma must be nonnegative");
  }
  try {
    filter.validate();
    prior.validate();
    band_sigmas.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

KinematicResult run_kinematic(const std::vector<EpochRecord>& records,
                              const KinematicConfig& cfg) {
  cfg.validate();
  if (records.empty()) throw ConfigError("kinematic run needs at least one epoch");

  GaussianPrior prior = cfg.prior;
  if (cfg.prior_mean_is_offset) {
    if (!records.front().truth) {
      throw ConfigError("prior_mean_is_offset requires truth in the first epoch record");
    }
    prior.mean = *records.front().truth + cfg.prior.mean;
  }

  std::vector<PreparedEpoch> epochs;
  epochs.reserve(records.size());
  bool has_truth = true;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (i > 0 && !(rec.epoch.time > records[i - 1].epoch.time)) {
      throw EpochFileError("epoch times must be strictly increasing");
    }
    PreparedEpoch pe;
    pe.time = rec.epoch.time;
    pe.schedule = build_update_schedule(rec.epoch, cfg.band_sigmas);
    pe.velocity = rec.velocity.value_or(Vec3{});
    pe.truth = rec.truth;
    has_truth = has_truth && rec.truth.has_value();
    epochs.push_back(std::move(pe));
  }

  const std::uint64_t trial_seed = derive_seed(cfg.master_seed, 0);
  KinematicResult result;
  result.has_truth = has_truth;
  std::vector<EcefPosition> estimates;
  TrialResult trial = run_prepared_trial(
      epochs, prior, cfg.filter, cfg.process_noise_sigma, cfg.dt, cfg.fixed_threshold_m,
      derive_seed(trial_seed, kPriorStream), derive_seed(trial_seed, kFilterStream), &estimates);
  result.estimates = std::move(estimates);
  result.degeneracy_events = std::move(trial.degeneracy_events);
  for (const auto& pe : epochs) result.times.push_back(pe.time);
  if (has_truth) {
    result.errors_m = std::move(trial.per_epoch_3d_error);
    const std::vector<double> thresholds{0.01, 0.02, 0.05, 0.10, 0.20, 0.50, 1.00, 2.00};
    const std::size_t n_after_first = result.errors_m.size() > 1 ? result.errors_m.size() - 1 : 0;
    for (double th : thresholds) {
      int within = 0;
      for (std::size_t e = 1; e < result.errors_m.size(); ++e) {
        if (result.errors_m[e] <= th) ++within;
      }
      result.cdf.push_back(
          {th, n_after_first == 0 ? 0.0 : static_cast<double>(within) / n_after_first});
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// JSON configs

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

Vec3 vec3_from(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(std::string(where) + " must be an array of 3 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_to(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

template <typename T>
void read_into(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_vec3(const json& j, const char* key, Vec3& out) {
  if (j.contains(key)) out = vec3_from(j.at(key), key);
}

FilterConfig filter_from_json(const json& j) {
  check_keys(j, {"n_particles", "strategy", "annealing_exponents", "degeneracy_policy",
                 "regularization_scale"},
             "filter");
  FilterConfig f;
  read_into(j, "n_particles", f.n_particles);
  if (j.contains("strategy")) f.strategy = strategy_from_name(j.at("strategy").get<std::string>());
  read_into(j, "annealing_exponents", f.annealing_exponents);
  if (j.contains("degeneracy_policy")) {
    f.degeneracy_policy = degeneracy_policy_from_name(j.at("degeneracy_policy").get<std::string>());
  }
  read_into(j, "regularization_scale", f.regularization_scale);
  return f;
}

json filter_to_json(const FilterConfig& f) {
  json j;
  j["n_particles"] = f.n_particles;
  j["strategy"] = strategy_name(f.strategy);
  j["annealing_exponents"] = f.annealing_exponents;
  j["degeneracy_policy"] = degeneracy_policy_name(f.degeneracy_policy);
  j["regularization_scale"] = f.regularization_scale;
  return j;
}

GaussianPrior prior_from_json(const json& j) {
  check_keys(j, {"mean", "sigma"}, "prior");
  GaussianPrior p;
  read_vec3(j, "mean", p.mean);
  read_vec3(j, "sigma", p.sigma);
  return p;
}

json prior_to_json(const GaussianPrior& p) {
  return json{{"mean", vec3_to(p.mean)}, {"sigma", vec3_to(p.sigma)}};
}

BandSigmas band_sigmas_from_json(const json& j) {
  check_keys(j, {"pseudorange", "wide_lane", "l2", "l1"}, "band_sigmas");
  BandSigmas b;
  read_into(j, "pseudorange", b.pseudorange);
  read_into(j, "wide_lane", b.wide_lane);
  read_into(j, "l2", b.l2);
  read_into(j, "l1", b.l1);
  return b;
}

json band_sigmas_to_json(const BandSigmas& b) {
  return json{{"pseudorange", b.pseudorange}, {"wide_lane", b.wide_lane}, {"l2", b.l2},
              {"l1", b.l1}};
}

SceneConfig scene_from_json(const json& j) {
  check_keys(j,
             {"n_satellites", "min_elevation_deg", "max_elevation_deg", "layout", "orbit_radius",
              "base_position", "trajectory", "sigma_pseudorange", "sigma_carrier", "seed"},
             "scene");
  SceneConfig s;
  read_into(j, "n_satellites", s.n_satellites);
  read_into(j, "min_elevation_deg", s.min_elevation_deg);
  read_into(j, "max_elevation_deg", s.max_elevation_deg);
  if (j.contains("layout")) {
    const std::string name = j.at("layout").get<std::string>();
    if (name == "uniform_ring") s.layout = AzimuthLayout::kUniformRing;
    else if (name == "seeded_random") s.layout = AzimuthLayout::kSeededRandom;
    else throw ConfigError("unknown layout '" + name + "'");
  }
  read_into(j, "orbit_radius", s.orbit_radius);
  read_vec3(j, "base_position", s.base_position);
  read_into(j, "sigma_pseudorange", s.sigma_pseudorange);
  read_into(j, "sigma_carrier", s.sigma_carrier);
  read_into(j, "seed", s.seed);
  if (j.contains("trajectory")) {
    for (const auto& p : j.at("trajectory")) {
      check_keys(p, {"time", "position", "velocity"}, "trajectory point");
      TrajectoryPoint tp;
      read_into(p, "time", tp.time);
      read_vec3(p, "position", tp.position);
      read_vec3(p, "velocity", tp.velocity);
      s.true_trajectory.push_back(tp);
    }
  }
  return s;
}

json scene_to_json(const SceneConfig& s) {
  json j;
  j["n_satellites"] = s.n_satellites;
  j["min_elevation_deg"] = s.min_elevation_deg;
  j["max_elevation_deg"] = s.max_elevation_deg;
  j["layout"] = s.layout == AzimuthLayout::kUniformRing ? "uniform_ring" : "seeded_random";
  j["orbit_radius"] = s.orbit_radius;
  j["base_position"] = vec3_to(s.base_position);
  j["sigma_pseudorange"] = s.sigma_pseudorange;
  j["sigma_carrier"] = s.sigma_carrier;
  j["seed"] = s.seed;
  json traj = json::array();
  for (const auto& p : s.true_trajectory) {
    traj.push_back(json{{"time", p.time}, {"position", vec3_to(p.position)},
                        {"velocity", vec3_to(p.velocity)}});
  }
  j["trajectory"] = traj;
  return j;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

TrialBatteryConfig battery_config_from_json(const std::string& text) {
  const json j = parse_json_text(text);
  try {
    check_keys(j,
               {"n_trials", "epochs_per_trial", "filter", "prior", "scene", "strategies",
                "band_sigmas", "process_noise_sigma", "dt", "fixed_threshold_m", "master_seed"},
               "battery config");
    TrialBatteryConfig cfg;
    read_into(j, "n_trials", cfg.n_trials);
    read_into(j, "epochs_per_trial", cfg.epochs_per_trial);
    if (j.contains("filter")) cfg.filter = filter_from_json(j.at("filter"));
    if (j.contains("prior")) cfg.prior = prior_from_json(j.at("prior"));
    if (j.contains("scene")) cfg.scene = scene_from_json(j.at("scene"));
    if (j.contains("strategies")) {
      cfg.strategies.clear();
      for (const auto& s : j.at("strategies")) {
        cfg.strategies.push_back(strategy_from_name(s.get<std::string>()));
      }
    }
    if (j.contains("band_sigmas")) cfg.band_sigmas = band_sigmas_from_json(j.at("band_sigmas"));
    read_vec3(j, "process_noise_sigma", cfg.process_noise_sigma);
    read_into(j, "dt", cfg.dt);
    read_into(j, "fixed_threshold_m", cfg.fixed_threshold_m);
    read_into(j, "master_seed", cfg.master_seed);
    return cfg;
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("battery config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("battery config: ") + e.what());
  }
}

std::string battery_config_to_json(const TrialBatteryConfig& cfg) {
  json j;
  j["n_trials"] = cfg.n_trials;
  j["epochs_per_trial"] = cfg.epochs_per_trial;
  j["filter"] = filter_to_json(cfg.filter);
  j["prior"] = prior_to_json(cfg.prior);
  j["scene"] = scene_to_json(cfg.scene);
  json strategies = json::array();
  for (Strategy s : cfg.strategies) strategies.push_back(strategy_name(s));
  j["strategies"] = strategies;
  j["band_sigmas"] = band_sigmas_to_json(cfg.band_sigmas);
  j["process_noise_sigma"] = vec3_to(cfg.process_noise_sigma);
  j["dt"] = cfg.dt;
  j["fixed_threshold_m"] = cfg.fixed_threshold_m;
  j["master_seed"] = cfg.master_seed;
  return j.dump(2) + "\n";
}

KinematicConfig kinematic_config_from_json(const std::string& text) {
  const json j = parse_json_text(text);
  try {
    check_keys(j,
               {"filter", "prior", "prior_mean_is_offset", "band_sigmas", "process_noise_sigma",
                "dt", "fixed_threshold_m", "master_seed"},
               "kinematic config");
    KinematicConfig cfg;
    if (j.contains("filter")) cfg.filter = filter_from_json(j.at("filter"));
    if (j.contains("prior")) cfg.prior = prior_from_json(j.at("prior"));
    read_into(j, "prior_mean_is_offset", cfg.prior_mean_is_offset);
    if (j.contains("band_sigmas")) cfg.band_sigmas = band_sigmas_from_json(j.at("band_sigmas"));
    read_vec3(j, "process_noise_sigma", cfg.process_noise_sigma);
    read_into(j, "dt", cfg.dt);
    read_into(j, "fixed_threshold_m", cfg.fixed_threshold_m);
    read_into(j, "master_seed", cfg.master_seed);
    return cfg;
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("kinematic config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("kinematic config: ") + e.what());
  }
}

std::string kinematic_config_to_json(const KinematicConfig& cfg) {
  json j;
  j["filter"] = filter_to_json(cfg.filter);
  j["prior"] = prior_to_json(cfg.prior);
  j["prior_mean_is_offset"] = cfg.prior_mean_is_offset;
  j["band_sigmas"] = band_sigmas_to_json(cfg.band_sigmas);
  j["process_noise_sigma"] = vec3_to(cfg.process_noise_sigma);
  j["dt"] = cfg.dt;
  j["fixed_threshold_m"] = cfg.fixed_threshold_m;
  j["master_seed"] = cfg.master_seed;
  return j.dump(2) + "\n";
}

std::uint64_t config_hash(const std::string& canonical_json) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical_json) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Exports

void write_summary_csv(const BatteryResult& result, const std::string& path) {
  auto out = open_out(path);
  out << "strategy,epoch1_err_cm,epoch1_fix_pct,final_err_cm,final_fix_pct\n";
  for (const auto& s : result.summary) {
    out << strategy_name(s.strategy) << ',' << fmt(s.epoch1_err_cm) << ',' << fmt(s.epoch1_fix_pct)
        << ',' << fmt(s.final_err_cm) << ',' << fmt(s.final_fix_pct) << '\n';
  }
  finish_out(out, path);
}

void write_epoch_series_csv(const BatteryResult& result, const std::string& path) {
  auto out = open_out(path);
  out << "strategy,epoch,mean_err_m,q25_m,median_m,q75_m,q90_m,fixed_pct\n";
  for (const auto& s : result.summary) {
    for (std::size_t e = 0; e < s.per_epoch.size(); ++e) {
      const auto& st = s.per_epoch[e];
      out << strategy_name(s.strategy) << ',' << e + 1 << ',' << fmt(st.mean_err_m) << ','
          << fmt(st.q25_m) << ',' << fmt(st.median_m) << ',' << fmt(st.q75_m) << ','
          << fmt(st.q90_m) << ',' << fmt(st.fixed_pct) << '\n';
    }
  }
  finish_out(out, path);
}

void write_trials_csv(const BatteryResult& result, const std::string& path) {
  auto out = open_out(path);
  out << "strategy,trial_id,epoch,err_m,fixed\n";
  for (const auto& t : result.trials) {
    for (std::size_t e = 0; e < t.per_epoch_3d_error.size(); ++e) {
      out << strategy_name(t.strategy) << ',' << t.trial_id << ',' << e + 1 << ','
          << fmt(t.per_epoch_3d_error[e]) << ',' << (t.fixed_at[e] ? 1 : 0) << '\n';
    }
  }
  finish_out(out, path);
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
  auto out = open_out(path);
  out << "n_particles,strategy,epoch1_err_cm,epoch1_fix_pct,final_err_cm,final_fix_pct\n";
  for (std::size_t i = 0; i < result.counts.size(); ++i) {
    for (const auto& s : result.batteries[i].summary) {
      out << result.counts[i] << ',' << strategy_name(s.strategy) << ',' << fmt(s.epoch1_err_cm)
          << ',' << fmt(s.epoch1_fix_pct) << ',' << fmt(s.final_err_cm) << ','
          << fmt(s.final_fix_pct) << '\n';
    }
  }
  finish_out(out, path);
}

void write_trajectory_csv(const KinematicResult& result, const std::string& path) {
  auto out = open_out(path);
  if (result.has_truth) {
    out << "epoch,time,est_x,est_y,est_z,err_m\n";
  } else {
    out << "epoch,time,est_x,est_y,est_z\n";
  }
  for (std::size_t e = 0; e < result.estimates.size(); ++e) {
    const auto& p = result.estimates[e];
    out << e + 1 << ',' << fmt(result.times[e]) << ',' << fmt(p.x) << ',' << fmt(p.y) << ','
        << fmt(p.z);
    if (result.has_truth) out << ',' << fmt(result.errors_m[e]);
    out << '\n';
  }
  finish_out(out, path);
}

void write_cdf_csv(const KinematicResult& result, const std::string& path) {
  auto out = open_out(path);
  out << "threshold_m,fraction_within\n";
  for (const auto& row : result.cdf) {
    out << fmt(row.threshold_m) << ',' << fmt(row.fraction_within) << '\n';
  }
  finish_out(out, path);
}

void write_manifest(const std::string& command, const std::string& canonical_config,
                    std::uint64_t master_seed, const std::vector<std::string>& outputs,
                    const std::string& path) {
  char hash_buf[24];
  std::snprintf(hash_buf, sizeof(hash_buf), "0x%016llx",
                static_cast<unsigned long long>(config_hash(canonical_config)));
  json j;
  j["command"] = command;
  j["config_hash"] = hash_buf;
  j["master_seed"] = master_seed;
  j["outputs"] = outputs;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish_out(out, path);
}

}  // namespace mupf
