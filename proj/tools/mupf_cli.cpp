// Command-line front end: static convergence batteries, particle-count
// sweeps, file-driven kinematic runs, and grid likelihood map export.
// Exit codes: 0 success, 1 config error, 2 degeneracy abort, 3 I/O error.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mupf/epoch_file.hpp"
#include "mupf/harness.hpp"
#include "mupf/rng.hpp"
#include "mupf/scene_simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDegeneracy = 2;
constexpr int kExitIo = 3;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mupf::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "'");
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--seed", args.seed, "master seed override");
  cmd->add_option("--out", args.out_dir, "output directory (default .)");
}

struct BatteryOverrides {
  std::optional<int> trials;
  std::optional<int> epochs;
  std::optional<int> particles;
  std::optional<double> threshold;
};

void add_battery_overrides(CLI::App* cmd, BatteryOverrides& ov) {
  cmd->add_option("--trials", ov.trials, "trial count override");
  cmd->add_option("--epochs", ov.epochs, "epochs per trial override");
  cmd->add_option("--particles", ov.particles, "particle count override");
  cmd->add_option("--threshold", ov.threshold, "fixed threshold override, meters");
}

mupf::TrialBatteryConfig load_battery_config(const CommonArgs& common,
                                             const BatteryOverrides& ov) {
  mupf::TrialBatteryConfig cfg;
  if (!common.config_path.empty()) {
    cfg = mupf::battery_config_from_json(read_text_file(common.config_path));
  }
  if (common.seed) cfg.master_seed = *common.seed;
  if (ov.trials) cfg.n_trials = *ov.trials;
  if (ov.epochs) cfg.epochs_per_trial = *ov.epochs;
  if (ov.particles) cfg.filter.n_particles = static_cast<std::size_t>(*ov.particles);
  if (ov.threshold) cfg.fixed_threshold_m = *ov.threshold;
  return cfg;
}

int run_static_battery_cmd(const CommonArgs& common, const BatteryOverrides& ov) {
  const mupf::TrialBatteryConfig cfg = load_battery_config(common, ov);
  const mupf::BatteryResult result = mupf::run_static_battery(cfg);
  ensure_out_dir(common.out_dir);
  const std::vector<std::string> outputs{"summary.csv", "epoch_series.csv", "trials.csv"};
  mupf::write_summary_csv(result, join_path(common.out_dir, outputs[0]));
  mupf::write_epoch_series_csv(result, join_path(common.out_dir, outputs[1]));
  mupf::write_trials_csv(result, join_path(common.out_dir, outputs[2]));
  mupf::write_manifest("static-battery", mupf::battery_config_to_json(cfg), cfg.master_seed,
                       outputs, join_path(common.out_dir, "manifest.json"));
  for (const auto& s : result.summary) {
    std::cout << mupf::strategy_name(s.strategy) << ": epoch1 " << s.epoch1_err_cm << " cm / "
              << s.epoch1_fix_pct << "% fixed, final " << s.final_err_cm << " cm / "
              << s.final_fix_pct << "% fixed\n";
  }
  return kExitOk;
}

int run_particle_sweep_cmd(const CommonArgs& common, const BatteryOverrides& ov,
                           std::vector<int>& counts) {
  const mupf::TrialBatteryConfig cfg = load_battery_config(common, ov);
  if (counts.empty()) counts = {100, 500, 1000, 2000};
  const mupf::SweepResult result = mupf::run_particle_sweep(cfg, counts);
  ensure_out_dir(common.out_dir);
  const std::vector<std::string> outputs{"sweep.csv"};
  mupf::write_sweep_csv(result, join_path(common.out_dir, outputs[0]));
  mupf::write_manifest("particle-sweep", mupf::battery_config_to_json(cfg), cfg.master_seed,
                       outputs, join_path(common.out_dir, "manifest.json"));
  for (std::size_t i = 0; i < result.counts.size(); ++i) {
    for (const auto& s : result.batteries[i].summary) {
      std::cout << "N=" << result.counts[i] << ' ' << mupf::strategy_name(s.strategy)
                << ": final " << s.final_fix_pct << "% fixed\n";
    }
  }
  return kExitOk;
}

int run_kinematic_cmd(const CommonArgs& common, const std::string& obs_path,
                      const std::optional<std::string>& strategy,
                      const std::optional<int>& particles) {
  mupf::KinematicConfig cfg;
  if (!common.config_path.empty()) {
    cfg = mupf::kinematic_config_from_json(read_text_file(common.config_path));
  }
  if (common.seed) cfg.master_seed = *common.seed;
  if (strategy) cfg.filter.strategy = mupf::strategy_from_name(*strategy);
  if (particles) cfg.filter.n_particles = static_cast<std::size_t>(*particles);
  const std::vector<mupf::EpochRecord> records = mupf::read_epoch_file(obs_path);
  const mupf::KinematicResult result = mupf::run_kinematic(records, cfg);
  ensure_out_dir(common.out_dir);
  std::vector<std::string> outputs{"trajectory.csv"};
  mupf::write_trajectory_csv(result, join_path(common.out_dir, outputs[0]));
  if (result.has_truth) {
    outputs.push_back("cdf.csv");
    mupf::write_cdf_csv(result, join_path(common.out_dir, "cdf.csv"));
  }
  mupf::write_manifest("kinematic", mupf::kinematic_config_to_json(cfg), cfg.master_seed,
                       outputs, join_path(common.out_dir, "manifest.json"));
  std::cout << "epochs: " << result.estimates.size();
  if (result.has_truth && !result.errors_m.empty()) {
    double worst = 0.0;
    for (std::size_t e = 1; e < result.errors_m.size(); ++e) {
      worst = std::max(worst, result.errors_m[e]);
    }
    std::cout << ", worst error after first epoch: " << worst << " m";
  }
  std::cout << '\n';
  return kExitOk;
}

mupf::MapSelector selector_from_name(const std::string& name) {
  if (name == "pseudorange") return mupf::MapSelector::kPseudorange;
  if (name == "wide_lane") return mupf::MapSelector::kWideLane;
  if (name == "l2") return mupf::MapSelector::kL2;
  if (name == "l1") return mupf::MapSelector::kL1;
  if (name == "combined") return mupf::MapSelector::kCombined;
  throw mupf::ConfigError("unknown map selector '" + name + "'");
}

int run_gridmap_cmd(const CommonArgs& common, const std::string& selector_name,
                    double half_extent, double resolution) {
  mupf::TrialBatteryConfig cfg;
  if (!common.config_path.empty()) {
    cfg = mupf::battery_config_from_json(read_text_file(common.config_path));
  }
  if (common.seed) cfg.master_seed = *common.seed;
  cfg.scene.validate();

  const mupf::EcefPosition truth = cfg.scene.true_trajectory.empty()
                                       ? mupf::default_truth_position(cfg.scene)
                                       : cfg.scene.true_trajectory.front().position;
  const double time =
      cfg.scene.true_trajectory.empty() ? 0.0 : cfg.scene.true_trajectory.front().time;
  const mupf::ObservationEpoch epoch =
      mupf::synthesize_epoch(cfg.scene, time, truth, mupf::derive_seed(cfg.master_seed, 0));

  std::vector<std::string> selectors;
  if (selector_name == "all") {
    selectors = {"pseudorange", "wide_lane", "l2", "l1", "combined"};
  } else {
    selectors = {selector_name};
  }
  ensure_out_dir(common.out_dir);
  std::vector<std::string> outputs;
  for (const auto& name : selectors) {
    const mupf::GridMap map =
        mupf::grid_likelihood_map(epoch, truth, selector_from_name(name), half_extent, resolution);
    const std::string file = "gridmap_" + name + ".csv";
    mupf::write_gridmap_csv(map, join_path(common.out_dir, file));
    outputs.push_back(file);
  }
  mupf::write_manifest("gridmap", mupf::battery_config_to_json(cfg), cfg.master_seed, outputs,
                       join_path(common.out_dir, "manifest.json"));
  std::cout << "wrote " << outputs.size() << " map(s) to " << common.out_dir << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-update particle filter experiments"};
  app.require_subcommand(1);

  CommonArgs battery_args, sweep_args, kin_args, grid_args;
  BatteryOverrides battery_ov, sweep_ov;
  std::vector<int> sweep_counts;
  std::string kin_obs;
  std::optional<std::string> kin_strategy;
  std::optional<int> kin_particles;
  std::string grid_selector = "combined";
  double grid_half_extent = 1.0;
  double grid_resolution = 0.01;

  CLI::App* battery = app.add_subcommand("static-battery", "static convergence battery");
  add_common(battery, battery_args);
  add_battery_overrides(battery, battery_ov);

  CLI::App* sweep = app.add_subcommand("particle-sweep", "battery per particle count");
  add_common(sweep, sweep_args);
  add_battery_overrides(sweep, sweep_ov);
  sweep->add_option("--counts", sweep_counts, "particle counts (default 100 500 1000 2000)");

  CLI::App* kinematic = app.add_subcommand("kinematic", "file-driven kinematic run");
  add_common(kinematic, kin_args);
  kinematic->add_option("--obs", kin_obs, "epoch observation file")->required();
  kinematic->add_option("--strategy", kin_strategy, "update strategy override");
  kinematic->add_option("--particles", kin_particles, "particle count override");

  CLI::App* gridmap = app.add_subcommand("gridmap", "grid likelihood map export");
  add_common(gridmap, grid_args);
  gridmap->add_option("--selector", grid_selector,
                      "pseudorange|wide_lane|l2|l1|combined|all (default combined)");
  gridmap->add_option("--half-extent", grid_half_extent, "grid half extent, meters");
  gridmap->add_option("--resolution", grid_resolution, "grid resolution, meters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (battery->parsed()) return run_static_battery_cmd(battery_args, battery_ov);
    if (sweep->parsed()) return run_particle_sweep_cmd(sweep_args, sweep_ov, sweep_counts);
    if (kinematic->parsed()) {
      return run_kinematic_cmd(kin_args, kin_obs, kin_strategy, kin_particles);
    }
    if (gridmap->parsed()) {
      return run_gridmap_cmd(grid_args, grid_selector, grid_half_extent, grid_resolution);
    }
    std::cerr << "no subcommand\n";
    return kExitConfig;
  } catch (const mupf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mupf::EpochFileError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitIo;
  } catch (const mupf::DegeneracyError& e) {
    std::cerr << "degeneracy: " << e.what() << '\n';
    return kExitDegeneracy;
  } catch (const mupf::ScheduleError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
}
