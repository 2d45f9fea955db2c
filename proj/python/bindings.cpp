// Python bindings for the core operations: geometry, DD observation models,
// the particle filter, the scene simulator, and the experiment harness.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mupf/epoch_file.hpp"
#include "mupf/harness.hpp"
#include "mupf/particle_filter.hpp"
#include "mupf/rng.hpp"
#include "mupf/scene_simulator.hpp"

namespace py = pybind11;
using namespace mupf;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiple-update particle filter for precise satellite positioning";
  m.attr("__version__") = "0.1.0";

  py::register_exception<DegeneracyError>(m, "DegeneracyError");
  py::register_exception<ScheduleError>(m, "ScheduleError");
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<EpochFileError>(m, "EpochFileError");

  // --- geometry ---------------------------------------------------------
  py::class_<Vec3>(m, "Vec3")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("z"))
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z)
      .def("__add__", [](const Vec3& a, const Vec3& b) { return a + b; })
      .def("__sub__", [](const Vec3& a, const Vec3& b) { return a - b; })
      .def("__mul__", [](const Vec3& a, double s) { return a * s; })
      .def("__rmul__", [](const Vec3& a, double s) { return a * s; })
      .def("__eq__", [](const Vec3& a, const Vec3& b) { return a == b; })
      .def("__repr__", [](const Vec3& v) {
        std::ostringstream ss;
        ss << "Vec3(" << v.x << ", " << v.y << ", " << v.z << ")";
        return ss.str();
      });
  m.def("norm", &norm, py::arg("v"));
  m.def("distance", &distance, py::arg("a"), py::arg("b"));

  py::class_<EnuFrame>(m, "EnuFrame")
      .def_static("at", &EnuFrame::at, py::arg("origin"))
      .def_readonly("origin", &EnuFrame::origin)
      .def_readonly("east", &EnuFrame::east)
      .def_readonly("north", &EnuFrame::north)
      .def_readonly("up", &EnuFrame::up)
      .def("to_ecef", &EnuFrame::to_ecef, py::arg("e"), py::arg("n"), py::arg("u"))
      .def("from_ecef", &EnuFrame::from_ecef, py::arg("p"));

  // --- observations -----------------------------------------------------
  py::enum_<Band>(m, "Band")
      .value("PSEUDORANGE", Band::kPseudorange)
      .value("CARRIER_L1", Band::kCarrierL1)
      .value("CARRIER_L2", Band::kCarrierL2)
      .value("CARRIER_WL", Band::kCarrierWl);

  m.attr("SPEED_OF_LIGHT") = kSpeedOfLight;
  m.attr("L1_WAVELENGTH") = kL1Wavelength;
  m.attr("L2_WAVELENGTH") = kL2Wavelength;
  m.attr("WIDE_LANE_WAVELENGTH") = kWideLaneWavelength;

  m.def("band_name", &band_name, py::arg("band"));
  m.def("band_from_name", &band_from_name, py::arg("name"));
  m.def("band_wavelength", &band_wavelength, py::arg("band"));
  m.def("is_carrier", &is_carrier, py::arg("band"));

  py::class_<SatelliteEpochState>(m, "SatelliteEpochState")
      .def(py::init<>())
      .def(py::init([](int sat_id, const Vec3& position) {
             return SatelliteEpochState{sat_id, position};
           }),
           py::arg("sat_id"), py::arg("position"))
      .def_readwrite("sat_id", &SatelliteEpochState::sat_id)
      .def_readwrite("position", &SatelliteEpochState::position);

  py::class_<DdGeometry>(m, "DdGeometry")
      .def(py::init<>())
      .def(py::init([](int pivot_sat, int other_sat, const Vec3& base) {
             return DdGeometry{pivot_sat, other_sat, base};
           }),
           py::arg("pivot_sat"), py::arg("other_sat"), py::arg("base_position"))
      .def_readwrite("pivot_sat", &DdGeometry::pivot_sat)
      .def_readwrite("other_sat", &DdGeometry::other_sat)
      .def_readwrite("base_position", &DdGeometry::base_position);

  py::class_<DdObservation>(m, "DdObservation")
      .def(py::init<>())
      .def_readwrite("geometry", &DdObservation::geometry)
      .def_readwrite("band", &DdObservation::band)
      .def_readwrite("value", &DdObservation::value)
      .def_readwrite("sigma", &DdObservation::sigma)
      .def_readwrite("wavelength", &DdObservation::wavelength);

  py::class_<ObservationEpoch>(m, "ObservationEpoch")
      .def(py::init<>())
      .def_readwrite("time", &ObservationEpoch::time)
      .def_readwrite("satellites", &ObservationEpoch::satellites)
      .def_readwrite("observations", &ObservationEpoch::observations)
      .def("validate", &ObservationEpoch::validate)
      .def("has_band", &ObservationEpoch::has_band, py::arg("band"));

  m.def("satellite_position", &satellite_position, py::arg("satellites"), py::arg("sat_id"));
  m.def("dd_geometric_range", &dd_geometric_range, py::arg("position"), py::arg("geometry"),
        py::arg("satellites"));
  m.def("pseudorange_residual", &pseudorange_residual, py::arg("obs"), py::arg("position"),
        py::arg("satellites"));
  m.def("pseudorange_loglik", &pseudorange_loglik, py::arg("obs"), py::arg("position"),
        py::arg("satellites"));
  m.def("afv", &afv, py::arg("obs"), py::arg("position"), py::arg("satellites"));
  m.def("carrier_loglik", &carrier_loglik, py::arg("obs"), py::arg("position"),
        py::arg("satellites"));
  m.def("observation_loglik", &observation_loglik, py::arg("obs"), py::arg("position"),
        py::arg("satellites"));
  m.def("wide_lane_combine", &wide_lane_combine, py::arg("l1"), py::arg("l2"));
  m.def("synthesize_wide_lane", &synthesize_wide_lane, py::arg("epoch"));
  m.def("epoch_pseudorange_loglik", &epoch_pseudorange_loglik, py::arg("epoch"),
        py::arg("position"));
  m.def("epoch_carrier_loglik", &epoch_carrier_loglik, py::arg("epoch"), py::arg("position"),
        py::arg("band"));

  py::class_<BandSigmas>(m, "BandSigmas")
      .def(py::init<>())
      .def_readwrite("pseudorange", &BandSigmas::pseudorange)
      .def_readwrite("wide_lane", &BandSigmas::wide_lane)
      .def_readwrite("l2", &BandSigmas::l2)
      .def_readwrite("l1", &BandSigmas::l1)
      .def("metric_spread", &BandSigmas::metric_spread, py::arg("band"))
      .def("validate", &BandSigmas::validate);

  // --- particle filter ---------------------------------------------------
  py::enum_<Strategy>(m, "Strategy")
      .value("NORMAL", Strategy::kNormal)
      .value("MULTIPLE_UPDATE", Strategy::kMultipleUpdate)
      .value("ANNEALED", Strategy::kAnnealed);
  py::enum_<DegeneracyPolicy>(m, "DegeneracyPolicy")
      .value("RESET_UNIFORM", DegeneracyPolicy::kResetUniform)
      .value("ABORT", DegeneracyPolicy::kAbort);
  m.def("strategy_name", &strategy_name, py::arg("strategy"));
  m.def("strategy_from_name", &strategy_from_name, py::arg("name"));

  py::class_<GaussianPrior>(m, "GaussianPrior")
      .def(py::init<>())
      .def_readwrite("mean", &GaussianPrior::mean)
      .def_readwrite("sigma", &GaussianPrior::sigma);

  py::class_<MotionModel>(m, "MotionModel")
      .def(py::init<>())
      .def_readwrite("velocity", &MotionModel::velocity)
      .def_readwrite("process_noise_sigma", &MotionModel::process_noise_sigma)
      .def_readwrite("dt", &MotionModel::dt);

  py::class_<FilterConfig>(m, "FilterConfig")
      .def(py::init<>())
      .def_readwrite("n_particles", &FilterConfig::n_particles)
      .def_readwrite("strategy", &FilterConfig::strategy)
      .def_readwrite("annealing_exponents", &FilterConfig::annealing_exponents)
      .def_readwrite("rng_seed", &FilterConfig::rng_seed)
      .def_readwrite("degeneracy_policy", &FilterConfig::degeneracy_policy)
      .def_readwrite("regularization_scale", &FilterConfig::regularization_scale)
      .def("validate", &FilterConfig::validate);

  py::class_<ParticleSet>(m, "ParticleSet")
      .def(py::init<>())
      .def_readwrite("states", &ParticleSet::states)
      .def_readwrite("log_weights", &ParticleSet::log_weights)
      .def("__len__", &ParticleSet::size);

  py::class_<StageDescriptor>(m, "StageDescriptor")
      .def(py::init<>())
      .def(py::init([](std::string stage_id, double nominal_sigma, LogLikelihoodFn fn) {
             return StageDescriptor{std::move(stage_id), nominal_sigma, std::move(fn)};
           }),
           py::arg("stage_id"), py::arg("nominal_sigma"), py::arg("log_likelihood"))
      .def_readwrite("stage_id", &StageDescriptor::stage_id)
      .def_readwrite("nominal_sigma", &StageDescriptor::nominal_sigma)
      .def("log_likelihood",
           [](const StageDescriptor& s, const EcefPosition& x) { return s.log_likelihood(x); },
           py::arg("position"));

  py::class_<UpdateSchedule>(m, "UpdateSchedule")
      .def(py::init<>())
      .def(py::init([](std::vector<StageDescriptor> stages) {
             UpdateSchedule s;
             s.stages = std::move(stages);
             return s;
           }),
           py::arg("stages"))
      .def_readwrite("stages", &UpdateSchedule::stages)
      .def("validate", &UpdateSchedule::validate)
      .def("__len__", [](const UpdateSchedule& s) { return s.stages.size(); })
      .def_property_readonly("stage_ids", [](const UpdateSchedule& s) {
        std::vector<std::string> ids;
        for (const auto& st : s.stages) ids.push_back(st.stage_id);
        return ids;
      });

  py::class_<StageDiagnostics>(m, "StageDiagnostics")
      .def_readonly("stage_id", &StageDiagnostics::stage_id)
      .def_readonly("ess", &StageDiagnostics::ess)
      .def_readonly("degenerate", &StageDiagnostics::degenerate);
  py::class_<UpdateDiagnostics>(m, "UpdateDiagnostics")
      .def_readonly("stages", &UpdateDiagnostics::stages)
      .def("any_degenerate", &UpdateDiagnostics::any_degenerate);
  py::class_<NormalizeResult>(m, "NormalizeResult")
      .def_readonly("degenerate", &NormalizeResult::degenerate)
      .def_readonly("ess", &NormalizeResult::ess);

  m.def("init_particles",
        py::overload_cast<const GaussianPrior&, std::size_t, std::uint64_t>(&init_particles),
        py::arg("prior"), py::arg("n"), py::arg("seed"));
  m.def("predict",
        py::overload_cast<ParticleSet&, const MotionModel&, std::uint64_t>(&predict),
        py::arg("particles"), py::arg("model"), py::arg("seed"));
  m.def("weight_stage", &weight_stage, py::arg("particles"), py::arg("log_likelihood"));
  m.def("normalize_weights", &normalize_weights, py::arg("particles"),
        py::arg("policy") = DegeneracyPolicy::kResetUniform, py::arg("stage_id") = "");
  m.def("resample_multinomial",
        py::overload_cast<ParticleSet&, std::uint64_t>(&resample_multinomial),
        py::arg("particles"), py::arg("seed"));
  m.def("run_update",
        py::overload_cast<ParticleSet&, const UpdateSchedule&, const FilterConfig&,
                          std::uint64_t>(&run_update),
        py::arg("particles"), py::arg("schedule"), py::arg("config"), py::arg("seed"));
  m.def("estimate_state", &estimate_state, py::arg("particles"));
  m.def("effective_sample_size", &effective_sample_size, py::arg("particles"));
  m.def("build_update_schedule", &build_update_schedule, py::arg("epoch"),
        py::arg("band_sigmas") = BandSigmas{});
  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("stream"));

  // --- scene simulator ----------------------------------------------------
  py::enum_<AzimuthLayout>(m, "AzimuthLayout")
      .value("UNIFORM_RING", AzimuthLayout::kUniformRing)
      .value("SEEDED_RANDOM", AzimuthLayout::kSeededRandom);

  py::class_<TrajectoryPoint>(m, "TrajectoryPoint")
      .def(py::init<>())
      .def_readwrite("time", &TrajectoryPoint::time)
      .def_readwrite("position", &TrajectoryPoint::position)
      .def_readwrite("velocity", &TrajectoryPoint::velocity);

  py::class_<SceneConfig>(m, "SceneConfig")
      .def(py::init<>())
      .def_readwrite("n_satellites", &SceneConfig::n_satellites)
      .def_readwrite("min_elevation_deg", &SceneConfig::min_elevation_deg)
      .def_readwrite("max_elevation_deg", &SceneConfig::max_elevation_deg)
      .def_readwrite("layout", &SceneConfig::layout)
      .def_readwrite("orbit_radius", &SceneConfig::orbit_radius)
      .def_readwrite("base_position", &SceneConfig::base_position)
      .def_readwrite("true_trajectory", &SceneConfig::true_trajectory)
      .def_readwrite("sigma_pseudorange", &SceneConfig::sigma_pseudorange)
      .def_readwrite("sigma_carrier", &SceneConfig::sigma_carrier)
      .def_readwrite("seed", &SceneConfig::seed)
      .def("validate", &SceneConfig::validate);

  m.def("static_trajectory", &static_trajectory, py::arg("position"), py::arg("n_epochs"),
        py::arg("dt") = 1.0);
  m.def("linear_trajectory", &linear_trajectory, py::arg("start"), py::arg("velocity"),
        py::arg("n_epochs"), py::arg("dt") = 1.0);
  m.def("elevation_deg", &elevation_deg, py::arg("satellite"), py::arg("base"));
  m.def("generate_constellation", &generate_constellation, py::arg("config"));
  m.def("pivot_satellite_id", &pivot_satellite_id, py::arg("satellites"), py::arg("base"));
  m.def("synthesize_epoch", &synthesize_epoch, py::arg("config"), py::arg("time"),
        py::arg("truth"), py::arg("noise_seed"));

  py::enum_<MapSelector>(m, "MapSelector")
      .value("PSEUDORANGE", MapSelector::kPseudorange)
      .value("WIDE_LANE", MapSelector::kWideLane)
      .value("L2", MapSelector::kL2)
      .value("L1", MapSelector::kL1)
      .value("COMBINED", MapSelector::kCombined);
  py::enum_<GridPlane>(m, "GridPlane")
      .value("EAST_NORTH", GridPlane::kEastNorth)
      .value("EAST_UP", GridPlane::kEastUp)
      .value("NORTH_UP", GridPlane::kNorthUp);

  py::class_<GridMap>(m, "GridMap")
      .def_readonly("center", &GridMap::center)
      .def_readonly("frame", &GridMap::frame)
      .def_readonly("plane", &GridMap::plane)
      .def_readonly("half_extent", &GridMap::half_extent)
      .def_readonly("resolution", &GridMap::resolution)
      .def_readonly("dim", &GridMap::dim)
      .def_readonly("values", &GridMap::values)
      .def("at", py::overload_cast<int, int>(&GridMap::at, py::const_), py::arg("row"),
           py::arg("col"))
      .def("node_position", &GridMap::node_position, py::arg("row"), py::arg("col"));

  m.def("grid_likelihood_map", &grid_likelihood_map, py::arg("epoch"), py::arg("center"),
        py::arg("selector"), py::arg("half_extent") = 1.0, py::arg("resolution") = 0.01,
        py::arg("plane") = GridPlane::kEastNorth);
  m.def("oracle_argmax", &oracle_argmax, py::arg("map"));
  m.def("count_local_maxima", &count_local_maxima, py::arg("map"));
  m.def("write_gridmap_csv", &write_gridmap_csv, py::arg("map"), py::arg("path"));

  // --- harness -------------------------------------------------------------
  py::class_<TrialBatteryConfig>(m, "TrialBatteryConfig")
      .def(py::init<>())
      .def_readwrite("n_trials", &TrialBatteryConfig::n_trials)
      .def_readwrite("epochs_per_trial", &TrialBatteryConfig::epochs_per_trial)
      .def_readwrite("filter", &TrialBatteryConfig::filter)
      .def_readwrite("prior", &TrialBatteryConfig::prior)
      .def_readwrite("scene", &TrialBatteryConfig::scene)
      .def_readwrite("strategies", &TrialBatteryConfig::strategies)
      .def_readwrite("band_sigmas", &TrialBatteryConfig::band_sigmas)
      .def_readwrite("process_noise_sigma", &TrialBatteryConfig::process_noise_sigma)
      .def_readwrite("dt", &TrialBatteryConfig::dt)
      .def_readwrite("fixed_threshold_m", &TrialBatteryConfig::fixed_threshold_m)
      .def_readwrite("master_seed", &TrialBatteryConfig::master_seed)
      .def("validate", &TrialBatteryConfig::validate);

  py::class_<DegeneracyEvent>(m, "DegeneracyEvent")
      .def_readonly("epoch", &DegeneracyEvent::epoch)
      .def_readonly("stage", &DegeneracyEvent::stage);

  py::class_<TrialResult>(m, "TrialResult")
      .def_readonly("trial_id", &TrialResult::trial_id)
      .def_readonly("strategy", &TrialResult::strategy)
      .def_readonly("per_epoch_3d_error", &TrialResult::per_epoch_3d_error)
      .def_property_readonly("fixed_at",
                             [](const TrialResult& t) {
                               std::vector<bool> out;
                               for (char c : t.fixed_at) out.push_back(c != 0);
                               return out;
                             })
      .def_readonly("degeneracy_events", &TrialResult::degeneracy_events);

  py::class_<EpochStats>(m, "EpochStats")
      .def_readonly("mean_err_m", &EpochStats::mean_err_m)
      .def_readonly("q25_m", &EpochStats::q25_m)
      .def_readonly("median_m", &EpochStats::median_m)
      .def_readonly("q75_m", &EpochStats::q75_m)
      .def_readonly("q90_m", &EpochStats::q90_m)
      .def_readonly("fixed_pct", &EpochStats::fixed_pct);

  py::class_<StrategySummary>(m, "StrategySummary")
      .def_readonly("strategy", &StrategySummary::strategy)
      .def_readonly("epoch1_err_cm", &StrategySummary::epoch1_err_cm)
      .def_readonly("epoch1_fix_pct", &StrategySummary::epoch1_fix_pct)
      .def_readonly("final_err_cm", &StrategySummary::final_err_cm)
      .def_readonly("final_fix_pct", &StrategySummary::final_fix_pct)
      .def_readonly("per_epoch", &StrategySummary::per_epoch);

  py::class_<BatteryResult>(m, "BatteryResult")
      .def_readonly("summary", &BatteryResult::summary)
      .def_readonly("trials", &BatteryResult::trials);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("counts", &SweepResult::counts)
      .def_readonly("batteries", &SweepResult::batteries);

  m.def("run_static_battery", &run_static_battery, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("default_truth_position", &default_truth_position, py::arg("scene"));
  m.def("summary_for", &summary_for, py::arg("result"), py::arg("strategy"),
        py::return_value_policy::copy);
  m.def("run_particle_sweep", &run_particle_sweep, py::arg("config"), py::arg("counts"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<KinematicConfig>(m, "KinematicConfig")
      .def(py::init<>())
      .def_readwrite("filter", &KinematicConfig::filter)
      .def_readwrite("prior", &KinematicConfig::prior)
      .def_readwrite("prior_mean_is_offset", &KinematicConfig::prior_mean_is_offset)
      .def_readwrite("band_sigmas", &KinematicConfig::band_sigmas)
      .def_readwrite("process_noise_sigma", &KinematicConfig::process_noise_sigma)
      .def_readwrite("dt", &KinematicConfig::dt)
      .def_readwrite("fixed_threshold_m", &KinematicConfig::fixed_threshold_m)
      .def_readwrite("master_seed", &KinematicConfig::master_seed)
      .def("validate", &KinematicConfig::validate);

  py::class_<CdfRow>(m, "CdfRow")
      .def_readonly("threshold_m", &CdfRow::threshold_m)
      .def_readonly("fraction_within", &CdfRow::fraction_within);

  py::class_<KinematicResult>(m, "KinematicResult")
      .def_readonly("times", &KinematicResult::times)
      .def_readonly("estimates", &KinematicResult::estimates)
      .def_readonly("has_truth", &KinematicResult::has_truth)
      .def_readonly("errors_m", &KinematicResult::errors_m)
      .def_readonly("cdf", &KinematicResult::cdf)
      .def_readonly("degeneracy_events", &KinematicResult::degeneracy_events);

  py::class_<EpochRecord>(m, "EpochRecord")
      .def(py::init<>())
      .def_readwrite("epoch", &EpochRecord::epoch)
      .def_readwrite("base", &EpochRecord::base)
      .def_readwrite("velocity", &EpochRecord::velocity)
      .def_readwrite("truth", &EpochRecord::truth);

  m.def("read_epoch_file", &read_epoch_file, py::arg("path"));
  m.def("write_epoch_file", &write_epoch_file, py::arg("records"), py::arg("path"));
  m.def("run_kinematic", &run_kinematic, py::arg("records"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  m.def("battery_config_from_json", &battery_config_from_json, py::arg("text"));
  m.def("battery_config_to_json", &battery_config_to_json, py::arg("config"));
  m.def("kinematic_config_from_json", &kinematic_config_from_json, py::arg("text"));
  m.def("kinematic_config_to_json", &kinematic_config_to_json, py::arg("config"));
  m.def("config_hash", &config_hash, py::arg("canonical_json"));
}
