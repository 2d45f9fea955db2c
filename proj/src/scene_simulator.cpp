#include "mupf/scene_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace mupf {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// RNG stream tags under the scene seed.
constexpr std::uint64_t kConstellationStream = 1;
constexpr std::uint64_t kAmbiguityStream = 2;

constexpr double kNominalSigmaPseudorange = 0.5;  // meters
constexpr double kNominalSigmaCarrier = 0.05;     // cycles

double advertised(double configured, double fallback) {
  return configured > 0.0 ? configured : fallback;
}

}  // namespace

void SceneConfig::validate() const {
  if (n_satellites < 2) throw std::invalid_argument("scene needs at least 2 satellites");
  if (min_elevation_deg < 0.0 || max_elevation_deg > 90.0 ||
      min_elevation_deg > max_elevation_deg) {
    throw std::invalid_argument("elevation range must satisfy 0 <= min <= max <= 90");
  }
  if (!(orbit_radius > norm(base_position))) {
    throw std::invalid_argument("orbit radius must exceed the base position radius");
  }
  if (sigma_pseudorange < 0.0 || sigma_carrier < 0.0) {
    throw std::invalid_argument("noise sigmas must be nonnegative");
  }
}

std::vector<TrajectoryPoint> static_trajectory(const EcefPosition& position, int n_epochs,
                                               double dt) {
  std::vector<TrajectoryPoint> out;
  out.reserve(n_epochs);
  for (int i = 0; i < n_epochs; ++i) out.push_back({i * dt, position, Vec3{}});
  return out;
}

std::vector<TrajectoryPoint> linear_trajectory(const EcefPosition& start, const Vec3& velocity,
                                               int n_epochs, double dt) {
  std::vector<TrajectoryPoint> out;
  out.reserve(n_epochs);
  for (int i = 0; i < n_epochs; ++i) {
    out.push_back({i * dt, start + velocity * (i * dt), velocity});
  }
  return out;
}

double elevation_deg(const EcefPosition& satellite, const EcefPosition& base) {
  const Vec3 up = normalized(base);
  const Vec3 dir = normalized(satellite - base);
  const double s = std::clamp(dot(dir, up), -1.0, 1.0);
  return std::asin(s) / kDegToRad;
}

SatelliteList generate_constellation(const SceneConfig& cfg) {
  cfg.validate();
  const EnuFrame frame = EnuFrame::at(cfg.base_position);
  const int n = cfg.n_satellites;

  std::vector<double> azimuths(n);
  if (cfg.layout == AzimuthLayout::kUniformRing) {
    for (int i = 0; i < n; ++i) azimuths[i] = i * 360.0 / n;
  } else {
    Rng rng(derive_seed(cfg.seed, kConstellationStream));
    std::uniform_real_distribution<double> az(0.0, 360.0);
    for (int i = 0; i < n; ++i) azimuths[i] = az(rng);
  }

  SatelliteList sats;
  sats.reserve(n);
  const Vec3 b = cfg.base_position;
  const double b_sq = dot(b, b);
  const double r_sq = cfg.orbit_radius * cfg.orbit_radius;
  for (int i = 0; i < n; ++i) {
    const double el = (cfg.min_elevation_deg +
                       i * (cfg.max_elevation_deg - cfg.min_elevation_deg) / (n - 1)) *
                      kDegToRad;
    const double az = azimuths[i] * kDegToRad;
    // Compass azimuth: clockwise from north toward east.
    const Vec3 u = frame.east * (std::sin(az) * std::cos(el)) +
                   frame.north * (std::cos(az) * std::cos(el)) + frame.up * std::sin(el);
    // Range s along u with |base + s*u| = orbit_radius.
    const double bu = dot(b, u);
    const double s = -bu + std::sqrt(bu * bu + r_sq - b_sq);
    sats.push_back({i + 1, b + u * s});
  }
  return sats;
}

int pivot_satellite_id(const SatelliteList& sats, const EcefPosition& base) {
  if (sats.empty()) throw std::invalid_argument("empty satellite list");
  int best_id = sats.front().sat_id;
  double best_el = elevation_deg(sats.front().position, base);
  for (std::size_t i = 1; i < sats.size(); ++i) {
    const double el = elevation_deg(sats[i].position, base);
    if (el > best_el || (el == best_el && sats[i].sat_id < best_id)) {
      best_el = el;
      best_id = sats[i].sat_id;
    }
  }
  return best_id;
}

ObservationEpoch synthesize_epoch(const SceneConfig& cfg, double time, const EcefPosition& truth,
                                  std::uint64_t noise_seed) {
  cfg.validate();
  ObservationEpoch epoch;
  epoch.time = time;
  epoch.satellites = generate_constellation(cfg);
  if (epoch.satellites.size() < 2) throw std::invalid_argument("scene has fewer than 2 satellites");
  const int pivot = pivot_satellite_id(epoch.satellites, cfg.base_position);

  // Per-scene integer DD ambiguities, one per (satellite, band), fixed
  // across epochs: drawn from the scene seed, not the noise seed.
  Rng amb_rng(derive_seed(cfg.seed, kAmbiguityStream));
  std::uniform_int_distribution<int> amb(-100000, 100000);
  std::vector<int> amb_l1, amb_l2, others;
  for (const auto& sat : epoch.satellites) {
    if (sat.sat_id == pivot) continue;
    others.push_back(sat.sat_id);
    amb_l1.push_back(amb(amb_rng));
    amb_l2.push_back(amb(amb_rng));
  }

  const double sigma_rho = advertised(cfg.sigma_pseudorange, kNominalSigmaPseudorange);
  const double sigma_phi = advertised(cfg.sigma_carrier, kNominalSigmaCarrier);

  Rng rng(noise_seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const auto range_at_truth = [&](int other) {
    return dd_geometric_range(truth, {pivot, other, cfg.base_position}, epoch.satellites);
  };

  for (int other : others) {
    DdObservation obs;
    obs.geometry = {pivot, other, cfg.base_position};
    obs.band = Band::kPseudorange;
    obs.value = range_at_truth(other) + cfg.sigma_pseudorange * n01(rng);
    obs.sigma = sigma_rho;
    epoch.observations.push_back(obs);
  }
  for (std::size_t i = 0; i < others.size(); ++i) {
    DdObservation obs;
    obs.geometry = {pivot, others[i], cfg.base_position};
    obs.band = Band::kCarrierL1;
    obs.value = range_at_truth(others[i]) / kL1Wavelength + amb_l1[i] +
                cfg.sigma_carrier * n01(rng);
    obs.sigma = sigma_phi;
    obs.wavelength = kL1Wavelength;
    epoch.observations.push_back(obs);
  }
  for (std::size_t i = 0; i < others.size(); ++i) {
    DdObservation obs;
    obs.geometry = {pivot, others[i], cfg.base_position};
    obs.band = Band::kCarrierL2;
    obs.value = range_at_truth(others[i]) / kL2Wavelength + amb_l2[i] +
                cfg.sigma_carrier * n01(rng);
    obs.sigma = sigma_phi;
    obs.wavelength = kL2Wavelength;
    epoch.observations.push_back(obs);
  }
  return epoch;
}

EcefPosition GridMap::node_position(int row, int col) const {
  const int h = dim / 2;
  const double a = (col - h) * resolution;
  const double b = (row - h) * resolution;
  switch (plane) {
    case GridPlane::kEastNorth: return frame.to_ecef(a, b, 0.0);
    case GridPlane::kEastUp: return frame.to_ecef(a, 0.0, b);
    case GridPlane::kNorthUp: return frame.to_ecef(0.0, a, b);
  }
  throw std::logic_error("unknown grid plane");
}

GridMap grid_likelihood_map(const ObservationEpoch& epoch, const EcefPosition& center,
                            MapSelector selector, double half_extent, double resolution,
                            GridPlane plane) {
  if (!(half_extent > 0.0) || !(resolution > 0.0) || resolution > half_extent) {
    throw std::invalid_argument("grid params must satisfy 0 < resolution <= half_extent");
  }
  const UpdateSchedule schedule = build_update_schedule(epoch);
  LogLikelihoodFn eval;
  if (selector == MapSelector::kCombined) {
    eval = [&schedule](const EcefPosition& x) {
      double total = 0.0;
      for (const auto& stage : schedule.stages) total += stage.log_likelihood(x);
      return total;
    };
  } else {
    const char* wanted = nullptr;
    switch (selector) {
      case MapSelector::kPseudorange: wanted = "pseudorange"; break;
      case MapSelector::kWideLane: wanted = "carrier_WL"; break;
      case MapSelector::kL2: wanted = "carrier_L2"; break;
      case MapSelector::kL1: wanted = "carrier_L1"; break;
      case MapSelector::kCombined: break;
    }
    for (const auto& stage : schedule.stages) {
      if (stage.stage_id == wanted) {
        eval = stage.log_likelihood;
        break;
      }
    }
    if (!eval) {
      throw std::invalid_argument(std::string("epoch has no observations for map '") + wanted +
                                  "'");
    }
  }

  GridMap map;
  map.center = center;
  map.frame = EnuFrame::at(center);
  map.plane = plane;
  map.half_extent = half_extent;
  map.resolution = resolution;
  map.dim = 2 * static_cast<int>(std::llround(half_extent / resolution)) + 1;
  map.values.resize(static_cast<std::size_t>(map.dim) * map.dim);
  for (int row = 0; row < map.dim; ++row) {
    for (int col = 0; col < map.dim; ++col) {
      map.at(row, col) = eval(map.node_position(row, col));
    }
  }
  return map;
}

EcefPosition oracle_argmax(const GridMap& map) {
  if (map.values.empty()) throw std::invalid_argument("empty grid map");
  const int h = map.dim / 2;
  int best_row = 0, best_col = 0;
  double best_value = map.at(0, 0);
  long best_d2 = 2L * h * h;
  for (int row = 0; row < map.dim; ++row) {
    for (int col = 0; col < map.dim; ++col) {
      const double v = map.at(row, col);
      const long d2 = static_cast<long>(row - h) * (row - h) +
                      static_cast<long>(col - h) * (col - h);
      if (v > best_value || (v == best_value && d2 < best_d2)) {
        best_value = v;
        best_d2 = d2;
        best_row = row;
        best_col = col;
      }
    }
  }
  return map.node_position(best_row, best_col);
}

int count_local_maxima(const GridMap& map) {
  int count = 0;
  for (int row = 1; row + 1 < map.dim; ++row) {
    for (int col = 1; col + 1 < map.dim; ++col) {
      const double v = map.at(row, col);
      bool is_max = true;
      for (int dr = -1; dr <= 1 && is_max; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (!(v > map.at(row + dr, col + dc))) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) ++count;
    }
  }
  return count;
}

void write_gridmap_csv(const GridMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  const char* header = "east_m,north_m,loglik";
  if (map.plane == GridPlane::kEastUp) header = "east_m,up_m,loglik";
  if (map.plane == GridPlane::kNorthUp) header = "north_m,up_m,loglik";
  out << header << '\n';
  const int h = map.dim / 2;
  char line[96];
  for (int row = 0; row < map.dim; ++row) {
    for (int col = 0; col < map.dim; ++col) {
      std::snprintf(line, sizeof(line), "%.10g,%.10g,%.17g", (col - h) * map.resolution,
                    (row - h) * map.resolution, map.at(row, col));
      out << line << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace mupf
