#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mupf/geometry.hpp"
#include "mupf/gnss_observation.hpp"
#include "mupf/rng.hpp"

namespace mupf {

struct TrajectoryPoint {
  double time = 0.0;
  EcefPosition position;
  Vec3 velocity;
};

enum class AzimuthLayout { kUniformRing, kSeededRandom };

// Synthetic scene: a frozen constellation seen from a base station, plus the
// noise levels and per-scene integer ambiguities behind every epoch drawn
// from it. Satellites sit at a fixed orbit radius with no motion model.
struct SceneConfig {
  int n_satellites = 8;
  double min_elevation_deg = 15.0;
  double max_elevation_deg = 75.0;
  AzimuthLayout layout = AzimuthLayout::kUniformRing;
  double orbit_radius = 26'560'000.0;
  EcefPosition base_position{6378137.0, 0.0, 0.0};
  std::vector<TrajectoryPoint> true_trajectory;
  // Noise magnitudes drawn onto observations. A zero keeps the draw at zero
  // but the emitted observation still advertises the nominal default sigma
  // (0.5 m / 0.05 cycles) so likelihoods stay proper.
  double sigma_pseudorange = 0.5;  // meters
  double sigma_carrier = 0.05;     // cycles, both bands
  std::uint64_t seed = 0;

  void validate() const;
};

std::vector<TrajectoryPoint> static_trajectory(const EcefPosition& position, int n_epochs,
                                               double dt = 1.0);
std::vector<TrajectoryPoint> linear_trajectory(const EcefPosition& start, const Vec3& velocity,
                                               int n_epochs, double dt = 1.0);

// Elevation of a satellite above the local horizon at base, degrees.
double elevation_deg(const EcefPosition& satellite, const EcefPosition& base);

// Places cfg.n_satellites at cfg.orbit_radius: elevations linearly spaced
// over the configured range, azimuths on a uniform ring or seeded-random.
// Ids are 1..n. Deterministic given cfg.
SatelliteList generate_constellation(const SceneConfig& cfg);

// Highest-elevation satellite; lowest id wins ties.
int pivot_satellite_id(const SatelliteList& sats, const EcefPosition& base);

// One epoch of noisy DD observations of the scene at the given truth:
// per non-pivot satellite a pseudorange, an L1 phase, and an L2 phase, each
// band's integer ambiguity fixed per scene. Bands are emitted grouped
// (pseudorange block, then L1, then L2), satellites in id order within each.
// noise_seed drives only the measurement noise; the constellation and the
// ambiguities come from cfg.seed.
ObservationEpoch synthesize_epoch(const SceneConfig& cfg, double time, const EcefPosition& truth,
                                  std::uint64_t noise_seed);

enum class MapSelector { kPseudorange, kWideLane, kL2, kL1, kCombined };
enum class GridPlane { kEastNorth, kEastUp, kNorthUp };

// Dense log-likelihood samples over a plane through center, odd dimension so
// center is the middle node. Axis labels follow the plane: for kEastNorth
// node (row r, col c) sits at center + (c-h)*res*E + (r-h)*res*N, h = dim/2,
// values row-major.
struct GridMap {
  EcefPosition center;
  EnuFrame frame;
  GridPlane plane = GridPlane::kEastNorth;
  double half_extent = 1.0;
  double resolution = 0.01;
  int dim = 0;
  std::vector<double> values;

  double& at(int row, int col) { return values[static_cast<std::size_t>(row) * dim + col]; }
  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * dim + col]; }
  EcefPosition node_position(int row, int col) const;
};

// Evaluates the selected band's epoch log-likelihood (or the all-band
// combination, wide-lane synthesized) at every node of the plane through
// center. Throws std::invalid_argument when the epoch lacks the band.
GridMap grid_likelihood_map(const ObservationEpoch& epoch, const EcefPosition& center,
                            MapSelector selector, double half_extent = 1.0,
                            double resolution = 0.01, GridPlane plane = GridPlane::kEastNorth);

// Node of maximum value; ties break toward the node nearest center, then
// lowest row-major index.
EcefPosition oracle_argmax(const GridMap& map);

// Strict local maxima over the 8-neighborhood, interior nodes only.
int count_local_maxima(const GridMap& map);

// CSV with header east_m,north_m,loglik (axis names follow the plane),
// row-major node order. Throws std::runtime_error on I/O failure.
void write_gridmap_csv(const GridMap& map, const std::string& path);

}  // namespace mupf
