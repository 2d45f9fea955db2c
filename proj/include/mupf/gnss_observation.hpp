#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mupf/geometry.hpp"
#include "mupf/particle_filter.hpp"

namespace mupf {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kL1FrequencyHz = 1575.42e6;
inline constexpr double kL2FrequencyHz = 1227.60e6;
inline constexpr double kL1Wavelength = kSpeedOfLight / kL1FrequencyHz;
inline constexpr double kL2Wavelength = kSpeedOfLight / kL2FrequencyHz;
// The wide-lane carrier is the difference of the per-band phases, so its
// effective frequency is the band difference.
inline constexpr double kWideLaneWavelength = kSpeedOfLight / (kL1FrequencyHz - kL2FrequencyHz);

// Observation channel. Pseudorange carries a metric range; carrier channels
// carry phase in cycles of their wavelength.
enum class Band { kPseudorange, kCarrierL1, kCarrierL2, kCarrierWl };

inline bool is_carrier(Band band) { return band != Band::kPseudorange; }
double band_wavelength(Band band);  // meters; 0 for kPseudorange
const char* band_name(Band band);
Band band_from_name(std::string_view name);

struct SatelliteEpochState {
  int sat_id = 0;
  EcefPosition position;
};

using SatelliteList = std::vector<SatelliteEpochState>;

// Throws std::out_of_range if the id is absent.
const EcefPosition& satellite_position(const SatelliteList& sats, int sat_id);

// Differencing structure of one observation: between receivers (rover minus
// base), then between satellites (other minus pivot).
struct DdGeometry {
  int pivot_sat = 0;
  int other_sat = 0;
  EcefPosition base_position;
};

// One double-differenced measurement. value is meters for kPseudorange,
// cycles otherwise; sigma follows the same unit split. wavelength is set for
// carrier bands only.
struct DdObservation {
  DdGeometry geometry;
  Band band = Band::kPseudorange;
  double value = 0.0;
  double sigma = 1.0;
  double wavelength = 0.0;
};

// Everything observed at one time step. Satellite ids must be unique and
// every observation's ids must resolve.
struct ObservationEpoch {
  double time = 0.0;
  SatelliteList satellites;
  std::vector<DdObservation> observations;

  void validate() const;
  bool has_band(Band band) const;
};

// Double-differenced geometric range at candidate position x:
//   (|sat_other - x| - |sat_other - base|) - (|sat_pivot - x| - |sat_pivot - base|)
double dd_geometric_range(const EcefPosition& x, const DdGeometry& geom,
                          const SatelliteList& sats);

// Observed minus geometric DD range, meters.
double pseudorange_residual(const DdObservation& rho, const EcefPosition& x,
                            const SatelliteList& sats);

// Gaussian log-density of the pseudorange residual, normalization included.
double pseudorange_loglik(const DdObservation& rho, const EcefPosition& x,
                          const SatelliteList& sats);

double epoch_pseudorange_loglik(const ObservationEpoch& epoch, const EcefPosition& x);

// Ambiguity function value: the fractional-cycle disagreement between the
// observed phase and the geometric range after removing the nearest integer,
//   psi = round(phi - r(x)/lambda) - (phi - r(x)/lambda).
// Always in [-0.5, 0.5]; exactly invariant under integer shifts of phi.
// Ties round half away from zero.
double afv(const DdObservation& phi, const EcefPosition& x, const SatelliteList& sats);

// Gaussian log-density of the AFV, sigma in cycles.
double carrier_loglik(const DdObservation& phi, const EcefPosition& x,
                      const SatelliteList& sats);

// Sum of carrier_loglik over every observation of one carrier band.
double epoch_carrier_loglik(const ObservationEpoch& epoch, const EcefPosition& x, Band band);

// Log-likelihood of one observation of any band.
double observation_loglik(const DdObservation& obs, const EcefPosition& x,
                          const SatelliteList& sats);

// Wide-lane combination of two carrier observations sharing geometry:
// value = Phi_L1 - Phi_L2 cycles, sigma by root-sum-square, wide-lane
// wavelength. Throws std::invalid_argument on band or geometry mismatch.
DdObservation wide_lane_combine(const DdObservation& l1, const DdObservation& l2);

// Wide-lane observations for every L1/L2 pair in the epoch that shares
// geometry, in L1 observation order.
std::vector<DdObservation> synthesize_wide_lane(const ObservationEpoch& epoch);

// Nominal per-band spreads used to order update stages. Pseudorange in
// meters, carrier bands in cycles of their own wavelength.
struct BandSigmas {
  double pseudorange = 0.5;
  double wide_lane = 0.05;
  double l2 = 0.05;
  double l1 = 0.05;

  void validate() const;
  double metric_spread(Band band) const;  // nominal spread in meters
};

// Builds the staged likelihood schedule for one epoch, coarsest band first:
// pseudorange, then wide-lane (synthesized from L1/L2 pairs), then L2, then
// L1; absent bands are omitted. Stage nominal sigmas are the metric spreads,
// strictly decreasing at the defaults. Evaluators snapshot the epoch and
// reproduce the public per-observation operations bit for bit.
UpdateSchedule build_update_schedule(const ObservationEpoch& epoch,
                                     const BandSigmas& sigmas = {});

}  // namespace mupf
