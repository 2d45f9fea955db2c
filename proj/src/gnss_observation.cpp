#include "mupf/gnss_observation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace mupf {

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

double gaussian_log_norm(double sigma) { return -std::log(kSqrt2Pi * sigma); }

void check_band(const DdObservation& obs, bool want_carrier, const char* op) {
  if (is_carrier(obs.band) != want_carrier) {
    throw std::invalid_argument(std::string(op) + ": wrong band '" + band_name(obs.band) + "'");
  }
}

void check_sigma(const DdObservation& obs) {
  if (!(obs.sigma > 0.0)) throw std::invalid_argument("observation sigma must be positive");
}

void check_wavelength(const DdObservation& obs) {
  if (!(obs.wavelength > 0.0)) {
    throw std::invalid_argument("carrier observation needs a positive wavelength");
  }
}

bool same_geometry(const DdGeometry& a, const DdGeometry& b) {
  return a.pivot_sat == b.pivot_sat && a.other_sat == b.other_sat &&
         a.base_position == b.base_position;
}

// One observation frozen with its satellite geometry so stage evaluation
// skips the id lookup and the two base-side ranges. The arithmetic below
// replays the public operations step for step, so both routes agree bitwise.
struct FrozenObservation {
  EcefPosition sat_other;
  EcefPosition sat_pivot;
  double base_range_other = 0.0;
  double base_range_pivot = 0.0;
  double value = 0.0;
  double wavelength = 0.0;  // 0 marks pseudorange
  double log_norm = 0.0;
  double two_sigma_sq = 0.0;
};

FrozenObservation freeze(const DdObservation& obs, const SatelliteList& sats) {
  check_sigma(obs);
  if (is_carrier(obs.band)) check_wavelength(obs);
  FrozenObservation f;
  f.sat_other = satellite_position(sats, obs.geometry.other_sat);
  f.sat_pivot = satellite_position(sats, obs.geometry.pivot_sat);
  f.base_range_other = distance(f.sat_other, obs.geometry.base_position);
  f.base_range_pivot = distance(f.sat_pivot, obs.geometry.base_position);
  f.value = obs.value;
  f.wavelength = is_carrier(obs.band) ? obs.wavelength : 0.0;
  f.log_norm = gaussian_log_norm(obs.sigma);
  f.two_sigma_sq = 2.0 * obs.sigma * obs.sigma;
  return f;
}

double frozen_loglik(const FrozenObservation& f, const EcefPosition& x) {
  const double range_other = distance(f.sat_other, x) - f.base_range_other;
  const double range_pivot = distance(f.sat_pivot, x) - f.base_range_pivot;
  const double r = range_other - range_pivot;
  double d;
  if (f.wavelength == 0.0) {
    d = f.value - r;
  } else {
    const double u = f.value - r / f.wavelength;
    d = std::round(u) - u;
  }
  return f.log_norm - (d * d) / f.two_sigma_sq;
}

}  // namespace

double band_wavelength(Band band) {
  switch (band) {
    case Band::kPseudorange: return 0.0;
    case Band::kCarrierL1: return kL1Wavelength;
    case Band::kCarrierL2: return kL2Wavelength;
    case Band::kCarrierWl: return kWideLaneWavelength;
  }
  throw std::invalid_argument("unknown band");
}

const char* band_name(Band band) {
  switch (band) {
    case Band::kPseudorange: return "pseudorange";
    case Band::kCarrierL1: return "carrier_L1";
    case Band::kCarrierL2: return "carrier_L2";
    case Band::kCarrierWl: return "carrier_WL";
  }
  return "unknown";
}

Band band_from_name(std::string_view name) {
  if (name == "pseudorange") return Band::kPseudorange;
  if (name == "carrier_L1") return Band::kCarrierL1;
  if (name == "carrier_L2") return Band::kCarrierL2;
  if (name == "carrier_WL") return Band::kCarrierWl;
  throw std::invalid_argument("unknown band '" + std::string(name) + "'");
}

const EcefPosition& satellite_position(const SatelliteList& sats, int sat_id) {
  for (const auto& sat : sats) {
    if (sat.sat_id == sat_id) return sat.position;
  }
  throw std::out_of_range("satellite id " + std::to_string(sat_id) + " not in epoch");
}

void ObservationEpoch::validate() const {
  std::unordered_set<int> ids;
  for (const auto& sat : satellites) {
    if (!ids.insert(sat.sat_id).second) {
      throw std::invalid_argument("duplicate satellite id " + std::to_string(sat.sat_id));
    }
  }
  for (const auto& obs : observations) {
    if (obs.geometry.pivot_sat == obs.geometry.other_sat) {
      throw std::invalid_argument("observation differences a satellite against itself");
    }
    if (!ids.count(obs.geometry.pivot_sat) || !ids.count(obs.geometry.other_sat)) {
      throw std::invalid_argument("observation references a satellite missing from the epoch");
    }
    check_sigma(obs);
    if (is_carrier(obs.band)) check_wavelength(obs);
  }
}

bool ObservationEpoch::has_band(Band band) const {
  return std::any_of(observations.begin(), observations.end(),
                     [band](const DdObservation& o) { return o.band == band; });
}

double dd_geometric_range(const EcefPosition& x, const DdGeometry& geom,
                          const SatelliteList& sats) {
  const EcefPosition& so = satellite_position(sats, geom.other_sat);
  const EcefPosition& sp = satellite_position(sats, geom.pivot_sat);
  const double range_other = distance(so, x) - distance(so, geom.base_position);
  const double range_pivot = distance(sp, x) - distance(sp, geom.base_position);
  return range_other - range_pivot;
}

double pseudorange_residual(const DdObservation& rho, const EcefPosition& x,
                            const SatelliteList& sats) {
  check_band(rho, false, "pseudorange_residual");
  return rho.value - dd_geometric_range(x, rho.geometry, sats);
}

double pseudorange_loglik(const DdObservation& rho, const EcefPosition& x,
                          const SatelliteList& sats) {
  check_band(rho, false, "pseudorange_loglik");
  check_sigma(rho);
  const double d = rho.value - dd_geometric_range(x, rho.geometry, sats);
  return gaussian_log_norm(rho.sigma) - (d * d) / (2.0 * rho.sigma * rho.sigma);
}

double epoch_pseudorange_loglik(const ObservationEpoch& epoch, const EcefPosition& x) {
  double total = 0.0;
  bool any = false;
  for (const auto& obs : epoch.observations) {
    if (obs.band != Band::kPseudorange) continue;
    total += pseudorange_loglik(obs, x, epoch.satellites);
    any = true;
  }
  if (!any) throw std::invalid_argument("epoch has no pseudorange observations");
  return total;
}

double afv(const DdObservation& phi, const EcefPosition& x, const SatelliteList& sats) {
  check_band(phi, true, "afv");
  check_wavelength(phi);
  const double r = dd_geometric_range(x, phi.geometry, sats);
  const double u = phi.value - r / phi.wavelength;
  return std::round(u) - u;
}

double carrier_loglik(const DdObservation& phi, const EcefPosition& x,
                      const SatelliteList& sats) {
  check_sigma(phi);
  const double d = afv(phi, x, sats);
  return gaussian_log_norm(phi.sigma) - (d * d) / (2.0 * phi.sigma * phi.sigma);
}

double epoch_carrier_loglik(const ObservationEpoch& epoch, const EcefPosition& x, Band band) {
  if (!is_carrier(band)) throw std::invalid_argument("epoch_carrier_loglik needs a carrier band");
  double total = 0.0;
  bool any = false;
  for (const auto& obs : epoch.observations) {
    if (obs.band != band) continue;
    total += carrier_loglik(obs, x, epoch.satellites);
    any = true;
  }
  if (!any) {
    throw std::invalid_argument(std::string("epoch has no ") + band_name(band) + " observations");
  }
  return total;
}

double observation_loglik(const DdObservation& obs, const EcefPosition& x,
                          const SatelliteList& sats) {
  return obs.band == Band::kPseudorange ? pseudorange_loglik(obs, x, sats)
                                        : carrier_loglik(obs, x, sats);
}

DdObservation wide_lane_combine(const DdObservation& l1, const DdObservation& l2) {
  if (l1.band != Band::kCarrierL1 || l2.band != Band::kCarrierL2) {
    throw std::invalid_argument("wide_lane_combine needs one carrier_L1 and one carrier_L2");
  }
  if (!same_geometry(l1.geometry, l2.geometry)) {
    throw std::invalid_argument("wide_lane_combine needs matching geometry");
  }
  check_sigma(l1);
  check_sigma(l2);
  DdObservation wl;
  wl.geometry = l1.geometry;
  wl.band = Band::kCarrierWl;
  wl.value = l1.value - l2.value;
  wl.sigma = std::hypot(l1.sigma, l2.sigma);
  wl.wavelength = kWideLaneWavelength;
  return wl;
}

std::vector<DdObservation> synthesize_wide_lane(const ObservationEpoch& epoch) {
  std::vector<DdObservation> out;
  for (const auto& l1 : epoch.observations) {
    if (l1.band != Band::kCarrierL1) continue;
    for (const auto& l2 : epoch.observations) {
      if (l2.band != Band::kCarrierL2 || !same_geometry(l1.geometry, l2.geometry)) continue;
      out.push_back(wide_lane_combine(l1, l2));
      break;
    }
  }
  return out;
}

void BandSigmas::validate() const {
  if (!(pseudorange > 0.0) || !(wide_lane > 0.0) || !(l2 > 0.0) || !(l1 > 0.0)) {
    throw std::invalid_argument("band sigmas must be positive");
  }
}

double BandSigmas::metric_spread(Band band) const {
  switch (band) {
    case Band::kPseudorange: return pseudorange;
    case Band::kCarrierWl: return wide_lane * kWideLaneWavelength;
    case Band::kCarrierL2: return l2 * kL2Wavelength;
    case Band::kCarrierL1: return l1 * kL1Wavelength;
  }
  throw std::invalid_argument("unknown band");
}

UpdateSchedule build_update_schedule(const ObservationEpoch& epoch, const BandSigmas& sigmas) {
  sigmas.validate();
  epoch.validate();

  const auto make_stage = [&](Band band, const std::vector<DdObservation>& obs_list,
                              const char* stage_id) {
    std::vector<FrozenObservation> frozen;
    frozen.reserve(obs_list.size());
    for (const auto& obs : obs_list) frozen.push_back(freeze(obs, epoch.satellites));
    StageDescriptor stage;
    stage.stage_id = stage_id;
    stage.nominal_sigma = sigmas.metric_spread(band);
    stage.log_likelihood = [frozen = std::move(frozen)](const EcefPosition& x) {
      double total = 0.0;
      for (const auto& f : frozen) total += frozen_loglik(f, x);
      return total;
    };
    return stage;
  };

  const auto by_band = [&](Band band) {
    std::vector<DdObservation> out;
    for (const auto& obs : epoch.observations) {
      if (obs.band == band) out.push_back(obs);
    }
    return out;
  };

  UpdateSchedule schedule;
  if (const auto rho = by_band(Band::kPseudorange); !rho.empty()) {
    schedule.stages.push_back(make_stage(Band::kPseudorange, rho, "pseudorange"));
  }
  if (const auto wl = synthesize_wide_lane(epoch); !wl.empty()) {
    schedule.stages.push_back(make_stage(Band::kCarrierWl, wl, "carrier_WL"));
  }
  if (const auto l2 = by_band(Band::kCarrierL2); !l2.empty()) {
    schedule.stages.push_back(make_stage(Band::kCarrierL2, l2, "carrier_L2"));
  }
  if (const auto l1 = by_band(Band::kCarrierL1); !l1.empty()) {
    schedule.stages.push_back(make_stage(Band::kCarrierL1, l1, "carrier_L1"));
  }
  schedule.validate();
  return schedule;
}

}  // namespace mupf
