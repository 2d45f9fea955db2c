#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mupf/gnss_observation.hpp"

namespace mupf {

// One line of an epoch file: the observations plus the optional per-epoch
// rover velocity and truth used by kinematic runs.
struct EpochRecord {
  ObservationEpoch epoch;
  EcefPosition base;
  std::optional<Vec3> velocity;
  std::optional<EcefPosition> truth;
};

struct EpochFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Line-delimited text format, one epoch per line, '#' comments allowed:
//   t <time> base <x y z> [vel <vx vy vz>] [truth <x y z>]
//     sats <n> {<id> <x> <y> <z>}*n
//     obs <m> {<pivot> <other> <band> <value> <sigma> <wavelength>}*m
// Band tokens are band_name() strings; pseudorange wavelength written as 0.
// Numbers round-trip exactly (%.17g).
std::vector<EpochRecord> read_epoch_file(const std::string& path);
void write_epoch_file(const std::vector<EpochRecord>& records, const std::string& path);

}  // namespace mupf
