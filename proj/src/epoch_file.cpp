#include "mupf/epoch_file.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mupf {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw EpochFileError("epoch file line " + std::to_string(line_no) + ": " + what);
}

class LineReader {
 public:
  LineReader(const std::string& line, std::size_t line_no) : in_(line), line_no_(line_no) {}

  std::string word(const char* what) {
    std::string w;
    if (!(in_ >> w)) fail(line_no_, std::string("expected ") + what);
    return w;
  }

  void keyword(const char* kw) {
    const std::string w = word(kw);
    if (w != kw) fail(line_no_, "expected '" + std::string(kw) + "', got '" + w + "'");
  }

  double number(const char* what) {
    double v = 0.0;
    if (!(in_ >> v)) fail(line_no_, std::string("expected number for ") + what);
    return v;
  }

  int integer(const char* what) {
    int v = 0;
    if (!(in_ >> v)) fail(line_no_, std::string("expected integer for ") + what);
    return v;
  }

  Vec3 triple(const char* what) {
    const double x = number(what), y = number(what), z = number(what);
    return {x, y, z};
  }

  bool peek_word(std::string& out) {
    const auto pos = in_.tellg();
    if (!(in_ >> out)) return false;
    in_.seekg(pos);
    return true;
  }

  void expect_end() {
    std::string extra;
    if (in_ >> extra) fail(line_no_, "trailing content starting at '" + extra + "'");
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istringstream in_;
  std::size_t line_no_;
};

EpochRecord parse_line(const std::string& line, std::size_t line_no) {
  LineReader r(line, line_no);
  EpochRecord rec;
  r.keyword("t");
  rec.epoch.time = r.number("time");
  r.keyword("base");
  rec.base = r.triple("base position");

  std::string next;
  if (r.peek_word(next) && next == "vel") {
    r.keyword("vel");
    rec.velocity = r.triple("velocity");
  }
  if (r.peek_word(next) && next == "truth") {
    r.keyword("truth");
    rec.truth = r.triple("truth position");
  }

  r.keyword("sats");
  const int n_sats = r.integer("satellite count");
  if (n_sats < 0) fail(line_no, "negative satellite count");
  for (int i = 0; i < n_sats; ++i) {
    SatelliteEpochState sat;
    sat.sat_id = r.integer("satellite id");
    sat.position = r.triple("satellite position");
    rec.epoch.satellites.push_back(sat);
  }

  r.keyword("obs");
  const int n_obs = r.integer("observation count");
  if (n_obs < 0) fail(line_no, "negative observation count");
  for (int i = 0; i < n_obs; ++i) {
    DdObservation obs;
    obs.geometry.pivot_sat = r.integer("pivot id");
    obs.geometry.other_sat = r.integer("other id");
    obs.geometry.base_position = rec.base;
    const std::string band = r.word("band");
    try {
      obs.band = band_from_name(band);
    } catch (const std::invalid_argument& e) {
      fail(line_no, e.what());
    }
    obs.value = r.number("value");
    obs.sigma = r.number("sigma");
    obs.wavelength = r.number("wavelength");
    rec.epoch.observations.push_back(obs);
  }
  r.expect_end();

  try {
    rec.epoch.validate();
  } catch (const std::invalid_argument& e) {
    fail(line_no, e.what());
  }
  return rec;
}

}  // namespace

std::vector<EpochRecord> read_epoch_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EpochFileError("cannot open '" + path + "'");
  std::vector<EpochRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    records.push_back(parse_line(line, line_no));
  }
  return records;
}

void write_epoch_file(const std::vector<EpochRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw EpochFileError("cannot open '" + path + "' for writing");
  for (const auto& rec : records) {
    for (const auto& obs : rec.epoch.observations) {
      if (!(obs.geometry.base_position == rec.base)) {
        throw EpochFileError("record observations disagree on the base position");
      }
    }
    out << "t " << fmt(rec.epoch.time);
    out << " base " << fmt(rec.base.x) << ' ' << fmt(rec.base.y) << ' ' << fmt(rec.base.z);
    if (rec.velocity) {
      out << " vel " << fmt(rec.velocity->x) << ' ' << fmt(rec.velocity->y) << ' '
          << fmt(rec.velocity->z);
    }
    if (rec.truth) {
      out << " truth " << fmt(rec.truth->x) << ' ' << fmt(rec.truth->y) << ' '
          << fmt(rec.truth->z);
    }
    out << " sats " << rec.epoch.satellites.size();
    for (const auto& sat : rec.epoch.satellites) {
      out << ' ' << sat.sat_id << ' ' << fmt(sat.position.x) << ' ' << fmt(sat.position.y) << ' '
          << fmt(sat.position.z);
    }
    out << " obs " << rec.epoch.observations.size();
    for (const auto& obs : rec.epoch.observations) {
      out << ' ' << obs.geometry.pivot_sat << ' ' << obs.geometry.other_sat << ' '
          << band_name(obs.band) << ' ' << fmt(obs.value) << ' ' << fmt(obs.sigma) << ' '
          << fmt(obs.band == Band::kPseudorange ? 0.0 : obs.wavelength);
    }
    out << '\n';
  }
  if (!out) throw EpochFileError("write failed for '" + path + "'");
}

}  // namespace mupf
