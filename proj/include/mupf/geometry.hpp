#pragma once

#include <cmath>

namespace mupf {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3& o) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  return n > 0.0 ? v * (1.0 / n) : Vec3{};
}

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

// Filter state: a 3D position in an Earth-centered Earth-fixed frame, meters.
using EcefPosition = Vec3;

// Local east-north-up frame anchored at an ECEF point. The vertical is the
// geocentric radial direction; scenes define satellite elevation and the
// grid plane against this same frame, so the geometry stays self-consistent.
struct EnuFrame {
  Vec3 origin;
  Vec3 east;
  Vec3 north;
  Vec3 up;

  static EnuFrame at(const Vec3& origin) {
    EnuFrame f;
    f.origin = origin;
    f.up = normalized(origin);
    Vec3 e = cross(Vec3{0.0, 0.0, 1.0}, f.up);
    if (dot(e, e) < 1e-12) {
      e = Vec3{0.0, 1.0, 0.0};  // polar anchor, any horizontal direction works
    }
    f.east = normalized(e);
    f.north = cross(f.up, f.east);
    return f;
  }

  Vec3 to_ecef(double e, double n, double u) const {
    return origin + east * e + north * n + up * u;
  }

  // ENU offsets of p relative to the frame origin.
  Vec3 from_ecef(const Vec3& p) const {
    const Vec3 d = p - origin;
    return {dot(d, east), dot(d, north), dot(d, up)};
  }
};

}  // namespace mupf
