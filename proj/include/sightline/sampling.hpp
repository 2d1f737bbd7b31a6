#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "sightline/error.hpp"
#include "sightline/vec3.hpp"

namespace sightline {

enum class DirectionSetKind { Sphere, Ring };

/// Unit directions with per-direction weights: solid angle (sr) for spheres,
/// arc (rad) for rings.
struct DirectionSet {
  std::vector<Vec3> directions;
  std::vector<double> weights;
  DirectionSetKind kind{DirectionSetKind::Sphere};

  std::size_t size() const { return directions.size(); }
};

inline constexpr int kMaxIcosphereLevel = 8;
inline constexpr int kDefaultIcosphereLevel = 5;
inline constexpr int kDefaultRingSize = 3600;

inline std::size_t icosphere_count(int level) { return 10 * (std::size_t{1} << (2 * level)) + 2; }

/// Vertices of an icosahedron subdivided `level` times, edge midpoints pushed
/// out to the unit sphere. Each direction carries weight 4*pi / count.
inline DirectionSet icosphere(int level) {
  if (level < 0) throw InputError("icosphere level must be >= 0");
  if (level > kMaxIcosphereLevel) throw InputError("subdivision too deep");

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
                         {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1},  {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (Vec3& p : v) p = normalized(p);
  std::vector<std::array<std::uint32_t, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  v.reserve(icosphere_count(level));
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    const auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      const auto [it, inserted] = midpoints.try_emplace(key, static_cast<std::uint32_t>(v.size()));
      if (inserted) v.push_back(normalized(v[a] + v[b]));
      return it->second;
    };
    std::vector<std::array<std::uint32_t, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& [a, b, c] : faces) {
      const std::uint32_t ab = midpoint(a, b);
      const std::uint32_t bc = midpoint(b, c);
      const std::uint32_t ca = midpoint(c, a);
      next.push_back({a, ab, ca});
      next.push_back({b, bc, ab});
      next.push_back({c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  DirectionSet set;
  set.kind = DirectionSetKind::Sphere;
  set.directions = std::move(v);
  set.weights.assign(set.directions.size(), 4.0 * kPi / static_cast<double>(set.directions.size()));
  return set;
}

/// n directions in the horizontal plane at azimuths 2*pi*k/n, measured from +X
/// towards +Y. Weights are the arc per ray in radians.
inline DirectionSet horizontal_ring(int n) {
  if (n < 8) throw InputError("horizontal ring needs at least 8 directions");
  DirectionSet set;
  set.kind = DirectionSetKind::Ring;
  set.directions.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * kPi * k / n;
    set.directions.push_back({std::cos(a), std::sin(a), 0.0});
  }
  // cos/sin of exact multiples of pi/2 are not exactly 0/1 in floating point.
  for (int k = 0; k < n; ++k) {
    if ((4 * k) % n != 0) continue;
    switch ((4 * k) / n) {
      case 0: set.directions[k] = {1, 0, 0}; break;
      case 1: set.directions[k] = {0, 1, 0}; break;
      case 2: set.directions[k] = {-1, 0, 0}; break;
      case 3: set.directions[k] = {0, -1, 0}; break;
    }
  }
  set.weights.assign(n, 2.0 * kPi / n);
  return set;
}

namespace detail {

inline bool point_in_polygon(const std::vector<Vec3>& poly, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec3& a = poly[i];
    const Vec3& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

inline double distance_to_boundary(const std::vector<Vec3>& poly, double x, double y) {
  double best = HUGE_VAL;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const double ax = poly[j].x, ay = poly[j].y;
    const double ex = poly[i].x - ax, ey = poly[i].y - ay;
    const double len2 = ex * ex + ey * ey;
    const double s = len2 > 0.0 ? std::clamp(((x - ax) * ex + (y - ay) * ey) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, std::hypot(x - (ax + s * ex), y - (ay + s * ey)));
  }
  return best;
}

}  // namespace detail

/// Vantage points on a square lattice anchored at the floor polygon's
/// centroid, at `height` above the floor plane. A lattice point is kept when
/// it lies inside the polygon and at least half a spacing from every edge,
/// so each point owns a full grid cell of floor area.
inline std::vector<Vec3> vantage_grid(const std::vector<Vec3>& floor_polygon, double spacing, double height) {
  if (!(spacing > 0.0)) throw InputError("grid spacing must be > 0");
  if (!(height > 0.0)) throw InputError("grid height must be > 0");
  if (floor_polygon.size() < 3) throw InputError("room floor polygon needs at least 3 vertices");

  double zmin = floor_polygon.front().z, zmax = zmin;
  double area2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < floor_polygon.size(); ++i) {
    const Vec3& a = floor_polygon[i];
    const Vec3& b = floor_polygon[(i + 1) % floor_polygon.size()];
    if (!is_finite(a)) throw InputError("room floor polygon has a non-finite vertex");
    zmin = std::min(zmin, a.z);
    zmax = std::max(zmax, a.z);
    const double c = a.x * b.y - b.x * a.y;
    area2 += c;
    cx += (a.x + b.x) * c;
    cy += (a.y + b.y) * c;
  }
  if (zmax - zmin > 1e-6) throw InputError("room floor polygon must be horizontal");
  if (std::fabs(area2) < 1e-12) throw InputError("room floor polygon is degenerate");
  cx /= 3.0 * area2;
  cy /= 3.0 * area2;

  double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
  for (const Vec3& p : floor_polygon) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const auto steps = [&](double lo, double hi, double c) {
    return std::pair{static_cast<long>(std::floor((lo - c) / spacing)), static_cast<long>(std::ceil((hi - c) / spacing))};
  };
  const auto [ix0, ix1] = steps(xmin, xmax, cx);
  const auto [iy0, iy1] = steps(ymin, ymax, cy);

  const double clearance = 0.5 * spacing - 1e-9;
  const double z = zmin + height;
  std::vector<Vec3> points;
  for (long iy = iy0; iy <= iy1; ++iy) {
    for (long ix = ix0; ix <= ix1; ++ix) {
      const double x = cx + static_cast<double>(ix) * spacing;
      const double y = cy + static_cast<double>(iy) * spacing;
      if (!detail::point_in_polygon(floor_polygon, x, y)) continue;
      if (detail::distance_to_boundary(floor_polygon, x, y) < clearance) continue;
      points.push_back({x, y, z});
    }
  }
  if (points.empty()) throw InputError("empty grid");
  return points;
}

}  // namespace sightline
