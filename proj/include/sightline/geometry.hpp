#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "sightline/vec3.hpp"

namespace sightline {

/// Hits closer than this (metres along the ray) are ignored, and hits whose
/// distances differ by no more than this are treated as coincident.
inline constexpr double kRayEpsilon = 1e-4;

using LayerId = std::uint32_t;

struct Triangle {
  Vec3 v0, v1, v2;
  LayerId layer_id{0};

  double area() const { return 0.5 * norm(cross(v1 - v0, v2 - v0)); }
  Vec3 normal() const { return normalized(cross(v1 - v0, v2 - v0)); }
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
  double t_max{0.0};
};

struct Hit {
  double t{0.0};
  std::uint32_t triangle_index{0};
  LayerId layer_id{0};
  Vec3 point;

  friend bool operator==(const Hit&, const Hit&) = default;
};

using LayerSet = std::set<LayerId>;

namespace detail {

struct EdgeFunctions {
  double u, v, w;
};

// a*b - c*d with a single rounding error (Kahan), so its sign is reliable.
inline double difference_of_products(double a, double b, double c, double d) {
  const double cd = c * d;
  const double err = std::fma(-c, d, cd);
  const double dop = std::fma(a, b, -cd);
  return dop + err;
}

// Edge functions of the sheared triangle. When any of them rounds to exactly
// zero they are recomputed with a compensated product so rays through shared
// edges and vertices are classified consistently for every adjacent triangle.
inline EdgeFunctions edge_functions(double ax, double ay, double bx, double by, double cx, double cy) {
  EdgeFunctions e{cx * by - cy * bx, ax * cy - ay * cx, bx * ay - by * ax};
  if (e.u == 0.0 || e.v == 0.0 || e.w == 0.0) {
    e.u = difference_of_products(cx, by, cy, bx);
    e.v = difference_of_products(ax, cy, ay, cx);
    e.w = difference_of_products(bx, ay, by, ax);
  }
  return e;
}

}  // namespace detail

/// Watertight, double-sided ray/triangle test (shear-and-scale formulation).
/// Reports a hit only for kRayEpsilon < t <= ray.t_max.
inline std::optional<Hit> intersect_triangle(const Ray& ray, const Triangle& tri, std::uint32_t triangle_index = 0) {
  const Vec3& d = ray.direction;
  int kz = 0;
  if (std::fabs(d.y) > std::fabs(d[kz])) kz = 1;
  if (std::fabs(d.z) > std::fabs(d[kz])) kz = 2;
  int kx = (kz + 1) % 3;
  int ky = (kx + 1) % 3;
  if (d[kz] < 0.0) std::swap(kx, ky);

  const double sx = d[kx] / d[kz];
  const double sy = d[ky] / d[kz];
  const double sz = 1.0 / d[kz];

  const Vec3 a = tri.v0 - ray.origin;
  const Vec3 b = tri.v1 - ray.origin;
  const Vec3 c = tri.v2 - ray.origin;

  const double ax = a[kx] - sx * a[kz];
  const double ay = a[ky] - sy * a[kz];
  const double bx = b[kx] - sx * b[kz];
  const double by = b[ky] - sy * b[kz];
  const double cx = c[kx] - sx * c[kz];
  const double cy = c[ky] - sy * c[kz];

  const auto e = detail::edge_functions(ax, ay, bx, by, cx, cy);
  if ((e.u < 0.0 || e.v < 0.0 || e.w < 0.0) && (e.u > 0.0 || e.v > 0.0 || e.w > 0.0)) return std::nullopt;

  const double det = e.u + e.v + e.w;
  if (det == 0.0) return std::nullopt;

  const double big_t = e.u * (sz * a[kz]) + e.v * (sz * b[kz]) + e.w * (sz * c[kz]);
  const double t = big_t / det;
  if (!(t > kRayEpsilon) || t > ray.t_max) return std::nullopt;

  return Hit{t, triangle_index, tri.layer_id, ray.origin + t * ray.direction};
}

struct HitGroup {
  double start{0.0};  // distance of the nearest member
  Hit representative;
};

/// Sorts raw hits by distance and merges coincident ones. Hits are grouped
/// greedily: a group starts at the nearest unassigned hit and absorbs every
/// hit within kRayEpsilon of that start. Each group is represented by its
/// member with the smallest triangle index.
inline std::vector<HitGroup> group_hits(std::vector<Hit> hits) {
  std::sort(hits.begin(), hits.end(), [](const Hit& l, const Hit& r) {
    return l.t < r.t || (l.t == r.t && l.triangle_index < r.triangle_index);
  });
  std::vector<HitGroup> out;
  std::size_t i = 0;
  while (i < hits.size()) {
    const double start = hits[i].t;
    std::size_t best = i;
    std::size_t j = i + 1;
    for (; j < hits.size() && hits[j].t - start <= kRayEpsilon; ++j) {
      if (hits[j].triangle_index < hits[best].triangle_index) best = j;
    }
    out.push_back({start, hits[best]});
    i = j;
  }
  return out;
}

inline std::vector<Hit> collapse_hits(std::vector<Hit> hits) {
  std::vector<Hit> out;
  for (const HitGroup& g : group_hits(std::move(hits))) out.push_back(g.representative);
  return out;
}

inline std::optional<Hit> first_unskipped(std::span<const Hit> sorted_hits, const LayerSet& skip_layers) {
  for (const Hit& h : sorted_hits) {
    if (!skip_layers.contains(h.layer_id)) return h;
  }
  return std::nullopt;
}

/// Reference tracer: tests every triangle. Used as the oracle for the BVH.
class BruteForceTracer {
 public:
  explicit BruteForceTracer(std::vector<Triangle> triangles) : triangles_(std::move(triangles)) {}

  std::vector<Hit> trace_all(const Ray& ray) const {
    std::vector<Hit> raw;
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
      if (auto h = intersect_triangle(ray, triangles_[i], static_cast<std::uint32_t>(i))) raw.push_back(*h);
    }
    return collapse_hits(std::move(raw));
  }

  std::optional<Hit> trace_first(const Ray& ray, const LayerSet& skip_layers = {}) const {
    const auto hits = trace_all(ray);
    return first_unskipped(hits, skip_layers);
  }

  std::span<const Triangle> triangles() const { return triangles_; }

 private:
  std::vector<Triangle> triangles_;
};

}  // namespace sightline
