#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "sightline/error.hpp"
#include "sightline/parallel.hpp"
#include "sightline/sampling.hpp"
#include "sightline/scene.hpp"

namespace sightline {

/// What a window-passing ray ends on. Sky means it left the scene.
enum class ViewTarget { Ground, Landscape, Sky, Interior };

inline std::string_view to_string(ViewTarget t) {
  switch (t) {
    case ViewTarget::Ground: return "ground";
    case ViewTarget::Landscape: return "landscape";
    case ViewTarget::Sky: return "sky";
    case ViewTarget::Interior: return "interior";
  }
  return "?";
}

/// Distances along a ray that passes a window: delta0 to the window, delta1 to
/// the first non-window surface behind it (or the far cap on a sky escape).
struct WindowPassage {
  double delta0{0.0};
  double delta1{0.0};
  ViewTarget target{ViewTarget::Sky};
  Hit window_hit;
};

/// A ray passes the window when its first hit is a Window surface.
inline std::optional<WindowPassage> ray_passes_window(std::span<const Hit> hits, std::span<const LayerInfo> layers,
                                                      double far_cap) {
  if (hits.empty() || layers[hits.front().layer_id].tag != LayerTag::Window) return std::nullopt;
  WindowPassage p;
  p.delta0 = hits.front().t;
  p.window_hit = hits.front();
  p.delta1 = far_cap;
  p.target = ViewTarget::Sky;
  for (const Hit& h : hits.subspan(1)) {
    const LayerTag tag = layers[h.layer_id].tag;
    if (tag == LayerTag::Window) continue;
    p.delta1 = h.t;
    p.target = tag == LayerTag::Ground ? ViewTarget::Ground
               : tag == LayerTag::Landscape ? ViewTarget::Landscape
                                            : ViewTarget::Interior;
    break;
  }
  return p;
}

/// Distance to the obstruction measured perpendicular to the window plane:
/// d = (delta1 - delta0) * (r . n), never negative.
inline double obstruction_distance(double delta0, double delta1, const Vec3& ray_dir, const Vec3& window_normal) {
  return std::max(0.0, (delta1 - delta0) * dot(ray_dir, window_normal));
}

/// Solid angle per final target for one vantage point. `blocked` collects rays
/// that never pass a window.
struct LayerSolidAngles {
  double ground{0.0};
  double landscape{0.0};
  double sky{0.0};
  double interior{0.0};
  double blocked{0.0};

  double total() const { return ground + landscape + sky + interior + blocked; }

  void add(ViewTarget t, double w) {
    switch (t) {
      case ViewTarget::Ground: ground += w; break;
      case ViewTarget::Landscape: landscape += w; break;
      case ViewTarget::Sky: sky += w; break;
      case ViewTarget::Interior: interior += w; break;
    }
  }
};

/// Counts ground, landscape and sky when their solid angle reaches the
/// threshold. A layer no ray reached never counts, even at threshold 0.
inline int count_visible_layers(const LayerSolidAngles& sa, double threshold_sr) {
  int n = 0;
  for (double v : {sa.ground, sa.landscape, sa.sky}) {
    if (v > 0.0 && v >= threshold_sr) ++n;
  }
  return n;
}

struct ViewPointResult {
  Vec3 point;
  double sight_angle_deg{0.0};
  LayerSolidAngles layer_solid_angles;
  int visible_layers{0};
  std::vector<double> per_ray_obstruction_distances;  // window-passing rays only
};

struct ObstructionStats {
  double min{0.0};
  double median{0.0};
  double max{0.0};
  std::size_t sample_count{0};
};

/// Returns nullopt for an empty sample.
inline std::optional<ObstructionStats> obstruction_stats(std::vector<double> distances) {
  if (distances.empty()) return std::nullopt;
  std::sort(distances.begin(), distances.end());
  const std::size_t n = distances.size();
  const double median = n % 2 == 1 ? distances[n / 2] : 0.5 * (distances[n / 2 - 1] + distances[n / 2]);
  return ObstructionStats{distances.front(), median, distances.back(), n};
}

namespace detail {

inline void require_window(const SemanticScene& scene) {
  if (scene.count_tagged(LayerTag::Window) == 0) throw InputError("scene has no window-tagged geometry");
}

// Window normal seen by a ray: the hit triangle's normal, flipped to face along the ray.
inline Vec3 window_normal_along(const SemanticScene& scene, const Hit& window_hit, const Vec3& dir) {
  const Vec3 n = scene.triangles()[window_hit.triangle_index].normal();
  return dot(n, dir) < 0.0 ? -n : n;
}

}  // namespace detail

/// beta = 360 * rho / varrho over a horizontal ring of rays.
inline double horizontal_sight_angle(const Vec3& vantage, const SemanticScene& scene, const DirectionSet& ring,
                                     double far_cap) {
  if (ring.kind != DirectionSetKind::Ring) throw InputError("sight angle needs a horizontal ring");
  std::size_t passing = 0;
  for (const Vec3& d : ring.directions) {
    const auto hits = scene.trace_all({vantage, d, far_cap});
    if (ray_passes_window(hits, scene.layers(), far_cap)) ++passing;
  }
  return 360.0 * static_cast<double>(passing) / static_cast<double>(ring.size());
}

struct SphereClassification {
  LayerSolidAngles solid_angles;
  std::vector<double> obstruction_distances;
};

/// Traces the sphere fan once, accumulating each direction's weight into the
/// final target of window-passing rays (or `blocked`) and recording the
/// perpendicular obstruction distance of every window-passing ray.
inline SphereClassification classify_sphere(const Vec3& vantage, const SemanticScene& scene,
                                            const DirectionSet& sphere, double far_cap) {
  if (sphere.kind != DirectionSetKind::Sphere) throw InputError("layer counting needs a sphere direction set");
  SphereClassification out;
  for (std::size_t i = 0; i < sphere.size(); ++i) {
    const Vec3& d = sphere.directions[i];
    const auto hits = scene.trace_all({vantage, d, far_cap});
    const auto passage = ray_passes_window(hits, scene.layers(), far_cap);
    if (!passage) {
      out.solid_angles.blocked += sphere.weights[i];
      continue;
    }
    out.solid_angles.add(passage->target, sphere.weights[i]);
    const Vec3 n = detail::window_normal_along(scene, passage->window_hit, d);
    out.obstruction_distances.push_back(obstruction_distance(passage->delta0, passage->delta1, d, n));
  }
  return out;
}

struct ViewLayers {
  int visible_layers{0};
  LayerSolidAngles layer_solid_angles;
};

inline ViewLayers view_layers(const Vec3& vantage, const SemanticScene& scene, const DirectionSet& sphere,
                              double threshold_sr, double far_cap) {
  if (!(threshold_sr >= 0.0)) throw InputError("layer threshold must be >= 0 sr");
  const auto c = classify_sphere(vantage, scene, sphere, far_cap);
  return {count_visible_layers(c.solid_angles, threshold_sr), c.solid_angles};
}

/// Layout of the sample points used for distance-to-obstruction statistics.
struct WindowSampling {
  int rows{5};
  int cols{5};
  double inset_m{0.05};
  double offset_m{0.01};  // behind the window plane, on the room side
};

/// Regular grid over the window's (width, height) extent, inset from the
/// edges and moved slightly indoors so the window itself is the first hit.
inline std::vector<Vec3> window_sample_points(const WindowAperture& w, const WindowSampling& s = {}) {
  const auto poly = w.planar_boundary();
  double umin = HUGE_VAL, umax = -HUGE_VAL, vmin = HUGE_VAL, vmax = -HUGE_VAL;
  for (const auto& [u, v] : poly) {
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  umin += s.inset_m;
  umax -= s.inset_m;
  vmin += s.inset_m;
  vmax -= s.inset_m;
  if (umin > umax || vmin > vmax) throw InputError("window too small for obstruction sampling");

  const auto lerp = [](double a, double b, int i, int n) { return n == 1 ? 0.5 * (a + b) : a + (b - a) * i / (n - 1); };
  const Vec3 c = w.centroid();
  const Vec3 uax = w.width_axis();
  const Vec3 vax = w.height_axis();
  std::vector<Vec3> out;
  for (int r = 0; r < s.rows; ++r) {
    for (int k = 0; k < s.cols; ++k) {
      const double u = lerp(umin, umax, k, s.cols);
      const double v = lerp(vmin, vmax, r, s.rows);
      if (!detail::convex_contains(poly, u, v)) continue;
      out.push_back(c + u * uax + v * vax - s.offset_m * w.normal);
    }
  }
  return out;
}

/// One window-surface ray that ended on an obstruction.
struct ObstructionSample {
  std::size_t window_index{0};
  std::size_t point_index{0};
  Vec3 origin;
  Vec3 direction;
  ViewTarget target{ViewTarget::Landscape};
  double distance{0.0};
};

/// Casts the outward half of the sphere fan from every window sample point.
/// Only rays that pass the window and end on landscape or interior-tagged
/// geometry are obstructions; sky escapes and ground hits are not.
inline std::vector<ObstructionSample> window_obstruction_samples(const SemanticScene& scene,
                                                                 std::span<const WindowAperture> windows,
                                                                 const DirectionSet& sphere, double far_cap,
                                                                 const WindowSampling& sampling = {},
                                                                 unsigned threads = 1) {
  struct Job {
    std::size_t window;
    std::size_t point;
    Vec3 origin;
  };
  std::vector<Job> jobs;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto pts = window_sample_points(windows[w], sampling);
    for (std::size_t p = 0; p < pts.size(); ++p) jobs.push_back({w, p, pts[p]});
  }
  std::vector<std::vector<ObstructionSample>> per_job(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    const Vec3& n = windows[job.window].normal;
    for (const Vec3& d : sphere.directions) {
      if (dot(d, n) <= 0.0) continue;
      const auto hits = scene.trace_all({job.origin, d, far_cap});
      const auto passage = ray_passes_window(hits, scene.layers(), far_cap);
      if (!passage || passage->target == ViewTarget::Sky || passage->target == ViewTarget::Ground) continue;
      per_job[j].push_back({job.window, job.point, job.origin, d, passage->target,
                            obstruction_distance(passage->delta0, passage->delta1, d, n)});
    }
  });
  std::vector<ObstructionSample> out;
  for (auto& v : per_job) out.insert(out.end(), v.begin(), v.end());
  return out;
}

struct ViewSettings {
  double threshold_sr{0.0};
  double far_cap{0.0};
  WindowSampling window_sampling;
  unsigned threads{1};
};

struct ViewAssessment {
  std::vector<std::vector<ViewPointResult>> grids;  // same order as the input grids
  std::vector<ObstructionSample> obstruction_samples;
  std::optional<ObstructionStats> obstruction_stats;  // nullopt: no obstruction in view
};

/// All three view indicators on every grid point plus window-surface
/// obstruction statistics. Output order follows the input regardless of
/// thread count.
inline ViewAssessment assess_view(const SemanticScene& scene, std::span<const WindowAperture> windows,
                                  const std::vector<std::vector<Vec3>>& grids, const DirectionSet& sphere,
                                  const DirectionSet& ring, const ViewSettings& settings) {
  detail::require_window(scene);
  if (grids.empty()) throw InputError("empty grid");
  for (const auto& g : grids) {
    if (g.empty()) throw InputError("empty grid");
  }
  if (!(settings.far_cap > 0.0)) throw InputError("far cap must be > 0");
  if (!(settings.threshold_sr >= 0.0)) throw InputError("layer threshold must be >= 0 sr");

  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  ViewAssessment out;
  out.grids.resize(grids.size());
  for (std::size_t g = 0; g < grids.size(); ++g) {
    out.grids[g].resize(grids[g].size());
    for (std::size_t p = 0; p < grids[g].size(); ++p) jobs.emplace_back(g, p);
  }
  parallel_for(jobs.size(), settings.threads, [&](std::size_t j) {
    const auto [g, p] = jobs[j];
    const Vec3& point = grids[g][p];
    auto c = classify_sphere(point, scene, sphere, settings.far_cap);
    ViewPointResult& r = out.grids[g][p];
    r.point = point;
    r.sight_angle_deg = horizontal_sight_angle(point, scene, ring, settings.far_cap);
    r.layer_solid_angles = c.solid_angles;
    r.visible_layers = count_visible_layers(c.solid_angles, settings.threshold_sr);
    r.per_ray_obstruction_distances = std::move(c.obstruction_distances);
  });

  out.obstruction_samples =
      window_obstruction_samples(scene, windows, sphere, settings.far_cap, settings.window_sampling, settings.threads);
  std::vector<double> distances;
  distances.reserve(out.obstruction_samples.size());
  for (const auto& s : out.obstruction_samples) distances.push_back(s.distance);
  out.obstruction_stats = obstruction_stats(std::move(distances));
  return out;
}

}  // namespace sightline
