#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "sightline/error.hpp"
#include "sightline/geometry.hpp"

namespace sightline {

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void expand(const Vec3& p) {
    lo = component_min(lo, p);
    hi = component_max(hi, p);
  }
  void expand(const Aabb& b) {
    lo = component_min(lo, b.lo);
    hi = component_max(hi, b.hi);
  }
  bool empty() const { return lo.x > hi.x; }
  Vec3 centre() const { return 0.5 * (lo + hi); }
  double surface_area() const {
    if (empty()) return 0.0;
    const Vec3 e = hi - lo;
    return 2.0 * (e.x * e.y + e.y * e.z + e.z * e.x);
  }
  int longest_axis() const {
    const Vec3 e = hi - lo;
    return e.x >= e.y && e.x >= e.z ? 0 : (e.y >= e.z ? 1 : 2);
  }
};

namespace detail {

// Per-ray constants for slab tests. Axes with a zero direction component are
// handled by a containment check instead of an infinite reciprocal.
struct RaySlabs {
  Vec3 origin;
  Vec3 inv_dir;
  std::array<bool, 3> parallel{};
  double t_max{0.0};

  explicit RaySlabs(const Ray& ray) : origin(ray.origin), t_max(ray.t_max * (1.0 + 1e-9) + 1e-9) {
    for (int a = 0; a < 3; ++a) {
      parallel[a] = ray.direction[a] == 0.0;
      inv_dir[a] = parallel[a] ? 0.0 : 1.0 / ray.direction[a];
    }
  }

  // Entry distance into the box, or nullopt when the ray misses it within [0, limit].
  std::optional<double> enter(const Aabb& box, double limit) const {
    double t0 = 0.0;
    double t1 = limit;
    for (int a = 0; a < 3; ++a) {
      if (parallel[a]) {
        if (origin[a] < box.lo[a] || origin[a] > box.hi[a]) return std::nullopt;
        continue;
      }
      double near = (box.lo[a] - origin[a]) * inv_dir[a];
      double far = (box.hi[a] - origin[a]) * inv_dir[a];
      if (near > far) std::swap(near, far);
      t0 = near > t0 ? near : t0;
      t1 = far < t1 ? far : t1;
      if (t1 < t0) return std::nullopt;
    }
    return t0;
  }
};

}  // namespace detail

/// Bounding volume hierarchy over a triangle soup, built with binned SAH
/// splits. Immutable after construction; the trace functions are safe to call
/// from many threads at once. Results are identical to BruteForceTracer.
class Bvh {
 public:
  static constexpr int kLeafSize = 4;
  static constexpr int kBins = 16;
  // Past this depth only median splits are made, which bounds the tree depth
  // (and so the traversal stack) for any input.
  static constexpr int kMaxSahDepth = 32;

  explicit Bvh(std::vector<Triangle> triangles) : triangles_(std::move(triangles)) {
    if (triangles_.empty()) throw InputError("empty scene");
    order_.resize(triangles_.size());
    std::iota(order_.begin(), order_.end(), 0u);

    std::vector<Aabb> boxes(triangles_.size());
    std::vector<Vec3> centroids(triangles_.size());
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
      const Triangle& t = triangles_[i];
      boxes[i].expand(t.v0);
      boxes[i].expand(t.v1);
      boxes[i].expand(t.v2);
      const Vec3 pad = padding(boxes[i]);
      boxes[i].lo -= pad;
      boxes[i].hi += pad;
      centroids[i] = boxes[i].centre();
    }
    nodes_.reserve(2 * triangles_.size() / kLeafSize + 1);
    nodes_.push_back({});
    build(0, 0, static_cast<std::uint32_t>(order_.size()), 0, boxes, centroids);
  }

  std::span<const Triangle> triangles() const { return triangles_; }
  std::size_t node_count() const { return nodes_.size(); }
  const Aabb& bounds() const { return nodes_.front().box; }

  /// Every intersection along the ray up to t_max, ascending, coincident hits merged.
  std::vector<Hit> trace_all(const Ray& ray) const {
    std::vector<Hit> raw;
    collect(ray, ray.t_max, raw);
    return collapse_hits(std::move(raw));
  }

  /// Nearest hit whose layer is not in skip_layers. Equal to the first
  /// unskipped element of trace_all(ray).
  std::optional<Hit> trace_first(const Ray& ray, const LayerSet& skip_layers = {}) const {
    const auto nearest = closest_raw(ray, skip_layers);
    if (!nearest) return std::nullopt;

    // Coincident-hit merging may pick a skipped triangle as the representative
    // of the group containing the nearest hit, so resolve the groups up to it.
    std::vector<Hit> raw;
    collect(ray, std::min(ray.t_max, nearest->t + kRayEpsilon), raw);
    for (const HitGroup& g : group_hits(std::move(raw))) {
      if (g.start > nearest->t) break;
      if (!skip_layers.contains(g.representative.layer_id)) return g.representative;
    }
    return first_unskipped(trace_all(ray), skip_layers);
  }

 private:
  struct Node {
    Aabb box;
    std::uint32_t first{0};  // first child index (inner) or first triangle slot (leaf)
    std::uint32_t count{0};  // triangle count; 0 for inner nodes
  };

  static Vec3 padding(const Aabb& b) {
    const double scale = std::max({std::fabs(b.lo.x), std::fabs(b.lo.y), std::fabs(b.lo.z), std::fabs(b.hi.x),
                                   std::fabs(b.hi.y), std::fabs(b.hi.z), 1.0});
    const double p = 1e-9 * scale;
    return {p, p, p};
  }

  void build(std::uint32_t node_index, std::uint32_t begin, std::uint32_t end, int depth, const std::vector<Aabb>& boxes,
             const std::vector<Vec3>& centroids) {
    Aabb box;
    Aabb centroid_box;
    for (std::uint32_t i = begin; i < end; ++i) {
      box.expand(boxes[order_[i]]);
      centroid_box.expand(centroids[order_[i]]);
    }
    nodes_[node_index].box = box;

    const std::uint32_t n = end - begin;
    const auto make_leaf = [&] {
      nodes_[node_index].first = begin;
      nodes_[node_index].count = n;
    };
    if (n <= kLeafSize) return make_leaf();

    const int axis = centroid_box.longest_axis();
    const double lo = centroid_box.lo[axis];
    const double extent = centroid_box.hi[axis] - lo;
    std::uint32_t mid = begin;
    if (extent > 0.0 && depth < kMaxSahDepth) {
      const auto split = sah_partition(begin, end, axis, lo, extent, box, boxes, centroids);
      if (!split) return make_leaf();
      mid = *split;
    }
    if (mid == begin || mid == end) {
      // Identical centroids: fall back to a median split.
      mid = begin + n / 2;
      std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                       [&](std::uint32_t l, std::uint32_t r) {
                         return centroids[l][axis] < centroids[r][axis] ||
                                (centroids[l][axis] == centroids[r][axis] && l < r);
                       });
    }

    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    nodes_.push_back({});
    nodes_[node_index].first = left;
    nodes_[node_index].count = 0;
    build(left, begin, mid, depth + 1, boxes, centroids);
    build(left + 1, mid, end, depth + 1, boxes, centroids);
  }

  // Partition point of the cheapest binned split, or nullopt when a small node
  // is cheaper left as a leaf.
  std::optional<std::uint32_t> sah_partition(std::uint32_t begin, std::uint32_t end, int axis, double lo, double extent,
                              const Aabb& parent, const std::vector<Aabb>& boxes,
                              const std::vector<Vec3>& centroids) {
    struct Bin {
      Aabb box;
      std::uint32_t count{0};
    };
    std::array<Bin, kBins> bins{};
    const auto bin_of = [&](std::uint32_t tri) {
      const int b = static_cast<int>(kBins * (centroids[tri][axis] - lo) / extent);
      return std::clamp(b, 0, kBins - 1);
    };
    for (std::uint32_t i = begin; i < end; ++i) {
      Bin& bin = bins[bin_of(order_[i])];
      bin.box.expand(boxes[order_[i]]);
      ++bin.count;
    }

    std::array<double, kBins - 1> cost{};
    Aabb acc;
    std::uint32_t acc_count = 0;
    for (int s = 0; s < kBins - 1; ++s) {
      acc.expand(bins[s].box);
      acc_count += bins[s].count;
      cost[s] = acc.surface_area() * acc_count;
    }
    acc = Aabb{};
    acc_count = 0;
    for (int s = kBins - 1; s > 0; --s) {
      acc.expand(bins[s].box);
      acc_count += bins[s].count;
      cost[s - 1] += acc.surface_area() * acc_count;
    }
    const auto best = static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin());
    const double leaf_cost = parent.surface_area() * (end - begin);
    if (end - begin <= 16 && cost[best] >= leaf_cost) return std::nullopt;

    const auto it = std::stable_partition(order_.begin() + begin, order_.begin() + end,
                                          [&](std::uint32_t tri) { return bin_of(tri) <= best; });
    return static_cast<std::uint32_t>(it - order_.begin());
  }

  void collect(const Ray& ray, double limit, std::vector<Hit>& out) const {
    const detail::RaySlabs slabs(ray);
    const double box_limit = limit * (1.0 + 1e-9) + 1e-9;
    Ray bounded = ray;
    bounded.t_max = limit;
    std::array<std::uint32_t, 128> stack{};
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (!slabs.enter(node.box, box_limit)) continue;
      if (node.count > 0) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
          const std::uint32_t tri = order_[i];
          if (auto h = intersect_triangle(bounded, triangles_[tri], tri)) out.push_back(*h);
        }
      } else {
        stack[top++] = node.first;
        stack[top++] = node.first + 1;
      }
    }
  }

  std::optional<Hit> closest_raw(const Ray& ray, const LayerSet& skip_layers) const {
    const detail::RaySlabs slabs(ray);
    Ray bounded = ray;
    std::optional<Hit> best;
    struct Entry {
      std::uint32_t node;
      double t;
    };
    std::array<Entry, 128> stack{};
    int top = 0;
    stack[top++] = {0, 0.0};
    while (top > 0) {
      const Entry e = stack[--top];
      const double limit = bounded.t_max * (1.0 + 1e-9) + 1e-9;
      if (e.t > limit) continue;
      const Node& node = nodes_[e.node];
      if (node.count > 0) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
          const std::uint32_t tri = order_[i];
          if (skip_layers.contains(triangles_[tri].layer_id)) continue;
          if (auto h = intersect_triangle(bounded, triangles_[tri], tri)) {
            if (!best || h->t < best->t) {
              best = h;
              bounded.t_max = h->t;
            }
          }
        }
        continue;
      }
      const auto l = slabs.enter(nodes_[node.first].box, limit);
      const auto r = slabs.enter(nodes_[node.first + 1].box, limit);
      if (l && r) {
        // Push the farther child first so the nearer one is popped next.
        if (*l <= *r) {
          stack[top++] = {node.first + 1, *r};
          stack[top++] = {node.first, *l};
        } else {
          stack[top++] = {node.first, *l};
          stack[top++] = {node.first + 1, *r};
        }
      } else if (l) {
        stack[top++] = {node.first, *l};
      } else if (r) {
        stack[top++] = {node.first + 1, *r};
      }
    }
    return best;
  }

  std::vector<Triangle> triangles_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// The acceleration structure used by scenes.
using AccelStructure = Bvh;

inline Bvh build_accel(std::vector<Triangle> triangles) { return Bvh(std::move(triangles)); }

}  // namespace sightline
