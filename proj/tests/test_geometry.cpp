#include <gtest/gtest.h>

#include <random>

#include "sightline/bvh.hpp"
#include "support.hpp"

using namespace sightline;

namespace {

// Independent reference: Moller-Trumbore with explicit barycentric margins.
struct Reference {
  bool hit;
  double t;
  double margin;  // smallest barycentric coordinate, or distance outside
};

Reference moller_trumbore(const Ray& r, const Triangle& tri) {
  const Vec3 e1 = tri.v1 - tri.v0;
  const Vec3 e2 = tri.v2 - tri.v0;
  const Vec3 p = cross(r.direction, e2);
  const double det = dot(e1, p);
  if (std::fabs(det) < 1e-14) return {false, 0.0, 0.0};
  const double inv = 1.0 / det;
  const Vec3 s = r.origin - tri.v0;
  const double u = dot(s, p) * inv;
  const Vec3 q = cross(s, e1);
  const double v = dot(r.direction, q) * inv;
  const double t = dot(e2, q) * inv;
  const double w = 1.0 - u - v;
  const double margin = std::min({u, v, w});
  return {margin >= 0.0 && t > kRayEpsilon && t <= r.t_max, t, margin};
}

Triangle unit_triangle() { return {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, 0}; }

}  // namespace

TEST(Intersect, HitsInteriorPointFromEitherSide) {
  const Triangle tri = unit_triangle();
  auto down = intersect_triangle({{0.25, 0.25, 1}, {0, 0, -1}, 10}, tri, 7);
  ASSERT_TRUE(down);
  EXPECT_DOUBLE_EQ(down->t, 1.0);
  EXPECT_EQ(down->triangle_index, 7u);
  auto up = intersect_triangle({{0.25, 0.25, -2}, {0, 0, 1}, 10}, tri);
  ASSERT_TRUE(up);
  EXPECT_DOUBLE_EQ(up->t, 2.0);
}

TEST(Intersect, RespectsEpsilonAndRange) {
  const Triangle tri = unit_triangle();
  EXPECT_FALSE(intersect_triangle({{0.25, 0.25, 0.5 * kRayEpsilon}, {0, 0, -1}, 10}, tri));
  EXPECT_TRUE(intersect_triangle({{0.25, 0.25, 2 * kRayEpsilon}, {0, 0, -1}, 10}, tri));
  EXPECT_FALSE(intersect_triangle({{0.25, 0.25, 1}, {0, 0, -1}, 0.999}, tri));
  EXPECT_TRUE(intersect_triangle({{0.25, 0.25, 1}, {0, 0, -1}, 1.0}, tri));
  EXPECT_FALSE(intersect_triangle({{0.25, 0.25, 1}, {0, 0, 1}, 10}, tri));
  EXPECT_FALSE(intersect_triangle({{0.8, 0.8, 1}, {0, 0, -1}, 10}, tri));
}

TEST(Intersect, ParallelRayMisses) {
  EXPECT_FALSE(intersect_triangle({{-1, 0.2, 0}, {1, 0, 0}, 10}, unit_triangle()));
}

TEST(Intersect, AgreesWithReferenceOnRandomRays) {
  std::mt19937_64 rng(11);
  auto tris = test::random_soup(rng, 500, 10.0, 1);
  std::uniform_real_distribution<double> pos(-2.0, 12.0);
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    const Ray ray{{pos(rng), pos(rng), pos(rng)}, test::random_unit(rng), 30.0};
    for (std::size_t k = 0; k < tris.size(); ++k) {
      const Reference ref = moller_trumbore(ray, tris[k]);
      if (std::fabs(ref.margin) < 1e-7 || std::fabs(ref.t - kRayEpsilon) < 1e-7) continue;  // too close to call
      const auto h = intersect_triangle(ray, tris[k], static_cast<std::uint32_t>(k));
      ASSERT_EQ(h.has_value(), ref.hit) << "ray " << i << " triangle " << k;
      if (h) {
        EXPECT_NEAR(h->t, ref.t, 1e-9 * std::max(1.0, ref.t));
        ++compared;
      }
    }
  }
  EXPECT_GT(compared, 100);
}

TEST(Intersect, HitPointLiesOnRay) {
  std::mt19937_64 rng(5);
  const auto tris = test::random_soup(rng, 200, 5.0, 2);
  const BruteForceTracer tracer(tris);
  for (int i = 0; i < 200; ++i) {
    const Ray ray{{2.5, 2.5, 2.5}, test::random_unit(rng), 20.0};
    for (const Hit& h : tracer.trace_all(ray)) {
      const Vec3 expected = ray.origin + h.t * ray.direction;
      EXPECT_EQ(h.point.x, expected.x);
      EXPECT_EQ(h.point.y, expected.y);
      EXPECT_EQ(h.point.z, expected.z);
    }
  }
}

TEST(Intersect, SharedEdgeIsWatertight) {
  // Two triangles sharing the diagonal of a skewed planar quad; rays aimed
  // exactly at points of the shared edge must hit at least one of them.
  const auto on_plane = [](double x, double y) { return Vec3{x, y, 0.3 + 0.17 * x - 0.23 * y}; };
  const Vec3 a = on_plane(0.1, 0.3), b = on_plane(3.3, 0.2), c = on_plane(3.1, 2.9), d = on_plane(0.3, 3.1);
  const BruteForceTracer tracer({{a, b, c, 0}, {a, c, d, 0}});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> s(0.0, 1.0);
  int misses = 0;
  for (int i = 0; i < 20000; ++i) {
    const Vec3 target = a + s(rng) * (c - a);
    const Vec3 origin = target + 5.0 * test::random_unit(rng);
    const Ray ray{origin, normalized(target - origin), 20.0};
    if (tracer.trace_all(ray).empty()) ++misses;
  }
  EXPECT_EQ(misses, 0);
}

TEST(Intersect, SharedVertexFanIsWatertight) {
  const Vec3 hub{0.37, -0.21, 0.05};
  std::vector<Triangle> fan;
  const int n = 7;
  for (int k = 0; k < n; ++k) {
    const double a0 = 2 * kPi * k / n, a1 = 2 * kPi * (k + 1) / n;
    fan.push_back({hub, hub + Vec3{std::cos(a0), std::sin(a0), 0.02 * k}, hub + Vec3{std::cos(a1), std::sin(a1), 0.02 * (k + 1) * (k + 1 < n)}, 0});
  }
  const BruteForceTracer tracer(fan);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 2000; ++i) {
    Vec3 dir = test::random_unit(rng);
    if (std::fabs(dir.z) < 0.3) continue;
    const Vec3 origin = hub - 3.0 * dir;
    EXPECT_FALSE(tracer.trace_all({origin, dir, 10.0}).empty()) << i;
  }
}

TEST(HitGroups, CoincidentHitsCollapseToSmallestIndex) {
  const Vec3 p{0, 0, 0};
  std::vector<Hit> hits{{2.0, 5, 1, p}, {2.0 + 0.5 * kRayEpsilon, 3, 2, p}, {1.0, 9, 0, p}, {2.0, 4, 0, p}};
  const auto groups = group_hits(hits);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].representative.triangle_index, 9u);
  EXPECT_EQ(groups[1].representative.triangle_index, 3u);
  EXPECT_DOUBLE_EQ(groups[1].start, 2.0);
}

TEST(HitGroups, GroupsChainFromTheirStart) {
  const Vec3 p{0, 0, 0};
  const double e = kRayEpsilon;
  const auto hits = collapse_hits({{1.0, 0, 0, p}, {1.0 + 0.6 * e, 1, 0, p}, {1.0 + 1.2 * e, 2, 0, p}});
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].triangle_index, 0u);
  EXPECT_EQ(hits[1].triangle_index, 2u);
}

TEST(Bvh, EmptySceneIsAnInputError) { EXPECT_THROW(Bvh(std::vector<Triangle>{}), InputError); }

TEST(Bvh, MatchesBruteForceOnRandomScenes) {
  std::mt19937_64 rng(2024);
  for (int scene = 0; scene < 10; ++scene) {
    const auto tris = test::random_soup(rng, 100 + 40 * scene, 8.0, 3);
    const BruteForceTracer brute(tris);
    const Bvh bvh(tris);
    std::uniform_real_distribution<double> pos(-1.0, 9.0);
    for (int i = 0; i < 300; ++i) {
      const Ray ray{{pos(rng), pos(rng), pos(rng)}, test::random_unit(rng), 3.0 + 10.0 * (i % 3)};
      ASSERT_EQ(bvh.trace_all(ray), brute.trace_all(ray));
      const LayerSet skip = i % 2 ? LayerSet{1} : LayerSet{};
      ASSERT_EQ(bvh.trace_first(ray, skip), brute.trace_first(ray, skip));
    }
  }
}

TEST(Bvh, TraceFirstIsFirstUnskippedOfTraceAll) {
  std::mt19937_64 rng(77);
  const auto tris = test::random_soup(rng, 400, 6.0, 4);
  const Bvh bvh(tris);
  std::uniform_int_distribution<LayerId> lay(0, 3);
  for (int i = 0; i < 2000; ++i) {
    const Ray ray{{3, 3, 3}, test::random_unit(rng), 20.0};
    const LayerSet skip{lay(rng), lay(rng)};
    const auto all = bvh.trace_all(ray);
    EXPECT_EQ(bvh.trace_first(ray, skip), first_unskipped(all, skip));
  }
}

TEST(Bvh, AxisAlignedRaysThroughFlatScene) {
  // Zero direction components and zero-thickness boxes.
  std::vector<Triangle> tris;
  for (int i = 0; i < 50; ++i) {
    const double x = i;
    tris.push_back({{x, 0, 0}, {x + 1, 0, 0}, {x, 1, 0}, 0});
  }
  const Bvh bvh(tris);
  for (int i = 0; i < 50; ++i) {
    const auto h = bvh.trace_first({{i + 0.25, 0.25, 1.0}, {0, 0, -1}, 5.0});
    ASSERT_TRUE(h);
    EXPECT_EQ(h->triangle_index, static_cast<std::uint32_t>(i));
  }
  EXPECT_TRUE(bvh.trace_all({{-1, 0.25, 0}, {1, 0, 0}, 100.0}).empty());
}
