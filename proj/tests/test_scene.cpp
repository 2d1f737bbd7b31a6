#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "sightline/scene.hpp"
#include "support.hpp"

using namespace sightline;

namespace {

LayerMap two_layers() {
  LayerMap m;
  m.layers = {{"wall", LayerTag::Interior}, {"glass", LayerTag::Window}};
  return m;
}

SemanticScene from_text(const std::string& obj, const LayerMap& map) {
  std::istringstream in(obj);
  return load_scene(in, map);
}

template <typename F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(LayerTags, ParseAndPrint) {
  for (auto tag : {LayerTag::Window, LayerTag::Interior, LayerTag::Ground, LayerTag::Landscape}) {
    EXPECT_EQ(parse_layer_tag(to_string(tag)), tag);
  }
  EXPECT_FALSE(parse_layer_tag("sky"));
}

TEST(LoadScene, TwoGroupsGiveTwoLayers) {
  const auto scene = from_text(
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
      "g wall\nf 1 2 3\n"
      "g glass\nf 1 3 4\n",
      two_layers());
  ASSERT_EQ(scene.triangles().size(), 2u);
  ASSERT_EQ(scene.layers().size(), 2u);
  EXPECT_EQ(scene.tag(scene.triangles()[0].layer_id), LayerTag::Interior);
  EXPECT_EQ(scene.tag(scene.triangles()[1].layer_id), LayerTag::Window);
  EXPECT_EQ(scene.count_tagged(LayerTag::Window), 1u);
}

TEST(LoadScene, PolygonsAreFanTriangulatedAndUsemtlCounts) {
  LayerMap m = two_layers();
  const auto scene = from_text(
      "v 0 0 0\nv 2 0 0\nv 2 2 0\nv 1 3 0\nv 0 2 0\n"
      "usemtl glass\nf 1/1 2/2 3/3 4/4 5/5\n",
      m);
  EXPECT_EQ(scene.triangles().size(), 3u);
  EXPECT_EQ(scene.count_tagged(LayerTag::Window), 3u);
}

TEST(LoadScene, UnmappedNameIsListed) {
  const std::string msg = error_of([] {
    from_text("v 0 0 0\nv 1 0 0\nv 0 1 0\ng terrain\nf 1 2 3\n", two_layers());
  });
  EXPECT_NE(msg.find("unmapped"), std::string::npos);
  EXPECT_NE(msg.find("terrain"), std::string::npos);
}

TEST(LoadScene, FacesBeforeAnyGroupUseDefault) {
  const std::string msg = error_of([] { from_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", two_layers()); });
  EXPECT_NE(msg.find("'default'"), std::string::npos);
}

TEST(LoadScene, NonFiniteVertexReportsLine) {
  const std::string msg = error_of([] { from_text("g wall\nv 0 0 0\nv nan 0 0\nv 0 1 0\nf 1 2 3\n", two_layers()); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  const std::string bad = error_of([] { from_text("v 0 0 0\nv 1 x 0\n", two_layers()); });
  EXPECT_NE(bad.find("line 2"), std::string::npos) << bad;
}

TEST(LoadScene, BadFaceReferences) {
  EXPECT_THROW(from_text("g wall\nv 0 0 0\nv 1 0 0\nf 1 2 3\n", two_layers()), InputError);
  EXPECT_THROW(from_text("g wall\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 0\n", two_layers()), InputError);
  EXPECT_EQ(from_text("g wall\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n", two_layers()).triangles().size(), 1u);
}

TEST(LoadScene, DegenerateFacesAreDroppedAndCounted) {
  const auto scene = from_text("g wall\nv 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 4\n", two_layers());
  EXPECT_EQ(scene.triangles().size(), 1u);
  EXPECT_EQ(scene.dropped_degenerate(), 1u);
}

TEST(LoadScene, OnlyDegenerateFacesIsEmptyScene) {
  EXPECT_EQ(error_of([] { from_text("g wall\nv 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n", two_layers()); }), "empty scene");
  EXPECT_EQ(error_of([] { from_text("", two_layers()); }), "empty scene");
}

TEST(LoadScene, SaveRoundTripKeepsTrianglesAndLayers) {
  const auto map = load_layer_map(test::fixture("shoebox/layers.json"));
  const auto scene = load_scene(test::fixture("shoebox/scene.obj"), map);
  std::ostringstream out;
  save_obj(out, scene);
  const auto again = from_text(out.str(), map);
  ASSERT_EQ(again.triangles().size(), scene.triangles().size());
  std::multiset<std::tuple<double, double, double, std::string>> a, b;
  for (const auto& t : scene.triangles()) a.insert({t.v0.x + t.v1.y, t.v2.z, t.area(), scene.layers()[t.layer_id].name});
  for (const auto& t : again.triangles()) b.insert({t.v0.x + t.v1.y, t.v2.z, t.area(), again.layers()[t.layer_id].name});
  EXPECT_EQ(a, b);
}

TEST(Extent, ShoeboxFixtureIsGroundDiagonal) {
  const auto scene =
      load_scene(test::fixture("shoebox/scene.obj"), load_layer_map(test::fixture("shoebox/layers.json")));
  EXPECT_NEAR(scene.extent(), 200.0 * std::sqrt(2.0), 1e-9);
  EXPECT_DOUBLE_EQ(far_cap(scene), scene.extent());
}

TEST(Extent, EnclosingSphereProperties) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({g(rng), 2 * g(rng), 0.5 * g(rng)});
    const Sphere s = minimal_enclosing_sphere(pts);
    double far = 0.0;
    for (const Vec3& p : pts) far = std::max(far, norm(p - s.centre));
    EXPECT_LE(far, s.radius * (1 + 1e-9));
    EXPECT_NEAR(far, s.radius, 1e-9 * s.radius);  // tight: some point on the surface
    // No smaller sphere around a perturbed centre contains everything.
    for (int j = 0; j < 20; ++j) {
      const Vec3 c = s.centre + 0.01 * test::random_unit(rng);
      double r = 0.0;
      for (const Vec3& p : pts) r = std::max(r, norm(p - c));
      EXPECT_GE(r, s.radius - 1e-9);
    }
  }
}

TEST(Extent, DegenerateInputs) {
  EXPECT_DOUBLE_EQ(minimal_enclosing_sphere({{1, 2, 3}}).radius, 0.0);
  EXPECT_DOUBLE_EQ(minimal_enclosing_sphere({{0, 0, 0}, {2, 0, 0}, {1, 0, 0}}).radius, 1.0);
  // Collinear and cocircular points.
  EXPECT_NEAR(minimal_enclosing_sphere({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {4, 0, 0}}).radius, 2.0, 1e-12);
  EXPECT_NEAR(minimal_enclosing_sphere({{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}}).radius, 1.0, 1e-12);
}

TEST(FarCap, Examples) {
  test::SceneBuilder b;
  const LayerId id = b.layer("g", LayerTag::Ground);
  b.slab_z(id, 0.0, 0.0, 300.0, 0.0, 400.0);
  const auto scene = b.build();
  EXPECT_NEAR(far_cap(scene), 500.0, 1e-9);
  EXPECT_DOUBLE_EQ(far_cap(scene, 1000.0), 1000.0);
  EXPECT_EQ(error_of([&] { far_cap(scene, 0.0); }), "far cap override must be > 0");
  EXPECT_THROW(far_cap(scene, -5.0), InputError);
}

TEST(LayerMapFile, ParsesWindows) {
  const auto map = load_layer_map(test::fixture("shoebox/layers.json"));
  EXPECT_EQ(map.layers.size(), 4u);
  ASSERT_EQ(map.windows.size(), 1u);
  const auto& w = map.windows[0];
  EXPECT_NO_THROW(validate(w));
  EXPECT_NEAR(w.top_z(), 2.3, 1e-12);
  EXPECT_NEAR(w.bottom_z(), 0.8, 1e-12);
  EXPECT_NEAR(norm(w.centroid() - Vec3{1.8, 0, 1.55}), 0.0, 1e-12);
}

TEST(LayerMapFile, RejectsBadInput) {
  EXPECT_THROW(parse_layer_map(nlohmann::json::parse(R"({"layers": {"a": "sky"}})")), InputError);
  EXPECT_THROW(parse_layer_map(nlohmann::json::parse(R"({"nope": 1})")), InputError);
  EXPECT_THROW(load_layer_map("/nonexistent/layers.json"), InputError);
}

TEST(WindowValidation, RejectsBrokenApertures) {
  WindowAperture w = test::shoebox_window({});
  EXPECT_NO_THROW(validate(w));
  WindowAperture bent = w;
  bent.boundary[2].y = 0.01;
  EXPECT_THROW(validate(bent), InputError);
  WindowAperture concave = w;
  concave.boundary.insert(concave.boundary.begin() + 1, Vec3{0, 0, 1.2});
  EXPECT_THROW(validate(concave), InputError);
  WindowAperture normal = w;
  normal.normal = {0, -2, 0};
  EXPECT_THROW(validate(normal), InputError);
}
