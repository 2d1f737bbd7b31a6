#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <list>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "sightline/bvh.hpp"
#include "sightline/error.hpp"
#include "sightline/geometry.hpp"

namespace sightline {

/// Semantic class of scene geometry. Sky is not a tag: it is what a ray sees
/// when it leaves the scene.
enum class LayerTag { Window, Interior, Ground, Landscape };

inline std::string_view to_string(LayerTag tag) {
  switch (tag) {
    case LayerTag::Window: return "window";
    case LayerTag::Interior: return "interior";
    case LayerTag::Ground: return "ground";
    case LayerTag::Landscape: return "landscape";
  }
  return "?";
}

inline std::optional<LayerTag> parse_layer_tag(std::string_view s) {
  if (s == "window") return LayerTag::Window;
  if (s == "interior") return LayerTag::Interior;
  if (s == "ground") return LayerTag::Ground;
  if (s == "landscape") return LayerTag::Landscape;
  return std::nullopt;
}

struct LayerInfo {
  LayerTag tag;
  std::string name;  // OBJ group or material name the layer came from
};

/// Minimal enclosing sphere of a point set.
struct Sphere {
  Vec3 centre;
  double radius{-1.0};

  bool contains(const Vec3& p) const {
    return radius >= 0.0 && norm(p - centre) <= radius * (1.0 + 1e-12) + 1e-12;
  }
};

namespace detail {

inline Sphere sphere_through(const Vec3& a, const Vec3& b) { return {0.5 * (a + b), 0.5 * norm(b - a)}; }

inline Sphere smallest_containing(std::initializer_list<Sphere> candidates, std::initializer_list<Vec3> points) {
  Sphere best;
  for (const Sphere& s : candidates) {
    if (s.radius < 0.0) continue;
    if (!std::all_of(points.begin(), points.end(), [&](const Vec3& p) { return s.contains(p); })) continue;
    if (best.radius < 0.0 || s.radius < best.radius) best = s;
  }
  return best;
}

inline Sphere circumsphere(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 n = cross(ab, ac);
  const double n2 = dot(n, n);
  if (n2 <= 1e-24 * dot(ab, ab) * dot(ac, ac)) {
    return smallest_containing({sphere_through(a, b), sphere_through(a, c), sphere_through(b, c)}, {a, b, c});
  }
  const Vec3 offset = (dot(ac, ac) * cross(n, ab) + dot(ab, ab) * cross(ac, n)) / (2.0 * n2);
  return {a + offset, norm(offset)};
}

inline Sphere circumsphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ad = d - a;
  const double det = dot(ab, cross(ac, ad));
  const double scale = norm(ab) * norm(ac) * norm(ad);
  if (std::fabs(det) <= 1e-12 * scale) {
    return smallest_containing({circumsphere(a, b, c), circumsphere(a, b, d), circumsphere(a, c, d),
                                circumsphere(b, c, d)},
                               {a, b, c, d});
  }
  const Vec3 offset =
      (dot(ab, ab) * cross(ac, ad) + dot(ac, ac) * cross(ad, ab) + dot(ad, ad) * cross(ab, ac)) / (2.0 * det);
  return {a + offset, norm(offset)};
}

inline Sphere sphere_from_support(const std::vector<Vec3>& s) {
  switch (s.size()) {
    case 0: return {};
    case 1: return {s[0], 0.0};
    case 2: return sphere_through(s[0], s[1]);
    case 3: return circumsphere(s[0], s[1], s[2]);
    default: return circumsphere(s[0], s[1], s[2], s[3]);
  }
}

// Move-to-front Welzl recursion; the depth is bounded by the support size.
inline Sphere mtf_sphere(std::list<Vec3>& points, std::list<Vec3>::iterator end, std::vector<Vec3>& support) {
  Sphere ball = sphere_from_support(support);
  if (support.size() == 4) return ball;
  for (auto it = points.begin(); it != end;) {
    auto next = std::next(it);
    if (!ball.contains(*it)) {
      support.push_back(*it);
      ball = mtf_sphere(points, it, support);
      support.pop_back();
      points.splice(points.begin(), points, it);
    }
    it = next;
  }
  return ball;
}

}  // namespace detail

inline Sphere minimal_enclosing_sphere(std::vector<Vec3> points) {
  std::sort(points.begin(), points.end(),
            [](const Vec3& l, const Vec3& r) { return std::tie(l.x, l.y, l.z) < std::tie(r.x, r.y, r.z); });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  std::list<Vec3> list(points.begin(), points.end());
  std::vector<Vec3> support;
  return detail::mtf_sphere(list, list.end(), support);
}

/// A window opening declared in the layer map. Boundary vertices are in world
/// metres; the normal points outdoors.
struct WindowAperture {
  std::vector<Vec3> boundary;
  Vec3 normal;
  double sill_height_m{0.0};   // above the room floor
  double floor_height_m{0.0};  // world z of the room floor

  Vec3 centroid() const {
    Vec3 c;
    for (const Vec3& p : boundary) c += p;
    return c / static_cast<double>(boundary.size());
  }

  /// Horizontal in-plane axis (along the window width).
  Vec3 width_axis() const {
    const Vec3 h = cross(Vec3{0, 0, 1}, normal);
    if (norm(h) < 1e-9) return {1, 0, 0};  // skylight: any horizontal axis
    return normalized(h);
  }

  /// In-plane axis orthogonal to width_axis, pointing upwards when possible.
  Vec3 height_axis() const {
    Vec3 v = cross(normal, width_axis());
    return v.z < 0.0 ? -v : v;
  }

  double top_z() const {
    double z = boundary.front().z;
    for (const Vec3& p : boundary) z = std::max(z, p.z);
    return z;
  }

  double bottom_z() const {
    double z = boundary.front().z;
    for (const Vec3& p : boundary) z = std::min(z, p.z);
    return z;
  }

  /// Boundary in (width, height) coordinates relative to the centroid.
  std::vector<std::pair<double, double>> planar_boundary() const {
    const Vec3 c = centroid();
    const Vec3 u = width_axis();
    const Vec3 v = height_axis();
    std::vector<std::pair<double, double>> out;
    for (const Vec3& p : boundary) out.emplace_back(dot(p - c, u), dot(p - c, v));
    return out;
  }
};

namespace detail {

inline bool convex_contains(const std::vector<std::pair<double, double>>& poly, double x, double y) {
  int sign = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto [ax, ay] = poly[i];
    const auto [bx, by] = poly[(i + 1) % poly.size()];
    const double c = (bx - ax) * (y - ay) - (by - ay) * (x - ax);
    if (c == 0.0) continue;
    const int s = c > 0.0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return true;
}

}  // namespace detail

/// Throws InputError unless the aperture is planar, convex and has a unit normal.
inline void validate(const WindowAperture& w) {
  if (w.boundary.size() < 3) throw InputError("window boundary needs at least 3 vertices");
  for (const Vec3& p : w.boundary) {
    if (!is_finite(p)) throw InputError("window boundary has a non-finite vertex");
  }
  if (!is_finite(w.normal) || std::fabs(norm(w.normal) - 1.0) > 1e-9) {
    throw InputError("window normal must have unit length");
  }
  const Vec3 c = w.centroid();
  for (const Vec3& p : w.boundary) {
    if (std::fabs(dot(p - c, w.normal)) > 1e-3) throw InputError("window boundary is not planar within 1 mm");
  }
  const auto poly = w.planar_boundary();
  int sign = 0;
  double area2 = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto [ax, ay] = poly[i];
    const auto [bx, by] = poly[(i + 1) % poly.size()];
    const auto [cx, cy] = poly[(i + 2) % poly.size()];
    area2 += ax * by - bx * ay;
    const double turn = (bx - ax) * (cy - by) - (by - ay) * (cx - bx);
    if (std::fabs(turn) < 1e-12) continue;
    const int s = turn > 0.0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) throw InputError("window boundary must be convex");
  }
  if (std::fabs(area2) < 1e-9) throw InputError("window boundary is degenerate");
  if (!std::isfinite(w.sill_height_m) || !std::isfinite(w.floor_height_m)) {
    throw InputError("window sill/floor heights must be finite");
  }
}

/// Parsed layer-map config: source name -> tag, plus declared windows.
struct LayerMap {
  std::map<std::string, LayerTag> layers;
  std::vector<WindowAperture> windows;
};

namespace detail {

inline Vec3 json_vec3(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw InputError(what + ": expected [x, y, z]");
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } catch (const nlohmann::json::exception&) {
    throw InputError(what + ": expected numbers");
  }
}

}  // namespace detail

inline LayerMap parse_layer_map(const nlohmann::json& j) {
  LayerMap map;
  if (!j.is_object() || !j.contains("layers") || !j.at("layers").is_object()) {
    throw InputError("layer map: missing 'layers' section");
  }
  for (const auto& [name, value] : j.at("layers").items()) {
    const auto tag = value.is_string() ? parse_layer_tag(value.get<std::string>()) : std::nullopt;
    if (!tag) throw InputError("layer map: '" + name + "' must be one of window|interior|ground|landscape");
    map.layers.emplace(name, *tag);
  }
  if (j.contains("windows")) {
    if (!j.at("windows").is_array()) throw InputError("layer map: 'windows' must be a list");
    std::size_t index = 0;
    for (const auto& w : j.at("windows")) {
      const std::string what = "layer map: windows[" + std::to_string(index++) + "]";
      for (const char* key : {"boundary", "normal", "sill_height_m", "floor_height_m"}) {
        if (!w.contains(key)) throw InputError(what + ": missing '" + key + "'");
      }
      WindowAperture aperture;
      if (!w.at("boundary").is_array()) throw InputError(what + ".boundary: expected a list of points");
      for (const auto& p : w.at("boundary")) aperture.boundary.push_back(detail::json_vec3(p, what + ".boundary"));
      aperture.normal = detail::json_vec3(w.at("normal"), what + ".normal");
      const double len = norm(aperture.normal);
      if (std::fabs(len - 1.0) > 1e-6) throw InputError(what + ".normal must be a unit vector");
      aperture.normal = aperture.normal / len;
      if (!w.at("sill_height_m").is_number() || !w.at("floor_height_m").is_number()) {
        throw InputError(what + ": sill_height_m and floor_height_m must be numbers");
      }
      aperture.sill_height_m = w.at("sill_height_m").get<double>();
      aperture.floor_height_m = w.at("floor_height_m").get<double>();
      try {
        validate(aperture);
      } catch (const InputError& e) {
        throw InputError(what + ": " + e.what());
      }
      map.windows.push_back(std::move(aperture));
    }
  }
  return map;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + what + " '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("cannot parse " + what + " '" + path.string() + "': " + e.what());
  }
}

inline LayerMap load_layer_map(const std::filesystem::path& path) {
  return parse_layer_map(read_json_file(path, "layer map"));
}

/// Triangle soup with per-triangle semantic layers and a BVH over it.
/// Immutable once constructed.
class SemanticScene {
 public:
  SemanticScene(std::vector<Triangle> triangles, std::vector<LayerInfo> layers, std::size_t dropped_degenerate = 0)
      : layers_(std::move(layers)), accel_(check(std::move(triangles), layers_.size())),
        dropped_degenerate_(dropped_degenerate) {
    std::vector<Vec3> points;
    points.reserve(3 * accel_.triangles().size());
    for (const Triangle& t : accel_.triangles()) {
      points.push_back(t.v0);
      points.push_back(t.v1);
      points.push_back(t.v2);
    }
    bounds_ = minimal_enclosing_sphere(std::move(points));
  }

  std::span<const Triangle> triangles() const { return accel_.triangles(); }
  const std::vector<LayerInfo>& layers() const { return layers_; }
  LayerTag tag(LayerId id) const { return layers_.at(id).tag; }
  LayerTag tag_of(const Hit& h) const { return layers_[h.layer_id].tag; }
  const AccelStructure& accel() const { return accel_; }

  /// Diameter of the minimal sphere enclosing all triangles (metres).
  double extent() const { return 2.0 * bounds_.radius; }
  const Sphere& bounding_sphere() const { return bounds_; }
  std::size_t dropped_degenerate() const { return dropped_degenerate_; }

  LayerSet layers_tagged(LayerTag tag) const {
    LayerSet out;
    for (LayerId i = 0; i < layers_.size(); ++i) {
      if (layers_[i].tag == tag) out.insert(i);
    }
    return out;
  }

  std::size_t count_tagged(LayerTag tag) const {
    return static_cast<std::size_t>(std::count_if(triangles().begin(), triangles().end(),
                                                  [&](const Triangle& t) { return layers_[t.layer_id].tag == tag; }));
  }

  std::vector<Hit> trace_all(const Ray& ray) const { return accel_.trace_all(ray); }
  std::optional<Hit> trace_first(const Ray& ray, const LayerSet& skip = {}) const {
    return accel_.trace_first(ray, skip);
  }

 private:
  static std::vector<Triangle> check(std::vector<Triangle> triangles, std::size_t layer_count) {
    if (triangles.empty()) throw InputError("empty scene");
    for (const Triangle& t : triangles) {
      if (t.layer_id >= layer_count) throw InputError("triangle references unknown layer id");
      if (!is_finite(t.v0) || !is_finite(t.v1) || !is_finite(t.v2)) throw InputError("non-finite triangle vertex");
      if (!(t.area() > 0.0)) throw InputError("degenerate triangle");
    }
    return triangles;
  }

  std::vector<LayerInfo> layers_;
  AccelStructure accel_;
  Sphere bounds_;
  std::size_t dropped_degenerate_{0};
};

/// Faces with less area than this (m^2) are dropped on load.
inline constexpr double kDegenerateArea = 1e-10;

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc::result_out_of_range) return s.front() == '-' ? -HUGE_VAL : HUGE_VAL;
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("OBJ line " + std::to_string(line) + ": invalid number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

/// Reads the Wavefront OBJ subset (v, f, g, usemtl) and tags every face with
/// the layer of the most recent `g` or `usemtl` name ("default" before any).
/// Every group and material name in the file must appear in the layer map.
inline SemanticScene load_scene(std::istream& in, const LayerMap& layer_map) {
  std::vector<Vec3> vertices;
  std::vector<std::pair<std::vector<std::size_t>, std::string>> faces;
  std::vector<std::string> names_in_order;
  std::set<std::string> seen_names;
  std::string current = "default";
  const auto note_name = [&](const std::string& n) {
    if (seen_names.insert(n).second) names_in_order.push_back(n);
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tok = detail::split_ws(view);
    if (tok.empty()) continue;
    const std::string_view kind = tok[0];
    if (kind == "v") {
      if (tok.size() < 4) throw InputError("OBJ line " + std::to_string(line_no) + ": vertex needs 3 coordinates");
      const Vec3 p{detail::parse_double(tok[1], line_no), detail::parse_double(tok[2], line_no),
                   detail::parse_double(tok[3], line_no)};
      if (!is_finite(p)) throw InputError("OBJ line " + std::to_string(line_no) + ": non-finite vertex");
      vertices.push_back(p);
    } else if (kind == "f") {
      if (tok.size() < 4) throw InputError("OBJ line " + std::to_string(line_no) + ": face needs 3 vertices");
      std::vector<std::size_t> idx;
      for (std::size_t k = 1; k < tok.size(); ++k) {
        const std::string_view ref = tok[k].substr(0, tok[k].find('/'));
        long long i = 0;
        const auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), i);
        if (ec != std::errc() || ptr != ref.data() + ref.size() || i == 0) {
          throw InputError("OBJ line " + std::to_string(line_no) + ": bad vertex reference '" + std::string(tok[k]) + "'");
        }
        const long long resolved = i > 0 ? i - 1 : static_cast<long long>(vertices.size()) + i;
        if (resolved < 0 || resolved >= static_cast<long long>(vertices.size())) {
          throw InputError("OBJ line " + std::to_string(line_no) + ": vertex index out of range");
        }
        idx.push_back(static_cast<std::size_t>(resolved));
      }
      note_name(current);
      faces.emplace_back(std::move(idx), current);
    } else if (kind == "g" || kind == "usemtl") {
      current = tok.size() > 1 ? std::string(tok[1]) : std::string("default");
      note_name(current);
    }
  }

  std::vector<std::string> unmapped;
  for (const auto& n : names_in_order) {
    if (!layer_map.layers.contains(n)) unmapped.push_back(n);
  }
  if (!unmapped.empty()) {
    std::string msg = "unmapped group/material names:";
    for (const auto& n : unmapped) msg += " '" + n + "'";
    throw InputError(msg);
  }

  std::vector<LayerInfo> layers;
  std::map<std::string, LayerId> ids;
  for (const auto& n : names_in_order) {
    ids.emplace(n, static_cast<LayerId>(layers.size()));
    layers.push_back({layer_map.layers.at(n), n});
  }

  std::vector<Triangle> triangles;
  std::size_t dropped = 0;
  for (const auto& [idx, name] : faces) {
    const LayerId id = ids.at(name);
    for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
      const Triangle t{vertices[idx[0]], vertices[idx[k]], vertices[idx[k + 1]], id};
      if (t.area() < kDegenerateArea) {
        ++dropped;
        continue;
      }
      triangles.push_back(t);
    }
  }
  if (triangles.empty()) throw InputError("empty scene");
  return SemanticScene(std::move(triangles), std::move(layers), dropped);
}

inline SemanticScene load_scene(const std::filesystem::path& mesh_file, const LayerMap& layer_map) {
  std::ifstream in(mesh_file);
  if (!in) throw InputError("cannot open mesh '" + mesh_file.string() + "'");
  return load_scene(in, layer_map);
}

/// Writes the scene back as OBJ, one `g` record per layer.
inline void save_obj(std::ostream& out, const SemanticScene& scene) {
  out.precision(17);
  std::size_t next_vertex = 1;
  for (LayerId id = 0; id < scene.layers().size(); ++id) {
    out << "g " << scene.layers()[id].name << '\n';
    for (const Triangle& t : scene.triangles()) {
      if (t.layer_id != id) continue;
      for (const Vec3& p : {t.v0, t.v1, t.v2}) out << "v " << p.x << ' ' << p.y << ' ' << p.z << '\n';
      out << "f " << next_vertex << ' ' << next_vertex + 1 << ' ' << next_vertex + 2 << '\n';
      next_vertex += 3;
    }
  }
}

/// Maximum ray length for view rays: the override when given, else the scene extent.
inline double far_cap(const SemanticScene& scene, std::optional<double> override_m = std::nullopt) {
  if (override_m) {
    if (!(*override_m > 0.0) || !std::isfinite(*override_m)) throw InputError("far cap override must be > 0");
    return *override_m;
  }
  return scene.extent();
}

}  // namespace sightline
