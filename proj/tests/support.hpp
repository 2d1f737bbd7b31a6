#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "sightline/scene.hpp"

#ifndef SIGHTLINE_FIXTURES_DIR
#define SIGHTLINE_FIXTURES_DIR "fixtures"
#endif

namespace sightline::test {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(SIGHTLINE_FIXTURES_DIR) / rel; }

/// Collects tagged triangles layer by layer.
class SceneBuilder {
 public:
  LayerId layer(const std::string& name, LayerTag tag) {
    for (LayerId i = 0; i < layers_.size(); ++i) {
      if (layers_[i].name == name) return i;
    }
    layers_.push_back({tag, name});
    return static_cast<LayerId>(layers_.size() - 1);
  }

  void triangle(LayerId id, Vec3 a, Vec3 b, Vec3 c) { triangles_.push_back({a, b, c, id}); }

  void quad(LayerId id, Vec3 a, Vec3 b, Vec3 c, Vec3 d) {
    triangle(id, a, b, c);
    triangle(id, a, c, d);
  }

  /// Axis-aligned rectangle in the plane y = y0.
  void wall_y(LayerId id, double y0, double x0, double x1, double z0, double z1) {
    quad(id, {x0, y0, z0}, {x1, y0, z0}, {x1, y0, z1}, {x0, y0, z1});
  }

  void wall_x(LayerId id, double x0, double y0, double y1, double z0, double z1) {
    quad(id, {x0, y0, z0}, {x0, y1, z0}, {x0, y1, z1}, {x0, y0, z1});
  }

  void slab_z(LayerId id, double z0, double x0, double x1, double y0, double y1) {
    quad(id, {x0, y0, z0}, {x1, y0, z0}, {x1, y1, z0}, {x0, y1, z0});
  }

  SemanticScene build() const { return SemanticScene(triangles_, layers_); }
  const std::vector<Triangle>& triangles() const { return triangles_; }

 private:
  std::vector<LayerInfo> layers_;
  std::vector<Triangle> triangles_;
};

/// Closed room x in [-half_width, half_width], y in [0, depth], z in [0, height]
/// whose y = 0 wall holds a window opening x in [-W/2, W/2], z in [z0, z1].
struct ShoeboxSpec {
  double window_width{2.4};
  double window_z0{0.8};
  double window_z1{2.3};
  double half_width{5.0};
  double depth{8.0};
  double height{2.9};
};

inline void add_shoebox(SceneBuilder& b, const ShoeboxSpec& s) {
  const LayerId room = b.layer("room", LayerTag::Interior);
  const LayerId glass = b.layer("glazing", LayerTag::Window);
  const double xs[] = {-s.half_width, -s.window_width / 2, s.window_width / 2, s.half_width};
  const double zs[] = {0.0, s.window_z0, s.window_z1, s.height};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == 1 && j == 1) continue;
      b.wall_y(room, 0.0, xs[i], xs[i + 1], zs[j], zs[j + 1]);
    }
  }
  b.wall_y(room, s.depth, -s.half_width, s.half_width, 0.0, s.height);
  b.wall_x(room, -s.half_width, 0.0, s.depth, 0.0, s.height);
  b.wall_x(room, s.half_width, 0.0, s.depth, 0.0, s.height);
  b.slab_z(room, 0.0, -s.half_width, s.half_width, 0.0, s.depth);
  b.slab_z(room, s.height, -s.half_width, s.half_width, 0.0, s.depth);
  b.wall_y(glass, 0.0, -s.window_width / 2, s.window_width / 2, s.window_z0, s.window_z1);
}

inline WindowAperture shoebox_window(const ShoeboxSpec& s) {
  const double h = s.window_width / 2;
  return {{{-h, 0, s.window_z0}, {h, 0, s.window_z0}, {h, 0, s.window_z1}, {-h, 0, s.window_z1}},
          {0, -1, 0},
          s.window_z0,
          0.0};
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Random triangle soup in a cube of side `size`. Every tenth triangle is a
/// duplicate of an earlier one on another layer, to exercise coincident hits.
inline std::vector<Triangle> random_soup(std::mt19937_64& rng, std::size_t count, double size, LayerId layers) {
  std::uniform_real_distribution<double> pos(0.0, size);
  std::uniform_real_distribution<double> off(-0.15 * size, 0.15 * size);
  std::uniform_int_distribution<LayerId> lay(0, layers - 1);
  std::vector<Triangle> out;
  while (out.size() < count) {
    if (out.size() > 10 && out.size() % 10 == 0) {
      Triangle t = out[out.size() / 2];
      t.layer_id = lay(rng);
      out.push_back(t);
      continue;
    }
    const Vec3 a{pos(rng), pos(rng), pos(rng)};
    Triangle t{a, a + Vec3{off(rng), off(rng), off(rng)}, a + Vec3{off(rng), off(rng), off(rng)}, lay(rng)};
    if (t.area() > 1e-6) out.push_back(t);
  }
  return out;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  for (;;) {
    const Vec3 v{g(rng), g(rng), g(rng)};
    if (norm(v) > 1e-6) return normalized(v);
  }
}

/// Rows of a small CSV file keyed by header name; '#' lines are comments.
inline std::vector<std::map<std::string, std::string>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      continue;
    }
    auto& row = rows.emplace_back();
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
  }
  return rows;
}

/// Local minutes after midnight from "HH:MM".
inline int minutes_of(const std::string& hhmm) { return std::stoi(hhmm.substr(0, 2)) * 60 + std::stoi(hhmm.substr(3, 2)); }

/// Runs a shell command and returns its exit status.
inline int run(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace sightline::test
