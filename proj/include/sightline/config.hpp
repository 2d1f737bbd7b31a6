#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sightline/compliance.hpp"
#include "sightline/error.hpp"
#include "sightline/sampling.hpp"
#include "sightline/scene.hpp"
#include "sightline/solar.hpp"
#include "sightline/view_out.hpp"

namespace sightline {

inline constexpr int kDefaultYear = 2025;  // not a leap year: Feb 1 - Mar 21 spans 49 days
inline constexpr double kDefaultGridSpacing = 0.5;

/// Every parameter of a run. Paths are resolved against the config file's
/// directory when loaded.
struct RunConfig {
  std::filesystem::path scene;
  std::filesystem::path layer_map;

  GeoLocation location{51.92, 4.48, 1.0};
  double north_azimuth_in_scene{0.0};

  std::vector<Vec3> room_floor;
  double grid_spacing_m{kDefaultGridSpacing};
  std::vector<double> grid_heights_m{1.2, 1.7};

  int icosphere_level{kDefaultIcosphereLevel};
  int ring_size{kDefaultRingSize};
  std::vector<double> thresholds_sr{0.0};  // the first one governs compliance
  DistanceRule distance_rule{DistanceRule::Min};
  std::optional<double> far_cap_m;
  WindowSampling window_sampling;

  int timestep_minutes{kDefaultTimestepMinutes};
  DateRange period{default_period(kDefaultYear)};
  std::optional<Date> evaluation_day;
  std::size_t sunlight_window_index{0};

  std::filesystem::path output_dir{"out"};
  unsigned threads{0};  // 0: all hardware threads; never affects results
};

/// Throws InputError when a parameter falls outside the range its consumer accepts.
inline void validate(const RunConfig& c) {
  if (c.scene.empty()) throw InputError("config: 'scene' is required");
  if (c.layer_map.empty()) throw InputError("config: 'layer_map' is required");
  validate(c.location);
  if (!std::isfinite(c.north_azimuth_in_scene)) throw InputError("config: north azimuth must be finite");
  if (c.room_floor.size() < 3) throw InputError("config: grid.room_floor needs at least 3 points");
  if (!(c.grid_spacing_m > 0.0)) throw InputError("config: grid spacing must be > 0");
  if (c.grid_heights_m.empty()) throw InputError("config: at least one grid height is required");
  for (double h : c.grid_heights_m) {
    if (!(h > 0.0)) throw InputError("config: grid heights must be > 0");
  }
  if (c.icosphere_level < 0 || c.icosphere_level > kMaxIcosphereLevel) throw InputError("subdivision too deep");
  if (c.ring_size < 8) throw InputError("config: ring size must be >= 8");
  if (c.thresholds_sr.empty()) throw InputError("config: at least one layer threshold is required");
  for (double t : c.thresholds_sr) {
    if (!(t >= 0.0)) throw InputError("config: layer thresholds must be >= 0 sr");
  }
  if (c.far_cap_m && !(*c.far_cap_m > 0.0)) throw InputError("far cap override must be > 0");
  if (c.window_sampling.rows < 1 || c.window_sampling.cols < 1) throw InputError("config: window sample grid must be >= 1x1");
  if (!(c.window_sampling.inset_m >= 0.0)) throw InputError("config: window sample inset must be >= 0");
  validate_timestep(c.timestep_minutes);
  if (!c.period.start.ok() || !c.period.end.ok()) throw InputError("config: invalid period date");
  if (std::chrono::sys_days{c.period.start} > std::chrono::sys_days{c.period.end}) {
    throw InputError("config: period start is after period end");
  }
  if (c.evaluation_day) {
    const auto d = std::chrono::sys_days{*c.evaluation_day};
    if (d < std::chrono::sys_days{c.period.start} || d > std::chrono::sys_days{c.period.end}) {
      throw InputError("evaluation day " + format_date(*c.evaluation_day) + " is outside the period");
    }
  }
}

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError("config: '" + where + key + "' has the wrong type");
  }
}

inline const nlohmann::json& section(const nlohmann::json& j, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw InputError(std::string("config: '") + key + "' must be an object");
  return j.at(key);
}

}  // namespace detail

/// Builds a RunConfig from its JSON form; relative paths are resolved against `base_dir`.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  RunConfig c;
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : (base_dir / path).lexically_normal();
  };
  if (auto s = detail::get_or<std::string>(j, "scene", "", ""); !s.empty()) c.scene = resolve(s);
  if (auto s = detail::get_or<std::string>(j, "layer_map", "", ""); !s.empty()) c.layer_map = resolve(s);
  if (auto s = detail::get_or<std::string>(j, "output_dir", "", ""); !s.empty()) c.output_dir = resolve(s);
  c.threads = detail::get_or<unsigned>(j, "threads", c.threads, "");

  const auto& loc = detail::section(j, "location");
  c.location.latitude = detail::get_or(loc, "latitude", c.location.latitude, "location.");
  c.location.longitude = detail::get_or(loc, "longitude", c.location.longitude, "location.");
  c.location.utc_offset = detail::get_or(loc, "utc_offset", c.location.utc_offset, "location.");
  c.north_azimuth_in_scene = detail::get_or(loc, "north_azimuth_in_scene", c.north_azimuth_in_scene, "location.");

  const auto& grid = detail::section(j, "grid");
  if (grid.contains("room_floor")) {
    if (!grid.at("room_floor").is_array()) throw InputError("config: grid.room_floor must be a list of points");
    for (const auto& p : grid.at("room_floor")) c.room_floor.push_back(detail::json_vec3(p, "config: grid.room_floor"));
  }
  c.grid_spacing_m = detail::get_or(grid, "spacing_m", c.grid_spacing_m, "grid.");
  c.grid_heights_m = detail::get_or(grid, "heights_m", c.grid_heights_m, "grid.");

  const auto& view = detail::section(j, "view");
  c.icosphere_level = detail::get_or(view, "icosphere_level", c.icosphere_level, "view.");
  c.ring_size = detail::get_or(view, "ring_size", c.ring_size, "view.");
  c.thresholds_sr = detail::get_or(view, "thresholds_sr", c.thresholds_sr, "view.");
  const auto rule = detail::get_or<std::string>(view, "distance_rule", "min", "view.");
  const auto parsed_rule = parse_distance_rule(rule);
  if (!parsed_rule) throw InputError("config: view.distance_rule must be 'min' or 'median'");
  c.distance_rule = *parsed_rule;
  if (view.contains("far_cap_m") && !view.at("far_cap_m").is_null()) {
    c.far_cap_m = detail::get_or(view, "far_cap_m", 0.0, "view.");
  }
  const auto& ws = detail::section(view, "window_samples");
  c.window_sampling.rows = detail::get_or(ws, "rows", c.window_sampling.rows, "view.window_samples.");
  c.window_sampling.cols = detail::get_or(ws, "cols", c.window_sampling.cols, "view.window_samples.");
  c.window_sampling.inset_m = detail::get_or(ws, "inset_m", c.window_sampling.inset_m, "view.window_samples.");

  const auto& sun = detail::section(j, "sunlight");
  c.timestep_minutes = detail::get_or(sun, "timestep_minutes", c.timestep_minutes, "sunlight.");
  const int year = detail::get_or(sun, "year", kDefaultYear, "sunlight.");
  c.period = default_period(year);
  const auto& period = detail::section(sun, "period");
  if (auto s = detail::get_or<std::string>(period, "start", "", "sunlight.period."); !s.empty()) c.period.start = parse_date(s);
  if (auto s = detail::get_or<std::string>(period, "end", "", "sunlight.period."); !s.empty()) c.period.end = parse_date(s);
  if (auto s = detail::get_or<std::string>(sun, "evaluation_day", "", "sunlight."); !s.empty()) c.evaluation_day = parse_date(s);
  c.sunlight_window_index = detail::get_or<std::size_t>(sun, "window_index", 0, "sunlight.");
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  const auto j = read_json_file(path, "config");
  return parse_run_config(j, std::filesystem::absolute(path).parent_path());
}

/// Complete JSON form of a config with every default filled in and absolute
/// paths. Feeding it back to parse_run_config reproduces the same run. The
/// thread count and output directory are left out: they never change results.
inline nlohmann::json echo_config(const RunConfig& c) {
  using nlohmann::json;
  json floor = json::array();
  for (const Vec3& p : c.room_floor) floor.push_back({p.x, p.y, p.z});
  json j;
  j["scene"] = std::filesystem::absolute(c.scene).lexically_normal().string();
  j["layer_map"] = std::filesystem::absolute(c.layer_map).lexically_normal().string();
  j["location"] = {{"latitude", c.location.latitude},
                   {"longitude", c.location.longitude},
                   {"utc_offset", c.location.utc_offset},
                   {"north_azimuth_in_scene", c.north_azimuth_in_scene}};
  j["grid"] = {{"room_floor", floor}, {"spacing_m", c.grid_spacing_m}, {"heights_m", c.grid_heights_m}};
  j["view"] = {{"icosphere_level", c.icosphere_level},
               {"ring_size", c.ring_size},
               {"thresholds_sr", c.thresholds_sr},
               {"distance_rule", std::string(to_string(c.distance_rule))},
               {"far_cap_m", c.far_cap_m ? json(*c.far_cap_m) : json(nullptr)},
               {"window_samples",
                {{"rows", c.window_sampling.rows}, {"cols", c.window_sampling.cols}, {"inset_m", c.window_sampling.inset_m}}}};
  j["sunlight"] = {{"timestep_minutes", c.timestep_minutes},
                   {"year", static_cast<int>(c.period.start.year())},
                   {"period", {{"start", format_date(c.period.start)}, {"end", format_date(c.period.end)}}},
                   {"evaluation_day", c.evaluation_day ? json(format_date(*c.evaluation_day)) : json(nullptr)},
                   {"window_index", c.sunlight_window_index}};
  return j;
}

}  // namespace sightline
