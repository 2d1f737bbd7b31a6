#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sightline/compliance.hpp"
#include "sightline/config.hpp"
#include "sightline/sampling.hpp"
#include "sightline/scene.hpp"
#include "sightline/solar.hpp"
#include "sightline/view_out.hpp"

namespace sightline {

inline constexpr const char* kReportVersion = "1.0.0";

/// Number text used in every CSV and JSON output: at most 9 significant digits.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// v rounded to 9 significant digits, so JSON serialization stays short and stable.
inline double round9(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

/// Scene, windows and layer map loaded from a config.
struct Inputs {
  RunConfig config;
  LayerMap layer_map;
  SemanticScene scene;
  double far_cap;
};

inline Inputs load_inputs(const RunConfig& config, std::ostream& log) {
  validate(config);
  LayerMap map = load_layer_map(config.layer_map);
  if (map.windows.empty()) throw InputError("layer map '" + config.layer_map.string() + "' declares no windows");
  SemanticScene scene = load_scene(config.scene, map);
  if (scene.count_tagged(LayerTag::Window) == 0) throw InputError("scene has no window-tagged geometry");
  if (scene.dropped_degenerate() > 0) {
    log << "warning: dropped " << scene.dropped_degenerate() << " degenerate face triangle(s)\n";
  }
  if (config.sunlight_window_index >= map.windows.size()) {
    throw InputError("sunlight.window_index " + std::to_string(config.sunlight_window_index) + " is out of range");
  }
  const double cap = far_cap(scene, config.far_cap_m);
  return {config, std::move(map), std::move(scene), cap};
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

inline std::string grid_file_name(double height) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "view_grid_h%.2f.csv", height);
  return buf;
}

inline nlohmann::json level_json(PerformanceLevel l) { return std::string(to_string(l)); }

}  // namespace detail

struct ViewRun {
  ViewAssessment assessment;
  ViewReport report;
  nlohmann::json fragment;
};

inline ViewRun compute_view(const Inputs& in) {
  const RunConfig& c = in.config;
  std::vector<std::vector<Vec3>> grids;
  for (double h : c.grid_heights_m) grids.push_back(vantage_grid(c.room_floor, c.grid_spacing_m, h));
  const DirectionSet sphere = icosphere(c.icosphere_level);
  const DirectionSet ring = horizontal_ring(c.ring_size);
  ViewSettings settings;
  settings.threshold_sr = c.thresholds_sr.front();
  settings.far_cap = in.far_cap;
  settings.window_sampling = c.window_sampling;
  settings.threads = c.threads;

  ViewRun run;
  run.assessment = assess_view(in.scene, in.layer_map.windows, grids, sphere, ring, settings);
  run.report = assemble_view_report(run.assessment, c.distance_rule, in.far_cap);

  using nlohmann::json;
  json grid_json = json::array();
  for (std::size_t g = 0; g < grids.size(); ++g) {
    const auto& pts = run.assessment.grids[g];
    double min_angle = 360.0, max_angle = 0.0;
    for (const auto& p : pts) {
      min_angle = std::min(min_angle, p.sight_angle_deg);
      max_angle = std::max(max_angle, p.sight_angle_deg);
    }
    json layer_counts = json::array();
    for (double t : c.thresholds_sr) {
      int lo = 3, hi = 0;
      for (const auto& p : pts) {
        const int n = count_visible_layers(p.layer_solid_angles, t);
        lo = std::min(lo, n);
        hi = std::max(hi, n);
      }
      layer_counts.push_back({{"threshold_sr", round9(t)}, {"min_visible_layers", lo}, {"max_visible_layers", hi}});
    }
    grid_json.push_back({{"height_m", round9(c.grid_heights_m[g])},
                         {"file", detail::grid_file_name(c.grid_heights_m[g])},
                         {"point_count", pts.size()},
                         {"sight_angle_deg", {{"min", round9(min_angle)}, {"max", round9(max_angle)}}},
                         {"visible_layers", layer_counts}});
  }
  const auto& st = run.report.obstruction_stats;
  const json stats = st ? json{{"min_m", round9(st->min)},
                               {"median_m", round9(st->median)},
                               {"max_m", round9(st->max)},
                               {"sample_count", st->sample_count}}
                        : json(nullptr);
  run.fragment = {{"far_cap_m", round9(in.far_cap)},
                  {"compliance_threshold_sr", round9(settings.threshold_sr)},
                  {"grids", grid_json},
                  {"obstruction_stats", stats},
                  {"distance_rule", std::string(to_string(run.report.distance_rule))},
                  {"governing_distance_m", round9(run.report.governing_distance_m)},
                  {"worst_sight_angle_deg", round9(run.report.worst_sight_angle_deg)},
                  {"worst_visible_layers", run.report.worst_visible_layers},
                  {"levels",
                   {{"sight_angle", detail::level_json(run.report.sight_angle_level)},
                    {"distance", detail::level_json(run.report.distance_level)},
                    {"layers", detail::level_json(run.report.layers_level)},
                    {"overall", detail::level_json(run.report.overall_view_level)}}}};
  return run;
}

/// Per-height grid CSVs, the obstruction-distance CSV and view.json.
inline void write_view_outputs(const Inputs& in, const ViewRun& run, const std::filesystem::path& dir) {
  const RunConfig& c = in.config;
  for (std::size_t g = 0; g < run.assessment.grids.size(); ++g) {
    auto out = detail::open_output(dir / detail::grid_file_name(c.grid_heights_m[g]));
    out << "x,y,z,sight_angle_deg,sr_ground,sr_landscape,sr_sky";
    for (double t : c.thresholds_sr) out << ",visible_layers@" << format_number(t);
    out << '\n';
    for (const auto& p : run.assessment.grids[g]) {
      const auto& sa = p.layer_solid_angles;
      out << format_number(p.point.x) << ',' << format_number(p.point.y) << ',' << format_number(p.point.z) << ','
          << format_number(p.sight_angle_deg) << ',' << format_number(sa.ground) << ','
          << format_number(sa.landscape) << ',' << format_number(sa.sky);
      for (double t : c.thresholds_sr) out << ',' << count_visible_layers(sa, t);
      out << '\n';
    }
  }
  {
    auto out = detail::open_output(dir / "obstruction_distances.csv");
    out << "window,sample,x,y,z,dir_x,dir_y,dir_z,target,distance_m\n";
    for (const auto& s : run.assessment.obstruction_samples) {
      out << s.window_index << ',' << s.point_index << ',' << format_number(s.origin.x) << ','
          << format_number(s.origin.y) << ',' << format_number(s.origin.z) << ',' << format_number(s.direction.x)
          << ',' << format_number(s.direction.y) << ',' << format_number(s.direction.z) << ',' << to_string(s.target)
          << ',' << format_number(s.distance) << '\n';
    }
  }
  detail::write_json(dir / "view.json", run.fragment);
}

struct SunlightRun {
  SunTimeline timeline;
  std::vector<bool> sunlit;
  ExposureSummary summary;
  SunlightReport report;
  SunlightVantage vantage;
  nlohmann::json fragment;
};

inline SunlightRun compute_sunlight(const Inputs& in, std::ostream& log) {
  const RunConfig& c = in.config;
  const WindowAperture& window = in.layer_map.windows.at(c.sunlight_window_index);
  SunlightRun run;
  run.vantage = sunlight_vantage_point(window);
  if (run.vantage.clamped) log << "warning: sunlight assessment point clamped to the window top edge\n";
  run.timeline = build_timeline(c.location, c.period, c.timestep_minutes, c.north_azimuth_in_scene);
  run.sunlit = sunlit_flags(run.vantage.point, in.scene, run.timeline, window.normal, in.far_cap, c.threads);
  run.summary = exposure_summary(aggregate_daily(run.timeline, run.sunlit), c.evaluation_day);
  run.report = assemble_sunlight_report(run.summary);

  using nlohmann::json;
  double lo = HUGE_VAL, hi = 0.0;
  for (const auto& d : run.summary.table) {
    lo = std::min(lo, d.sunlit_hours);
    hi = std::max(hi, d.sunlit_hours);
  }
  const Vec3& p = run.vantage.point;
  run.fragment = {{"vantage_point", {round9(p.x), round9(p.y), round9(p.z)}},
                  {"vantage_clamped", run.vantage.clamped},
                  {"window_index", c.sunlight_window_index},
                  {"timestep_minutes", c.timestep_minutes},
                  {"period", {{"start", format_date(c.period.start)}, {"end", format_date(c.period.end)}}},
                  {"days", run.summary.table.size()},
                  {"daily_hours", {{"min", round9(lo)}, {"max", round9(hi)}}},
                  {"evaluation_day_rule", run.report.evaluation_day_rule},
                  {"governing_day", format_date(run.report.governing_day)},
                  {"hours", round9(run.report.hours)},
                  {"level", detail::level_json(run.report.level)}};
  return run;
}

/// Per-day CSV, timestamp x sunlit matrix CSV and sunlight.json.
inline void write_sunlight_outputs(const SunlightRun& run, const std::filesystem::path& dir) {
  {
    auto out = detail::open_output(dir / "sunlight_daily.csv");
    out << "date,sunlit_hours,intervals\n";
    for (const auto& d : run.summary.table) {
      out << format_date(d.date) << ',' << format_number(d.sunlit_hours) << ',';
      for (std::size_t i = 0; i < d.sunlit_intervals.size(); ++i) {
        if (i > 0) out << ';';
        out << format_minutes(d.sunlit_intervals[i].first) << '-' << format_minutes(d.sunlit_intervals[i].second);
      }
      out << '\n';
    }
  }
  {
    auto out = detail::open_output(dir / "sunlight_matrix.csv");
    out << "timestamp,azimuth_deg,elevation_deg,above_horizon,sunlit\n";
    for (std::size_t i = 0; i < run.timeline.samples.size(); ++i) {
      const auto& s = run.timeline.samples[i];
      out << s.timestamp() << ',' << format_number(s.azimuth_deg) << ',' << format_number(s.elevation_deg) << ','
          << (s.above_horizon() ? 1 : 0) << ',' << (run.sunlit[i] ? 1 : 0) << '\n';
    }
  }
  detail::write_json(dir / "sunlight.json", run.fragment);
}

inline void run_view(const RunConfig& config, std::ostream& log) {
  const Inputs in = load_inputs(config, log);
  write_view_outputs(in, compute_view(in), config.output_dir);
}

inline void run_sunlight(const RunConfig& config, std::ostream& log) {
  const Inputs in = load_inputs(config, log);
  write_sunlight_outputs(compute_sunlight(in, log), config.output_dir);
}

/// UTC time of generation; honours SOURCE_DATE_EPOCH for reproducible runs.
inline std::string generated_at() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json build_report(const RunConfig& config, const ViewRun& view, const SunlightRun& sun) {
  return {{"version", kReportVersion},
          {"generated_at", generated_at()},
          {"config_echo", echo_config(config)},
          {"view", view.fragment},
          {"sunlight", sun.fragment},
          {"levels",
           {{"view",
             {{"sight_angle", detail::level_json(view.report.sight_angle_level)},
              {"distance", detail::level_json(view.report.distance_level)},
              {"layers", detail::level_json(view.report.layers_level)},
              {"overall", detail::level_json(view.report.overall_view_level)}}},
            {"sunlight", detail::level_json(sun.report.level)}}}};
}

/// Both recipes plus report.json. Returns the report.
inline nlohmann::json run_report(const RunConfig& config, std::ostream& log) {
  const Inputs in = load_inputs(config, log);
  const ViewRun view = compute_view(in);
  const SunlightRun sun = compute_sunlight(in, log);
  write_view_outputs(in, view, config.output_dir);
  write_sunlight_outputs(sun, config.output_dir);
  auto report = build_report(config, view, sun);
  detail::write_json(config.output_dir / "report.json", report);
  return report;
}

}  // namespace sightline
