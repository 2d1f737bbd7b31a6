// Command-line front end: view, sunlight, report and validate.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sightline/recipes.hpp"

namespace {

struct Overrides {
  std::string out;
  std::string scene;
  std::string layer_map;
  std::optional<double> latitude, longitude, utc_offset, north;
  std::optional<double> spacing;
  std::vector<double> heights;
  std::optional<int> icosphere_level, ring_size, timestep;
  std::vector<double> thresholds;
  std::string distance_rule;
  std::optional<double> far_cap;
  std::string period_start, period_end, evaluation_day;
  std::optional<unsigned> threads;
};

void add_overrides(CLI::App& app, std::string& config_path, Overrides& o) {
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--scene", o.scene, "Mesh file (OBJ)");
  app.add_option("--layer-map", o.layer_map, "Layer map file (JSON)");
  app.add_option("--latitude", o.latitude, "Latitude, degrees north");
  app.add_option("--longitude", o.longitude, "Longitude, degrees east");
  app.add_option("--utc-offset", o.utc_offset, "Local standard time offset from UTC, hours");
  app.add_option("--north", o.north, "Compass azimuth of scene +Y, degrees");
  app.add_option("--spacing", o.spacing, "Vantage grid spacing, metres");
  app.add_option("--heights", o.heights, "Vantage grid heights above floor, metres");
  app.add_option("--icosphere-level", o.icosphere_level, "Icosphere subdivision level");
  app.add_option("--ring-size", o.ring_size, "Horizontal ring ray count");
  app.add_option("--thresholds", o.thresholds, "Layer visibility thresholds, steradians (first governs)");
  app.add_option("--distance-rule", o.distance_rule, "Obstruction statistic for compliance: min|median");
  app.add_option("--far-cap", o.far_cap, "Maximum ray length, metres (default: scene extent)");
  app.add_option("--timestep", o.timestep, "Solar timestep, minutes (divides 60)");
  app.add_option("--period-start", o.period_start, "First assessment day, YYYY-MM-DD");
  app.add_option("--period-end", o.period_end, "Last assessment day, YYYY-MM-DD");
  app.add_option("--evaluation-day", o.evaluation_day, "Day used for compliance, YYYY-MM-DD");
  app.add_option("--threads", o.threads, "Worker threads (0: all cores)");
}

sightline::RunConfig resolve(const std::string& path, const Overrides& o) {
  using namespace sightline;
  RunConfig c = load_run_config(path);
  if (!o.out.empty()) c.output_dir = o.out;
  if (!o.scene.empty()) c.scene = o.scene;
  if (!o.layer_map.empty()) c.layer_map = o.layer_map;
  if (o.latitude) c.location.latitude = *o.latitude;
  if (o.longitude) c.location.longitude = *o.longitude;
  if (o.utc_offset) c.location.utc_offset = *o.utc_offset;
  if (o.north) c.north_azimuth_in_scene = *o.north;
  if (o.spacing) c.grid_spacing_m = *o.spacing;
  if (!o.heights.empty()) c.grid_heights_m = o.heights;
  if (o.icosphere_level) c.icosphere_level = *o.icosphere_level;
  if (o.ring_size) c.ring_size = *o.ring_size;
  if (!o.thresholds.empty()) c.thresholds_sr = o.thresholds;
  if (!o.distance_rule.empty()) {
    const auto rule = parse_distance_rule(o.distance_rule);
    if (!rule) throw InputError("--distance-rule must be 'min' or 'median'");
    c.distance_rule = *rule;
  }
  if (o.far_cap) c.far_cap_m = *o.far_cap;
  if (o.timestep) c.timestep_minutes = *o.timestep;
  if (!o.period_start.empty()) c.period.start = parse_date(o.period_start);
  if (!o.period_end.empty()) c.period.end = parse_date(o.period_end);
  if (!o.evaluation_day.empty()) c.evaluation_day = parse_date(o.evaluation_day);
  if (o.threads) c.threads = *o.threads;
  validate(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Daylight view-out and sunlight-exposure compliance checks on tagged 3D scenes"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  auto* view = app.add_subcommand("view", "Horizontal sight angle, obstruction distance and view layers");
  auto* sunlight = app.add_subcommand("sunlight", "Daily direct-sunlight hours at the window");
  auto* report = app.add_subcommand("report", "Both assessments plus the JSON compliance report");
  auto* check = app.add_subcommand("validate", "Check the config, layer map and scene without computing");
  for (auto* sub : {view, sunlight, report, check}) add_overrides(*sub, config_path, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto config = resolve(config_path, overrides);
    if (view->parsed()) {
      sightline::run_view(config, std::cerr);
    } else if (sunlight->parsed()) {
      sightline::run_sunlight(config, std::cerr);
    } else if (report->parsed()) {
      const auto r = sightline::run_report(config, std::cerr);
      std::cout << "view: " << r["levels"]["view"]["overall"].get<std::string>()
                << ", sunlight: " << r["levels"]["sunlight"].get<std::string>() << '\n';
    } else {
      const auto in = sightline::load_inputs(config, std::cerr);
      for (double h : config.grid_heights_m) sightline::vantage_grid(config.room_floor, config.grid_spacing_m, h);
      sightline::sunlight_vantage_point(in.layer_map.windows.at(config.sunlight_window_index));
      std::cout << "triangles: " << in.scene.triangles().size() << '\n'
                << "layers: " << in.scene.layers().size() << '\n'
                << "windows: " << in.layer_map.windows.size() << '\n'
                << "extent_m: " << sightline::format_number(in.scene.extent()) << '\n'
                << "far_cap_m: " << sightline::format_number(in.far_cap) << '\n'
                << "ok\n";
    }
  } catch (const sightline::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
