#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sightline/error.hpp"
#include "sightline/solar.hpp"
#include "sightline/view_out.hpp"

namespace sightline {

enum class PerformanceLevel { None = 0, Minimum = 1, Medium = 2, High = 3 };

inline std::string_view to_string(PerformanceLevel l) {
  switch (l) {
    case PerformanceLevel::None: return "none";
    case PerformanceLevel::Minimum: return "minimum";
    case PerformanceLevel::Medium: return "medium";
    case PerformanceLevel::High: return "high";
  }
  return "?";
}

inline PerformanceLevel min_level(PerformanceLevel a, PerformanceLevel b) { return a < b ? a : b; }

namespace detail {

inline PerformanceLevel by_thresholds(double v, double minimum, double medium, double high) {
  if (v >= high) return PerformanceLevel::High;
  if (v >= medium) return PerformanceLevel::Medium;
  if (v >= minimum) return PerformanceLevel::Minimum;
  return PerformanceLevel::None;
}

}  // namespace detail

// Target values: horizontal sight angle 14/28/54 deg, distance to obstructions
// 6/20/50 m, view layers 1/2/3, sunlight 1.5/3/4 h. All bounds inclusive.

inline PerformanceLevel classify_sight_angle(double beta_deg) {
  if (!(beta_deg >= 0.0 && beta_deg <= 360.0)) throw InputError("sight angle must be within [0, 360] degrees");
  return detail::by_thresholds(beta_deg, 14.0, 28.0, 54.0);
}

inline PerformanceLevel classify_distance(double d_m) {
  if (!(d_m >= 0.0)) throw InputError("distance to obstructions must be >= 0");
  return detail::by_thresholds(d_m, 6.0, 20.0, 50.0);
}

inline PerformanceLevel classify_layers(int n) {
  if (n < 0 || n > 3) throw InputError("number of view layers must be within [0, 3]");
  return static_cast<PerformanceLevel>(n);
}

inline PerformanceLevel classify_sunlight(double hours) {
  if (!(hours >= 0.0)) throw InputError("sunlight hours must be >= 0");
  return detail::by_thresholds(hours, 1.5, 3.0, 4.0);
}

enum class DistanceRule { Min, Median };

inline std::string_view to_string(DistanceRule r) { return r == DistanceRule::Min ? "min" : "median"; }

inline std::optional<DistanceRule> parse_distance_rule(std::string_view s) {
  if (s == "min") return DistanceRule::Min;
  if (s == "median") return DistanceRule::Median;
  return std::nullopt;
}

struct PointLevels {
  PerformanceLevel sight_angle{PerformanceLevel::None};
  PerformanceLevel layers{PerformanceLevel::None};
  PerformanceLevel overall{PerformanceLevel::None};  // includes the room distance level
};

struct ViewReport {
  PerformanceLevel sight_angle_level{PerformanceLevel::None};
  PerformanceLevel distance_level{PerformanceLevel::None};
  PerformanceLevel layers_level{PerformanceLevel::None};
  PerformanceLevel overall_view_level{PerformanceLevel::None};

  double worst_sight_angle_deg{0.0};
  int worst_visible_layers{0};
  DistanceRule distance_rule{DistanceRule::Min};
  double governing_distance_m{0.0};
  std::optional<ObstructionStats> obstruction_stats;  // nullopt: unobstructed, distance = far cap
  std::vector<std::vector<PointLevels>> point_levels;
};

struct SunlightReport {
  double hours{0.0};
  PerformanceLevel level{PerformanceLevel::None};
  std::string evaluation_day_rule;
  Date governing_day;
};

struct ComplianceReport {
  ViewReport view;
  SunlightReport sunlight;
};

/// Room-level view indicators take the worst grid point; the distance
/// indicator uses the chosen statistic; the overall view level is the lowest
/// of the three.
inline ViewReport assemble_view_report(const ViewAssessment& view, DistanceRule rule, double far_cap) {
  if (view.grids.empty() || std::all_of(view.grids.begin(), view.grids.end(), [](const auto& g) { return g.empty(); })) {
    throw InputError("missing view results");
  }
  ViewReport r;
  r.distance_rule = rule;
  r.obstruction_stats = view.obstruction_stats;
  if (view.obstruction_stats) {
    r.governing_distance_m = rule == DistanceRule::Min ? view.obstruction_stats->min : view.obstruction_stats->median;
  } else {
    r.governing_distance_m = far_cap;
  }
  r.distance_level = classify_distance(r.governing_distance_m);

  r.worst_sight_angle_deg = 360.0;
  r.worst_visible_layers = 3;
  for (const auto& grid : view.grids) {
    auto& levels = r.point_levels.emplace_back();
    for (const ViewPointResult& p : grid) {
      r.worst_sight_angle_deg = std::min(r.worst_sight_angle_deg, p.sight_angle_deg);
      r.worst_visible_layers = std::min(r.worst_visible_layers, p.visible_layers);
      PointLevels pl;
      pl.sight_angle = classify_sight_angle(p.sight_angle_deg);
      pl.layers = classify_layers(p.visible_layers);
      pl.overall = min_level(min_level(pl.sight_angle, pl.layers), r.distance_level);
      levels.push_back(pl);
    }
  }
  r.sight_angle_level = classify_sight_angle(r.worst_sight_angle_deg);
  r.layers_level = classify_layers(r.worst_visible_layers);
  r.overall_view_level = min_level(min_level(r.sight_angle_level, r.distance_level), r.layers_level);
  return r;
}

inline SunlightReport assemble_sunlight_report(const ExposureSummary& exposure) {
  if (exposure.table.empty()) throw InputError("missing sunlight results");
  return {exposure.hours_for_compliance, classify_sunlight(exposure.hours_for_compliance), exposure.rule(),
          exposure.governing_day};
}

inline ComplianceReport assemble_report(const ViewAssessment& view, DistanceRule rule, double far_cap,
                                        const ExposureSummary& exposure) {
  return {assemble_view_report(view, rule, far_cap), assemble_sunlight_report(exposure)};
}

}  // namespace sightline
