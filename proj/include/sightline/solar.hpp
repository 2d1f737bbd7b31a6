#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "sightline/error.hpp"
#include "sightline/parallel.hpp"
#include "sightline/scene.hpp"

namespace sightline {

using Date = std::chrono::year_month_day;

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

inline std::string format_minutes(int minutes) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

/// Parses YYYY-MM-DD; throws InputError on malformed or impossible dates.
inline Date parse_date(const std::string& s) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) throw InputError("invalid date '" + s + "'");
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) throw InputError("invalid date '" + s + "'");
  return date;
}

struct GeoLocation {
  double latitude{0.0};    // degrees, north positive
  double longitude{0.0};   // degrees, east positive
  double utc_offset{0.0};  // hours of local standard time ahead of UTC
};

inline void validate(const GeoLocation& loc) {
  if (!(loc.latitude >= -90.0 && loc.latitude <= 90.0)) throw InputError("latitude must be within [-90, 90]");
  if (!(loc.longitude >= -180.0 && loc.longitude <= 180.0)) throw InputError("longitude must be within [-180, 180]");
  if (!(loc.utc_offset >= -14.0 && loc.utc_offset <= 14.0)) throw InputError("utc offset must be within [-14, 14] h");
}

struct SolarAngles {
  double azimuth_deg{0.0};    // clockwise from north, [0, 360)
  double elevation_deg{0.0};  // geometric, no refraction
  double declination_deg{0.0};
};

/// Sun position from the low-precision solar coordinates (mean longitude and
/// anomaly, equation of centre, apparent longitude, obliquity) for declination
/// and the equation of time, with the hour angle taken from true solar time.
/// `local_minutes` is local standard time (minutes after midnight of `date`).
inline SolarAngles sun_position(const GeoLocation& loc, const Date& date, double local_minutes) {
  if (!date.ok()) throw InputError("invalid date");
  validate(loc);
  using namespace std::chrono;
  const sys_days day{date};
  const sys_days j2000{year_month_day{year{2000}, January, 1d}};
  const double utc_hours = local_minutes / 60.0 - loc.utc_offset;
  // Julian centuries since J2000.0 (2000-01-01 12:00 UTC).
  const double t = (static_cast<double>((day - j2000).count()) - 0.5 + utc_hours / 24.0) / 36525.0;

  const double l0 = deg_to_rad(std::fmod(280.46646 + t * (36000.76983 + t * 0.0003032), 360.0));
  const double m = deg_to_rad(357.52911 + t * (35999.05029 - 0.0001537 * t));
  const double e = 0.016708634 - t * (0.000042037 + 0.0000001267 * t);
  const double centre = std::sin(m) * (1.914602 - t * (0.004817 + 0.000014 * t)) +
                        std::sin(2 * m) * (0.019993 - 0.000101 * t) + std::sin(3 * m) * 0.000289;
  const double omega = deg_to_rad(125.04 - 1934.136 * t);
  const double apparent_long = deg_to_rad(rad_to_deg(l0) + centre - 0.00569 - 0.00478 * std::sin(omega));
  const double mean_obliquity = 23.0 + (26.0 + (21.448 - t * (46.815 + t * (0.00059 - t * 0.001813))) / 60.0) / 60.0;
  const double obliquity = deg_to_rad(mean_obliquity + 0.00256 * std::cos(omega));
  const double decl = std::asin(std::sin(obliquity) * std::sin(apparent_long));

  const double y = std::pow(std::tan(obliquity / 2.0), 2);
  const double eqtime = 4.0 * rad_to_deg(y * std::sin(2 * l0) - 2 * e * std::sin(m) +
                                         4 * e * y * std::sin(m) * std::cos(2 * l0) -
                                         0.5 * y * y * std::sin(4 * l0) - 1.25 * e * e * std::sin(2 * m));

  const double true_solar_minutes = local_minutes + eqtime + 4.0 * loc.longitude - 60.0 * loc.utc_offset;
  const double hour_angle = deg_to_rad(true_solar_minutes / 4.0 - 180.0);
  const double lat = deg_to_rad(loc.latitude);

  const double cos_zenith =
      std::clamp(std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(hour_angle), -1.0, 1.0);
  const double elevation = 90.0 - rad_to_deg(std::acos(cos_zenith));

  // Measured from south towards west, then shifted to north-clockwise.
  const double from_south = std::atan2(std::sin(hour_angle) * std::cos(decl),
                                       std::cos(hour_angle) * std::sin(lat) * std::cos(decl) - std::sin(decl) * std::cos(lat));
  double azimuth = std::fmod(rad_to_deg(from_south) + 180.0, 360.0);
  if (azimuth < 0.0) azimuth += 360.0;
  if (azimuth >= 360.0) azimuth -= 360.0;
  return {azimuth, elevation, rad_to_deg(decl)};
}

/// Unit vector towards the sun in scene coordinates, where scene +Y points to
/// compass azimuth `north_azimuth_in_scene` and +Z is up.
inline Vec3 sun_direction(double azimuth_deg, double elevation_deg, double north_azimuth_in_scene) {
  const double a = deg_to_rad(azimuth_deg - north_azimuth_in_scene);
  const double e = deg_to_rad(elevation_deg);
  return {std::sin(a) * std::cos(e), std::cos(a) * std::cos(e), std::sin(e)};
}

struct SunSample {
  Date date;
  int minute_of_day{0};  // local standard time
  double azimuth_deg{0.0};
  double elevation_deg{0.0};
  Vec3 direction;

  bool above_horizon() const { return elevation_deg > 0.0; }
  std::string timestamp() const { return format_date(date) + "T" + format_minutes(minute_of_day); }
};

struct DateRange {
  Date start;
  Date end;  // inclusive
};

/// Default assessment window: February 1st to March 21st.
inline DateRange default_period(int year) {
  using namespace std::chrono;
  return {year_month_day{std::chrono::year{year}, February, 1d}, year_month_day{std::chrono::year{year}, March, 21d}};
}

inline constexpr int kDefaultTimestepMinutes = 5;

struct SunTimeline {
  std::vector<SunSample> samples;
  int timestep_minutes{kDefaultTimestepMinutes};
  DateRange period;
};

inline void validate_timestep(int minutes) {
  if (minutes < 1 || minutes > 60 || 60 % minutes != 0) {
    throw InputError("invalid timestep " + std::to_string(minutes) + " min: must divide 60");
  }
}

/// One sample per timestep per day, at local standard times 00:00, 00:00 + step, ...
inline SunTimeline build_timeline(const GeoLocation& loc, const DateRange& period, int timestep_minutes,
                                  double north_azimuth_in_scene) {
  validate_timestep(timestep_minutes);
  validate(loc);
  if (!period.start.ok() || !period.end.ok()) throw InputError("invalid date in period");
  using std::chrono::sys_days;
  if (sys_days{period.start} > sys_days{period.end}) throw InputError("period start is after period end");

  SunTimeline tl;
  tl.timestep_minutes = timestep_minutes;
  tl.period = period;
  const int per_day = 1440 / timestep_minutes;
  for (sys_days d{period.start}; d <= sys_days{period.end}; d += std::chrono::days{1}) {
    const Date date{d};
    for (int k = 0; k < per_day; ++k) {
      const int minute = k * timestep_minutes;
      const auto sp = sun_position(loc, date, minute);
      tl.samples.push_back(
          {date, minute, sp.azimuth_deg, sp.elevation_deg, sun_direction(sp.azimuth_deg, sp.elevation_deg, north_azimuth_in_scene)});
    }
  }
  return tl;
}

struct SunlightVantage {
  Vec3 point;
  bool clamped{false};  // target height was above the window top
};

/// Point on the window plane at the horizontal centre of the opening, at
/// floor + max(1.2 m, sill + 0.3 m), clamped to the window top. The sill
/// height is measured from the floor.
inline SunlightVantage sunlight_vantage_point(const WindowAperture& w) {
  validate(w);
  const double target = w.floor_height_m + std::max(1.2, w.sill_height_m + 0.3);
  const double top = w.top_z();
  if (top < w.floor_height_m + 1.2) throw InputError("window too low for assessment point");

  const auto poly = w.planar_boundary();
  double umin = HUGE_VAL, umax = -HUGE_VAL;
  for (const auto& [u, v] : poly) {
    umin = std::min(umin, u);
    umax = std::max(umax, u);
  }
  const Vec3 u_axis = w.width_axis();
  const Vec3 v_axis = w.height_axis();
  const Vec3 base = w.centroid() + 0.5 * (umin + umax) * u_axis;
  if (v_axis.z < 1e-9) return {base, false};  // horizontal opening: no height to choose

  SunlightVantage out;
  double z = target;
  if (z > top) {
    z = top;
    out.clamped = true;
  }
  out.point = base + ((z - base.z) / v_axis.z) * v_axis;
  return out;
}

struct DailyExposure {
  Date date;
  double sunlit_hours{0.0};
  std::vector<std::pair<int, int>> sunlit_intervals;  // local minutes [start, end)
};

/// Per-sample sunlit flags: sun above the horizon, in front of the window and
/// with a clear line of sight (window surfaces ignored) out to far_cap.
inline std::vector<bool> sunlit_flags(const Vec3& point, const SemanticScene& scene, const SunTimeline& timeline,
                                      const Vec3& window_normal, double far_cap, unsigned threads = 1) {
  const LayerSet skip = scene.layers_tagged(LayerTag::Window);
  std::vector<char> lit(timeline.samples.size(), 0);
  parallel_for(timeline.samples.size(), threads, [&](std::size_t i) {
    const SunSample& s = timeline.samples[i];
    if (!s.above_horizon() || dot(s.direction, window_normal) <= 0.0) return;
    lit[i] = !scene.trace_first({point, s.direction, far_cap}, skip).has_value();
  });
  return {lit.begin(), lit.end()};
}

inline std::vector<DailyExposure> aggregate_daily(const SunTimeline& timeline, const std::vector<bool>& lit) {
  std::vector<DailyExposure> days;
  const int step = timeline.timestep_minutes;
  for (std::size_t i = 0; i < timeline.samples.size(); ++i) {
    const SunSample& s = timeline.samples[i];
    if (days.empty() || days.back().date != s.date) days.push_back({s.date, 0.0, {}});
    if (!lit[i]) continue;
    DailyExposure& d = days.back();
    if (!d.sunlit_intervals.empty() && d.sunlit_intervals.back().second == s.minute_of_day) {
      d.sunlit_intervals.back().second += step;
    } else {
      d.sunlit_intervals.emplace_back(s.minute_of_day, s.minute_of_day + step);
    }
  }
  for (DailyExposure& d : days) {
    int minutes = 0;
    for (const auto& [a, b] : d.sunlit_intervals) minutes += b - a;
    d.sunlit_hours = minutes / 60.0;
  }
  return days;
}

inline std::vector<DailyExposure> daily_exposure(const Vec3& point, const SemanticScene& scene,
                                                 const SunTimeline& timeline, const Vec3& window_normal,
                                                 double far_cap, unsigned threads = 1) {
  return aggregate_daily(timeline, sunlit_flags(point, scene, timeline, window_normal, far_cap, threads));
}

struct ExposureSummary {
  double hours_for_compliance{0.0};
  Date governing_day;
  bool evaluation_day_given{false};
  std::vector<DailyExposure> table;

  std::string rule() const { return evaluation_day_given ? "evaluation_day" : "period_minimum"; }
};

/// Hours on the chosen evaluation day, or the period minimum when none is given.
inline ExposureSummary exposure_summary(std::vector<DailyExposure> daily, std::optional<Date> evaluation_day) {
  if (daily.empty()) throw InputError("no daily exposure values");
  ExposureSummary s;
  s.table = std::move(daily);
  if (evaluation_day) {
    const auto it = std::find_if(s.table.begin(), s.table.end(), [&](const DailyExposure& d) { return d.date == *evaluation_day; });
    if (it == s.table.end()) throw InputError("evaluation day " + format_date(*evaluation_day) + " is outside the period");
    s.hours_for_compliance = it->sunlit_hours;
    s.governing_day = it->date;
    s.evaluation_day_given = true;
    return s;
  }
  const auto it = std::min_element(s.table.begin(), s.table.end(),
                                   [](const DailyExposure& l, const DailyExposure& r) { return l.sunlit_hours < r.sunlit_hours; });
  s.hours_for_compliance = it->sunlit_hours;
  s.governing_day = it->date;
  return s;
}

}  // namespace sightline
