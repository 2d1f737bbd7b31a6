#include <gtest/gtest.h>

#include "sightline/compliance.hpp"

using namespace sightline;
using L = PerformanceLevel;

TEST(Classify, SightAngleBoundsAreInclusive) {
  EXPECT_EQ(classify_sight_angle(0), L::None);
  EXPECT_EQ(classify_sight_angle(13.999), L::None);
  EXPECT_EQ(classify_sight_angle(14), L::Minimum);
  EXPECT_EQ(classify_sight_angle(27.999), L::Minimum);
  EXPECT_EQ(classify_sight_angle(28), L::Medium);
  EXPECT_EQ(classify_sight_angle(53.999), L::Medium);
  EXPECT_EQ(classify_sight_angle(54), L::High);
  EXPECT_EQ(classify_sight_angle(360), L::High);
  EXPECT_THROW(classify_sight_angle(-1), InputError);
  EXPECT_THROW(classify_sight_angle(361), InputError);
  EXPECT_THROW(classify_sight_angle(std::nan("")), InputError);
}

TEST(Classify, DistanceBoundsAreInclusive) {
  EXPECT_EQ(classify_distance(5.999), L::None);
  EXPECT_EQ(classify_distance(6), L::Minimum);
  EXPECT_EQ(classify_distance(20), L::Medium);
  EXPECT_EQ(classify_distance(49.999), L::Medium);
  EXPECT_EQ(classify_distance(50), L::High);
  EXPECT_THROW(classify_distance(-0.1), InputError);
}

TEST(Classify, LayersAndSunlight) {
  EXPECT_EQ(classify_layers(0), L::None);
  EXPECT_EQ(classify_layers(1), L::Minimum);
  EXPECT_EQ(classify_layers(2), L::Medium);
  EXPECT_EQ(classify_layers(3), L::High);
  EXPECT_THROW(classify_layers(4), InputError);
  EXPECT_THROW(classify_layers(-1), InputError);
  EXPECT_EQ(classify_sunlight(1.49), L::None);
  EXPECT_EQ(classify_sunlight(1.5), L::Minimum);
  EXPECT_EQ(classify_sunlight(3), L::Medium);
  EXPECT_EQ(classify_sunlight(4), L::High);
  EXPECT_THROW(classify_sunlight(-1), InputError);
}

TEST(Classify, ReportedRoomValues) {
  EXPECT_EQ(classify_distance(16), L::Minimum);
  EXPECT_EQ(classify_distance(351), L::High);
  EXPECT_EQ(classify_sight_angle(158), L::High);
  EXPECT_EQ(classify_sight_angle(11), L::None);
}

TEST(Levels, OrderingAndNames) {
  EXPECT_EQ(min_level(L::High, L::Minimum), L::Minimum);
  EXPECT_EQ(min_level(L::None, L::High), L::None);
  EXPECT_EQ(to_string(L::Medium), "medium");
  EXPECT_EQ(parse_distance_rule("median"), DistanceRule::Median);
  EXPECT_FALSE(parse_distance_rule("mean"));
}

namespace {

ViewPointResult point(double beta, int layers) {
  ViewPointResult p;
  p.sight_angle_deg = beta;
  p.visible_layers = layers;
  return p;
}

}  // namespace

TEST(ViewReport, WorstPointAndLowestIndicator) {
  ViewAssessment v;
  v.grids = {{point(60, 3), point(30, 2)}, {point(90, 3)}};
  v.obstruction_stats = ObstructionStats{16, 40, 351, 3};
  auto r = assemble_view_report(v, DistanceRule::Min, 500);
  EXPECT_EQ(r.sight_angle_level, L::Medium);
  EXPECT_EQ(r.layers_level, L::Medium);
  EXPECT_EQ(r.distance_level, L::Minimum);
  EXPECT_EQ(r.overall_view_level, L::Minimum);
  EXPECT_EQ(r.governing_distance_m, 16);
  ASSERT_EQ(r.point_levels.size(), 2u);
  EXPECT_EQ(r.point_levels[0][0].overall, L::Minimum);

  r = assemble_view_report(v, DistanceRule::Median, 500);
  EXPECT_EQ(r.distance_level, L::Medium);
  EXPECT_EQ(r.overall_view_level, L::Medium);
}

TEST(ViewReport, UnobstructedViewUsesFarCap) {
  ViewAssessment v;
  v.grids = {{point(80, 3)}};
  const auto r = assemble_view_report(v, DistanceRule::Min, 300);
  EXPECT_FALSE(r.obstruction_stats);
  EXPECT_EQ(r.governing_distance_m, 300);
  EXPECT_EQ(r.overall_view_level, L::High);
}

TEST(ViewReport, MissingResults) {
  EXPECT_THROW(assemble_view_report(ViewAssessment{}, DistanceRule::Min, 100), InputError);
  ExposureSummary empty;
  EXPECT_THROW(assemble_sunlight_report(empty), InputError);
}

TEST(SunlightReport, CarriesRuleAndDay) {
  using namespace std::chrono;
  const auto s = exposure_summary({{2025y / February / 1d, 3.5, {}}, {2025y / February / 2d, 3.0, {}}}, std::nullopt);
  const auto r = assemble_sunlight_report(s);
  EXPECT_EQ(r.hours, 3.0);
  EXPECT_EQ(r.level, L::Medium);
  EXPECT_EQ(r.evaluation_day_rule, "period_minimum");
  EXPECT_EQ(r.governing_day, 2025y / February / 2d);
}
