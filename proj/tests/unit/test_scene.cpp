#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tofforge/rng.hpp"
#include "tofforge/scene.hpp"

using namespace tofforge;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  auto rng = RngStream::derive(seed, StreamPurpose::test);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.push_back({rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5});
    c.weights.push_back(0.1 + rng.uniform());
  }
  return c;
}

Pose random_pose(RngStream& rng) {
  return Pose{rng.uniform() * 2.0 * std::numbers::pi, rng.uniform() * 2.0 * std::numbers::pi};
}

}  // namespace

TEST(MockDrone, SinglePartSingleSample) {
  MockDroneSpec spec;
  spec.arm_count = 0;
  spec.total_points = 1;
  const auto c = make_mock_drone(spec);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.weights, std::vector<double>{1.0});
}

TEST(MockDrone, DeterministicForSeed) {
  MockDroneSpec spec;
  EXPECT_EQ(make_mock_drone(spec), make_mock_drone(spec));
  auto other = spec;
  other.seed = 43;
  EXPECT_FALSE(make_mock_drone(spec) == make_mock_drone(other));
}

TEST(MockDrone, PointCountMatchesRequest) {
  for (std::size_t n : {9u, 10u, 57u, 2000u, 4321u}) {
    MockDroneSpec spec;
    spec.total_points = n;
    EXPECT_EQ(make_mock_drone(spec).size(), n);
  }
}

TEST(MockDrone, BoundingBoxMatchesDimensions) {
  MockDroneSpec spec;
  spec.arm_count = 0;
  spec.total_points = 20000;
  const auto c = make_mock_drone(spec);
  double lo[3] = {1e9, 1e9, 1e9}, hi[3] = {-1e9, -1e9, -1e9};
  for (const auto& p : c.points) {
    const double v[3] = {p.x, p.y, p.z};
    for (int i = 0; i < 3; ++i) lo[i] = std::min(lo[i], v[i]), hi[i] = std::max(hi[i], v[i]);
  }
  EXPECT_NEAR(hi[0] - lo[0], spec.body_width, 0.01);
  EXPECT_NEAR(hi[1] - lo[1], spec.body_length, 0.01);
  EXPECT_NEAR(hi[2] - lo[2], spec.body_height, 0.01);
  EXPECT_LE(hi[0] - lo[0], spec.body_width + 1e-12);

  // Full drone: arm tips and rotor rims set the planform extent.
  const auto full = make_mock_drone(MockDroneSpec{});
  double max_r = 0.0, max_z = -1e9;
  for (const auto& p : full.points) max_r = std::max(max_r, std::hypot(p.x, p.y)), max_z = std::max(max_z, p.z);
  const double reach = *std::max_element(spec.arm_lengths.begin(), spec.arm_lengths.end()) + spec.rotor_radius;
  EXPECT_LE(max_r, reach + 1e-12);
  EXPECT_GT(max_r, reach - 0.02);
  EXPECT_DOUBLE_EQ(max_z, std::max(spec.rotor_height, spec.body_height / 2.0));
}

TEST(MockDrone, InvalidSpecRejected) {
  MockDroneSpec spec;
  spec.body_width = 0.0;
  EXPECT_THROW(make_mock_drone(spec), ConfigError);
  spec = {};
  spec.total_points = 3;
  EXPECT_THROW(make_mock_drone(spec), ConfigError);
  spec = {};
  spec.arm_lengths[2] = -0.1;
  EXPECT_THROW(make_mock_drone(spec), ConfigError);
}

TEST(DepthGrid, AllBackgroundIsEmpty) {
  EXPECT_THROW(load_depth_grid("-1 -1\n-1 -1\n"), EmptyTargetError);
}

TEST(DepthGrid, SingleCell) {
  const auto c = load_depth_grid("pitch 0.01\n5.0\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points[0].x, 0.0);
  EXPECT_EQ(c.points[0].y, 0.0);
  EXPECT_EQ(c.points[0].z, 5.0);
  EXPECT_EQ(c.weights[0], 1.0);
}

TEST(DepthGrid, CenterCellOfThreeByThree) {
  const auto c = load_depth_grid("# comment\n-1 -1 -1\n-1 2.0 -1\n-1 -1 -1\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points[0].x, 0.0);
  EXPECT_EQ(c.points[0].y, 0.0);
  EXPECT_EQ(c.points[0].z, 2.0);
}

TEST(DepthGrid, PitchAndOrientation) {
  const auto c = load_depth_grid("pitch 0.5\n1 -1\n-1 3\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_DOUBLE_EQ(c.points[0].x, -0.25);
  EXPECT_DOUBLE_EQ(c.points[0].y, 0.25);
  EXPECT_DOUBLE_EQ(c.points[1].x, 0.25);
  EXPECT_DOUBLE_EQ(c.points[1].y, -0.25);
}

TEST(DepthGrid, RaggedRowReportsLocation) {
  try {
    load_depth_grid("1 2 3\n4 5\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), 3u);
  }
}

TEST(DepthGrid, NonNumericReportsLocation) {
  try {
    load_depth_grid("# header\n1 2 3\n4 x 6\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), 2u);
  }
}

TEST(Rotate, IdentityPose) {
  const auto c = random_cloud(50, 1);
  EXPECT_EQ(rotate(c, Pose{}), c);
}

TEST(Rotate, QuarterTurnAboutX) {
  PointCloud c{{{0.0, 1.0, 0.0}}, {1.0}};
  const auto r = rotate(c, Pose{std::numbers::pi / 2.0, 0.0});
  EXPECT_NEAR(r.points[0].x, 0.0, 1e-12);
  EXPECT_NEAR(r.points[0].y, 0.0, 1e-12);
  EXPECT_NEAR(r.points[0].z, 1.0, 1e-12);
}

TEST(Rotate, IsometryProperty) {
  auto rng = RngStream::derive(7, StreamPurpose::test);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_cloud(40, 100 + trial);
    const auto r = rotate(c, random_pose(rng));
    EXPECT_EQ(r.weights, c.weights);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        const double d0 = distance(c.points[i], c.points[j]), d1 = distance(r.points[i], r.points[j]);
        ASSERT_LE(std::abs(d0 - d1), 1e-9 * d0);
      }
  }
}

TEST(Rotate, InverseSequenceRestoresCloud) {
  auto rng = RngStream::derive(8, StreamPurpose::test);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_cloud(30, 200 + trial);
    const auto p = random_pose(rng);
    const auto r = rotate(c, p);
    // Undo Rz first, then Rx.
    const auto z_back = rotate(r, Pose{0.0, p.theta_z == 0.0 ? 0.0 : two_pi - p.theta_z});
    const auto back = rotate(z_back, Pose{p.theta_x == 0.0 ? 0.0 : two_pi - p.theta_x, 0.0});
    for (std::size_t i = 0; i < c.size(); ++i) {
      ASSERT_NEAR(back.points[i].x, c.points[i].x, 1e-9);
      ASSERT_NEAR(back.points[i].y, c.points[i].y, 1e-9);
      ASSERT_NEAR(back.points[i].z, c.points[i].z, 1e-9);
    }
  }
}

TEST(Pose, DegreesWrapIntoRange) {
  const auto p = Pose::from_degrees(-30.0, 360.0);
  EXPECT_NEAR(p.theta_x_deg(), 330.0, 1e-9);
  EXPECT_EQ(p.theta_z, 0.0);
  EXPECT_NO_THROW(p.validate());
  EXPECT_THROW((Pose{-0.1, 0.0}.validate()), ConfigError);
  EXPECT_THROW((Pose{0.0, 2.0 * std::numbers::pi}.validate()), ConfigError);
}

TEST(Project, SinglePointAtRange) {
  PointCloud c{{{0.3, 0.0, -0.2}}, {2.5}};
  const auto s = project_to_surfaces(c, 5000.0);
  ASSERT_EQ(s.entries.size(), 1u);
  EXPECT_EQ(s.entries[0].distance, 5000.0);
  EXPECT_EQ(s.entries[0].coefficient, 2.5);
  EXPECT_EQ(s.reference_distance, 5000.0);
}

TEST(Project, OffsetGivesRoundTripDelay) {
  PointCloud c{{{0, 0, 0}, {0, 1.5, 0}}, {1, 1}};
  const auto s = project_to_surfaces(c, 100.0);
  const double dt = round_trip_delay(s.entries[1].distance) - round_trip_delay(s.entries[0].distance);
  EXPECT_NEAR(dt, 2.0 * 1.5 / kSpeedOfLight, 1e-8 * 1e-9);
  EXPECT_NEAR(2.0 * 1.5 / kSpeedOfLight, 1e-8, 1e-11);
}

TEST(Project, RotationAboutViewAxisKeepsDistances) {
  // Rotation only turns about z, so view along z.
  auto rng = RngStream::derive(9, StreamPurpose::test);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_cloud(60, 300 + trial);
    const auto r = rotate(c, Pose{0.0, rng.uniform() * 2.0 * std::numbers::pi});
    auto a = project_to_surfaces(c, 1000.0, ViewAxis::z).entries;
    auto b = project_to_surfaces(r, 1000.0, ViewAxis::z).entries;
    auto by_d = [](const Surface& x, const Surface& y) { return x.distance < y.distance; };
    std::sort(a.begin(), a.end(), by_d);
    std::sort(b.begin(), b.end(), by_d);
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i].distance, b[i].distance, 1e-9);
  }
}

TEST(Project, NonPositiveRangeRejected) {
  PointCloud c{{{0, 0, 0}}, {1}};
  EXPECT_THROW(project_to_surfaces(c, 0.0), DomainError);
}

TEST(Discretize, DelayAtBinStart) {
  const double bw = 10e-12;
  SurfaceSet s{{{kSpeedOfLight * 7.0 * bw / 2.0, 3.0}}, 0.0};
  const auto h = discretize_response(s, 16, bw, 0.0);
  for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(h.bins[k], k == 7 ? 3.0 : 0.0) << k;
}

TEST(Discretize, TenNanosecondsIsThousandBins) {
  SurfaceSet s{{{0.0, 1.0}, {kSpeedOfLight * 10e-9 / 2.0, 1.0}}, 0.0};
  const auto h = discretize_response(s, 1024, 10e-12, 0.0);
  EXPECT_EQ(h.bins[0], 1.0);
  EXPECT_EQ(h.bins[1000], 1.0);
  EXPECT_EQ(h.total(), 2.0);
}

TEST(Discretize, ConservesMass) {
  auto rng = RngStream::derive(10, StreamPurpose::test);
  for (int trial = 0; trial < 50; ++trial) {
    SurfaceSet s;
    s.reference_distance = 5000.0;
    for (int i = 0; i < 200; ++i) s.entries.push_back({5000.0 + rng.uniform(), rng.uniform() * 3.0});
    s.entries.push_back({5000.0, 1.0});
    const double start = anchored_window_start(s, 10, 10e-12);
    const auto h = discretize_response(s, 1024, 10e-12, start);
    EXPECT_NEAR(h.total(), s.total_coefficient(), 1e-9 * s.total_coefficient());
    EXPECT_GT(h.bins[10], 0.0);
    for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(h.bins[k], 0.0);
  }
}

TEST(Discretize, OutOfWindowListsDistances) {
  SurfaceSet s{{{0.0, 1.0}, {10.0, 1.0}, {20.0, 1.0}}, 0.0};
  try {
    discretize_response(s, 100, 10e-12, 0.0);
    FAIL() << "expected OutOfWindowError";
  } catch (const OutOfWindowError& e) {
    EXPECT_EQ(e.distances(), (std::vector<double>{10.0, 20.0}));
  }
}

TEST(Discretize, RejectsDegenerateInput) {
  SurfaceSet zero{{{1.0, 0.0}}, 0.0};
  EXPECT_THROW(discretize_response(zero, 10, 1e-12, 0.0), EmptyTargetError);
  SurfaceSet one{{{0.0, 1.0}}, 0.0};
  EXPECT_THROW(discretize_response(one, 0, 1e-12, 0.0), ConfigError);
  EXPECT_THROW(discretize_response(one, 10, 0.0, 0.0), ConfigError);
}
