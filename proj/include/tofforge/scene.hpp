// scene.hpp -- target geometry, poses and the discrete target impulse response
//
// A target is a weighted point cloud. Posing rotates it, projecting onto the
// viewing axis turns each point into a reflecting surface at range d_i with
// coefficient a_i, and discretizing deposits every a_i into the histogram bin
// that contains its round-trip delay 2 d_i / c. Hidden surfaces are not
// removed: every point contributes to the response.
#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tofforge/errors.hpp"
#include "tofforge/rng.hpp"

namespace tofforge {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

/// Reflecting points of a target, coordinates in meters.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<double> weights;  // per-point reflectivity, > 0

  std::size_t size() const noexcept { return points.size(); }

  void validate() const {
    if (points.empty()) throw EmptyTargetError("point cloud is empty");
    if (points.size() != weights.size())
      throw ConfigError("point cloud: points and weights differ in length");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
        throw ConfigError("point cloud: non-finite coordinate at index " + std::to_string(i));
      if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
        throw ConfigError("point cloud: weight must be > 0 at index " + std::to_string(i));
    }
  }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// Target attitude: rotation about x, then about z. Angles in [0, 2pi).
struct Pose {
  double theta_x = 0.0;
  double theta_z = 0.0;

  /// Builds a pose from degrees, wrapping into [0, 360).
  static Pose from_degrees(double x_deg, double z_deg) {
    return Pose{wrap(x_deg * std::numbers::pi / 180.0), wrap(z_deg * std::numbers::pi / 180.0)};
  }

  double theta_x_deg() const { return theta_x * 180.0 / std::numbers::pi; }
  double theta_z_deg() const { return theta_z * 180.0 / std::numbers::pi; }

  void validate() const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (!(theta_x >= 0.0 && theta_x < two_pi) || !(theta_z >= 0.0 && theta_z < two_pi))
      throw ConfigError("pose angles must lie in [0, 2pi)");
  }

  friend bool operator==(const Pose&, const Pose&) = default;

 private:
  static double wrap(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a < 0.0) a += two_pi;
    if (a >= two_pi) a = 0.0;
    return a;
  }
};

struct Surface {
  double distance = 0.0;     // d_i, meters
  double coefficient = 0.0;  // a_i
};

struct SurfaceSet {
  std::vector<Surface> entries;
  double reference_distance = 0.0;  // system-to-centroid range, meters

  double total_coefficient() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.coefficient;
    return s;
  }

  void validate() const {
    bool any_positive = false;
    for (const auto& e : entries) {
      if (!(e.distance >= 0.0) || !std::isfinite(e.distance))
        throw ConfigError("surface distance must be finite and >= 0");
      if (!(e.coefficient >= 0.0)) throw ConfigError("surface coefficient must be >= 0");
      any_positive = any_positive || e.coefficient > 0.0;
    }
    if (!any_positive) throw EmptyTargetError("surface set has no reflecting entry");
    if (!std::isfinite(total_coefficient())) throw ConfigError("surface coefficients overflow");
  }
};

/// Target response sampled on the histogram grid.
struct ImpulseResponse {
  std::vector<double> bins;
  double bin_width = 0.0;    // seconds
  double origin_time = 0.0;  // time of bin 0 relative to pulse emission, seconds

  double total() const { return std::accumulate(bins.begin(), bins.end(), 0.0); }
};

// ---------------------------------------------------------------------------
// Mock drone
// ---------------------------------------------------------------------------

/// Procedural quadcopter: body box, up to four arm cylinders radiating from
/// the body center in the x-y plane, and a rotor disc above each arm tip.
/// Arm angles and lengths default to an irregular layout so that no two of
/// the standard poses produce mirrored depth profiles.
struct MockDroneSpec {
  double body_width = 0.20;   // along x
  double body_length = 0.30;  // along y
  double body_height = 0.09;  // along z
  std::array<double, 4> arm_angles_deg{35.0, 150.0, 220.0, 320.0};
  std::array<double, 4> arm_lengths{0.34, 0.28, 0.25, 0.21};
  double arm_radius = 0.012;
  double rotor_radius = 0.11;
  double rotor_height = 0.04;  // disc plane above the arm axis
  int arm_count = 4;           // 0..4
  bool rotors = true;
  std::size_t total_points = 2000;
  std::uint64_t seed = 42;

  std::size_t part_count() const {
    return 1 + static_cast<std::size_t>(arm_count) * (rotors ? 2 : 1);
  }

  void validate() const {
    if (!(body_width > 0 && body_length > 0 && body_height > 0))
      throw ConfigError("mock drone: body dimensions must be > 0");
    if (arm_count < 0 || arm_count > 4) throw ConfigError("mock drone: arm_count must be in [0, 4]");
    for (int i = 0; i < arm_count; ++i)
      if (!(arm_lengths[i] > 0)) throw ConfigError("mock drone: arm lengths must be > 0");
    if (arm_count > 0 && !(arm_radius > 0)) throw ConfigError("mock drone: arm_radius must be > 0");
    if (arm_count > 0 && rotors && !(rotor_radius > 0))
      throw ConfigError("mock drone: rotor_radius must be > 0");
    if (total_points < part_count())
      throw ConfigError("mock drone: need at least one sample per part (" +
                        std::to_string(part_count()) + " parts)");
  }
};

namespace detail {

struct Part {
  enum class Kind { box, arm, rotor } kind;
  double area;
  Vec3 origin;     // box: center; arm: root; rotor: disc center
  Vec3 direction;  // arm: unit axis
  double length;   // arm length
  double radius;   // arm/rotor radius
};

/// Splits `total` into per-part counts proportional to `areas`, at least one
/// each, using largest remainders. Deterministic.
inline std::vector<std::size_t> allocate_samples(std::span<const double> areas, std::size_t total) {
  const std::size_t n = areas.size();
  std::vector<std::size_t> counts(n, 1);
  const std::size_t spare = total - n;
  const double area_sum = std::accumulate(areas.begin(), areas.end(), 0.0);
  std::vector<double> remainder(n);
  std::size_t given = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = static_cast<double>(spare) * areas[i] / area_sum;
    const auto whole = static_cast<std::size_t>(std::floor(share));
    counts[i] += whole;
    given += whole;
    remainder[i] = share - static_cast<double>(whole);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; given < spare; ++i, ++given) ++counts[order[i % n]];
  return counts;
}

}  // namespace detail

inline PointCloud make_mock_drone(const MockDroneSpec& spec) {
  spec.validate();
  using detail::Part;
  const double w = spec.body_width, l = spec.body_length, h = spec.body_height;

  std::vector<Part> parts;
  parts.push_back({Part::Kind::box, 2.0 * (w * l + w * h + l * h), {}, {}, 0.0, 0.0});
  for (int i = 0; i < spec.arm_count; ++i) {
    const double phi = spec.arm_angles_deg[i] * std::numbers::pi / 180.0;
    const Vec3 u{std::cos(phi), std::sin(phi), 0.0};
    parts.push_back({Part::Kind::arm, 2.0 * std::numbers::pi * spec.arm_radius * spec.arm_lengths[i],
                     {}, u, spec.arm_lengths[i], spec.arm_radius});
  }
  if (spec.rotors) {
    for (int i = 0; i < spec.arm_count; ++i) {
      const Part& arm = parts[1 + i];
      const Vec3 c{arm.direction.x * arm.length, arm.direction.y * arm.length, spec.rotor_height};
      parts.push_back({Part::Kind::rotor, std::numbers::pi * spec.rotor_radius * spec.rotor_radius,
                       c, {}, 0.0, spec.rotor_radius});
    }
  }

  std::vector<double> areas;
  for (const auto& p : parts) areas.push_back(p.area);
  const auto counts = detail::allocate_samples(areas, spec.total_points);

  PointCloud cloud;
  cloud.points.reserve(spec.total_points);
  auto rng = RngStream::derive(spec.seed, StreamPurpose::scene);

  // Box faces: +-x (l*h), +-y (w*h), +-z (w*l).
  const std::array<double, 3> face_area{l * h, w * h, w * l};
  const double half_faces = face_area[0] + face_area[1] + face_area[2];

  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const Part& part = parts[pi];
    for (std::size_t s = 0; s < counts[pi]; ++s) {
      Vec3 p;
      switch (part.kind) {
        case Part::Kind::box: {
          const double pick = rng.uniform() * half_faces;
          const double side = rng.uniform() < 0.5 ? -0.5 : 0.5;
          const double a = rng.uniform() - 0.5, b = rng.uniform() - 0.5;
          if (pick < face_area[0]) p = {side * w, a * l, b * h};
          else if (pick < face_area[0] + face_area[1]) p = {a * w, side * l, b * h};
          else p = {a * w, b * l, side * h};
          break;
        }
        case Part::Kind::arm: {
          const double t = rng.uniform() * part.length;
          const double psi = rng.uniform() * 2.0 * std::numbers::pi;
          const Vec3 v{-part.direction.y, part.direction.x, 0.0};
          const double cv = part.radius * std::cos(psi), cz = part.radius * std::sin(psi);
          p = {t * part.direction.x + cv * v.x, t * part.direction.y + cv * v.y, cz};
          break;
        }
        case Part::Kind::rotor: {
          const double r = part.radius * std::sqrt(rng.uniform());
          const double psi = rng.uniform() * 2.0 * std::numbers::pi;
          p = {part.origin.x + r * std::cos(psi), part.origin.y + r * std::sin(psi), part.origin.z};
          break;
        }
      }
      cloud.points.push_back(p);
    }
  }
  cloud.weights.assign(cloud.points.size(), 1.0);
  return cloud;
}

// ---------------------------------------------------------------------------
// Depth grids
// ---------------------------------------------------------------------------

inline constexpr double kDepthGridBackground = -1.0;
inline constexpr double kDefaultPixelPitch = 0.01;  // meters

/// Parses a depth map: whitespace-separated reals, one row per line, '#'
/// comments, -1 marks background, optional `pitch <meters>` header line.
/// Cells map to x (column) and y (row, upward) centered on the grid middle;
/// depth maps to z. Every foreground cell becomes a unit-weight point.
inline PointCloud load_depth_grid(std::string_view text) {
  double pitch = kDefaultPixelPitch;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  bool seen_data = false;

  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    if (line[first] == '#') continue;

    if (!seen_data && line.substr(first).starts_with("pitch")) {
      auto rest = line.substr(first + 5);
      const auto b = rest.find_first_not_of(" \t");
      if (b == std::string_view::npos) throw ParseError(line_no, first + 6, "pitch value missing");
      rest = rest.substr(b);
      const auto e = rest.find_last_not_of(" \t");
      rest = rest.substr(0, e + 1);
      const auto r = std::from_chars(rest.data(), rest.data() + rest.size(), pitch);
      if (r.ec != std::errc{} || r.ptr != rest.data() + rest.size() || !(pitch > 0.0))
        throw ParseError(line_no, first + 6 + b, "invalid pitch");
      continue;
    }

    seen_data = true;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      pos = line.find_first_not_of(" \t", pos);
      if (pos == std::string_view::npos) break;
      auto end = line.find_first_of(" \t", pos);
      if (end == std::string_view::npos) end = line.size();
      const auto token = line.substr(pos, end - pos);
      double v = 0.0;
      const auto r = std::from_chars(token.data(), token.data() + token.size(), v);
      if (r.ec != std::errc{} || r.ptr != token.data() + token.size() || !std::isfinite(v))
        throw ParseError(line_no, row.size() + 1,
                         "not a finite number: '" + std::string(token) + "'");
      row.push_back(v);
      pos = end;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(line_no, std::min(row.size(), rows.front().size()) + 1,
                       "ragged row: expected " + std::to_string(rows.front().size()) +
                           " values, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }

  PointCloud cloud;
  const double cy = (static_cast<double>(rows.size()) - 1.0) / 2.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double cx = (static_cast<double>(rows[r].size()) - 1.0) / 2.0;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (rows[r][c] == kDepthGridBackground) continue;
      cloud.points.push_back({(static_cast<double>(c) - cx) * pitch,
                              (cy - static_cast<double>(r)) * pitch, rows[r][c]});
    }
  }
  if (cloud.points.empty()) throw EmptyTargetError("depth grid contains no foreground cell");
  cloud.weights.assign(cloud.points.size(), 1.0);
  return cloud;
}

// ---------------------------------------------------------------------------
// Pose and projection
// ---------------------------------------------------------------------------

/// Applies Rz(theta_z) * Rx(theta_x) to every point.
inline PointCloud rotate(const PointCloud& cloud, const Pose& pose) {
  pose.validate();
  const double cx = std::cos(pose.theta_x), sx = std::sin(pose.theta_x);
  const double cz = std::cos(pose.theta_z), sz = std::sin(pose.theta_z);
  PointCloud out;
  out.weights = cloud.weights;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    const Vec3 q{p.x, cx * p.y - sx * p.z, sx * p.y + cx * p.z};
    out.points.push_back({cz * q.x - sz * q.y, sz * q.x + cz * q.y, q.z});
  }
  return out;
}

enum class ViewAxis { x, y, z };

inline double axial(const Vec3& p, ViewAxis axis) {
  switch (axis) {
    case ViewAxis::x: return p.x;
    case ViewAxis::y: return p.y;
    case ViewAxis::z: return p.z;
  }
  return p.y;
}

/// One surface per point at d_i = range + axial coordinate, a_i = weight.
inline SurfaceSet project_to_surfaces(const PointCloud& cloud, double range_m,
                                      ViewAxis axis = ViewAxis::y) {
  if (!(range_m > 0.0)) throw DomainError("range must be > 0");
  SurfaceSet set;
  set.reference_distance = range_m;
  set.entries.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    set.entries.push_back({range_m + axial(cloud.points[i], axis), cloud.weights[i]});
  return set;
}

inline double round_trip_delay(double distance_m) { return 2.0 * distance_m / kSpeedOfLight; }

/// Window start that puts the earliest return at the start of `anchor_bin`.
inline double anchored_window_start(const SurfaceSet& surfaces, std::size_t anchor_bin,
                                    double bin_width) {
  double first = std::numeric_limits<double>::infinity();
  for (const auto& e : surfaces.entries)
    if (e.coefficient > 0.0) first = std::min(first, round_trip_delay(e.distance));
  return first - static_cast<double>(anchor_bin) * bin_width;
}

/// Deposits each a_i into bin floor((2 d_i / c - window_start) / bin_width).
/// Positions within 1e-9 bin of a bin edge snap onto that edge.
inline ImpulseResponse discretize_response(const SurfaceSet& surfaces, std::size_t num_bins,
                                           double bin_width, double window_start) {
  if (num_bins == 0) throw ConfigError("number of bins must be > 0");
  if (!(bin_width > 0.0)) throw ConfigError("bin width must be > 0");
  surfaces.validate();

  ImpulseResponse out{std::vector<double>(num_bins, 0.0), bin_width, window_start};
  std::vector<double> outside;
  for (const auto& e : surfaces.entries) {
    const double x = (round_trip_delay(e.distance) - window_start) / bin_width;
    double idx = std::floor(x);
    if (x - idx > 1.0 - 1e-9) idx += 1.0;
    if (idx < 0.0 || idx >= static_cast<double>(num_bins)) {
      outside.push_back(e.distance);
      continue;
    }
    out.bins[static_cast<std::size_t>(idx)] += e.coefficient;
  }
  if (!outside.empty()) throw OutOfWindowError(std::move(outside));
  return out;
}

}  // namespace tofforge
