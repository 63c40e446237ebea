// config.hpp -- JSON scenario configs and the bundled presets
//
// Schema (all keys optional unless noted, unknown keys are rejected):
//
//   kind        "comparison" | "distance" | "custom"
//   seed        master seed (unsigned 64-bit)
//   replicates  histograms per scenario
//   labeling    "pose" | "target"
//   poses       {"theta_x_deg": [..], "theta_z_deg": [..]}  (cartesian grid)
//               or [[x_deg, z_deg], ...]
//   targets     [{"name": s, "mock_drone": {...}} | {"name": s, "depth_grid": path,
//                 "view_axis": "x"|"y"|"z"}]
//   grid        {"distances_km": [..], "snr": [..], "noise_levels": [..], "n_pulses": [..]}
//   detector    {"efficiency", "dead_time_ns", "bin_width_ps", "num_bins", "anchor_bin"}
//   pulse       {"fwhm_pulse_ps", "fwhm_jitter_ps", "repetition_rate_mhz"}
//   signal      {"reference_photons", "reference_distance_km", "reference_n_pulses"}
#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "tofforge/errors.hpp"
#include "tofforge/scenario.hpp"

namespace tofforge {

using json = nlohmann::json;

namespace detail {

inline void require_keys(const json& j, std::string_view where,
                         std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <class T>
T get_as(const json& j, std::string_view where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + ": " + e.what());
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out, std::string_view where) {
  if (j.contains(key)) out = get_as<T>(j.at(key), std::string(where) + "." + key);
}

inline ViewAxis parse_axis(const std::string& s) {
  if (s == "x") return ViewAxis::x;
  if (s == "y") return ViewAxis::y;
  if (s == "z") return ViewAxis::z;
  throw ConfigError("view_axis must be x, y or z");
}

inline const char* axis_name(ViewAxis a) {
  switch (a) {
    case ViewAxis::x: return "x";
    case ViewAxis::y: return "y";
    case ViewAxis::z: return "z";
  }
  return "y";
}

inline MockDroneSpec parse_mock_drone(const json& j) {
  require_keys(j, "mock_drone",
               {"body_width", "body_length", "body_height", "arm_angles_deg", "arm_lengths",
                "arm_radius", "rotor_radius", "rotor_height", "arm_count", "rotors", "points",
                "seed"});
  MockDroneSpec m;
  read_opt(j, "body_width", m.body_width, "mock_drone");
  read_opt(j, "body_length", m.body_length, "mock_drone");
  read_opt(j, "body_height", m.body_height, "mock_drone");
  read_opt(j, "arm_angles_deg", m.arm_angles_deg, "mock_drone");
  read_opt(j, "arm_lengths", m.arm_lengths, "mock_drone");
  read_opt(j, "arm_radius", m.arm_radius, "mock_drone");
  read_opt(j, "rotor_radius", m.rotor_radius, "mock_drone");
  read_opt(j, "rotor_height", m.rotor_height, "mock_drone");
  read_opt(j, "arm_count", m.arm_count, "mock_drone");
  read_opt(j, "rotors", m.rotors, "mock_drone");
  read_opt(j, "points", m.total_points, "mock_drone");
  read_opt(j, "seed", m.seed, "mock_drone");
  m.validate();
  return m;
}

inline json mock_drone_to_json(const MockDroneSpec& m) {
  return {{"body_width", m.body_width},     {"body_length", m.body_length},
          {"body_height", m.body_height},   {"arm_angles_deg", m.arm_angles_deg},
          {"arm_lengths", m.arm_lengths},   {"arm_radius", m.arm_radius},
          {"rotor_radius", m.rotor_radius}, {"rotor_height", m.rotor_height},
          {"arm_count", m.arm_count},       {"rotors", m.rotors},
          {"points", m.total_points},       {"seed", m.seed}};
}

}  // namespace detail

inline const char* to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::comparison: return "comparison";
    case DatasetKind::distance: return "distance";
    case DatasetKind::custom: return "custom";
  }
  return "custom";
}

/// Builds a validated ScenarioSpec. Relative depth-grid paths resolve
/// against `base_dir`.
inline ScenarioSpec parse_scenario(const json& j, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  require_keys(j, "config", {"kind", "seed", "replicates", "labeling", "poses", "targets", "grid",
                             "detector", "pulse", "signal"});
  ScenarioSpec spec;
  spec.poses.clear();

  if (j.contains("kind")) {
    const auto k = get_as<std::string>(j["kind"], "kind");
    if (k == "comparison") spec.kind = DatasetKind::comparison;
    else if (k == "distance") spec.kind = DatasetKind::distance;
    else if (k == "custom") spec.kind = DatasetKind::custom;
    else throw ConfigError("kind must be comparison, distance or custom");
  }
  read_opt(j, "seed", spec.master_seed, "config");
  read_opt(j, "replicates", spec.replicates, "config");
  if (j.contains("labeling")) {
    const auto l = get_as<std::string>(j["labeling"], "labeling");
    if (l == "pose") spec.labeling = Labeling::pose;
    else if (l == "target") spec.labeling = Labeling::target;
    else throw ConfigError("labeling must be pose or target");
  }

  if (j.contains("poses")) {
    const auto& p = j["poses"];
    if (p.is_array()) {
      for (const auto& e : p) {
        const auto xz = get_as<std::vector<double>>(e, "poses[]");
        if (xz.size() != 2) throw ConfigError("poses[]: expected [theta_x_deg, theta_z_deg]");
        spec.poses.push_back(Pose::from_degrees(xz[0], xz[1]));
      }
    } else {
      require_keys(p, "poses", {"theta_x_deg", "theta_z_deg"});
      std::vector<double> xs{0.0}, zs{0.0};
      read_opt(p, "theta_x_deg", xs, "poses");
      read_opt(p, "theta_z_deg", zs, "poses");
      for (double x : xs)
        for (double z : zs) spec.poses.push_back(Pose::from_degrees(x, z));
    }
  } else {
    for (double x : {0.0, 30.0, 60.0})
      for (double z : {0.0, 60.0, 120.0, 180.0, 240.0, 300.0})
        spec.poses.push_back(Pose::from_degrees(x, z));
  }

  if (j.contains("targets")) {
    spec.targets.clear();
    const auto& ts = j["targets"];
    if (!ts.is_array()) throw ConfigError("targets: expected an array");
    for (const auto& t : ts) {
      require_keys(t, "targets[]", {"name", "mock_drone", "depth_grid", "view_axis"});
      TargetSpec target;
      read_opt(t, "name", target.name, "targets[]");
      if (t.contains("mock_drone") == t.contains("depth_grid"))
        throw ConfigError("targets[]: give exactly one of mock_drone or depth_grid");
      if (t.contains("mock_drone")) {
        target.geometry = parse_mock_drone(t["mock_drone"]);
      } else {
        DepthGridSource src;
        src.path = get_as<std::string>(t["depth_grid"], "targets[].depth_grid");
        const auto full = base_dir.empty() ? std::filesystem::path(src.path) : base_dir / src.path;
        std::ifstream in(full, std::ios::binary);
        if (!in) throw ConfigError("cannot open depth grid '" + full.string() + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        src.text = ss.str();
        target.geometry = std::move(src);
        target.view_axis = ViewAxis::z;
      }
      if (t.contains("view_axis"))
        target.view_axis = parse_axis(get_as<std::string>(t["view_axis"], "view_axis"));
      spec.targets.push_back(std::move(target));
    }
  }

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    require_keys(g, "grid", {"distances_km", "snr", "noise_levels", "n_pulses"});
    read_opt(g, "distances_km", spec.distances_km, "grid");
    read_opt(g, "snr", spec.snr_list, "grid");
    read_opt(g, "noise_levels", spec.noise_levels, "grid");
    read_opt(g, "n_pulses", spec.n_pulses_list, "grid");
  }

  auto& acq = spec.acquisition;
  if (j.contains("detector")) {
    const auto& d = j["detector"];
    require_keys(d, "detector", {"efficiency", "dead_time_ns", "bin_width_ps", "num_bins", "anchor_bin"});
    read_opt(d, "efficiency", acq.efficiency, "detector");
    if (d.contains("dead_time_ns")) acq.dead_time = get_as<double>(d["dead_time_ns"], "dead_time_ns") * 1e-9;
    if (d.contains("bin_width_ps")) acq.bin_width = get_as<double>(d["bin_width_ps"], "bin_width_ps") * 1e-12;
    read_opt(d, "num_bins", acq.num_bins, "detector");
    read_opt(d, "anchor_bin", acq.anchor_bin, "detector");
  }
  if (j.contains("pulse")) {
    const auto& p = j["pulse"];
    require_keys(p, "pulse", {"fwhm_pulse_ps", "fwhm_jitter_ps", "repetition_rate_mhz"});
    if (p.contains("fwhm_pulse_ps")) acq.pulse.fwhm_pulse = get_as<double>(p["fwhm_pulse_ps"], "fwhm_pulse_ps") * 1e-12;
    if (p.contains("fwhm_jitter_ps")) acq.pulse.fwhm_jitter = get_as<double>(p["fwhm_jitter_ps"], "fwhm_jitter_ps") * 1e-12;
    if (p.contains("repetition_rate_mhz"))
      acq.pulse.repetition_rate = get_as<double>(p["repetition_rate_mhz"], "repetition_rate_mhz") * 1e6;
  }
  if (j.contains("signal")) {
    const auto& s = j["signal"];
    require_keys(s, "signal", {"reference_photons", "reference_distance_km", "reference_n_pulses"});
    read_opt(s, "reference_photons", spec.signal.signal_photons, "signal");
    read_opt(s, "reference_distance_km", spec.signal.distance_km, "signal");
    read_opt(s, "reference_n_pulses", spec.signal.n_pulses, "signal");
  }

  spec.validate();
  return spec;
}

/// Canonical JSON echo of a spec, as stored in dataset manifests.
/// Unit-converted values are echoed at 12 significant digits so that
/// parse(echo(spec)) echoes identically.
inline json scenario_to_json(const ScenarioSpec& spec) {
  using namespace detail;
  const auto tidy = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
  };
  json poses = json::array();
  for (const auto& p : spec.poses) poses.push_back({tidy(p.theta_x_deg()), tidy(p.theta_z_deg())});
  json targets = json::array();
  for (const auto& t : spec.targets) {
    json e{{"name", t.name}, {"view_axis", axis_name(t.view_axis)}};
    if (const auto* m = std::get_if<MockDroneSpec>(&t.geometry)) e["mock_drone"] = mock_drone_to_json(*m);
    else e["depth_grid"] = std::get<DepthGridSource>(t.geometry).path;
    targets.push_back(std::move(e));
  }
  const auto& a = spec.acquisition;
  return {
      {"kind", to_string(spec.kind)},
      {"seed", spec.master_seed},
      {"replicates", spec.replicates},
      {"labeling", spec.labeling == Labeling::pose ? "pose" : "target"},
      {"poses", poses},
      {"targets", targets},
      {"grid",
       {{"distances_km", spec.effective_distances()},
        {"snr", spec.snr_list},
        {"noise_levels", spec.noise_levels},
        {"n_pulses", spec.n_pulses_list}}},
      {"detector",
       {{"efficiency", a.efficiency},
        {"dead_time_ns", tidy(a.dead_time * 1e9)},
        {"bin_width_ps", tidy(a.bin_width * 1e12)},
        {"num_bins", a.num_bins},
        {"anchor_bin", a.anchor_bin}}},
      {"pulse",
       {{"fwhm_pulse_ps", tidy(a.pulse.fwhm_pulse * 1e12)},
        {"fwhm_jitter_ps", tidy(a.pulse.fwhm_jitter * 1e12)},
        {"repetition_rate_mhz", tidy(a.pulse.repetition_rate * 1e-6)}}},
      {"signal",
       {{"reference_photons", spec.signal.signal_photons},
        {"reference_distance_km", spec.signal.distance_km},
        {"reference_n_pulses", spec.signal.n_pulses}}},
  };
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

inline constexpr std::string_view kComparisonPreset = R"({
  "kind": "comparison",
  "seed": 1,
  "replicates": 100,
  "labeling": "pose",
  "poses": {"theta_x_deg": [0, 30, 60], "theta_z_deg": [0, 60, 120, 180, 240, 300]},
  "grid": {
    "distances_km": [5],
    "snr": [1, 0.1, 0.01, 0.005, 0.001],
    "n_pulses": [1000000, 100000, 50000, 25000]
  },
  "detector": {"efficiency": 0.25, "dead_time_ns": 900, "bin_width_ps": 10,
               "num_bins": 1024, "anchor_bin": 100},
  "pulse": {"fwhm_pulse_ps": 10, "fwhm_jitter_ps": 150, "repetition_rate_mhz": 1},
  "signal": {"reference_photons": 5000, "reference_distance_km": 5,
             "reference_n_pulses": 1000000}
})";

inline constexpr std::string_view kDistancePreset = R"({
  "kind": "distance",
  "seed": 1,
  "replicates": 100,
  "labeling": "pose",
  "poses": {"theta_x_deg": [0, 30, 60], "theta_z_deg": [0, 60, 120, 180, 240, 300]},
  "grid": {
    "distances_km": [1, 3, 5, 6.25, 7.5, 8.75, 10],
    "noise_levels": [0.005, 0.05, 0.1, 0.5, 1],
    "n_pulses": [1000000, 100000, 50000, 25000]
  },
  "detector": {"efficiency": 0.25, "dead_time_ns": 900, "bin_width_ps": 10,
               "num_bins": 1024, "anchor_bin": 100},
  "pulse": {"fwhm_pulse_ps": 10, "fwhm_jitter_ps": 150, "repetition_rate_mhz": 1},
  "signal": {"reference_photons": 5000, "reference_distance_km": 5,
             "reference_n_pulses": 1000000}
})";

/// Raw preset JSON by name; throws ConfigError for unknown names.
inline json preset_json(std::string_view name) {
  if (name == "comparison") return json::parse(kComparisonPreset);
  if (name == "distance") return json::parse(kDistancePreset);
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected comparison or distance)");
}

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
}

}  // namespace tofforge
