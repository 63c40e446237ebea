// scenario.hpp -- dataset grids: targets x poses x acquisition conditions
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

#include "tofforge/errors.hpp"
#include "tofforge/link_budget.hpp"
#include "tofforge/photon.hpp"
#include "tofforge/scene.hpp"

namespace tofforge {

enum class DatasetKind { comparison, distance, custom };

/// Class per (target, pose), or class per target pooling its poses.
enum class Labeling { pose, target };

/// A depth map given as text, with the path it came from.
struct DepthGridSource {
  std::string path;
  std::string text;
};

struct TargetSpec {
  std::string name = "mock_drone";
  std::variant<MockDroneSpec, DepthGridSource> geometry = MockDroneSpec{};
  ViewAxis view_axis = ViewAxis::y;

  PointCloud cloud() const {
    if (const auto* drone = std::get_if<MockDroneSpec>(&geometry)) return make_mock_drone(*drone);
    return load_depth_grid(std::get<DepthGridSource>(geometry).text);
  }
};

struct AcquisitionConfig {
  double efficiency = 0.25;
  double dead_time = 900e-9;  // seconds
  double bin_width = 10e-12;  // seconds
  std::size_t num_bins = 1024;
  std::size_t anchor_bin = 100;  // bin of the earliest target return
  PulseModel pulse{10e-12, 150e-12, 1e6};
};

/// Signal photons N_s at a reference distance and pulse count. The per-pulse
/// signal is held fixed as the pulse count changes, and falls as 1/d^2.
struct SignalReference {
  double signal_photons = 5000.0;
  double distance_km = 5.0;
  std::uint64_t n_pulses = 1'000'000;

  double signal_total(double distance, std::uint64_t pulses) const {
    const InverseSquareAnchor anchor{signal_photons, Distance::km(distance_km)};
    return anchor.signal_at(Distance::km(distance)) * static_cast<double>(pulses) /
           static_cast<double>(n_pulses);
  }
};

struct ScenarioSpec {
  DatasetKind kind = DatasetKind::custom;
  std::vector<TargetSpec> targets{TargetSpec{}};
  std::vector<Pose> poses;
  Labeling labeling = Labeling::pose;
  std::vector<double> distances_km;  // empty: reference distance only
  std::vector<double> snr_list;
  std::vector<double> noise_levels;
  std::vector<std::uint64_t> n_pulses_list;
  std::uint32_t replicates = 100;
  std::uint64_t master_seed = 0;
  AcquisitionConfig acquisition;
  SignalReference signal;

  std::vector<double> effective_distances() const {
    if (distances_km.empty()) return {signal.distance_km};
    return distances_km;
  }

  bool snr_mode() const { return !snr_list.empty(); }

  void validate() const {
    if (targets.empty()) throw ConfigError("at least one target is required");
    if (poses.empty()) throw ConfigError("pose grid is empty");
    for (const auto& p : poses) p.validate();
    if (n_pulses_list.empty()) throw ConfigError("n_pulses list is empty");
    for (auto n : n_pulses_list)
      if (n == 0 || n > 0xFFFFFFFFull) throw ConfigError("n_pulses must be in [1, 2^32)");
    if (snr_list.empty() == noise_levels.empty())
      throw ConfigError("exactly one of snr and noise_levels must be given");
    for (double s : snr_list)
      if (!(s > 0.0)) throw ConfigError("snr values must be > 0");
    for (double n : noise_levels)
      if (!(n >= 0.0)) throw ConfigError("noise levels must be >= 0");
    for (double d : effective_distances())
      if (!(d > 0.0)) throw ConfigError("distances must be > 0");
    if (kind == DatasetKind::comparison && (!snr_list.size() || distances_km.size() > 1))
      throw ConfigError("comparison datasets sweep snr at a single distance");
    if (kind == DatasetKind::distance && !noise_levels.size())
      throw ConfigError("distance datasets sweep noise levels");
    if (replicates == 0) throw ConfigError("replicates must be >= 1");
    const auto& a = acquisition;
    if (!(a.efficiency > 0.0 && a.efficiency <= 1.0)) throw ConfigError("efficiency must be in (0, 1]");
    if (!(a.dead_time >= 0.0)) throw ConfigError("dead time must be >= 0");
    if (!(a.bin_width > 0.0)) throw ConfigError("bin width must be > 0");
    if (a.num_bins == 0) throw ConfigError("num_bins must be > 0");
    if (a.anchor_bin >= a.num_bins) throw ConfigError("anchor_bin must be < num_bins");
    a.pulse.validate();
    if (!(signal.signal_photons >= 0.0 && signal.distance_km > 0.0 && signal.n_pulses > 0))
      throw ConfigError("signal reference must have N_s >= 0, distance > 0, n_pulses > 0");
    if (class_count() > 0xFFFF) throw ConfigError("too many classes for a 16-bit label");
    if (scenario_count() > 0xFFFFFFFFull) throw ConfigError("grid too large for 32-bit scenario ids");
  }

  std::size_t class_count() const {
    return labeling == Labeling::target ? targets.size() : targets.size() * poses.size();
  }

  std::size_t condition_count() const {
    const std::size_t noise = snr_mode() ? snr_list.size() : noise_levels.size();
    return effective_distances().size() * noise * n_pulses_list.size();
  }

  std::size_t scenario_count() const {
    return condition_count() * targets.size() * poses.size();
  }

  std::uint64_t sample_count() const {
    return static_cast<std::uint64_t>(scenario_count()) * replicates;
  }

  std::vector<std::string> label_names() const {
    std::vector<std::string> names;
    for (const auto& t : targets) {
      if (labeling == Labeling::target) {
        names.push_back(t.name);
        continue;
      }
      for (const auto& p : poses) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "/tx%g_tz%g", std::round(p.theta_x_deg() * 1e6) / 1e6,
                      std::round(p.theta_z_deg() * 1e6) / 1e6);
        names.push_back(t.name + buf);
      }
    }
    return names;
  }
};

/// One grid cell for one target in one pose.
struct Scenario {
  std::uint32_t id = 0;
  std::uint16_t label = 0;
  std::size_t target = 0;
  std::size_t pose_index = 0;
  Pose pose;
  double distance_km = 0.0;
  NoiseSpec noise;
  std::uint64_t n_pulses = 0;
  double signal_photons = 0.0;  // N_s, per acquisition
  double noise_photons = 0.0;   // N_n, per acquisition
  double noise_per_bin = 0.0;   // B, per bin per pulse
};

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// Acquisition condition shared by all targets and poses of a cell.
inline std::string condition_key(const Scenario& s) {
  std::string key = "distance_km=" + format_number(s.distance_km);
  key += s.noise.mode == NoiseSpec::Mode::snr ? ";snr=" : ";noise_level=";
  key += format_number(s.noise.value);
  key += ";n_pulses=" + std::to_string(s.n_pulses);
  return key;
}

/// Enumerates scenarios in id order: distance, noise value, pulse count,
/// target, pose (pose varies fastest).
inline std::vector<Scenario> expand(const ScenarioSpec& spec) {
  spec.validate();
  std::vector<Scenario> out;
  out.reserve(spec.scenario_count());
  const auto& noise_values = spec.snr_mode() ? spec.snr_list : spec.noise_levels;
  std::uint32_t id = 0;
  for (double d : spec.effective_distances()) {
    for (double nv : noise_values) {
      for (auto pulses : spec.n_pulses_list) {
        for (std::size_t t = 0; t < spec.targets.size(); ++t) {
          for (std::size_t p = 0; p < spec.poses.size(); ++p) {
            Scenario s;
            s.id = id++;
            s.label = static_cast<std::uint16_t>(
                spec.labeling == Labeling::target ? t : t * spec.poses.size() + p);
            s.target = t;
            s.pose_index = p;
            s.pose = spec.poses[p];
            s.distance_km = d;
            s.noise = spec.snr_mode() ? NoiseSpec::from_snr(nv) : NoiseSpec::from_noise_level(nv);
            s.n_pulses = pulses;
            s.signal_photons = spec.signal.signal_total(d, pulses);
            const auto nb = noise_photons(s.noise, s.signal_photons, pulses, spec.acquisition.num_bins);
            s.noise_photons = nb.total;
            s.noise_per_bin = nb.per_bin;
            out.push_back(s);
          }
        }
      }
    }
  }
  return out;
}

/// Forward model of one scenario, up to the per-pulse detection profile.
struct ScenarioModel {
  ImpulseResponse response;  // blurred, unit mass inside the window
  double edge_loss = 0.0;    // fraction of blurred mass outside the window
  FluxProfile flux;
  DetectionProfile detection;
};

/// pose -> h(t) -> blur -> flux -> p0 -> dead-time corrected P(k).
/// The blurred in-window response is normalized to unit mass and scaled so
/// that the expected signal photons per pulse equal N_s / N_pulse.
inline ScenarioModel model_scenario(const ScenarioSpec& spec, const Scenario& s,
                                    const PointCloud& cloud) {
  const auto& acq = spec.acquisition;
  const auto posed = rotate(cloud, s.pose);
  const auto surfaces =
      project_to_surfaces(posed, s.distance_km * 1000.0, spec.targets[s.target].view_axis);
  const double start = anchored_window_start(surfaces, acq.anchor_bin, acq.bin_width);
  const auto h = discretize_response(surfaces, acq.num_bins, acq.bin_width, start);
  auto blurred = gaussian_blur(h, acq.pulse);

  ScenarioModel m;
  const double mass = blurred.response.total();
  m.edge_loss = blurred.edge_loss / (mass + blurred.edge_loss);
  for (auto& v : blurred.response.bins) v /= mass;
  m.response = std::move(blurred.response);

  const DetectorModel det{acq.efficiency, acq.dead_time, acq.bin_width, s.noise_per_bin};
  const double per_pulse_signal = s.signal_photons / static_cast<double>(s.n_pulses);
  m.flux = flux_profile(m.response, det, per_pulse_signal / acq.efficiency);
  m.detection = deadtime_correct(poisson_prob(m.flux), det.dead_bins());
  return m;
}

}  // namespace tofforge
