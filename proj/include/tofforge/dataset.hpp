// dataset.hpp -- labeled histogram datasets: generation, thinning, preprocessing
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tofforge/config.hpp"
#include "tofforge/parallel.hpp"
#include "tofforge/photon.hpp"
#include "tofforge/rng.hpp"
#include "tofforge/scenario.hpp"

namespace tofforge {

inline constexpr int kSchemaVersion = 1;

struct Sample {
  std::uint32_t scenario_id = 0;
  std::uint32_t replicate_id = 0;
  std::uint16_t label = 0;
  Histogram histogram;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Dataset metadata, stored as manifest.json next to the binary payload.
struct Manifest {
  int schema_version = kSchemaVersion;
  std::uint64_t master_seed = 0;
  double bin_width_ps = 10.0;
  double bin_width_s = 10e-12;      // exact value carried by the histograms
  std::size_t num_bins = 0;
  std::uint32_t replicates = 0;
  std::vector<std::string> label_map;
  json parameters;                  // generation config echo
  std::vector<Scenario> scenarios;  // emitted scenarios, in record order
  std::uint64_t sample_count = 0;
  std::uint64_t payload_bytes = 0;
  std::uint32_t payload_crc32 = 0;
  double split_ratio = 1.0;         // cumulative thinning ratio
  json provenance = json::object();

  const Scenario* find_scenario(std::uint32_t id) const {
    auto it = std::lower_bound(scenarios.begin(), scenarios.end(), id,
                               [](const Scenario& s, std::uint32_t v) { return s.id < v; });
    return it != scenarios.end() && it->id == id ? &*it : nullptr;
  }

  friend bool operator==(const Manifest& a, const Manifest& b) {
    auto same_scenarios = [&] {
      if (a.scenarios.size() != b.scenarios.size()) return false;
      for (std::size_t i = 0; i < a.scenarios.size(); ++i) {
        const auto &x = a.scenarios[i], &y = b.scenarios[i];
        if (x.id != y.id || x.label != y.label || x.target != y.target ||
            x.pose_index != y.pose_index || !(x.pose == y.pose) || x.distance_km != y.distance_km ||
            x.noise.mode != y.noise.mode || x.noise.value != y.noise.value ||
            x.n_pulses != y.n_pulses || x.signal_photons != y.signal_photons ||
            x.noise_photons != y.noise_photons || x.noise_per_bin != y.noise_per_bin)
          return false;
      }
      return true;
    };
    return a.schema_version == b.schema_version && a.master_seed == b.master_seed &&
           a.bin_width_ps == b.bin_width_ps && a.bin_width_s == b.bin_width_s && a.num_bins == b.num_bins &&
           a.replicates == b.replicates && a.label_map == b.label_map &&
           a.parameters == b.parameters && same_scenarios() && a.sample_count == b.sample_count &&
           a.payload_bytes == b.payload_bytes && a.payload_crc32 == b.payload_crc32 &&
           a.split_ratio == b.split_ratio && a.provenance == b.provenance;
  }
};

struct LabeledDataset {
  Manifest manifest;
  std::vector<Sample> samples;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct GenerateOptions {
  unsigned workers = 1;
  bool keep_partial = false;  // skip failing scenarios instead of aborting
};

struct ScenarioFailure {
  std::uint32_t scenario_id;
  std::string message;
};

/// Raised when a scenario cannot be rendered and keep_partial is off.
class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(std::vector<ScenarioFailure> failures)
      : std::runtime_error(format(failures)), failures_{std::move(failures)} {}
  const std::vector<ScenarioFailure>& failures() const noexcept { return failures_; }

 private:
  static std::string format(const std::vector<ScenarioFailure>& f) {
    std::string s = std::to_string(f.size()) + " scenario(s) failed";
    for (std::size_t i = 0; i < f.size() && i < 5; ++i)
      s += "\n  scenario " + std::to_string(f[i].scenario_id) + ": " + f[i].message;
    return s;
  }
  std::vector<ScenarioFailure> failures_;
};

struct GenerationReport {
  std::vector<Scenario> emitted;
  std::vector<ScenarioFailure> skipped;
  double max_edge_loss = 0.0;
};

/// Runs the forward model for every scenario and replicate, handing samples
/// to `sink` in (scenario_id, replicate_id) order regardless of worker
/// count. Every scenario is checked before the first sample is emitted.
inline GenerationReport generate_into(const ScenarioSpec& spec,
                                      const std::function<void(const Sample&)>& sink,
                                      const GenerateOptions& options = {}) {
  const auto scenarios = expand(spec);
  std::vector<PointCloud> clouds;
  for (const auto& t : spec.targets) clouds.push_back(t.cloud());

  GenerationReport report;
  std::vector<std::optional<std::string>> failure(scenarios.size());
  std::vector<double> edge_loss(scenarios.size(), 0.0);
  parallel_for(scenarios.size(), options.workers, [&](std::size_t i) {
    const auto& s = scenarios[i];
    try {
      const auto& acq = spec.acquisition;
      const auto posed = rotate(clouds[s.target], s.pose);
      const auto surfaces =
          project_to_surfaces(posed, s.distance_km * 1000.0, spec.targets[s.target].view_axis);
      const double start = anchored_window_start(surfaces, acq.anchor_bin, acq.bin_width);
      const auto h = discretize_response(surfaces, acq.num_bins, acq.bin_width, start);
      const auto blurred = gaussian_blur(h, acq.pulse);
      edge_loss[i] = blurred.edge_loss / (blurred.edge_loss + blurred.response.total());
    } catch (const std::exception& e) {
      failure[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (failure[i]) report.skipped.push_back({scenarios[i].id, *failure[i]});
    else report.emitted.push_back(scenarios[i]);
    report.max_edge_loss = std::max(report.max_edge_loss, edge_loss[i]);
  }
  if (!report.skipped.empty() && !options.keep_partial) throw GenerationError(report.skipped);

  // Scenarios are processed in chunks; within a chunk workers fill slots
  // that are flushed to the sink in order.
  const std::size_t chunk = std::max<std::size_t>(1, options.workers) * 4;
  for (std::size_t base = 0; base < report.emitted.size(); base += chunk) {
    const std::size_t n = std::min(chunk, report.emitted.size() - base);
    std::vector<std::vector<Sample>> slots(n);
    parallel_for(n, options.workers, [&](std::size_t j) {
      const auto& s = report.emitted[base + j];
      const auto model = model_scenario(spec, s, clouds[s.target]);
      const HistogramSampler sampler(model.detection, s.n_pulses, spec.acquisition.bin_width);
      auto& out = slots[j];
      out.reserve(spec.replicates);
      for (std::uint32_t r = 0; r < spec.replicates; ++r) {
        auto rng = RngStream::derive(spec.master_seed, StreamPurpose::histogram, s.id, r);
        out.push_back(Sample{s.id, r, s.label, sampler.sample(rng)});
      }
    });
    for (const auto& slot : slots)
      for (const auto& sample : slot) sink(sample);
  }
  return report;
}

/// Manifest for a generated dataset (payload fields left for the writer).
inline Manifest make_manifest(const ScenarioSpec& spec, const GenerationReport& report) {
  Manifest m;
  m.master_seed = spec.master_seed;
  m.bin_width_ps = spec.acquisition.bin_width * 1e12;
  m.bin_width_s = spec.acquisition.bin_width;
  m.num_bins = spec.acquisition.num_bins;
  m.replicates = spec.replicates;
  m.label_map = spec.label_names();
  m.parameters = scenario_to_json(spec);
  m.scenarios = report.emitted;
  m.sample_count = static_cast<std::uint64_t>(report.emitted.size()) * spec.replicates;
  m.provenance = {{"operation", "gen"}};
  if (!report.skipped.empty()) {
    json skipped = json::array();
    for (const auto& f : report.skipped) skipped.push_back({{"scenario_id", f.scenario_id}, {"error", f.message}});
    m.provenance["skipped"] = skipped;
  }
  return m;
}

/// In-memory generation.
inline LabeledDataset generate(const ScenarioSpec& spec, const GenerateOptions& options = {}) {
  LabeledDataset ds;
  ds.samples.reserve(spec.sample_count());
  const auto report = generate_into(spec, [&](const Sample& s) { ds.samples.push_back(s); }, options);
  ds.manifest = make_manifest(spec, report);
  return ds;
}

// ---------------------------------------------------------------------------
// Thinning
// ---------------------------------------------------------------------------

/// Keeps each counted photon independently with probability `ratio`.
inline Histogram thin(const Histogram& h, double ratio, RngStream& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw DomainError("thinning ratio must lie in [0, 1]");
  Histogram out = h;
  if (ratio == 1.0) return out;
  for (auto& c : out.counts) {
    if (c == 0) continue;
    if (ratio == 0.0) {
      c = 0;
      continue;
    }
    std::binomial_distribution<std::int64_t> draw(c, ratio);
    c = static_cast<std::uint32_t>(draw(rng));
  }
  return out;
}

/// Thins every sample; streams keyed by (seed, scenario_id, replicate_id).
inline LabeledDataset thin_dataset(const LabeledDataset& in, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw DomainError("thinning ratio must lie in [0, 1]");
  LabeledDataset out;
  out.manifest = in.manifest;
  out.manifest.split_ratio = in.manifest.split_ratio * ratio;
  out.manifest.provenance = {{"operation", "thin"},
                             {"ratio", ratio},
                             {"seed", seed},
                             {"source_crc32", in.manifest.payload_crc32},
                             {"source", in.manifest.provenance}};
  out.samples.reserve(in.samples.size());
  for (const auto& s : in.samples) {
    auto rng = RngStream::derive(seed, StreamPurpose::thinning, s.scenario_id, s.replicate_id);
    out.samples.push_back(Sample{s.scenario_id, s.replicate_id, s.label, thin(s.histogram, ratio, rng)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

struct PreprocessOptions {
  std::size_t smooth_window = 31;  // about twice the 150 ps combined pulse FWHM at 10 ps bins
  std::size_t anchor_bin = 256;
};

/// Shift-aligned, max-normalized copy of a histogram.
///
/// The histogram is rotated circularly so that the peak of its circular
/// moving sum (window `smooth_window`) lands on `anchor_bin`, then divided by
/// its largest count. When several bins share the peak, the one whose
/// rotation is lexicographically largest wins, which keeps the output exactly
/// invariant under circular shifts of the input. All-zero input maps to zeros.
inline std::vector<double> preprocess(std::span<const std::uint32_t> counts,
                                      const PreprocessOptions& opt = {}) {
  const std::size_t n = counts.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  if (opt.smooth_window == 0 || opt.smooth_window > n)
    throw ConfigError("smoothing window must be in [1, K]");

  const std::uint32_t peak_count = *std::max_element(counts.begin(), counts.end());
  if (peak_count == 0) return out;

  // Circular moving sum centered on each bin (integer, so ties are exact).
  const std::size_t w = opt.smooth_window, left = w / 2;
  std::vector<std::uint64_t> smooth(n);
  std::uint64_t acc = 0;
  for (std::size_t j = 0; j < w; ++j) acc += counts[(n - left + j) % n];
  for (std::size_t k = 0; k < n; ++k) {
    smooth[k] = acc;
    acc -= counts[(k + n - left) % n];
    acc += counts[(k + w - left) % n];
  }

  const std::uint64_t best = *std::max_element(smooth.begin(), smooth.end());
  std::size_t peak = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (smooth[k] != best) continue;
    if (peak == n) {
      peak = k;
      continue;
    }
    for (std::size_t t = 0; t < n; ++t) {
      const auto a = counts[(k + t) % n], b = counts[(peak + t) % n];
      if (a != b) {
        if (a > b) peak = k;
        break;
      }
    }
  }

  const std::size_t anchor = opt.anchor_bin % n;
  const double scale = static_cast<double>(peak_count);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<double>(counts[(peak + i + n - anchor) % n]) / scale;
  return out;
}

inline std::vector<double> preprocess(const Histogram& h, const PreprocessOptions& opt = {}) {
  return preprocess(std::span<const std::uint32_t>(h.counts), opt);
}

}  // namespace tofforge
