// photon.hpp -- photon-counting observation model for a single-pixel SPAD
//
//   e_k    = (J * s * h)_k                      Gaussian pulse and jitter blur
//   N_k    = eta * scale * e_k + B              mean detected photons per bin
//   p0(k)  = 1 - exp(-N_k)                      at least one photon in bin k
//   P(k)   = p0(k) * (1 - sum of P over the preceding dead-time window)
//   tau(k) ~ Binomial(N_pulse, P(k))            accumulated histogram
//
// Dead time is non-extendable and restarts every pulse period.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "tofforge/errors.hpp"
#include "tofforge/rng.hpp"
#include "tofforge/scene.hpp"

namespace tofforge {

/// FWHM / sigma of a Gaussian, 2 sqrt(2 ln 2).
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

struct PulseModel {
  double fwhm_pulse = 0.0;         // seconds
  double fwhm_jitter = 0.0;        // seconds
  double repetition_rate = 1.0e6;  // hertz

  /// Sigma of the single Gaussian equal to pulse shape convolved with jitter.
  double combined_sigma() const {
    const double sp = fwhm_pulse / kFwhmPerSigma, sj = fwhm_jitter / kFwhmPerSigma;
    return std::sqrt(sp * sp + sj * sj);
  }

  void validate() const {
    if (!(fwhm_pulse >= 0.0) || !(fwhm_jitter >= 0.0))
      throw ConfigError("pulse and jitter widths must be >= 0");
    if (!(repetition_rate > 0.0)) throw ConfigError("repetition rate must be > 0");
  }
};

struct DetectorModel {
  double efficiency = 1.0;     // eta in [0, 1]
  double dead_time = 0.0;      // seconds
  double bin_width = 10e-12;   // seconds
  double noise_per_bin = 0.0;  // B, mean photons per bin per pulse

  /// round(t_d / bin_width)
  std::int64_t dead_bins() const { return std::llround(dead_time / bin_width); }

  void validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw ConfigError("efficiency must be in [0, 1]");
    if (!(dead_time >= 0.0)) throw ConfigError("dead time must be >= 0");
    if (!(bin_width > 0.0)) throw ConfigError("bin width must be > 0");
    if (!(noise_per_bin >= 0.0) || !std::isfinite(noise_per_bin))
      throw ConfigError("noise per bin must be finite and >= 0");
  }
};

struct FluxProfile {
  std::vector<double> means;  // N_k
};

struct DetectionProfile {
  std::vector<double> probs;  // P(k), per pulse
};

struct Histogram {
  std::vector<std::uint32_t> counts;
  double bin_width = 0.0;      // seconds
  std::uint64_t n_pulses = 0;

  std::uint64_t total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  }

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

// ---------------------------------------------------------------------------
// Blur
// ---------------------------------------------------------------------------

/// Normalized Gaussian sampled at bin centers, truncated at +-5 sigma.
/// Returns {1} for sigma == 0. Element `half` is the kernel center.
inline std::vector<double> gaussian_kernel(double sigma_bins) {
  if (!(sigma_bins > 0.0)) return {1.0};
  const auto half = static_cast<std::size_t>(std::ceil(5.0 * sigma_bins));
  std::vector<double> k(2 * half + 1);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double x = (static_cast<double>(i) - static_cast<double>(half)) / sigma_bins;
    k[i] = std::exp(-0.5 * x * x);
  }
  const double s = std::accumulate(k.begin(), k.end(), 0.0);
  for (auto& v : k) v /= s;
  return k;
}

struct BlurResult {
  ImpulseResponse response;
  double edge_loss = 0.0;  // mass pushed outside the window
};

/// Convolves the response with the combined pulse/jitter Gaussian.
inline BlurResult gaussian_blur(const ImpulseResponse& h, const PulseModel& pulse) {
  pulse.validate();
  if (!(h.bin_width > 0.0)) throw ConfigError("impulse response bin width must be > 0");
  const auto kernel = gaussian_kernel(pulse.combined_sigma() / h.bin_width);
  const std::size_t n = h.bins.size();
  if (kernel.size() > n)
    throw ConfigError("blur kernel (" + std::to_string(kernel.size()) +
                      " bins) is wider than the histogram window (" + std::to_string(n) + ")");

  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  BlurResult out{ImpulseResponse{std::vector<double>(n, 0.0), h.bin_width, h.origin_time}, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double v = h.bins[i];
    if (v == 0.0) continue;
    for (std::size_t j = 0; j < kernel.size(); ++j) {
      const auto t = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(j) - half;
      if (t < 0 || t >= static_cast<std::ptrdiff_t>(n)) out.edge_loss += v * kernel[j];
      else out.response.bins[static_cast<std::size_t>(t)] += v * kernel[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Flux and detection probabilities
// ---------------------------------------------------------------------------

/// N_k = eta * signal_scale * e_k + B.
inline FluxProfile flux_profile(const ImpulseResponse& e, const DetectorModel& det,
                                double signal_scale) {
  det.validate();
  if (!(signal_scale >= 0.0)) throw DomainError("signal scale must be >= 0");
  FluxProfile f;
  f.means.resize(e.bins.size());
  const double gain = det.efficiency * signal_scale;
  for (std::size_t k = 0; k < e.bins.size(); ++k) {
    if (!(e.bins[k] >= 0.0)) throw DomainError("impulse response must be non-negative");
    f.means[k] = gain * e.bins[k] + det.noise_per_bin;
  }
  return f;
}

/// p0(k) = 1 - exp(-N_k).
inline std::vector<double> poisson_prob(const FluxProfile& flux) {
  std::vector<double> p0(flux.means.size());
  for (std::size_t k = 0; k < p0.size(); ++k) p0[k] = -std::expm1(-flux.means[k]);
  return p0;
}

/// Dead-time corrected per-pulse detection probability. Detection in bin i
/// blocks bins i+1 .. i+dead_bins, so
///   P(k) = p0(k) * (1 - sum_{i=max(0,k-dead_bins)}^{k-1} P(i)).
/// O(K) via prefix sums; the window sum is clamped to [0, 1].
inline DetectionProfile deadtime_correct(std::span<const double> p0, std::int64_t dead_bins) {
  if (dead_bins < 0) throw DomainError("dead_bins must be >= 0");
  const std::size_t n = p0.size();
  DetectionProfile out;
  out.probs.resize(n);
  std::vector<double> prefix(n + 1, 0.0);  // prefix[k] = sum_{i<k} P(i)
  for (std::size_t k = 0; k < n; ++k) {
    if (!(p0[k] >= 0.0 && p0[k] <= 1.0)) throw DomainError("p0 values must lie in [0, 1]");
    const std::size_t lo =
        static_cast<std::int64_t>(k) > dead_bins ? k - static_cast<std::size_t>(dead_bins) : 0;
    const double window = dead_bins == 0 ? 0.0 : std::clamp(prefix[k] - prefix[lo], 0.0, 1.0);
    out.probs[k] = p0[k] * (1.0 - window);
    prefix[k + 1] = prefix[k] + out.probs[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Histogram sampling
// ---------------------------------------------------------------------------

/// Draws accumulated histograms tau(k) ~ Binomial(n_pulses, P(k)) for a fixed
/// detection profile. Distribution parameters are prepared once; every call
/// to sample() uses fresh distribution state, so each histogram depends only
/// on the stream it is given.
class HistogramSampler {
 public:
  using Binomial = std::binomial_distribution<std::int64_t>;

  HistogramSampler(const DetectionProfile& profile, std::uint64_t n_pulses, double bin_width)
      : n_pulses_{n_pulses}, bin_width_{bin_width} {
    if (n_pulses == 0) throw DomainError("n_pulses must be >= 1");
    if (n_pulses > 0xFFFFFFFFull) throw DomainError("n_pulses exceeds 32-bit count range");
    params_.reserve(profile.probs.size());
    for (double p : profile.probs) {
      if (!(p >= 0.0 && p <= 1.0)) throw DomainError("detection probability outside [0, 1]");
      params_.emplace_back(static_cast<std::int64_t>(n_pulses), p);
    }
  }

  Histogram sample(RngStream& rng) const {
    Histogram h{std::vector<std::uint32_t>(params_.size(), 0), bin_width_, n_pulses_};
    for (std::size_t k = 0; k < params_.size(); ++k) {
      const double p = params_[k].p();
      if (p <= 0.0) continue;
      if (p >= 1.0) {
        h.counts[k] = static_cast<std::uint32_t>(n_pulses_);
        continue;
      }
      Binomial draw;
      h.counts[k] = static_cast<std::uint32_t>(draw(rng, params_[k]));
    }
    return h;
  }

  std::size_t size() const noexcept { return params_.size(); }
  std::uint64_t n_pulses() const noexcept { return n_pulses_; }

 private:
  std::uint64_t n_pulses_;
  double bin_width_;
  std::vector<Binomial::param_type> params_;
};

inline Histogram sample_histogram(const DetectionProfile& profile, std::uint64_t n_pulses,
                                  RngStream& rng, double bin_width = 0.0) {
  return HistogramSampler(profile, n_pulses, bin_width).sample(rng);
}

}  // namespace tofforge
