// link_budget.hpp -- radiometric photon accounting and noise bookkeeping
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>

#include "tofforge/errors.hpp"

namespace tofforge {

/// A range, stored in meters.
class Distance {
 public:
  static constexpr Distance meters(double m) { return Distance{m}; }
  static constexpr Distance km(double k) { return Distance{k * 1000.0}; }

  constexpr double in_meters() const { return m_; }
  constexpr double in_km() const { return m_ / 1000.0; }

 private:
  constexpr explicit Distance(double m) : m_{m} {}
  double m_;
};

struct LinkBudget {
  double lambda_t = 1.0;           // transmitter and atmosphere transmittance
  double lambda_r = 1.0;           // receiver, atmosphere and target albedo
  double area_target = 1.0;        // A_t, m^2
  double area_illuminated = 1.0;   // A_l, m^2
  double area_receiver = 1.0;      // A_r, m^2
  double solid_angle = std::numbers::pi;  // Omega_r, sr (diffuse reflector)
  double efficiency = 1.0;         // eta
  double emitted_photons = 0.0;    // N_e per acquisition
  /// Lumped coefficient a. When set it replaces the factored chain and the
  /// distance in N_s = a N_e / d^2 is taken in kilometers.
  std::optional<double> lumped_a;

  void validate() const {
    if (!(lambda_t >= 0 && lambda_r >= 0 && area_target >= 0 && area_illuminated >= 0 &&
          area_receiver >= 0 && efficiency >= 0 && emitted_photons >= 0))
      throw ConfigError("link budget coefficients must be >= 0");
    if (!(solid_angle > 0)) throw ConfigError("solid angle must be > 0");
    if (lumped_a && !(*lumped_a >= 0)) throw ConfigError("lumped coefficient must be >= 0");
  }
};

/// N_t = lambda_t N_e A_t / A_l
inline double photons_at_target(const LinkBudget& lb) {
  lb.validate();
  if (lb.area_illuminated == 0.0) throw DomainError("illuminated area must be > 0");
  return lb.lambda_t * lb.emitted_photons * lb.area_target / lb.area_illuminated;
}

/// N_s = eta lambda_r N_t A_r / (Omega_r d^2), or a N_e / d_km^2 when lumped.
inline double signal_photons(const LinkBudget& lb, Distance d) {
  if (!(d.in_meters() > 0.0)) throw DomainError("distance must be > 0");
  lb.validate();
  if (lb.lumped_a) {
    const double dk = d.in_km();
    return *lb.lumped_a * lb.emitted_photons / (dk * dk);
  }
  const double dm = d.in_meters();
  return lb.efficiency * lb.lambda_r * photons_at_target(lb) * lb.area_receiver /
         (lb.solid_angle * dm * dm);
}

/// The lumped a that reproduces the factored chain (distance in meters).
inline double lumped_coefficient(const LinkBudget& lb) {
  return lb.efficiency * lb.lambda_r * lb.lambda_t * (lb.area_target / lb.area_illuminated) *
         (lb.area_receiver / lb.solid_angle);
}

/// Inverse-square scaling pinned to a reference: N_s(d) = N_ref (d_ref / d)^2.
struct InverseSquareAnchor {
  double signal_photons = 5000.0;
  Distance distance = Distance::km(5.0);

  double signal_at(Distance d) const {
    if (!(d.in_meters() > 0.0)) throw DomainError("distance must be > 0");
    if (!(distance.in_meters() > 0.0) || !(signal_photons >= 0.0))
      throw DomainError("anchor must have positive distance and non-negative signal");
    const double r = distance.in_meters() / d.in_meters();
    return signal_photons * r * r;
  }
};

struct NoiseSpec {
  enum class Mode { snr, noise_level };
  Mode mode = Mode::snr;
  double value = 1.0;  // N_s / N_n, or N_np (mean noise photons per pulse)

  static NoiseSpec from_snr(double snr) { return {Mode::snr, snr}; }
  static NoiseSpec from_noise_level(double n_np) { return {Mode::noise_level, n_np}; }
};

struct NoiseBudget {
  double total = 0.0;    // N_n, per acquisition
  double per_bin = 0.0;  // B, per bin per pulse
};

/// snr mode: N_n = N_s / snr. noise_level mode: N_n = N_np N_pulse.
/// Noise is spread uniformly over the num_bins window.
inline NoiseBudget noise_photons(const NoiseSpec& spec, double signal_total,
                                 std::uint64_t n_pulses, std::size_t num_bins) {
  if (n_pulses == 0 || num_bins == 0) throw DomainError("n_pulses and num_bins must be > 0");
  NoiseBudget nb;
  switch (spec.mode) {
    case NoiseSpec::Mode::snr:
      if (!(spec.value > 0.0)) throw DomainError("snr must be > 0");
      nb.total = signal_total / spec.value;
      break;
    case NoiseSpec::Mode::noise_level:
      if (!(spec.value >= 0.0)) throw DomainError("noise level must be >= 0");
      nb.total = spec.value * static_cast<double>(n_pulses);
      break;
  }
  nb.per_bin = nb.total / (static_cast<double>(n_pulses) * static_cast<double>(num_bins));
  return nb;
}

struct EnergyReference {
  double signal_photons;  // N_s at the reference
  Distance distance;
  double pulse_energy;    // joules
};

/// E = E_ref (N_s / N_s_ref) (d / d_ref)^2
inline double required_pulse_energy(double target_signal, Distance d, const EnergyReference& ref) {
  if (!(ref.signal_photons > 0.0 && ref.distance.in_meters() > 0.0 && ref.pulse_energy > 0.0))
    throw DomainError("reference values must be > 0");
  if (!(d.in_meters() > 0.0) || !(target_signal >= 0.0))
    throw DomainError("target distance must be > 0 and signal >= 0");
  const double r = d.in_meters() / ref.distance.in_meters();
  return ref.pulse_energy * (target_signal / ref.signal_photons) * (r * r);
}

}  // namespace tofforge
