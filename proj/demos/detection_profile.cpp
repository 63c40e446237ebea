// Prints the forward model of one pose as TSV: impulse response, blurred
// response, p0 and the dead-time corrected detection probability per bin,
// plus one sampled histogram.
//
//   detection_profile [theta_x_deg] [theta_z_deg] [distance_km] > profile.tsv
#include <cstdio>
#include <cstdlib>

#include "tofforge/config.hpp"
#include "tofforge/photon.hpp"
#include "tofforge/scenario.hpp"

int main(int argc, char** argv) {
  using namespace tofforge;
  const double tx = argc > 1 ? std::atof(argv[1]) : 30.0;
  const double tz = argc > 2 ? std::atof(argv[2]) : 60.0;
  const double km = argc > 3 ? std::atof(argv[3]) : 5.0;

  auto j = preset_json("comparison");
  j["poses"] = json::array({{tx, tz}});
  j["grid"]["distances_km"] = {km};
  j["grid"]["snr"] = {1};
  j["grid"]["n_pulses"] = {1000000};
  const auto spec = parse_scenario(j);
  const auto scenario = expand(spec).front();
  const auto cloud = spec.targets.front().cloud();

  const auto& acq = spec.acquisition;
  const auto surfaces = project_to_surfaces(rotate(cloud, scenario.pose), km * 1000.0, spec.targets.front().view_axis);
  const auto h = discretize_response(surfaces, acq.num_bins, acq.bin_width,
                                     anchored_window_start(surfaces, acq.anchor_bin, acq.bin_width));
  const auto model = model_scenario(spec, scenario, cloud);
  const auto p0 = poisson_prob(model.flux);
  auto rng = RngStream::derive(spec.master_seed, StreamPurpose::histogram, scenario.id, 0);
  const auto counts = sample_histogram(model.detection, scenario.n_pulses, rng, acq.bin_width);

  std::fprintf(stderr, "N_s = %g, N_n = %g, B = %g per bin per pulse, dead time %lld bins\n",
               scenario.signal_photons, scenario.noise_photons, scenario.noise_per_bin,
               static_cast<long long>(std::llround(acq.dead_time / acq.bin_width)));
  std::printf("bin\ttime_ns\timpulse\tblurred\tp0\tP\tcounts\n");
  for (std::size_t k = 0; k < acq.num_bins; ++k)
    std::printf("%zu\t%.3f\t%.6g\t%.6g\t%.6g\t%.6g\t%u\n", k, (h.origin_time + k * acq.bin_width) * 1e9, h.bins[k],
                model.response.bins[k], p0[k], model.detection.probs[k], counts.counts[k]);
}
