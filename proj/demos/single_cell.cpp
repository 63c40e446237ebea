// Generates one acquisition condition in memory and cross-validates the
// centroid baseline on it.
//
//   single_cell [snr] [n_pulses]
#include <cstdio>
#include <cstdlib>

#include "tofforge/config.hpp"
#include "tofforge/dataset.hpp"
#include "tofforge/eval.hpp"

int main(int argc, char** argv) {
  using namespace tofforge;
  const double snr = argc > 1 ? std::atof(argv[1]) : 1.0;
  const auto pulses = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1'000'000ull;

  auto j = preset_json("comparison");
  j["grid"]["snr"] = {snr};
  j["grid"]["n_pulses"] = {pulses};
  const auto spec = parse_scenario(j);

  const auto ds = generate(spec, {default_workers(), false});
  EvalOptions opt;
  opt.seed = spec.master_seed;
  opt.workers = default_workers();
  const auto rep = sweep_report({&ds}, opt);

  const auto& cv = rep.results.front().cv;
  std::printf("%s\n", rep.cells.front().c_str());
  std::printf("%zu samples, %zu classes\n", ds.samples.size(), rep.label_map.size());
  for (std::size_t f = 0; f < cv.accuracy.size(); ++f) std::printf("fold %zu\t%.4f\n", f, cv.accuracy[f]);
  std::printf("mean\t%.4f +- %.4f\n", cv.mean, cv.stddev);

  const auto cm = cv.pooled();
  std::printf("\nper-class recall\n");
  for (std::size_t c = 0; c < cm.classes(); ++c)
    std::printf("%-24s %.3f\n", rep.label_map[c].c_str(),
                static_cast<double>(cm.at(c, c)) / static_cast<double>(cm.row_sum(c)));
}
