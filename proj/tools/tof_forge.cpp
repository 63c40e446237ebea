// tof_forge -- synthetic photon-counting histogram datasets and baseline evaluation
//
//   tof_forge gen        --preset comparison|distance | --config FILE  --out DIR
//   tof_forge thin       --in DIR --ratio R --out DIR
//   tof_forge preprocess --in DIR --out FILE
//   tof_forge eval       --dataset DIR --out DIR
//   tof_forge sweep      --dataset DIR [--dataset DIR ...] --out DIR
//   tof_forge linkbudget [--anchor-photons N --anchor-km D] --distance-km D,...
//
// Exit status: 0 success, 2 usage or configuration error, 3 runtime failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tofforge/config.hpp"
#include "tofforge/dataset.hpp"
#include "tofforge/dataset_io.hpp"
#include "tofforge/eval.hpp"
#include "tofforge/link_budget.hpp"

namespace fs = std::filesystem;
using namespace tofforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

/// Bad input detected before any work starts.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("TOF_FORGE_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t pos = 0;
    const auto s = std::stoull(v, &pos, 0);
    if (pos != std::string(v).size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    throw UsageError(std::string("TOF_FORGE_SEED is not an unsigned integer: '") + v + "'");
  }
}

/// --seed, then TOF_FORGE_SEED, then `fallback`.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (auto e = env_seed()) return *e;
  return fallback;
}

std::optional<std::string> timestamp(bool reproducible) {
  if (reproducible) return std::nullopt;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

unsigned resolve_workers(unsigned w) { return w == 0 ? default_workers() : w; }

void require_dataset_dir(const fs::path& dir) {
  if (!fs::is_directory(dir) || !fs::exists(dir / kManifestFile))
    throw UsageError("no dataset at '" + dir.string() + "' (manifest.json missing)");
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  std::string out;
  bool reproducible = false;
  bool keep_partial = false;
  bool csv = false;
};

int cmd_gen(const GenArgs& a) {
  ScenarioSpec spec;
  if (a.preset.empty() == a.config.empty()) throw UsageError("give exactly one of --preset or --config");
  if (!a.preset.empty()) {
    spec = parse_scenario(preset_json(a.preset));
  } else {
    const fs::path path(a.config);
    spec = parse_scenario(load_json_file(path), path.parent_path());
  }
  spec.master_seed = resolve_seed(a.seed, spec.master_seed);
  spec.validate();

  GenerateOptions opt;
  opt.workers = resolve_workers(a.workers);
  opt.keep_partial = a.keep_partial;
  std::cerr << "gen: " << spec.scenario_count() << " scenarios x " << spec.replicates << " replicates = "
            << spec.sample_count() << " samples, seed " << spec.master_seed << ", " << opt.workers
            << " worker(s)\n";

  DatasetWriter writer(a.out, spec.acquisition.num_bins, WriteOptions{a.csv, timestamp(a.reproducible)});
  const auto report = generate_into(spec, [&](const Sample& s) { writer.write(s); }, opt);
  const auto m = writer.finish(make_manifest(spec, report));
  for (const auto& f : report.skipped)
    std::cerr << "gen: skipped scenario " << f.scenario_id << ": " << f.message << '\n';
  std::cout << "wrote " << m.sample_count << " samples to " << a.out << " (crc32 " << m.payload_crc32 << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ThinArgs {
  std::string in;
  double ratio = 1.0;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool reproducible = false;
  bool csv = false;
};

int cmd_thin(const ThinArgs& a) {
  if (!(a.ratio >= 0.0 && a.ratio <= 1.0)) throw UsageError("--ratio must lie in [0, 1]");
  require_dataset_dir(a.in);
  if (fs::exists(a.out) && fs::equivalent(a.in, a.out)) throw UsageError("--out must differ from --in");
  DatasetReader reader(a.in);
  const auto& src = reader.manifest();
  const std::uint64_t seed = resolve_seed(a.seed, src.master_seed);

  Manifest m = src;
  m.split_ratio = src.split_ratio * a.ratio;
  m.provenance = {{"operation", "thin"},
                  {"ratio", a.ratio},
                  {"seed", seed},
                  {"source_crc32", src.payload_crc32},
                  {"source", src.provenance}};
  DatasetWriter writer(a.out, src.num_bins, WriteOptions{a.csv, timestamp(a.reproducible)});
  for (std::size_t i = 0; i < src.scenarios.size(); ++i) {
    for (auto& s : reader.read_scenario_at(i)) {
      auto rng = RngStream::derive(seed, StreamPurpose::thinning, s.scenario_id, s.replicate_id);
      s.histogram = thin(s.histogram, a.ratio, rng);
      writer.write(s);
    }
  }
  m = writer.finish(m);
  std::cout << "wrote " << m.sample_count << " samples to " << a.out << " (split ratio "
            << format_number(m.split_ratio) << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PreprocessArgs {
  std::string in;
  std::string out;
  std::size_t count = 100;
  PreprocessOptions options;
};

/// Golden vectors: raw counts and the expected preprocessed output for
/// `count` samples spread evenly over the dataset.
int cmd_preprocess(const PreprocessArgs& a) {
  require_dataset_dir(a.in);
  if (a.count == 0) throw UsageError("--count must be >= 1");
  if (a.options.smooth_window == 0 || a.options.smooth_window > 1'000'000)
    throw UsageError("--smooth-window must be >= 1");
  DatasetReader reader(a.in);
  const auto ds = reader.read_all();
  const std::size_t n = std::min(a.count, ds.samples.size());
  json cases = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = ds.samples[i * ds.samples.size() / n];
    cases.push_back({{"scenario_id", s.scenario_id},
                     {"replicate_id", s.replicate_id},
                     {"label", s.label},
                     {"counts", s.histogram.counts},
                     {"expected", preprocess(s.histogram, a.options)}});
  }
  json doc{{"smooth_window", a.options.smooth_window},
           {"anchor_bin", a.options.anchor_bin},
           {"normalization", "max"},
           {"num_bins", ds.manifest.num_bins},
           {"source_crc32", ds.manifest.payload_crc32},
           {"cases", cases}};
  if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(a.out, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + a.out + "'");
  out << doc.dump(1) << '\n';
  std::cout << "wrote " << n << " golden vectors to " << a.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> datasets;
  std::string model = "centroid";
  std::size_t folds = 10;
  std::string split = "kfold";
  std::string ratios = "2:4:4";
  int max_shift = 32;
  PreprocessOptions preprocess;
  bool chance_control = false;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  std::string out;
};

std::array<double, 3> parse_ratios(const std::string& s) {
  std::array<double, 3> r{};
  std::stringstream ss(s);
  std::string part;
  std::size_t i = 0;
  while (std::getline(ss, part, ':')) {
    if (i == 3) throw UsageError("--ratios expects train:val:test");
    try {
      r[i++] = std::stod(part);
    } catch (const std::exception&) {
      throw UsageError("--ratios: '" + part + "' is not a number");
    }
  }
  if (i != 3) throw UsageError("--ratios expects train:val:test");
  return r;
}

int cmd_eval(const EvalArgs& a) {
  if (a.model != kCentroidModel) throw UsageError("unknown model '" + a.model + "' (available: centroid)");
  if (a.datasets.empty()) throw UsageError("--dataset is required");
  for (const auto& d : a.datasets) require_dataset_dir(d);
  EvalOptions opt;
  if (a.split == "kfold") opt.split = SplitMode::kfold;
  else if (a.split == "holdout") opt.split = SplitMode::holdout;
  else throw UsageError("--split must be kfold or holdout");
  if (opt.split == SplitMode::kfold && a.folds < 2) throw UsageError("--folds must be >= 2");
  if (a.max_shift < 0) throw UsageError("--max-shift must be >= 0");
  opt.folds = a.folds;
  opt.holdout_weights = parse_ratios(a.ratios);
  opt.chance_control = a.chance_control;
  opt.centroid.max_shift = a.max_shift;
  if (a.preprocess.smooth_window == 0) throw UsageError("--smooth-window must be >= 1");
  opt.preprocess = a.preprocess;
  opt.workers = resolve_workers(a.workers);

  std::vector<LabeledDataset> data;
  for (const auto& d : a.datasets) data.push_back(read_dataset(d));
  opt.seed = resolve_seed(a.seed, data.front().manifest.master_seed);
  std::vector<const LabeledDataset*> ptrs;
  for (const auto& d : data) ptrs.push_back(&d);

  SweepReport rep;
  try {
    rep = sweep_report(ptrs, opt);
  } catch (const EvalError& e) {
    throw UsageError(e.what());
  }
  write_reports(rep, a.out);
  for (const auto& r : rep.results)
    std::cout << r.cell << '\t' << r.model << '\t' << format_accuracy(r.cv.mean) << " +- "
              << format_accuracy(r.cv.stddev) << '\n';
  for (const auto& m : rep.models) std::cout << "grand\t" << m << '\t' << format_accuracy(rep.grand_mean(m)) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct LinkArgs {
  double anchor_photons = 5000.0;
  double anchor_km = 5.0;
  std::vector<double> distances_km;
  double ref_energy_nj = 400.0;
  std::vector<double> energy_km;
  std::optional<double> lumped_a;
  std::optional<double> emitted;
};

int cmd_linkbudget(const LinkArgs& a) {
  if (!(a.anchor_photons >= 0.0 && a.anchor_km > 0.0)) throw UsageError("anchor needs photons >= 0, km > 0");
  for (double d : a.distances_km)
    if (!(d > 0.0)) throw UsageError("distances must be > 0");
  for (double d : a.energy_km)
    if (!(d > 0.0)) throw UsageError("distances must be > 0");
  if (a.lumped_a.has_value() != a.emitted.has_value())
    throw UsageError("--lumped-a and --emitted go together");

  std::printf("distance_km\tsignal_photons\n");
  const InverseSquareAnchor anchor{a.anchor_photons, Distance::km(a.anchor_km)};
  for (double d : a.distances_km) {
    double ns = anchor.signal_at(Distance::km(d));
    if (a.lumped_a) {
      LinkBudget lb;
      lb.lumped_a = *a.lumped_a;
      lb.emitted_photons = *a.emitted;
      ns = signal_photons(lb, Distance::km(d));
    }
    std::printf("%s\t%.10g\n", format_number(d).c_str(), ns);
  }
  if (!a.energy_km.empty()) {
    const EnergyReference ref{a.anchor_photons, Distance::km(a.anchor_km), a.ref_energy_nj * 1e-9};
    std::printf("\ndistance_km\tpulse_energy_mJ\n");
    for (double d : a.energy_km)
      std::printf("%s\t%.10g\n", format_number(d).c_str(),
                  required_pulse_energy(a.anchor_photons, Distance::km(d), ref) * 1e3);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic single-photon time-of-flight histogram datasets"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a dataset from a preset or config file");
  g->add_option("--preset", gen.preset, "bundled config: comparison or distance");
  g->add_option("--config", gen.config, "JSON config file")->check(CLI::ExistingFile);
  g->add_option("--seed", gen.seed, "master seed (overrides TOF_FORGE_SEED and the config)");
  g->add_option("--workers", gen.workers, "worker threads (0 = all cores)");
  g->add_option("--out", gen.out, "output directory")->required();
  g->add_flag("--reproducible", gen.reproducible, "omit the timestamp from the manifest");
  g->add_flag("--keep-partial", gen.keep_partial, "skip failing scenarios instead of aborting");
  g->add_flag("--csv", gen.csv, "also write samples.csv");

  ThinArgs th;
  auto* t = app.add_subcommand("thin", "binomially thin every histogram of a dataset");
  t->add_option("--in", th.in, "source dataset directory")->required();
  t->add_option("--ratio", th.ratio, "keep probability in [0, 1]")->required();
  t->add_option("--seed", th.seed, "thinning seed (default: TOF_FORGE_SEED, then the source seed)");
  t->add_option("--out", th.out, "output directory")->required();
  t->add_flag("--reproducible", th.reproducible, "omit the timestamp from the manifest");
  t->add_flag("--csv", th.csv, "also write samples.csv");

  PreprocessArgs pp;
  auto* p = app.add_subcommand("preprocess", "emit golden preprocessing vectors");
  p->add_option("--in", pp.in, "dataset directory")->required();
  p->add_option("--out", pp.out, "output JSON file")->required();
  p->add_option("--count", pp.count, "number of samples")->capture_default_str();
  p->add_option("--smooth-window", pp.options.smooth_window, "moving-sum window in bins")->capture_default_str();
  p->add_option("--anchor-bin", pp.options.anchor_bin, "bin that receives the smoothed peak")->capture_default_str();

  EvalArgs ev;
  auto add_eval = [&](CLI::App* c, bool many) {
    auto* opt = c->add_option("--dataset", ev.datasets, many ? "dataset directories" : "dataset directory");
    opt->required();
    if (!many) opt->expected(1);
    c->add_option("--model", ev.model, "baseline model")->capture_default_str();
    c->add_option("--folds", ev.folds, "number of cross-validation folds")->capture_default_str();
    c->add_option("--split", ev.split, "kfold or holdout")->capture_default_str();
    c->add_option("--ratios", ev.ratios, "holdout train:val:test weights")->capture_default_str();
    c->add_option("--max-shift", ev.max_shift, "centroid shift search in bins")->capture_default_str();
    c->add_option("--smooth-window", ev.preprocess.smooth_window, "alignment moving-sum window in bins")
        ->capture_default_str();
    c->add_option("--anchor-bin", ev.preprocess.anchor_bin, "bin that receives the smoothed peak")
        ->capture_default_str();
    c->add_flag("--chance-control", ev.chance_control, "also evaluate with shuffled labels");
    c->add_option("--seed", ev.seed, "fold seed (default: TOF_FORGE_SEED, then the dataset seed)");
    c->add_option("--workers", ev.workers, "worker threads (0 = all cores)");
    c->add_option("--out", ev.out, "report directory")->required();
  };
  auto* e = app.add_subcommand("eval", "cross-validate the centroid baseline on a dataset");
  add_eval(e, false);
  auto* s = app.add_subcommand("sweep", "evaluate several datasets (e.g. split ratios) in one report");
  add_eval(s, true);

  LinkArgs lk;
  auto* l = app.add_subcommand("linkbudget", "inverse-square signal and pulse-energy table");
  l->add_option("--anchor-photons", lk.anchor_photons, "signal photons at the anchor")->capture_default_str();
  l->add_option("--anchor-km", lk.anchor_km, "anchor distance in km")->capture_default_str();
  l->add_option("--distance-km", lk.distances_km, "query distances in km")->delimiter(',');
  l->add_option("--ref-energy-nj", lk.ref_energy_nj, "pulse energy at the anchor in nJ")->capture_default_str();
  l->add_option("--energy-km", lk.energy_km, "distances for the pulse-energy table")->delimiter(',');
  l->add_option("--lumped-a", lk.lumped_a, "lumped coefficient a (N_s = a N_e / d_km^2)");
  l->add_option("--emitted", lk.emitted, "emitted photons N_e for --lumped-a");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*t) return cmd_thin(th);
    if (*p) return cmd_preprocess(pp);
    if (*e || *s) return cmd_eval(ev);
    if (*l) return cmd_linkbudget(lk);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const GenerationError& err) {
    std::cerr << "generation failed: " << err.what() << '\n';
    return kExitRuntime;
  } catch (const DatasetError& err) {
    std::cerr << "dataset error: " << err.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
