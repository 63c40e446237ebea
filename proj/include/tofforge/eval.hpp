// eval.hpp -- cross-validation, nearest-centroid baseline, sweep reports
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tofforge/dataset.hpp"
#include "tofforge/parallel.hpp"
#include "tofforge/rng.hpp"

namespace tofforge {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

/// Fold index per sample. For holdout plans the "folds" are the roles
/// 0 = train, 1 = validation, 2 = test.
struct FoldPlan {
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> assignment;

  std::vector<std::size_t> members(std::uint32_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == f) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> complement(std::uint32_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] != f) out.push_back(i);
    return out;
  }
  friend bool operator==(const FoldPlan&, const FoldPlan&) = default;
};

namespace detail {

inline std::string class_name(std::uint16_t c, const std::vector<std::string>* names) {
  if (names && c < names->size()) return "'" + (*names)[c] + "' (" + std::to_string(c) + ")";
  return std::to_string(c);
}

/// Sample indices per class, each list shuffled by its own stream.
inline std::vector<std::vector<std::size_t>> shuffled_classes(std::span<const std::uint16_t> labels,
                                                              std::size_t num_classes,
                                                              std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw EvalError("label " + std::to_string(labels[i]) + " outside label map");
    by_class[labels[i]].push_back(i);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto rng = RngStream::derive(seed, StreamPurpose::folds, c);
    std::shuffle(by_class[c].begin(), by_class[c].end(), rng);
  }
  return by_class;
}

}  // namespace detail

/// Stratified F-fold plan. Class lists are shuffled, concatenated in class
/// order and dealt round-robin, so fold sizes differ by at most one and each
/// class is spread as evenly as possible. Classes absent from `labels` are
/// ignored; present classes need at least F samples.
inline FoldPlan make_folds(std::span<const std::uint16_t> labels, std::size_t num_classes, std::size_t folds,
                           std::uint64_t seed, const std::vector<std::string>* names = nullptr) {
  if (folds < 2) throw EvalError("at least 2 folds are required");
  const auto by_class = detail::shuffled_classes(labels, num_classes, seed);
  for (std::size_t c = 0; c < num_classes; ++c)
    if (!by_class[c].empty() && by_class[c].size() < folds)
      throw EvalError("class " + detail::class_name(static_cast<std::uint16_t>(c), names) + " has " +
                      std::to_string(by_class[c].size()) + " samples, fewer than " + std::to_string(folds) +
                      " folds");
  FoldPlan plan{folds, seed, std::vector<std::uint32_t>(labels.size())};
  std::size_t pos = 0;
  for (const auto& members : by_class)
    for (auto i : members) plan.assignment[i] = static_cast<std::uint32_t>(pos++ % folds);
  return plan;
}

/// Stratified train / validation / test split with the given weights
/// (default 2:4:4). Per class the first round(n w0/W) shuffled samples go to
/// train, the next round(n (w0+w1)/W) - that to validation, the rest to test.
inline FoldPlan make_holdout(std::span<const std::uint16_t> labels, std::size_t num_classes,
                             std::array<double, 3> weights, std::uint64_t seed,
                             const std::vector<std::string>* names = nullptr) {
  const double total = weights[0] + weights[1] + weights[2];
  if (!(weights[0] > 0 && weights[1] >= 0 && weights[2] > 0))
    throw EvalError("holdout weights need train > 0, validation >= 0, test > 0");
  const auto by_class = detail::shuffled_classes(labels, num_classes, seed);
  FoldPlan plan{3, seed, std::vector<std::uint32_t>(labels.size())};
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto& m = by_class[c];
    if (m.empty()) continue;
    const auto n = static_cast<double>(m.size());
    const auto n_train = static_cast<std::size_t>(std::llround(n * weights[0] / total));
    const auto n_val = static_cast<std::size_t>(std::llround(n * (weights[0] + weights[1]) / total)) - n_train;
    if (n_train == 0 || n_train + n_val >= m.size())
      throw EvalError("class " + detail::class_name(static_cast<std::uint16_t>(c), names) +
                      " too small for the holdout split");
    for (std::size_t j = 0; j < m.size(); ++j)
      plan.assignment[m[j]] = j < n_train ? 0u : (j < n_train + n_val ? 1u : 2u);
  }
  return plan;
}

/// Random permutation of the labels (chance-level control).
inline std::vector<std::uint16_t> shuffle_labels(std::span<const std::uint16_t> labels, std::uint64_t seed) {
  std::vector<std::uint16_t> out(labels.begin(), labels.end());
  auto rng = RngStream::derive(seed, StreamPurpose::shuffle);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// ---------------------------------------------------------------------------
// Confusion matrix
// ---------------------------------------------------------------------------

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes) : n_{classes}, counts_(classes * classes, 0) {}

  std::size_t classes() const noexcept { return n_; }
  void add(std::size_t truth, std::size_t predicted) { ++counts_.at(truth * n_ + predicted); }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * n_ + predicted); }

  std::uint64_t row_sum(std::size_t truth) const {
    return std::accumulate(counts_.begin() + truth * n_, counts_.begin() + (truth + 1) * n_, std::uint64_t{0});
  }
  std::uint64_t trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < n_; ++i) t += counts_[i * n_ + i];
    return t;
  }
  std::uint64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }
  double accuracy() const {
    const auto t = total();
    return t == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(t);
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    if (o.n_ != n_) throw EvalError("confusion matrices of different size");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> counts_;
};

// ---------------------------------------------------------------------------
// Nearest-centroid baseline
// ---------------------------------------------------------------------------

struct CentroidOptions {
  int max_shift = 32;  // circular shift search in [-max_shift, +max_shift]
};

/// Per-class mean templates matched by normalized cross-correlation. Scores
/// are maximized over circular shifts; ties go to the lowest class index and
/// a zero-norm sample or template scores 0.
class CentroidModel {
 public:
  static CentroidModel train(const std::vector<std::vector<double>>& x, std::span<const std::uint16_t> y,
                             std::span<const std::size_t> rows, std::size_t num_classes,
                             CentroidOptions opt = {}) {
    if (num_classes == 0) throw EvalError("no classes");
    if (opt.max_shift < 0) throw EvalError("max_shift must be >= 0");
    CentroidModel m;
    m.opt_ = opt;
    m.dim_ = rows.empty() ? 0 : x[rows.front()].size();
    m.templates_.assign(num_classes, std::vector<double>(m.dim_, 0.0));
    std::vector<std::size_t> n(num_classes, 0);
    for (auto r : rows) {
      if (x[r].size() != m.dim_) throw EvalError("feature vectors of different length");
      auto& t = m.templates_.at(y[r]);
      for (std::size_t i = 0; i < m.dim_; ++i) t[i] += x[r][i];
      ++n[y[r]];
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (n[c] == 0) throw EvalError("class " + std::to_string(c) + " has no training samples");
      for (auto& v : m.templates_[c]) v /= static_cast<double>(n[c]);
    }
    m.finish();
    return m;
  }

  static CentroidModel from_templates(std::vector<std::vector<double>> templates, CentroidOptions opt = {}) {
    if (templates.empty()) throw EvalError("no templates");
    CentroidModel m;
    m.opt_ = opt;
    m.dim_ = templates.front().size();
    for (const auto& t : templates)
      if (t.size() != m.dim_) throw EvalError("templates of different length");
    m.templates_ = std::move(templates);
    m.finish();
    return m;
  }

  const std::vector<std::vector<double>>& templates() const noexcept { return templates_; }
  std::size_t classes() const noexcept { return templates_.size(); }

  /// Best NCC score of `x` against template c.
  double score(std::span<const double> x, std::size_t c) const {
    return score_with(extend(x), norm(x), c);
  }

  std::uint16_t classify(std::span<const double> x) const {
    if (x.size() != dim_) throw EvalError("sample length differs from templates");
    const auto ext = extend(x);
    const double nx = norm(x);
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < templates_.size(); ++c) {
      const double s = score_with(ext, nx, c);
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    return static_cast<std::uint16_t>(best);
  }

 private:
  void finish() {
    norms_.clear();
    for (const auto& t : templates_) norms_.push_back(norm(t));
  }

  static double norm(std::span<const double> v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
  }

  // x padded circularly by max_shift on both sides, so that shift s reads
  // ext[i + s + max_shift] == x[(i + s) mod K].
  std::vector<double> extend(std::span<const double> x) const {
    const std::size_t k = x.size(), m = static_cast<std::size_t>(opt_.max_shift);
    std::vector<double> ext(k + 2 * m);
    if (k == 0) return ext;
    for (std::size_t j = 0; j < ext.size(); ++j) ext[j] = x[(j + k * (m / k + 1) - m) % k];
    return ext;
  }

  double score_with(const std::vector<double>& ext, double nx, std::size_t c) const {
    const double denom = nx * norms_[c];
    if (!(denom > 0.0)) return 0.0;
    const auto& t = templates_[c];
    const std::size_t k = t.size();
    double best = -std::numeric_limits<double>::infinity();
    for (int s = -opt_.max_shift; s <= opt_.max_shift; ++s) {
      const double* xs = ext.data() + (s + opt_.max_shift);
      double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
      std::size_t i = 0;
      for (; i + 4 <= k; i += 4) {
        a0 += t[i] * xs[i];
        a1 += t[i + 1] * xs[i + 1];
        a2 += t[i + 2] * xs[i + 2];
        a3 += t[i + 3] * xs[i + 3];
      }
      for (; i < k; ++i) a0 += t[i] * xs[i];
      best = std::max(best, (a0 + a1) + (a2 + a3));
    }
    return best / denom;
  }

  CentroidOptions opt_;
  std::size_t dim_ = 0;
  std::vector<std::vector<double>> templates_;
  std::vector<double> norms_;
};

/// Trainer adapter for run_cv.
struct CentroidTrainer {
  CentroidOptions options;
  CentroidModel operator()(const std::vector<std::vector<double>>& x, std::span<const std::uint16_t> y,
                           std::span<const std::size_t> rows, std::size_t num_classes) const {
    return CentroidModel::train(x, y, rows, num_classes, options);
  }
};

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct CvResult {
  std::vector<ConfusionMatrix> per_fold;
  std::vector<double> accuracy;  // per fold, trace / total
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over folds

  ConfusionMatrix pooled() const {
    ConfusionMatrix m(per_fold.empty() ? 0 : per_fold.front().classes());
    for (const auto& f : per_fold) m += f;
    return m;
  }
};

inline void summarize(CvResult& r) {
  const auto n = static_cast<double>(r.accuracy.size());
  if (r.accuracy.empty()) return;
  r.mean = std::accumulate(r.accuracy.begin(), r.accuracy.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : r.accuracy) ss += (a - r.mean) * (a - r.mean);
  r.stddev = r.accuracy.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

/// Trains on all folds but f and tests on f, for every f. `trainer` is
/// called as trainer(x, y, train_rows, num_classes) and must return a model
/// with a const classify(span<const double>). Folds run in parallel and are
/// reported in fold order.
template <class Trainer>
CvResult run_cv(const std::vector<std::vector<double>>& x, std::span<const std::uint16_t> y,
                std::size_t num_classes, const FoldPlan& plan, const Trainer& trainer, unsigned workers = 1) {
  if (plan.assignment.size() != x.size() || y.size() != x.size())
    throw EvalError("fold plan, features and labels differ in length");
  for (auto f : plan.assignment)
    if (f >= plan.folds) throw EvalError("fold index outside plan");
  CvResult r;
  r.per_fold.assign(plan.folds, ConfusionMatrix(num_classes));
  r.accuracy.assign(plan.folds, 0.0);
  parallel_for(plan.folds, workers, [&](std::size_t f) {
    const auto fold = static_cast<std::uint32_t>(f);
    const auto train_rows = plan.complement(fold);
    const auto model = trainer(x, y, std::span<const std::size_t>(train_rows), num_classes);
    auto& cm = r.per_fold[f];
    for (auto i : plan.members(fold)) cm.add(y[i], model.classify(x[i]));
    r.accuracy[f] = cm.accuracy();
  });
  summarize(r);
  return r;
}

/// Trains on role 0 of a holdout plan and tests on role 2.
template <class Trainer>
CvResult run_holdout(const std::vector<std::vector<double>>& x, std::span<const std::uint16_t> y,
                     std::size_t num_classes, const FoldPlan& plan, const Trainer& trainer) {
  if (plan.assignment.size() != x.size() || y.size() != x.size())
    throw EvalError("split plan, features and labels differ in length");
  const auto train_rows = plan.members(0);
  const auto model = trainer(x, y, std::span<const std::size_t>(train_rows), num_classes);
  CvResult r;
  r.per_fold.assign(1, ConfusionMatrix(num_classes));
  for (auto i : plan.members(2)) r.per_fold[0].add(y[i], model.classify(x[i]));
  r.accuracy = {r.per_fold[0].accuracy()};
  summarize(r);
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps over dataset cells
// ---------------------------------------------------------------------------

/// Samples sharing one acquisition condition.
struct Cell {
  std::string key;  // axis value, e.g. "distance_km=5;snr=0.1;n_pulses=1000000"
  std::vector<std::size_t> samples;  // indices into the dataset
};

/// Groups samples by condition, in order of first appearance.
inline std::vector<Cell> cells_of(const LabeledDataset& ds, const std::string& prefix = {}) {
  std::vector<Cell> cells;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto* s = ds.manifest.find_scenario(ds.samples[i].scenario_id);
    if (!s) throw EvalError("sample refers to unknown scenario " + std::to_string(ds.samples[i].scenario_id));
    const auto key = prefix + condition_key(*s);
    auto [it, inserted] = index.try_emplace(key, cells.size());
    if (inserted) cells.push_back(Cell{key, {}});
    cells[it->second].samples.push_back(i);
  }
  return cells;
}

enum class SplitMode { kfold, holdout };

struct EvalOptions {
  SplitMode split = SplitMode::kfold;
  std::size_t folds = 10;
  std::array<double, 3> holdout_weights{2.0, 4.0, 4.0};
  std::uint64_t seed = 0;
  bool chance_control = false;  // add a shuffled-label run per cell
  CentroidOptions centroid;
  PreprocessOptions preprocess;
  unsigned workers = 1;
};

struct CellModelResult {
  std::string cell;
  std::string model;
  CvResult cv;
};

struct FoldRecord {
  std::string cell;
  std::uint32_t scenario_id;
  std::uint32_t replicate_id;
  std::uint32_t fold;
};

struct SweepReport {
  std::vector<std::string> label_map;
  std::vector<std::string> models;
  std::vector<std::string> cells;
  std::vector<CellModelResult> results;  // cell-major, then model
  std::vector<FoldRecord> folds;

  const CellModelResult* find(const std::string& cell, const std::string& model) const {
    for (const auto& r : results)
      if (r.cell == cell && r.model == model) return &r;
    return nullptr;
  }

  /// Mean over cells of the per-cell mean accuracy.
  double grand_mean(const std::string& model) const {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& r : results)
      if (r.model == model) s += r.cv.mean, ++n;
    return n ? s / static_cast<double>(n) : 0.0;
  }
};

inline constexpr const char* kCentroidModel = "centroid";
inline constexpr const char* kShuffledModel = "centroid_shuffled";

/// Cross-validates the centroid baseline on every cell of every dataset.
/// With several datasets each cell key is prefixed by the dataset's
/// cumulative split ratio. All datasets must share one label map.
inline SweepReport sweep_report(const std::vector<const LabeledDataset*>& datasets, const EvalOptions& opt) {
  if (datasets.empty()) throw EvalError("no datasets to evaluate");
  SweepReport rep;
  rep.label_map = datasets.front()->manifest.label_map;
  rep.models = {kCentroidModel};
  if (opt.chance_control) rep.models.push_back(kShuffledModel);
  const std::size_t num_classes = rep.label_map.size();

  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const auto& ds = *datasets[d];
    if (ds.manifest.label_map != rep.label_map)
      throw EvalError("label maps differ between datasets 0 and " + std::to_string(d));
    const std::string prefix =
        datasets.size() > 1 ? "split_ratio=" + format_number(ds.manifest.split_ratio) + ";" : "";
    for (const auto& cell : cells_of(ds, prefix)) {
      rep.cells.push_back(cell.key);
      std::vector<std::vector<double>> x(cell.samples.size());
      std::vector<std::uint16_t> y(cell.samples.size());
      parallel_for(cell.samples.size(), opt.workers, [&](std::size_t j) {
        x[j] = preprocess(ds.samples[cell.samples[j]].histogram, opt.preprocess);
      });
      for (std::size_t j = 0; j < y.size(); ++j) y[j] = ds.samples[cell.samples[j]].label;

      // Same seed in every cell: cells with equal labels share one fold plan.
      const std::uint64_t cell_seed = opt.seed;
      auto plan_for = [&](std::span<const std::uint16_t> labels) {
        return opt.split == SplitMode::kfold
                   ? make_folds(labels, num_classes, opt.folds, cell_seed, &rep.label_map)
                   : make_holdout(labels, num_classes, opt.holdout_weights, cell_seed, &rep.label_map);
      };
      auto evaluate = [&](std::span<const std::uint16_t> labels, const FoldPlan& plan) {
        const CentroidTrainer trainer{opt.centroid};
        return opt.split == SplitMode::kfold ? run_cv(x, labels, num_classes, plan, trainer, opt.workers)
                                             : run_holdout(x, labels, num_classes, plan, trainer);
      };

      const auto plan = plan_for(y);
      for (std::size_t j = 0; j < cell.samples.size(); ++j) {
        const auto& s = ds.samples[cell.samples[j]];
        rep.folds.push_back({cell.key, s.scenario_id, s.replicate_id, plan.assignment[j]});
      }
      rep.results.push_back({cell.key, kCentroidModel, evaluate(y, plan)});
      if (opt.chance_control) {
        const auto shuffled = shuffle_labels(y, cell_seed);
        rep.results.push_back({cell.key, kShuffledModel, evaluate(shuffled, plan_for(shuffled))});
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

/// Filesystem-safe form of a cell key.
inline std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                      c == '-' || c == '_';
    out += keep ? c : (c == '=' ? '-' : '_');
  }
  return out.empty() ? "all" : out;
}

inline std::string format_accuracy(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", a);
  return buf;
}

/// Key-value pairs of a cell key ("a=1;b=2").
inline std::vector<std::pair<std::string, std::string>> split_key(const std::string& key) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, ';')) {
    const auto eq = part.find('=');
    if (eq != std::string::npos) out.emplace_back(part.substr(0, eq), part.substr(eq + 1));
  }
  return out;
}

/// report.tsv: one row per (cell, model, fold).
inline void write_report_tsv(const SweepReport& rep, std::ostream& out) {
  out << "axis_value\tmodel\tfold\taccuracy\n";
  for (const auto& r : rep.results)
    for (std::size_t f = 0; f < r.cv.accuracy.size(); ++f)
      out << r.cell << '\t' << r.model << '\t' << f << '\t' << format_accuracy(r.cv.accuracy[f]) << '\n';
}

/// summary.tsv: per-cell mean and std, marginal means along each axis
/// (mean of cell means) and the grand average per model.
inline void write_summary_tsv(const SweepReport& rep, std::ostream& out) {
  out << "scope\taxis_value\tmodel\tmean_accuracy\tstd_accuracy\tn\n";
  for (const auto& r : rep.results)
    out << "cell\t" << r.cell << '\t' << r.model << '\t' << format_accuracy(r.cv.mean) << '\t'
        << format_accuracy(r.cv.stddev) << '\t' << r.cv.accuracy.size() << '\n';

  std::vector<std::string> axes;
  for (const auto& [k, v] : split_key(rep.cells.empty() ? std::string{} : rep.cells.front())) axes.push_back(k);
  for (const auto& model : rep.models) {
    for (const auto& axis : axes) {
      std::vector<std::string> order;
      std::map<std::string, std::vector<double>> groups;
      for (const auto& r : rep.results) {
        if (r.model != model) continue;
        for (const auto& [k, v] : split_key(r.cell)) {
          if (k != axis) continue;
          if (!groups.count(v)) order.push_back(v);
          groups[v].push_back(r.cv.mean);
        }
      }
      if (order.size() < 2) continue;
      for (const auto& v : order) {
        const auto& g = groups[v];
        const double m = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
        double ss = 0.0;
        for (double a : g) ss += (a - m) * (a - m);
        const double sd = g.size() > 1 ? std::sqrt(ss / static_cast<double>(g.size() - 1)) : 0.0;
        out << "marginal\t" << axis << '=' << v << '\t' << model << '\t' << format_accuracy(m) << '\t'
            << format_accuracy(sd) << '\t' << g.size() << '\n';
      }
    }
    std::size_t n = 0;
    for (const auto& r : rep.results) n += r.model == model;
    out << "grand\tall\t" << model << '\t' << format_accuracy(rep.grand_mean(model)) << "\t\t" << n << '\n';
  }
}

/// Pooled (all folds) confusion matrix as CSV with label names.
inline void write_confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& labels,
                                std::ostream& out) {
  out << "true\\predicted";
  for (std::size_t c = 0; c < cm.classes(); ++c) out << ',' << (c < labels.size() ? labels[c] : std::to_string(c));
  out << '\n';
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    out << (t < labels.size() ? labels[t] : std::to_string(t));
    for (std::size_t p = 0; p < cm.classes(); ++p) out << ',' << cm.at(t, p);
    out << '\n';
  }
}

/// folds.csv: the split used for every sample, for reuse by other models.
inline void write_folds_csv(const SweepReport& rep, std::ostream& out) {
  out << "cell,scenario_id,replicate_id,fold\n";
  for (const auto& f : rep.folds)
    out << f.cell << ',' << f.scenario_id << ',' << f.replicate_id << ',' << f.fold << '\n';
}

/// Writes report.tsv, summary.tsv, folds.csv and confusion/<cell>__<model>.csv.
inline void write_reports(const SweepReport& rep, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "confusion");
  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::trunc);
    if (!f) throw EvalError("cannot write '" + p.string() + "'");
    return f;
  };
  {
    auto f = open(dir / "report.tsv");
    write_report_tsv(rep, f);
  }
  {
    auto f = open(dir / "summary.tsv");
    write_summary_tsv(rep, f);
  }
  {
    auto f = open(dir / "folds.csv");
    write_folds_csv(rep, f);
  }
  for (const auto& r : rep.results) {
    auto f = open(dir / "confusion" / (slug(r.cell) + "__" + r.model + ".csv"));
    write_confusion_csv(r.cv.pooled(), rep.label_map, f);
  }
}

}  // namespace tofforge
