#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tofforge/config.hpp"
#include "tofforge/dataset.hpp"

using namespace tofforge;

namespace {

ScenarioSpec small_spec() {
  auto j = preset_json("comparison");
  j["poses"] = {{"theta_x_deg", {0, 60}}, {"theta_z_deg", {0, 120}}};
  j["grid"]["snr"] = {1, 0.01};
  j["grid"]["n_pulses"] = {100000};
  j["replicates"] = 3;
  j["seed"] = 11;
  return parse_scenario(j);
}

TargetSpec plate() {
  TargetSpec t;
  t.name = "plate";
  t.geometry = DepthGridSource{"inline", "5.0\n"};
  t.view_axis = ViewAxis::z;
  return t;
}

}  // namespace

TEST(Generate, GridArithmetic) {
  EXPECT_EQ(parse_scenario(preset_json("comparison")).sample_count(), 36000u);
  EXPECT_EQ(parse_scenario(preset_json("distance")).sample_count(), 252000u);

  auto j = preset_json("comparison");
  j["replicates"] = 2;
  const auto ds = generate(parse_scenario(j));
  EXPECT_EQ(ds.samples.size(), 18u * 5u * 4u * 2u);
  EXPECT_EQ(ds.manifest.sample_count, ds.samples.size());
  EXPECT_EQ(ds.manifest.label_map.size(), 18u);
}

TEST(Generate, RecordOrderAndLabels) {
  const auto spec = small_spec();
  const auto ds = generate(spec);
  ASSERT_EQ(ds.samples.size(), spec.sample_count());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    EXPECT_EQ(s.scenario_id, i / 3);
    EXPECT_EQ(s.replicate_id, i % 3);
    EXPECT_EQ(s.label, ds.manifest.scenarios[s.scenario_id].label);
    EXPECT_EQ(s.histogram.counts.size(), 1024u);
    EXPECT_EQ(s.histogram.n_pulses, 100000u);
    for (auto c : s.histogram.counts) ASSERT_LE(c, 100000u);
  }
}

TEST(Generate, IndependentOfWorkerCount) {
  const auto spec = small_spec();
  const auto a = generate(spec, {1, false});
  const auto b = generate(spec, {3, false});
  const auto c = generate(spec, {8, false});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Generate, SeedChangesOutput) {
  auto spec = small_spec();
  const auto a = generate(spec);
  spec.master_seed = 12;
  const auto b = generate(spec);
  EXPECT_NE(a.samples, b.samples);
}

TEST(Generate, IdenticalCellsGetIndependentStreams) {
  auto spec = small_spec();
  spec.poses = {Pose::from_degrees(0, 0), Pose::from_degrees(0, 0)};
  spec.snr_list = {1};
  spec.replicates = 1;
  const auto ds = generate(spec);
  ASSERT_EQ(ds.samples.size(), 2u);
  EXPECT_NE(ds.samples[0].scenario_id, ds.samples[1].scenario_id);
  EXPECT_NE(ds.samples[0].histogram, ds.samples[1].histogram);
}

TEST(Generate, TotalCountsFollowSignalAndNoise) {
  // Dead time spans the window, so at most one count per pulse and the
  // expected total is N_pulse * sum P.
  auto spec = small_spec();
  spec.replicates = 20;
  spec.snr_list = {1};
  const auto ds = generate(spec);
  const auto cloud = spec.targets[0].cloud();
  for (const auto& sc : ds.manifest.scenarios) {
    const auto model = model_scenario(spec, sc, cloud);
    double sumP = 0;
    for (double p : model.detection.probs) sumP += p;
    double mean = 0;
    for (const auto& s : ds.samples)
      if (s.scenario_id == sc.id) mean += static_cast<double>(s.histogram.total()) / 20.0;
    const double n = static_cast<double>(sc.n_pulses);
    const double sigma = std::sqrt(n * sumP * (1 - sumP) / 20.0);
    EXPECT_NEAR(mean, n * sumP, 4 * sigma) << sc.id;
    // N_s and N_n already include the detection efficiency.
    EXPECT_NEAR(sumP, -std::expm1(-(sc.signal_photons + sc.noise_photons) / n), 1e-3 * sumP);
  }
}

TEST(Generate, OutOfWindowAbortsOrSkips) {
  auto spec = small_spec();
  spec.targets = {plate(), TargetSpec{}};
  spec.acquisition.anchor_bin = 1000;
  bool threw = false;
  try {
    generate(spec);
  } catch (const GenerationError& e) {
    threw = true;
    EXPECT_FALSE(e.failures().empty());
  }
  EXPECT_TRUE(threw);

  const auto ds = generate(spec, {1, true});
  EXPECT_FALSE(ds.samples.empty());
  EXPECT_TRUE(ds.manifest.provenance.contains("skipped"));
  for (const auto& sc : ds.manifest.scenarios) EXPECT_EQ(sc.target, 0u);
  EXPECT_EQ(ds.manifest.sample_count, ds.samples.size());
}

TEST(Thin, RatioOneIsIdentity) {
  auto rng = RngStream::derive(1, StreamPurpose::thinning);
  const Histogram h{{5, 0, 17, 100000}, 10e-12, 100000};
  EXPECT_EQ(thin(h, 1.0, rng), h);
}

TEST(Thin, RatioZeroIsEmpty) {
  auto rng = RngStream::derive(1, StreamPurpose::thinning);
  const Histogram h{{5, 0, 17, 100000}, 10e-12, 100000};
  EXPECT_EQ(thin(h, 0.0, rng).total(), 0u);
}

TEST(Thin, OutOfRangeRejected) {
  auto rng = RngStream::derive(1, StreamPurpose::thinning);
  const Histogram h{{5}, 10e-12, 10};
  EXPECT_THROW(thin(h, 1.5, rng), DomainError);
  EXPECT_THROW(thin(h, -0.1, rng), DomainError);
  EXPECT_THROW(thin(h, std::nan(""), rng), DomainError);
}

TEST(Thin, BinomialMean) {
  const Histogram h{{100, 0, 50}, 10e-12, 1000};
  const int draws = 10000;
  std::vector<double> sum(3, 0.0);
  for (int i = 0; i < draws; ++i) {
    auto rng = RngStream::derive(2, StreamPurpose::thinning, 0, static_cast<std::uint64_t>(i));
    const auto t = thin(h, 0.5, rng);
    for (int k = 0; k < 3; ++k) {
      ASSERT_LE(t.counts[k], h.counts[k]);
      sum[k] += t.counts[k];
    }
  }
  EXPECT_EQ(sum[1], 0.0);
  EXPECT_NEAR(sum[0] / draws, 50.0, 4 * std::sqrt(100 * 0.25 / draws));
  EXPECT_NEAR(sum[2] / draws, 25.0, 4 * std::sqrt(50 * 0.25 / draws));
}

TEST(Thin, DatasetKeepsIdsAndRecordsRatio) {
  const auto ds = generate(small_spec());
  const auto half = thin_dataset(ds, 0.5, 9);
  const auto quarter = thin_dataset(half, 0.5, 10);
  EXPECT_DOUBLE_EQ(quarter.manifest.split_ratio, 0.25);
  ASSERT_EQ(quarter.samples.size(), ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    EXPECT_EQ(quarter.samples[i].scenario_id, ds.samples[i].scenario_id);
    EXPECT_EQ(quarter.samples[i].label, ds.samples[i].label);
  }
  EXPECT_EQ(thin_dataset(ds, 0.5, 9), half);
  EXPECT_EQ(thin_dataset(ds, 1.0, 9).samples, ds.samples);
}

TEST(Preprocess, SpikeMovesToAnchor) {
  std::vector<std::uint32_t> h(1024, 0);
  h[700] = 42;
  const auto out = preprocess(h);
  for (std::size_t k = 0; k < out.size(); ++k) EXPECT_EQ(out[k], k == 256 ? 1.0 : 0.0);
}

TEST(Preprocess, ZerosStayZero) {
  const std::vector<std::uint32_t> h(1024, 0);
  const auto out = preprocess(h);
  EXPECT_TRUE(std::all_of(out.begin(), out.end(), [](double v) { return v == 0.0; }));
}

TEST(Preprocess, CircularShiftInvariance) {
  auto rng = RngStream::derive(3, StreamPurpose::test);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint32_t> h(256);
    const auto levels = 1 + rng() % 4;  // few distinct values produce ties
    for (auto& c : h) c = static_cast<std::uint32_t>(rng() % levels);
    const PreprocessOptions opt{1 + rng() % 31, rng() % 256};
    const auto base = preprocess(h, opt);
    for (int s = 0; s < 5; ++s) {
      auto shifted = h;
      std::rotate(shifted.begin(), shifted.begin() + static_cast<std::ptrdiff_t>(rng() % 256), shifted.end());
      ASSERT_EQ(preprocess(shifted, opt), base) << "trial " << trial;
    }
  }
}

TEST(Preprocess, OutputNormalized) {
  auto rng = RngStream::derive(4, StreamPurpose::test);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint32_t> h(1024);
    for (auto& c : h) c = static_cast<std::uint32_t>(rng() % 1000);
    const auto out = preprocess(h);
    EXPECT_EQ(*std::max_element(out.begin(), out.end()), 1.0);
    EXPECT_GE(*std::min_element(out.begin(), out.end()), 0.0);
  }
}

TEST(Preprocess, InvalidWindowRejected) {
  const std::vector<std::uint32_t> h(16, 1);
  EXPECT_THROW(preprocess(h, {0, 4}), ConfigError);
  EXPECT_THROW(preprocess(h, {17, 4}), ConfigError);
}
