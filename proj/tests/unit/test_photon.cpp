#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "../support/mc_detector_oracle.hpp"
#include "../support/stats.hpp"
#include "tofforge/photon.hpp"

using namespace tofforge;

namespace {

ImpulseResponse spike(std::size_t n, std::size_t at, double bw = 10e-12) {
  ImpulseResponse h{std::vector<double>(n, 0.0), bw, 0.0};
  h.bins[at] = 1.0;
  return h;
}

// Independent O(K * dead_bins) evaluation of the three-branch recursion.
std::vector<double> recursion_by_hand(const std::vector<double>& p0, std::int64_t d) {
  std::vector<double> P(p0.size());
  for (std::size_t k = 0; k < p0.size(); ++k) {
    double window = 0.0;
    const std::int64_t lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(k) - d);
    for (std::int64_t i = lo; i < static_cast<std::int64_t>(k); ++i) window += P[static_cast<std::size_t>(i)];
    P[k] = p0[k] * (1.0 - window);
  }
  return P;
}

}  // namespace

TEST(Blur, ZeroWidthIsIdentity) {
  ImpulseResponse h{{0.0, 1.0, 2.5, 0.0, 4.0}, 10e-12, 1e-9};
  const auto out = gaussian_blur(h, PulseModel{0.0, 0.0, 1e6});
  EXPECT_EQ(out.response.bins, h.bins);
  EXPECT_EQ(out.response.origin_time, h.origin_time);
  EXPECT_EQ(out.edge_loss, 0.0);
}

TEST(Blur, CombinedWidthFromSecondMoment) {
  const PulseModel pulse{10e-12, 150e-12, 1e6};
  EXPECT_NEAR(pulse.combined_sigma() * kFwhmPerSigma, std::sqrt(10.0 * 10.0 + 150.0 * 150.0) * 1e-12, 1e-18);
  EXPECT_NEAR(pulse.combined_sigma() * kFwhmPerSigma * 1e12, 150.33, 0.005);

  const double bw = 1e-12;  // fine grid so sampling barely perturbs the moment
  const auto out = gaussian_blur(spike(2001, 1000, bw), pulse);
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t k = 0; k < out.response.bins.size(); ++k) {
    const double x = static_cast<double>(k) * bw, w = out.response.bins[k];
    m0 += w, m1 += w * x, m2 += w * x * x;
  }
  const double var = m2 / m0 - (m1 / m0) * (m1 / m0);
  EXPECT_NEAR(std::sqrt(var) / pulse.combined_sigma(), 1.0, 1e-4);
}

TEST(Blur, SpikeMassConserved) {
  const auto out = gaussian_blur(spike(1024, 500), PulseModel{10e-12, 150e-12, 1e6});
  EXPECT_NEAR(out.response.total(), 1.0, 1e-6);
  EXPECT_LT(out.edge_loss, 1e-12);
}

TEST(Blur, EdgeLossReported) {
  const auto out = gaussian_blur(spike(1024, 0), PulseModel{10e-12, 150e-12, 1e6});
  EXPECT_NEAR(out.response.total() + out.edge_loss, 1.0, 1e-12);
  EXPECT_GT(out.edge_loss, 0.4);
}

TEST(Blur, KernelWiderThanWindowRejected) {
  EXPECT_THROW(gaussian_blur(spike(16, 8), PulseModel{10e-12, 150e-12, 1e6}), ConfigError);
}

TEST(Kernel, NormalizedAndSymmetric) {
  for (double s : {0.3, 1.0, 6.38, 20.0}) {
    const auto k = gaussian_kernel(s);
    EXPECT_EQ(k.size(), 2 * static_cast<std::size_t>(std::ceil(5.0 * s)) + 1);
    EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-14);
    for (std::size_t i = 0; i < k.size(); ++i) EXPECT_DOUBLE_EQ(k[i], k[k.size() - 1 - i]);
  }
}

TEST(Flux, NoiseFloorOnly) {
  ImpulseResponse e{std::vector<double>(1024, 0.0), 10e-12, 0.0};
  const auto f = flux_profile(e, DetectorModel{0.25, 0.0, 10e-12, 0.001}, 1.0);
  for (double m : f.means) EXPECT_EQ(m, 0.001);
}

TEST(Flux, IdentityAndCancellation) {
  ImpulseResponse e{{0.1, 0.0, 0.7, 0.2}, 10e-12, 0.0};
  EXPECT_EQ(flux_profile(e, DetectorModel{1.0, 0.0, 10e-12, 0.0}, 1.0).means, e.bins);
  EXPECT_EQ(flux_profile(e, DetectorModel{0.25, 0.0, 10e-12, 0.0}, 4.0).means, e.bins);
}

TEST(Flux, RejectsNegativeInputs) {
  ImpulseResponse e{{0.1, -0.1}, 10e-12, 0.0};
  EXPECT_THROW(flux_profile(e, DetectorModel{1.0, 0.0, 10e-12, 0.0}, 1.0), DomainError);
  ImpulseResponse ok{{0.1}, 10e-12, 0.0};
  EXPECT_THROW(flux_profile(ok, DetectorModel{1.0, 0.0, 10e-12, 0.0}, -1.0), DomainError);
  EXPECT_THROW(flux_profile(ok, DetectorModel{1.5, 0.0, 10e-12, 0.0}, 1.0), ConfigError);
}

TEST(PoissonProb, Examples) {
  const auto p = poisson_prob(FluxProfile{{0.0, std::log(2.0), 1e3, 1e-20}});
  EXPECT_EQ(p[0], 0.0);
  EXPECT_NEAR(p[1], 0.5, 1e-15);
  EXPECT_NEAR(p[2], 1.0, 1e-12);
  EXPECT_NEAR(p[3], 1e-20, 1e-35);
}

TEST(PoissonProb, MonotoneSaturation) {
  auto rng = RngStream::derive(1, StreamPurpose::test);
  for (int trial = 0; trial < 200; ++trial) {
    FluxProfile f;
    for (int k = 0; k < 64; ++k) f.means.push_back(rng.uniform() * 3.0);
    const double lambda = 1.0 + rng.uniform() * 10.0;
    FluxProfile g = f;
    for (auto& m : g.means) m *= lambda;
    const auto a = poisson_prob(f), b = poisson_prob(g);
    for (std::size_t k = 0; k < a.size(); ++k) {
      ASSERT_GE(b[k], a[k]);
      ASSERT_GE(a[k], 0.0);
      ASSERT_LE(a[k], 1.0);
    }
  }
}

TEST(DeadTime, HandRecursionExamples) {
  const std::vector<double> half{0.5, 0.5, 0.5};
  const auto a = deadtime_correct(half, 1).probs;
  EXPECT_DOUBLE_EQ(a[0], 0.5);
  EXPECT_DOUBLE_EQ(a[1], 0.25);
  EXPECT_DOUBLE_EQ(a[2], 0.375);

  const std::vector<double> fifth{0.2, 0.2, 0.2};
  const auto b = deadtime_correct(fifth, 3).probs;
  EXPECT_DOUBLE_EQ(b[0], 0.2);
  EXPECT_DOUBLE_EQ(b[1], 0.16);
  EXPECT_DOUBLE_EQ(b[2], 0.128);
  EXPECT_NEAR(b[0] + b[1] + b[2], 0.488, 1e-15);
}

TEST(DeadTime, ZeroDeadBinsIsIdentity) {
  const std::vector<double> p0{0.1, 0.9, 0.0, 1.0, 0.33};
  EXPECT_EQ(deadtime_correct(p0, 0).probs, p0);
}

TEST(DeadTime, InvalidInputRejected) {
  const std::vector<double> p0{0.1, 0.2};
  EXPECT_THROW(deadtime_correct(p0, -1), DomainError);
  const std::vector<double> bad{0.1, 1.2};
  EXPECT_THROW(deadtime_correct(bad, 1), DomainError);
}

TEST(DeadTime, MatchesDirectRecursion) {
  auto rng = RngStream::derive(2, StreamPurpose::test);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 1 + static_cast<std::size_t>(rng() % 64);
    std::vector<double> p0(n);
    for (auto& p : p0) p = rng.uniform();
    const auto d = static_cast<std::int64_t>(rng() % (2 * n + 1));
    const auto fast = deadtime_correct(p0, d).probs;
    const auto slow = recursion_by_hand(p0, d);
    for (std::size_t k = 0; k < n; ++k) ASSERT_NEAR(fast[k], slow[k], 1e-12) << "k=" << k << " d=" << d;
  }
}

TEST(DeadTime, BranchBoundaryCoincides) {
  // At k == dead_bins the window [k - d, k - 1] equals [0, k - 1].
  const std::vector<double> p0{0.3, 0.4, 0.5, 0.6, 0.7};
  for (std::int64_t d = 1; d < 5; ++d) {
    const auto P = deadtime_correct(p0, d).probs;
    double head = 0.0;
    for (std::int64_t i = 0; i < d; ++i) head += P[static_cast<std::size_t>(i)];
    EXPECT_NEAR(P[static_cast<std::size_t>(d)], p0[static_cast<std::size_t>(d)] * (1.0 - head), 1e-15);
  }
}

TEST(DeadTime, SingleShotAndSuppression) {
  auto rng = RngStream::derive(3, StreamPurpose::test);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = 1 + static_cast<std::size_t>(rng() % 64);
    std::vector<double> p0(n);
    const double top = rng.uniform();
    for (auto& p : p0) p = top * rng.uniform();
    const auto d = static_cast<std::int64_t>(n + rng() % 16);
    const auto P = deadtime_correct(p0, d).probs;
    EXPECT_LE(std::accumulate(P.begin(), P.end(), 0.0), 1.0 + 1e-12);
    for (std::size_t k = 0; k < n; ++k) {
      ASSERT_LE(P[k], p0[k]);
      ASSERT_GE(P[k], 0.0);
    }
  }
}

TEST(Oracle, DeterministicExamples) {
  auto rng = RngStream::derive(4, StreamPurpose::test);
  const std::vector<double> ones{1.0, 1.0};
  EXPECT_EQ(oracle::simulate(ones, 2, 1000, rng), (std::vector<std::uint64_t>{1000, 0}));
}

TEST(Oracle, AgreesWithRecursion) {
  auto rng = RngStream::derive(5, StreamPurpose::test);
  const std::uint64_t trials = 1'000'000;
  const std::vector<double> half{0.5, 0.5, 0.5};
  const auto expect = deadtime_correct(half, 1).probs;
  const auto got = oracle::simulate(half, 1, trials, rng);
  for (std::size_t k = 0; k < 3; ++k) {
    const double sigma = std::sqrt(static_cast<double>(trials) * expect[k] * (1 - expect[k]));
    EXPECT_TRUE(teststats::within_sigma(static_cast<double>(got[k]), trials * expect[k], sigma, 3.0)) << k;
  }
  const std::vector<double> p0{0.1, 0.7, 0.3, 0.05};
  const auto free_run = oracle::simulate(p0, 0, trials, rng);
  for (std::size_t k = 0; k < p0.size(); ++k) {
    const double sigma = std::sqrt(trials * p0[k] * (1 - p0[k]));
    EXPECT_TRUE(teststats::within_sigma(static_cast<double>(free_run[k]), trials * p0[k], sigma, 3.0)) << k;
  }
}

TEST(Oracle, FastAndNaiveStateMachinesAgree) {
  auto rng = RngStream::derive(6, StreamPurpose::test);
  const std::vector<double> p0{0.2, 0.05, 0.6, 0.3, 0.3, 0.01, 0.9, 0.4};
  for (std::int64_t d : {0, 1, 3, 8}) {
    const std::uint64_t trials = 200'000;
    const auto a = oracle::simulate(p0, d, trials, rng);
    const auto b = oracle::simulate_naive(p0, d, trials, rng);
    for (std::size_t k = 0; k < p0.size(); ++k) {
      const double pa = static_cast<double>(a[k]) / trials, pb = static_cast<double>(b[k]) / trials;
      const double sigma = std::sqrt(2.0 * std::max(pa * (1 - pa), 1e-9) / trials);
      EXPECT_LE(std::abs(pa - pb), 4.0 * sigma) << "d=" << d << " k=" << k;
    }
  }
}

TEST(Sampler, Examples) {
  auto rng = RngStream::derive(7, StreamPurpose::test);
  const auto zero = sample_histogram(DetectionProfile{std::vector<double>(32, 0.0)}, 1000, rng);
  EXPECT_EQ(zero.total(), 0u);

  DetectionProfile one{std::vector<double>(8, 0.0)};
  one.probs[3] = 1.0;
  const auto h = sample_histogram(one, 100, rng, 10e-12);
  EXPECT_EQ(h.counts[3], 100u);
  EXPECT_EQ(h.total(), 100u);
  EXPECT_EQ(h.n_pulses, 100u);
  EXPECT_EQ(h.bin_width, 10e-12);

  const auto big = sample_histogram(DetectionProfile{{0.3}}, 1'000'000, rng);
  EXPECT_NEAR(static_cast<double>(big.counts[0]), 300000.0, 4.0 * std::sqrt(1e6 * 0.3 * 0.7));
}

TEST(Sampler, DeterministicPerStream) {
  DetectionProfile p{std::vector<double>(64, 0.01)};
  const HistogramSampler s(p, 100000, 10e-12);
  auto r1 = RngStream::derive(9, StreamPurpose::histogram, 3, 4);
  auto r2 = RngStream::derive(9, StreamPurpose::histogram, 3, 4);
  auto r3 = RngStream::derive(9, StreamPurpose::histogram, 3, 5);
  const auto a = s.sample(r1), b = s.sample(r2), c = s.sample(r3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (auto v : a.counts) EXPECT_LE(v, 100000u);
}

TEST(Sampler, ReplicateMeansWithinFourSigma) {
  auto rng = RngStream::derive(10, StreamPurpose::test);
  DetectionProfile p;
  for (int k = 0; k < 256; ++k) p.probs.push_back(0.001 + 0.02 * rng.uniform());
  const std::uint64_t n = 100000;
  const int R = 100;
  const HistogramSampler s(p, n, 10e-12);
  std::vector<double> sum(p.probs.size(), 0.0);
  for (int r = 0; r < R; ++r) {
    auto stream = RngStream::derive(11, StreamPurpose::histogram, 0, static_cast<std::uint64_t>(r));
    const auto h = s.sample(stream);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += h.counts[k];
  }
  std::size_t ok = 0;
  for (std::size_t k = 0; k < sum.size(); ++k) {
    const double P = p.probs[k];
    const double sigma = std::sqrt(P * (1 - P) / (R * static_cast<double>(n))) * static_cast<double>(n);
    ok += teststats::within_sigma(sum[k] / R, static_cast<double>(n) * P, sigma, 4.0);
  }
  EXPECT_GE(static_cast<double>(ok), 0.99 * static_cast<double>(sum.size()));
}

TEST(Sampler, RejectsBadInput) {
  EXPECT_THROW(HistogramSampler(DetectionProfile{{0.1}}, 0, 1e-12), DomainError);
  EXPECT_THROW(HistogramSampler(DetectionProfile{{1.1}}, 10, 1e-12), DomainError);
  EXPECT_THROW(HistogramSampler(DetectionProfile{{0.1}}, 1ull << 33, 1e-12), DomainError);
}

TEST(Detector, DeadBinsRounded) {
  EXPECT_EQ((DetectorModel{0.25, 900e-9, 10e-12, 0.0}.dead_bins()), 90000);
  EXPECT_EQ((DetectorModel{0.25, 14e-12, 10e-12, 0.0}.dead_bins()), 1);
  EXPECT_EQ((DetectorModel{0.25, 0.0, 10e-12, 0.0}.dead_bins()), 0);
}
