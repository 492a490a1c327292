#include <cmath>
#include <thread>

#include <gtest/gtest.h>

#include "fbmarb/calculus.hpp"
#include "fbmarb/errors.hpp"
#include "fbmarb/fbm.hpp"
#include "fbmarb/seeding.hpp"

using namespace fbmarb;

namespace {

// Exact fBm covariance, written out independently of the sampler.
double fbm_cov(double s, double t, double h) {
  return 0.5 * (std::pow(s, 2 * h) + std::pow(t, 2 * h) - std::pow(std::abs(t - s), 2 * h));
}

}  // namespace

TEST(FgnAutocovariance, FrozenValues) {
  for (double h : {0.1, 0.5, 0.7, 0.95}) EXPECT_DOUBLE_EQ(fgn_autocovariance(0, h), 1.0);
  EXPECT_NEAR(fgn_autocovariance(1, 0.5), 0.0, 1e-15);
  // mpmath, 40 digits: (2^1.4 - 2) / 2
  EXPECT_NEAR(fgn_autocovariance(1, 0.7), 0.31950791077289425937, 1e-15);
  // Differencing powers of size ~66 loses about 1e-14 absolute.
  EXPECT_NEAR(fgn_autocovariance(20, 0.7), 0.046411643961112140836, 1e-13);
}

TEST(FgnAutocovariance, RejectsHurstOutsideUnitInterval) {
  EXPECT_THROW(fgn_autocovariance(1, 0.0), ParameterDomainError);
  EXPECT_THROW(fgn_autocovariance(1, 1.0), ParameterDomainError);
  EXPECT_THROW(fgn_autocovariance(1, 1.3), ParameterDomainError);
}

TEST(FbmSpec, Validation) {
  EXPECT_THROW((FbmSpec{1.2, 1.0, 8, 0}.validate()), ParameterDomainError);
  EXPECT_THROW((FbmSpec{0.7, 0.0, 8, 0}.validate()), ParameterDomainError);
  EXPECT_THROW((FbmSpec{0.7, 1.0, 0, 0}.validate()), ParameterDomainError);
  EXPECT_THROW(generate_fbm({-0.1, 1.0, 8, 0}), ParameterDomainError);
}

TEST(GenerateFbm, StartsAtZeroFiniteAndReproducible) {
  for (std::size_t n : {1u, 7u, 16u, 17u, 1000u, 1024u}) {
    const FbmSpec spec{0.7, 2.0, n, 99};
    const SamplePath a = generate_fbm(spec);
    const SamplePath b = generate_fbm(spec);
    ASSERT_EQ(a.size(), n + 1);
    EXPECT_EQ(a.front(), 0.0);
    for (double v : a.values()) EXPECT_TRUE(std::isfinite(v));
    EXPECT_EQ(a, b);
    EXPECT_DOUBLE_EQ(a.horizon(), 2.0);
  }
  EXPECT_NE(generate_fbm({0.7, 1.0, 64, 1}), generate_fbm({0.7, 1.0, 64, 2}));
}

TEST(GenerateFbm, ConcurrentSamplingMatchesSerial) {
  const UniformFbmSampler sampler(0.7, 1.0, 4096);
  std::vector<SamplePath> paths(4);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      pool.emplace_back([&, i] { paths[i] = sampler.sample(1000 + i); });
    }
  }
  for (std::size_t i = 0; i < paths.size(); ++i) EXPECT_EQ(paths[i], sampler.sample(1000 + i));
}

TEST(GenerateFbm, RouteSelection) {
  EXPECT_EQ(UniformFbmSampler(0.7, 1.0, 16).method(), FbmMethod::kCholesky);
  EXPECT_EQ(UniformFbmSampler(0.7, 1.0, 32).method(), FbmMethod::kCirculantEmbedding);
}

TEST(CirculantFbm, EmbeddingIsNonnegativeAcrossHurst) {
  for (double h : {0.05, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    for (std::size_t n : {17u, 100u, 1024u, 16384u}) {
      EXPECT_NO_THROW(CirculantFbmSampler(h, 1.0, n)) << "H=" << h << " n=" << n;
    }
  }
}

TEST(GenerateFbm, BrownianIncrementsAreStandardNormalWhenScaled) {
  const std::size_t n = 512, seeds = 200;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (std::size_t s = 0; s < seeds; ++s) {
    const SamplePath p = generate_fbm({0.5, 1.0, n, s});
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (p[i + 1] - p[i]) * std::sqrt(static_cast<double>(n));
      sum += x;
      sum2 += x * x;
      sum4 += x * x * x * x;
    }
  }
  const double m = static_cast<double>(n * seeds);
  EXPECT_NEAR(sum / m, 0.0, 4.0 / std::sqrt(m));
  EXPECT_NEAR(sum2 / m, 1.0, 4.0 * std::sqrt(2.0 / m));
  EXPECT_NEAR(sum4 / m, 3.0, 4.0 * std::sqrt(96.0 / m));
}

// Ensemble covariance at M = 10^4 seeds must match the exact covariance to
// 4 / sqrt(M), on both sampling routes.
class FbmCovariance : public ::testing::TestWithParam<std::size_t> {};

TEST_P(FbmCovariance, EnsembleMatchesExactCovariance) {
  const std::size_t n = GetParam();
  const double h = 0.7;
  const std::size_t m = 10000;
  const UniformFbmSampler sampler(h, 1.0, n);
  const std::vector<std::size_t> idx = {n / 4, n / 2, n};
  std::vector<std::vector<double>> acc(3, std::vector<double>(3, 0.0));
  for (std::size_t s = 0; s < m; ++s) {
    const SamplePath p = sampler.sample(derive_seed(5, Stream::kModulator, s));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) acc[a][b] += p[idx[a]] * p[idx[b]];
  }
  const auto t = sampler.grid().times();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      EXPECT_NEAR(acc[a][b] / m, fbm_cov(t[idx[a]], t[idx[b]], h), 4.0 / std::sqrt(m))
          << "n=" << n << " (" << a << "," << b << ")";
    }
  }
}

INSTANTIATE_TEST_SUITE_P(BothRoutes, FbmCovariance, ::testing::Values(8u, 64u));

TEST(GenerateFbm, MeanQuadraticVariationMatchesAnalyticValue) {
  // E sum (dB^H)^2 = n (T/n)^{2H} = 2^-4 for H = 0.7, n = 1024.
  const UniformFbmSampler sampler(0.7, 1.0, 1024);
  const std::size_t m = 2000;
  double total = 0.0;
  for (std::size_t s = 0; s < m; ++s) total += quadratic_variation(sampler.sample(s));
  EXPECT_NEAR(total / m, 0.0625, 0.02 * 0.0625);
}

TEST(GenerateFbm, LagOneAutocorrelationOfIncrements) {
  const CirculantFbmSampler sampler(0.7, 1.0, 1024);
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t s = 0; s < 1000; ++s) {
    const std::vector<double> g = sampler.sample_fgn(s);
    for (std::size_t i = 0; i < g.size(); ++i) {
      c0 += g[i] * g[i];
      if (i + 1 < g.size()) c1 += g[i] * g[i + 1];
    }
  }
  EXPECT_NEAR((c1 / 1023.0) / (c0 / 1024.0), 0.3195079107728943, 0.01);
}

TEST(GenerateFbm, ZeroQuadraticVariationSlope) {
  // Joint refinement: QV at 2^k read from one 2^14 path.
  const UniformFbmSampler sampler(0.7, 1.0, 1 << 14);
  std::vector<double> sizes, means(7, 0.0);
  const std::size_t m = 200;
  for (std::size_t s = 0; s < m; ++s) {
    const SamplePath p = sampler.sample(s);
    for (int k = 8; k <= 14; ++k) {
      means[k - 8] += quadratic_variation(p.subsample(std::size_t{1} << (14 - k))) / m;
    }
  }
  for (int k = 8; k <= 14; ++k) sizes.push_back(std::ldexp(1.0, k));
  EXPECT_NEAR(loglog_slope(sizes, means), -0.4, 0.1);
}

TEST(GenerateFbmOnGrid, SinglePointIsZero) {
  const SamplePath p = generate_fbm_on_grid(std::vector<double>{0.0}, 0.3, 1);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], 0.0);
}

TEST(GenerateFbmOnGrid, VarianceAndCovariance) {
  const std::size_t m = 10000;
  const GridFbmSampler two({0.0, 1.0}, 0.7);
  const GridFbmSampler three({0.0, 0.5, 1.0}, 0.7);
  double var1 = 0.0, cov = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    const auto a = two.sample_values(s);
    var1 += a[1] * a[1];
    const auto b = three.sample_values(s + m);
    cov += b[1] * b[2];
  }
  EXPECT_NEAR(var1 / m, 1.0, 4.0 * std::sqrt(2.0 / m));
  EXPECT_NEAR(cov / m, 0.5, 4.0 / std::sqrt(m));
}

TEST(GenerateFbmOnGrid, MatchesExactCovarianceOnIrregularGrid) {
  const std::vector<double> t = {0.0, 0.01, 0.3, 0.31, 0.9};
  const GridFbmSampler sampler(t, 0.3);
  EXPECT_EQ(sampler.report().jitter_retries, 0);
  const std::size_t m = 10000;
  std::vector<double> acc(t.size() * t.size(), 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    const auto v = sampler.sample_values(s);
    for (std::size_t a = 0; a < t.size(); ++a)
      for (std::size_t b = 0; b < t.size(); ++b) acc[a * t.size() + b] += v[a] * v[b];
  }
  for (std::size_t a = 1; a < t.size(); ++a)
    for (std::size_t b = 1; b < t.size(); ++b)
      EXPECT_NEAR(acc[a * t.size() + b] / m, fbm_cov(t[a], t[b], 0.3), 4.0 / std::sqrt(m));
}

TEST(GenerateFbmOnGrid, GridNotStartingAtZero) {
  const GridFbmSampler sampler({0.5, 1.0}, 0.7);
  EXPECT_EQ(sampler.sample_values(3).size(), 2u);
  EXPECT_THROW(generate_fbm_on_grid(std::vector<double>{0.5, 1.0}, 0.7, 3), InvariantViolation);
  EXPECT_THROW(GridFbmSampler({0.0, 0.5, 0.5}, 0.7), InvariantViolation);
}

TEST(GenerateFbmOnGrid, NearlyCoincidentTimesAreJitteredAndReported) {
  std::vector<double> t = {0.0};
  for (int i = 1; i <= 40; ++i) t.push_back(1.0 + i * 1e-13);
  try {
    const GridFbmSampler sampler(t, 0.9);
    const auto& r = sampler.report();
    EXPECT_GE(r.jitter_retries, 0);
    EXPECT_LE(r.jitter_retries, 3);
    EXPECT_EQ(r.jitter_retries == 0, r.jitter == 0.0);
  } catch (const FactorizationError& e) {
    EXPECT_NE(std::string(e.what()).find("jitter"), std::string::npos);
  }
}

TEST(TimeChange, RejectsDecreasingClock) {
  const SamplePath bad({0.0, 0.5, 1.0}, {0.0, 0.4, 0.3});
  EXPECT_THROW(TimeChange{bad}, InvariantViolation);
  EXPECT_THROW(TimeChange(SamplePath({0.0, 1.0}, {0.1, 0.2})), InvariantViolation);
}

TEST(TimeChange, ZeroClockGivesZeroPath) {
  const Partition grid = Partition::dyadic(1.0, 5);
  const SamplePath z = time_change_compose(TimeChange(grid.constant(0.0)), 0.7, 3);
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
}

TEST(TimeChange, FlatClockGivesFlatPath) {
  const Partition grid = Partition::dyadic(1.0, 6);
  std::vector<double> a(grid.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = grid.times()[i];
    a[i] = t < 0.25 ? t : (t < 0.5 ? 0.25 : t - 0.25);
  }
  const TimeChange clock(grid.constant(0.0).with_values(a));
  const TimeChangedFbmSampler sampler(clock, 0.7);
  EXPECT_LT(sampler.num_distinct_times(), grid.size());
  const SamplePath z = sampler.sample(11);
  for (std::size_t i = 16; i <= 32; ++i) EXPECT_EQ(z[i], z[16]);
  EXPECT_NE(z[33], z[32]);
}

TEST(TimeChange, IdentityClockHasFbmMarginals) {
  const Partition grid = Partition::dyadic(1.0, 4);
  const TimeChangedFbmSampler sampler(TimeChange::identity(grid), 0.7);
  const std::size_t m = 10000;
  double v_half = 0.0, v_one = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    const SamplePath z = sampler.sample(s);
    v_half += z[8] * z[8];
    v_one += z[16] * z[16];
  }
  const double tol = 4.0 * std::sqrt(2.0 / m);
  EXPECT_NEAR(v_one / m, 1.0, tol);
  EXPECT_NEAR(v_half / m, std::pow(0.5, 1.4), tol * std::pow(0.5, 1.4));
}

TEST(TimeChange, SquaredClockVariance) {
  // Var Z_t = A_t^{2H}; Var Z_{0.5} = 0.25^{1.4} = 0.14358729437462937585 (mpmath).
  const Partition grid = Partition::dyadic(1.0, 3);
  const TimeChangedFbmSampler sampler(TimeChange::power(grid, 2.0), 0.7);
  const std::size_t m = 10000;
  double v_half = 0.0, v_one = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    const SamplePath z = time_change_compose(TimeChange::power(grid, 2.0), 0.7, s);
    EXPECT_EQ(z, sampler.sample(s));
    v_half += z[4] * z[4];
    v_one += z[8] * z[8];
  }
  const double tol = 4.0 * std::sqrt(2.0 / m);
  EXPECT_NEAR(v_one / m, 1.0, tol);
  EXPECT_NEAR(v_half / m, 0.14358729437462937585, tol * 0.1436);
}

TEST(TimeChange, IntegratedCirClockIsNondecreasing) {
  const Partition grid = Partition::dyadic(1.0, 8);
  const TimeChange clock = integrated_cir_time_change(grid, {0.5, 2.0, 0.5, 1.5}, 42);
  const auto a = clock.clock().values();
  EXPECT_EQ(a[0], 0.0);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_GE(a[i], a[i - 1]);
  const SamplePath z = time_change_compose(clock, 0.7, 1);
  EXPECT_EQ(z.size(), grid.size());
}
