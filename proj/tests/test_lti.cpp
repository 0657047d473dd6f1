#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "firpriv/errors.hpp"
#include "firpriv/lti.hpp"
#include "firpriv/random.hpp"
#include "oracles.hpp"

using namespace firpriv;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

RationalFilter example_plant() { return RationalFilter(vec({1.0, -0.2}), vec({1.0, -0.9, 0.17})); }

double sample_variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return var / static_cast<double>(xs.size() - 1);
}

}  // namespace

TEST(CounterStream, PureFunctionOfSeedStreamAndIndex) {
  const CounterStream a(7, StreamTag::privacy, 3);
  const CounterStream b(7, StreamTag::privacy, 3);
  const CounterStream c(8, StreamTag::privacy, 3);
  const CounterStream d(7, StreamTag::privacy, 4);
  for (std::uint64_t i = 0; i < 100; ++i) {
    EXPECT_EQ(a.gaussian(i), b.gaussian(i));
    EXPECT_NE(a.bits(i), c.bits(i));
    EXPECT_NE(a.bits(i), d.bits(i));
    const double u = a.uniform(i);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(CounterStream, UnitVarianceForBothDistributions) {
  const CounterStream s(11, StreamTag::sensor);
  for (NoiseDistribution dist : {NoiseDistribution::gaussian, NoiseDistribution::uniform}) {
    std::vector<double> xs(200000);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = s.unit(i, dist);
    EXPECT_NEAR(sample_variance(xs), 1.0, 0.01);
  }
  for (std::uint64_t i = 0; i < 1000; ++i) EXPECT_LE(std::abs(s.unit(i, NoiseDistribution::uniform)), std::sqrt(3.0));
}

TEST(FirModel, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(FirModel(Vector(0)), DimensionError);
  EXPECT_THROW(FirModel(vec({1.0, NAN})), ParameterError);
  EXPECT_THROW(FirModel(vec({INFINITY})), ParameterError);
  EXPECT_EQ(FirModel(vec({1.0, 2.0})).size(), 2u);
}

TEST(RationalFilter, ValidatesDenominator) {
  EXPECT_THROW(RationalFilter(vec({1.0}), vec({2.0, 0.5})), ParameterError);
  EXPECT_THROW(RationalFilter(vec({1.0}), vec({1.0, -1.0})), ParameterError);   // pole on the unit circle
  EXPECT_THROW(RationalFilter(vec({1.0}), vec({1.0, -2.5, 1.0})), ParameterError);
  EXPECT_THROW(RationalFilter(Vector(0), vec({1.0})), DimensionError);
  EXPECT_NO_THROW(example_plant());
}

TEST(ImpulseResponse, ExamplePlantLeadingSamples) {
  const Vector g = impulse_response(example_plant(), 3);
  EXPECT_NEAR(g[0], 1.0, 1e-12);
  EXPECT_NEAR(g[1], 0.7, 1e-12);
  EXPECT_NEAR(g[2], 0.46, 1e-12);
}

TEST(ImpulseResponse, IdentityAndDelay) {
  EXPECT_EQ(impulse_response(RationalFilter::identity(), 4), vec({1, 0, 0, 0}));
  EXPECT_EQ(impulse_response(RationalFilter(vec({0.0, 1.0}), vec({1.0})), 3), vec({0, 1, 0}));
  EXPECT_THROW(impulse_response(RationalFilter::identity(), 0), DimensionError);
}

TEST(ImpulseResponse, MatchesRecursionOracle) {
  // g_k = 0.9 g_{k-1} - 0.17 g_{k-2} + b_k
  const Vector g = impulse_response(example_plant(), 40);
  double gm1 = 0.0, gm2 = 0.0;
  for (int k = 0; k < 40; ++k) {
    const double b = k == 0 ? 1.0 : (k == 1 ? -0.2 : 0.0);
    const double gk = 0.9 * gm1 - 0.17 * gm2 + b;
    EXPECT_NEAR(g[k], gk, 1e-14);
    gm2 = gm1;
    gm1 = gk;
  }
}

TEST(FirTruncate, ExamplePlantOrderNine) {
  const FirTruncation t = fir_truncate(example_plant(), 9);
  const Vector expect = vec({1, 0.7, 0.46, 0.295, 0.1873, 0.1184, 0.0747, 0.0471, 0.0297});
  ASSERT_EQ(t.model.size(), 9u);
  for (Eigen::Index i = 0; i < 9; ++i) EXPECT_NEAR(t.model.coeffs()[i], expect[i], 5e-5) << i;
  EXPECT_NEAR(t.tail_l1, 0.0507, 5e-5);
}

TEST(FirTruncate, TailMatchesBruteForceSum) {
  const Vector g = impulse_response(example_plant(), 2000);
  double tail = 0.0;
  for (Eigen::Index k = 9; k < g.size(); ++k) tail += std::abs(g[k]);
  EXPECT_NEAR(fir_truncate(example_plant(), 9).tail_l1, tail, 1e-12);
}

TEST(FirTruncate, FirInputHasNoTail) {
  const RationalFilter g = RationalFilter::fir(vec({0.5, -1.0, 2.0}));
  EXPECT_EQ(fir_truncate(g, 3).tail_l1, 0.0);
  EXPECT_EQ(fir_truncate(g, 5).tail_l1, 0.0);
  EXPECT_NEAR(fir_truncate(g, 2).tail_l1, 2.0, 1e-15);
  EXPECT_THROW(fir_truncate(g, 0), DimensionError);
}

TEST(Regressor, SmallPatterns) {
  const RegressorMatrix r = build_regressor(SignalSeq(vec({1, 2, 3}), SignalKind::input), 2);
  Matrix expect(3, 2);
  expect << 1, 0, 2, 1, 3, 2;
  EXPECT_EQ(r.matrix(), expect);
  EXPECT_EQ(r.source(), vec({1, 2, 3}));
  EXPECT_EQ(build_regressor(SignalSeq(vec({1, 0, 0, 0}), SignalKind::input), 1).matrix(),
            Matrix(vec({1, 0, 0, 0})));
  EXPECT_THROW(build_regressor(SignalSeq(vec({1, 2}), SignalKind::input), 3), DimensionError);
}

TEST(Regressor, ToeplitzAndConvolutionProperty) {
  std::mt19937_64 rng(1);
  const Vector r = oracle::random_vector(rng, 20);
  const RegressorMatrix reg = build_regressor(SignalSeq(r, SignalKind::input), 5);
  EXPECT_EQ(reg.matrix(), oracle::regressor(r, 5));
  for (int trial = 0; trial < 100; ++trial) {
    const Vector h = oracle::random_vector(rng, 5);
    EXPECT_LT((reg.matrix() * h - oracle::fir_response(h, r)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(FilterMatrix, SmallPatterns) {
  const BandedFilterMatrix l = build_filter_matrix(vec({2.0, 3.0}), 3);
  Matrix expect(3, 4);
  expect << 3, 2, 0, 0, 0, 3, 2, 0, 0, 0, 3, 2;
  EXPECT_EQ(l.dense(), expect);
  EXPECT_EQ(build_filter_matrix(vec({1.0}), 2).dense(), Matrix::Identity(2, 2));
  EXPECT_THROW(build_filter_matrix(vec({1.0}), 0), DimensionError);
  EXPECT_THROW(build_filter_matrix(Vector(0), 3), DimensionError);
}

TEST(FilterMatrix, ApplyMatchesMovingAverageExhaustiveSmall) {
  std::mt19937_64 rng(2);
  for (Eigen::Index m = 1; m <= 8; ++m) {
    for (Eigen::Index n = 1; n <= 8; ++n) {
      const Vector l = oracle::random_vector(rng, m);
      const Vector v = oracle::random_vector(rng, n + m - 1);
      const BandedFilterMatrix lm = build_filter_matrix(l, static_cast<std::size_t>(n));
      const Vector expect = oracle::moving_average(l, v, n);
      EXPECT_LT((lm.apply(v) - expect).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((lm.dense() * v - expect).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_EQ(lm.dense(), oracle::filter_matrix(l, n));
      // each row carries the full filter
      for (Eigen::Index i = 0; i < n; ++i) {
        EXPECT_EQ((lm.dense().row(i).array() != 0.0).count(), (l.array() != 0.0).count());
      }
    }
  }
}

TEST(FilterMatrix, RandomLengthFourN12) {
  std::mt19937_64 rng(3);
  const Vector l = oracle::random_vector(rng, 4);
  const BandedFilterMatrix lm = build_filter_matrix(l, 12);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector v = oracle::random_vector(rng, 15);
    EXPECT_LT((lm.apply(v) - oracle::moving_average(l, v, 12)).cwiseAbs().maxCoeff(), 1e-12);
  }
  const Matrix a = Matrix::Random(3, 12);
  EXPECT_LT((lm.left_multiply(a) - a * lm.dense()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(lm.apply(Vector::Zero(14)), DimensionError);
}

TEST(ToeplitzCascade, SmallPatterns) {
  Matrix expect(3, 2);
  expect << 1, 0, 2, 1, 0, 2;
  EXPECT_EQ(toeplitz_cascade(FirModel(vec({1, 2})), 2), expect);
  EXPECT_EQ(toeplitz_cascade(FirModel(vec({1})), 4), Matrix::Identity(4, 4));
  EXPECT_THROW(toeplitz_cascade(FirModel(vec({1})), 0), DimensionError);
}

TEST(ToeplitzCascade, MatchesPolynomialProduct) {
  std::mt19937_64 rng(4);
  for (Eigen::Index nh = 1; nh <= 10; ++nh) {
    for (Eigen::Index nl = 1; nl <= 10; ++nl) {
      const Vector h = oracle::random_vector(rng, nh);
      const Vector l = oracle::random_vector(rng, nl);
      const Matrix hm = toeplitz_cascade(FirModel(h), static_cast<std::size_t>(nl));
      ASSERT_EQ(hm.rows(), nh + nl - 1);
      const Vector expect = oracle::poly_product(h, l);
      EXPECT_LT((hm * l - expect).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((convolve(h, l) - expect).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Simulate, NoiselessIsExact) {
  std::mt19937_64 rng(5);
  const Vector r = oracle::random_vector(rng, 30);
  const FirModel h(oracle::random_vector(rng, 4));
  const Vector zero = Vector::Zero(3);
  for (NoiseChannel ch : {NoiseChannel::none, NoiseChannel::output, NoiseChannel::input}) {
    const SignalSeq y = simulate(h, SignalSeq(r, SignalKind::input), ch, zero, 0.0, 9);
    EXPECT_LT((y.samples() - oracle::fir_response(h.coeffs(), r)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(y.kind(), SignalKind::output);
  }
  EXPECT_THROW(simulate(h, SignalSeq(r, SignalKind::input), NoiseChannel::output, zero, -1.0, 0), ParameterError);
}

TEST(Simulate, DeterministicAndSeedOnlyChangesNoise) {
  std::mt19937_64 rng(6);
  const SignalSeq r(oracle::random_vector(rng, 25), SignalKind::input);
  const FirModel h(oracle::random_vector(rng, 3));
  const Vector l = oracle::random_vector(rng, 4);
  const Vector rh = oracle::fir_response(h.coeffs(), r.samples());
  const SignalSeq a = simulate(h, r, NoiseChannel::output, l, 0.5, 42);
  const SignalSeq b = simulate(h, r, NoiseChannel::output, l, 0.5, 42);
  const SignalSeq c = simulate(h, r, NoiseChannel::output, l, 0.5, 43);
  EXPECT_EQ(a.samples(), b.samples());
  EXPECT_GT((a.samples() - c.samples()).norm(), 0.0);
  // Rh is unchanged: averaging the noise away over replicates recovers it.
  Vector mean = Vector::Zero(25);
  const int reps = 20000;
  for (int k = 0; k < reps; ++k) mean += simulate(h, r, NoiseChannel::output, l, 0.5, 43, k).samples();
  mean /= reps;
  const double noise_sd = std::sqrt(l.squaredNorm() + 0.5);
  EXPECT_LT((mean - rh).cwiseAbs().maxCoeff(), 5.0 * noise_sd / std::sqrt(reps));
}

TEST(Simulate, OutputChannelVarianceMatchesBudget) {
  const Vector l = vec({0.8, -0.5, 0.3});
  const double sigma2 = 0.7;
  const SignalSeq r(Vector::Zero(6), SignalKind::input);
  const FirModel h(vec({1.0, 0.5}));
  for (NoiseDistribution dist : {NoiseDistribution::gaussian, NoiseDistribution::uniform}) {
    std::vector<double> ys;
    for (std::uint64_t k = 0; k < 100000; ++k) {
      ys.push_back(simulate(h, r, NoiseChannel::output, l, sigma2, 17, k, dist).samples()[5]);
    }
    EXPECT_NEAR(sample_variance(ys), l.squaredNorm() + sigma2, 0.02 * (l.squaredNorm() + sigma2));
  }
}

TEST(Simulate, InputChannelVarianceMatchesCascade) {
  const Vector l = vec({0.6, 0.4, -0.2});
  const FirModel h(vec({1.0, -0.5, 0.25}));
  const SignalSeq r(Vector::Zero(8), SignalKind::input);
  const double f2 = oracle::poly_product(h.coeffs(), l).squaredNorm();
  std::vector<double> ys;
  for (std::uint64_t k = 0; k < 100000; ++k) {
    ys.push_back(simulate(h, r, NoiseChannel::input, l, 0.0, 23, k).samples()[7]);
  }
  EXPECT_NEAR(sample_variance(ys), f2, 0.02 * f2);
}

TEST(FilteredInput, IdentityIsRawWhiteNoise) {
  const SignalSeq a = generate_filtered_input(RationalFilter::identity(), 50, 3);
  const CounterStream s(3, StreamTag::input, 0);
  for (Eigen::Index i = 0; i < 50; ++i) EXPECT_EQ(a.samples()[i], s.gaussian(static_cast<std::uint64_t>(i)));
  EXPECT_EQ(a.kind(), SignalKind::input);
}

TEST(FilteredInput, ArOneAutocorrelation) {
  const RationalFilter w(vec({1.0}), vec({1.0, -0.95}));
  const Vector x = generate_filtered_input(w, 100000, 8).samples();
  const Vector tail = x.tail(x.size() - 1000);  // skip the start-up transient
  const double mean = tail.mean();
  const Eigen::ArrayXd c = tail.array() - mean;
  const double lag1 = (c.head(c.size() - 1) * c.tail(c.size() - 1)).sum() / c.square().sum();
  EXPECT_NEAR(lag1, 0.95, 0.01);
}

TEST(FilteredInput, SameSeedSameSequence) {
  const RationalFilter w(vec({1.0}), vec({1.0, -0.95}));
  EXPECT_EQ(generate_filtered_input(w, 200, 5).samples(), generate_filtered_input(w, 200, 5).samples());
  EXPECT_NE(generate_filtered_input(w, 200, 5).samples(), generate_filtered_input(w, 200, 6).samples());
  EXPECT_THROW(generate_filtered_input(w, 0, 5), DimensionError);
}
