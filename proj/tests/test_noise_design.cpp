#include <gtest/gtest.h>

#include <random>

#include "firpriv/errors.hpp"
#include "firpriv/noise_design.hpp"
#include "oracles.hpp"

using namespace firpriv;
using oracle::Mat;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Matrix diag(std::initializer_list<double> v) { return vec(v).asDiagonal(); }

TraceDecomposition random_instance(std::mt19937_64& rng, Eigen::Index n, std::size_t n_h, std::size_t n_l,
                                   double sigma2) {
  const RegressorMatrix r = build_regressor(SignalSeq(oracle::random_vector(rng, n), SignalKind::input), n_h);
  return decompose_ls_trace(r, sigma2, n_l);
}

// Uniform point in the ball of the given radius.
Vector random_in_ball(std::mt19937_64& rng, Eigen::Index n, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return radius * std::pow(u(rng), 1.0 / static_cast<double>(n)) * oracle::random_unit(rng, n);
}

}  // namespace

TEST(CanonicalSign, LargestMagnitudePositiveLowestIndexWins) {
  EXPECT_EQ(canonical_sign(vec({0.1, -0.9, 0.3})), vec({-0.1, 0.9, -0.3}));
  EXPECT_EQ(canonical_sign(vec({-0.5, 0.5})), vec({0.5, -0.5}));
  EXPECT_EQ(canonical_sign(vec({0.5, -0.5})), vec({0.5, -0.5}));
  EXPECT_EQ(canonical_sign(Vector::Zero(2)), Vector::Zero(2));
}

TEST(OutputCapped, DiagonalExample) {
  const DesignResult d = design_output_capped(diag({3.0, 1.0}), 0.7, 1.0, 5.0);
  EXPECT_LT((d.l_star - vec({2.0, 0.0})).norm(), 1e-12);
  EXPECT_NEAR(d.predicted_trace, 12.7, 1e-12);
  EXPECT_NEAR(d.lambda_y, 5.0, 1e-12);
  EXPECT_NEAR(d.rho, 5.0, 1e-12);
  EXPECT_TRUE(d.active_constraint);
  EXPECT_FALSE(d.degenerate_top_eigenspace);
  EXPECT_EQ(d.channel, NoiseChannel::output);
}

TEST(OutputCapped, ZeroObjectiveAndErrors) {
  const DesignResult d = design_output_capped(Matrix::Zero(3, 3), 0.4, 1.0, 2.0);
  EXPECT_EQ(d.l_star, Vector::Zero(3));
  EXPECT_EQ(d.predicted_trace, 0.4);
  EXPECT_TRUE(d.degenerate_objective);
  EXPECT_FALSE(d.active_constraint);
  EXPECT_THROW(design_output_capped(diag({1.0}), 0.1, 1.0, 1.0), BudgetError);
  EXPECT_THROW(design_output_capped(diag({1.0}), 0.1, 1.0, 0.5), BudgetError);
  EXPECT_THROW(design_output_capped(diag({1.0, -1.0}), 0.1, 1.0, 2.0), ParameterError);
  Matrix asym(2, 2);
  asym << 1, 0.2, 0, 1;
  EXPECT_THROW(design_output_capped(asym, 0.1, 1.0, 2.0), ParameterError);
}

TEST(OutputCapped, RepeatedTopEigenvalueFlagged) {
  const DesignResult d = design_output_capped(diag({2.0, 2.0, 1.0}), 0.1, 1.0, 2.0);
  EXPECT_TRUE(d.degenerate_top_eigenspace);
  EXPECT_NEAR(d.predicted_trace, 2.1, 1e-12);
}

TEST(OutputCapped, BeatsRandomFeasibleFilters) {
  std::mt19937_64 rng(30);
  const TraceDecomposition dec = random_instance(rng, 30, 4, 5, 1.0);
  const double gamma1 = 2.5;
  const DesignResult d = design_output_capped(dec.m, dec.c, 1.0, gamma1);
  EXPECT_NEAR(d.l_star.squaredNorm(), gamma1 - 1.0, 1e-9);
  EXPECT_LE(d.lambda_y, gamma1 + 1e-10);
  for (int t = 0; t < 10000; ++t) {
    const Vector l = random_in_ball(rng, 5, std::sqrt(gamma1 - 1.0));
    EXPECT_LT(l.dot(dec.m * l) + dec.c, d.predicted_trace);
  }
}

TEST(OutputCapped, SignInvarianceOfObjective) {
  std::mt19937_64 rng(31);
  const TraceDecomposition dec = random_instance(rng, 25, 3, 4, 0.5);
  const DesignResult d = design_output_capped(dec.m, dec.c, 0.5, 1.5);
  const Vector neg = -d.l_star;
  EXPECT_NEAR(neg.dot(dec.m * neg) + dec.c, d.predicted_trace, 1e-12);
  EXPECT_EQ(canonical_sign(d.l_star), d.l_star);
}

TEST(OutputCapped, LinearInBudget) {
  std::mt19937_64 rng(32);
  for (int inst = 0; inst < 10; ++inst) {
    const TraceDecomposition dec = random_instance(rng, 40, 3, 6, 1.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(dec.m);
    const double lmax = es.eigenvalues().maxCoeff();
    for (double gamma1 : {1.1, 1.5, 2.0, 4.0, 10.0}) {
      const DesignResult d = design_output_capped(dec.m, dec.c, 1.0, gamma1);
      EXPECT_LE(oracle::rel_err(d.predicted_trace - dec.c, lmax * (gamma1 - 1.0)), 1e-9);
    }
  }
}

TEST(OutputCapped, NondecreasingInFilterLength) {
  std::mt19937_64 rng(33);
  for (int inst = 0; inst < 10; ++inst) {
    const RegressorMatrix r = build_regressor(SignalSeq(oracle::random_vector(rng, 30), SignalKind::input), 3);
    double previous = 0.0;
    for (std::size_t n_l = 1; n_l <= 8; ++n_l) {
      const TraceDecomposition dec = decompose_ls_trace(r, 1.0, n_l);
      const double value = design_output_capped(dec.m, dec.c, 1.0, 2.0).predicted_trace;
      EXPECT_GE(value, previous - 1e-12 * value);
      if (n_l > 1) {
        // the shorter optimum, zero padded, is feasible here
        const TraceDecomposition shorter = decompose_ls_trace(r, 1.0, n_l - 1);
        Vector padded = Vector::Zero(static_cast<Eigen::Index>(n_l));
        padded.head(static_cast<Eigen::Index>(n_l - 1)) =
            design_output_capped(shorter.m, shorter.c, 1.0, 2.0).l_star;
        EXPECT_LE(padded.dot(dec.m * padded) + dec.c, value * (1 + 1e-12));
      }
      previous = value;
    }
  }
}

TEST(OutputCapped, DominatesInflatedWhiteNoise) {
  std::mt19937_64 rng(34);
  for (int inst = 0; inst < 20; ++inst) {
    const TraceDecomposition dec = random_instance(rng, 30, 3, 5, 1.0);
    const DesignResult d = design_output_capped(dec.m, dec.c, 1.0, 2.0);
    Vector white = Vector::Zero(5);
    white[0] = 1.0;  // all of the budget in a white component
    EXPECT_GE(d.predicted_trace, white.dot(dec.m * white) + dec.c - 1e-12);
  }
}

TEST(OutputWeighted, ThresholdAndInteriorExamples) {
  const DesignResult zero = design_output_weighted(diag({0.5}), 1.0, 1.0, 1.0);
  EXPECT_EQ(zero.l_star, Vector::Zero(1));
  EXPECT_NEAR(*zero.weighted_cost, 1.0, 1e-15);
  EXPECT_NEAR(zero.lambda_y, 1.0, 1e-15);

  const DesignResult d = design_output_weighted(diag({4.0}), 1.0, 1.0, 1.0);
  EXPECT_NEAR(d.l_star.squaredNorm(), 0.25, 1e-12);
  EXPECT_NEAR(d.l_star[0], 0.5, 1e-12);
  EXPECT_NEAR(*d.weighted_cost, 0.75, 1e-12);
  EXPECT_LT(*d.weighted_cost, weighted_cost(diag({4.0}), 1.0, 1.0, Vector::Zero(1)));

  // exactly on the threshold: lambda1 == gamma2 c^2
  EXPECT_EQ(design_output_weighted(diag({2.0, 1.0}), 1.0, 1.0, 2.0).l_star, Vector::Zero(2));
  EXPECT_THROW(design_output_weighted(diag({1.0}), 1.0, 1.0, 0.0), ParameterError);
  EXPECT_THROW(design_output_weighted(diag({1.0}), 0.0, 1.0, 1.0), ParameterError);
}

TEST(OutputWeighted, BeatsCandidatesAndRandomPoints) {
  std::mt19937_64 rng(35);
  for (int inst = 0; inst < 10; ++inst) {
    const Eigen::Index n = 2 + inst % 5;
    const Matrix m = oracle::random_psd(rng, n, n) * (0.5 + inst);
    const double c = 0.3 + 0.1 * inst;
    const double gamma2 = 0.2;
    const DesignResult d = design_output_weighted(m, c, 1.0, gamma2);
    const double best = *d.weighted_cost;
    EXPECT_LE(best, weighted_cost(m, c, gamma2, Vector::Zero(n)) + 1e-15);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double li = es.eigenvalues()[i];
      if (li <= 0.0) continue;
      const double scale = std::sqrt(std::max(0.0, 1.0 / std::sqrt(gamma2 * li) - c / li));
      for (double s : {1.0, -1.0}) {
        EXPECT_LE(best, weighted_cost(m, c, gamma2, s * scale * es.eigenvectors().col(i)) + 1e-12);
      }
    }
    const double radius = 2.0 * std::max(d.l_star.norm(), 1.0);
    for (int t = 0; t < 10000; ++t) {
      EXPECT_LE(best, weighted_cost(m, c, gamma2, random_in_ball(rng, n, radius)) + 1e-12);
    }
  }
}

TEST(OutputWeighted, RepeatedTopEigenvalueAllChoicesEqual) {
  std::mt19937_64 rng(36);
  const Matrix q = Eigen::HouseholderQR<Matrix>(oracle::random_psd(rng, 4, 4)).householderQ();
  const Matrix m = q * diag({5.0, 5.0, 1.0, 0.5}) * q.transpose();
  const DesignResult d = design_output_weighted(m, 0.2, 1.0, 1.0);
  EXPECT_TRUE(d.degenerate_top_eigenspace);
  const double norm = d.l_star.norm();
  for (int t = 0; t < 20; ++t) {
    // any unit vector in the top eigenspace
    const Vector dir = (q.col(0) * oracle::random_vector(rng, 1)[0] + q.col(1) * oracle::random_vector(rng, 1)[0]).normalized();
    EXPECT_NEAR(weighted_cost(m, 0.2, 1.0, norm * dir), *d.weighted_cost, 1e-12);
  }
}

TEST(InputCapped, IdentityPlantReducesToOutputDesign) {
  std::mt19937_64 rng(37);
  const SignalSeq r(oracle::random_vector(rng, 30), SignalKind::input);
  const FirModel h(vec({1.0}));
  const DesignResult in = design_input_capped(r, h, 1.0, 2.0, 4, AdversaryModel::least_squares(1));
  const TraceDecomposition dec = decompose_ls_trace(build_regressor(r, 1), 1.0, 4);
  const DesignResult out = design_output_capped(dec.m, dec.c, 1.0, 2.0);
  EXPECT_LT((in.l_star - out.l_star).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(in.predicted_trace, out.predicted_trace, 1e-10);
  EXPECT_EQ(in.channel, NoiseChannel::input);
}

TEST(InputCapped, BudgetActiveAndBeatsRandomSearch) {
  std::mt19937_64 rng(38);
  const Vector rv = oracle::random_vector(rng, 30);
  const SignalSeq r(rv, SignalKind::input);
  const FirModel h(oracle::random_vector(rng, 4));
  const double sigma2 = 0.5, gamma1 = 1.7;
  const DesignResult d = design_input_capped(r, h, sigma2, gamma1, 4, AdversaryModel::least_squares(4));
  const Vector f = oracle::poly_product(h.coeffs(), d.l_star);
  EXPECT_NEAR(f.squaredNorm(), gamma1 - sigma2, 1e-9);
  EXPECT_NEAR(d.lambda_y, gamma1, 1e-9);
  const Mat rm = oracle::regressor(rv, 4);
  EXPECT_LE(oracle::rel_err(d.predicted_trace, oracle::ls_covariance(rm, oracle::filter_matrix(f, 30), sigma2).trace()),
            1e-9);
  for (int t = 0; t < 10000; ++t) {
    Vector l = oracle::random_vector(rng, 4);
    const double fn = oracle::poly_product(h.coeffs(), l).squaredNorm();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    l *= std::sqrt((gamma1 - sigma2) * u(rng) / fn);
    const double value = oracle::ls_covariance(rm, oracle::filter_matrix(oracle::poly_product(h.coeffs(), l), 30), sigma2).trace();
    EXPECT_LE(value, d.predicted_trace * (1 + 1e-12));
  }
}

TEST(InputCapped, Errors) {
  const SignalSeq r(vec({1, 2, 3, 4, 5, 6}), SignalKind::input);
  EXPECT_THROW(design_input_capped(r, FirModel(vec({0.0, 0.0})), 1.0, 2.0, 2, AdversaryModel::least_squares(2)),
               RankError);
  EXPECT_THROW(design_input_capped(r, FirModel(vec({1.0, 0.5})), 1.0, 1.0, 2, AdversaryModel::least_squares(2)),
               BudgetError);
  EXPECT_THROW(design_input_capped(r, FirModel(vec({1.0, 0.5})), 1.0, 2.0, 2, AdversaryModel::least_squares(3)),
               DimensionError);
}

TEST(InputCapped, RegularizedAdversary) {
  std::mt19937_64 rng(39);
  const Vector rv = oracle::random_vector(rng, 40);
  const FirModel h(oracle::random_vector(rng, 3));
  const Mat k = stable_spline_kernel(3, 0.7);
  const AdversaryModel adv = AdversaryModel::regularized(Kernel(k, 0.1), h);
  const DesignResult d = design_input_capped(SignalSeq(rv, SignalKind::input), h, 1.0, 2.0, 3, adv);
  const Vector f = oracle::poly_product(h.coeffs(), d.l_star);
  const double direct =
      oracle::rls_mse(oracle::regressor(rv, 3), h.coeffs(), oracle::filter_matrix(f, 40), 1.0, k, 0.1).trace();
  EXPECT_LE(oracle::rel_err(d.predicted_trace, direct), 1e-9);
}

TEST(RandomInputModel, Validation) {
  EXPECT_THROW(RandomInputModel({{5, 0.5}, {6, 0.4}}, iid_gaussian_inputs(), 1, 1), ParameterError);
  EXPECT_THROW(RandomInputModel({}, iid_gaussian_inputs(), 1, 1), ParameterError);
  EXPECT_THROW(RandomInputModel({{5, 1.0}}, iid_gaussian_inputs(), 0, 1), ParameterError);
  EXPECT_THROW(RandomInputModel::uniform_gaussian(20, 10, 1, 1), ParameterError);
  const RandomInputModel m = RandomInputModel::uniform_gaussian(10, 20, 3, 4);
  EXPECT_EQ(m.length_pmf().size(), 11u);
  EXPECT_EQ(m.min_length(), 10u);
  EXPECT_EQ(m.length_from_uniform(0.0), 10u);
  EXPECT_EQ(m.length_from_uniform(0.9999999), 20u);
  EXPECT_THROW(estimate_M_random(m, 3, 0.1, AdversaryModel::least_squares(11), 0), ParameterError);
}

TEST(EstimateRandom, PointMassReducesToDeterministic) {
  const Vector fixed = vec({1.0, -0.5, 2.0, 0.3, 0.8, -1.2, 0.4, 0.9});
  const RandomInputModel model({{8, 1.0}}, [&](std::size_t, const CounterStream&) { return fixed; }, 3, 5);
  const RandomTraceEstimate est = estimate_M_random(model, 3, 0.2, AdversaryModel::least_squares(2), 4);
  const TraceDecomposition dec =
      decompose_ls_trace(build_regressor(SignalSeq(fixed, SignalKind::input), 2), 0.2, 3);
  EXPECT_LT((est.m - dec.m).cwiseAbs().maxCoeff(), 1e-13 * dec.m.cwiseAbs().maxCoeff());
  EXPECT_NEAR(est.c_mean, dec.c, 1e-13 * dec.c);
  EXPECT_EQ(est.samples, 15u);
  EXPECT_EQ(est.redraws, 0u);
}

TEST(EstimateRandom, DeterministicAcrossThreadCounts) {
  const RandomInputModel model = RandomInputModel::uniform_gaussian(10, 14, 20, 30);
  const AdversaryModel adv = AdversaryModel::least_squares(3);
  const RandomTraceEstimate a = estimate_M_random(model, 4, 0.1, adv, 9, 1);
  const RandomTraceEstimate b = estimate_M_random(model, 4, 0.1, adv, 9, 4);
  EXPECT_EQ(a.m, b.m);
  EXPECT_EQ(a.c_mean, b.c_mean);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.m);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12 * es.eigenvalues().maxCoeff());
  EXPECT_LE((a.m - a.m.transpose()).cwiseAbs().maxCoeff(), 1e-14 * a.m.cwiseAbs().maxCoeff());
}

TEST(EstimateRandom, IndependentSeedsAgreeWithLargerReference) {
  const AdversaryModel adv = AdversaryModel::least_squares(2);
  const RandomInputModel small = RandomInputModel::uniform_gaussian(12, 16, 40, 50);
  const RandomInputModel big = RandomInputModel::uniform_gaussian(12, 16, 400, 50);
  const RandomTraceEstimate ref = estimate_M_random(big, 3, 0.1, adv, 1000);
  const RandomTraceEstimate a = estimate_M_random(small, 3, 0.1, adv, 1);
  const RandomTraceEstimate b = estimate_M_random(small, 3, 0.1, adv, 2);
  const double scale = ref.m.norm();
  EXPECT_LT((a.m - ref.m).norm(), 0.1 * scale);
  EXPECT_LT((b.m - ref.m).norm(), 0.1 * scale);
  EXPECT_LT((a.m - b.m).norm(), 0.15 * scale);
  EXPECT_NEAR(a.c_mean, ref.c_mean, 0.05 * ref.c_mean);
  EXPECT_GT((a.m - b.m).norm(), 0.0);
}

TEST(EstimateRandom, RedrawPolicy) {
  // Every other input is all zeros: far more than 1% of draws need a redraw.
  const RandomInputModel bad({{6, 1.0}},
                             [](std::size_t n, const CounterStream& s) {
                               Vector r = Vector::Zero(static_cast<Eigen::Index>(n));
                               if (s.uniform(0) < 0.5) return r;
                               for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = s.gaussian(static_cast<std::uint64_t>(i));
                               return r;
                             },
                             5, 20);
  EXPECT_THROW(estimate_M_random(bad, 2, 0.1, AdversaryModel::least_squares(2), 3), ConditioningError);

  // Rare failures are redrawn and counted.
  const RandomInputModel rare({{6, 1.0}},
                              [](std::size_t n, const CounterStream& s) {
                                Vector r = Vector::Zero(static_cast<Eigen::Index>(n));
                                if (s.uniform(0) < 0.002) return r;
                                for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = s.gaussian(static_cast<std::uint64_t>(i));
                                return r;
                              },
                              50, 100);
  const RandomTraceEstimate est = estimate_M_random(rare, 2, 0.1, AdversaryModel::least_squares(2), 3);
  EXPECT_GT(est.redraws, 0u);
  EXPECT_LE(est.redraws, 50u);
  EXPECT_EQ(est.samples, 5000u);
}

TEST(RandomDesign, RatioFormulaAndVanishingBudget) {
  const Matrix m = diag({3.0, 1.0});
  const RandomDesign d = design_output_random(m, 0.5, 0.1, 0.3);
  EXPECT_NEAR(d.predicted_ratio, 1.0 + 3.0 * 0.2 / 0.5, 1e-12);
  EXPECT_NEAR(d.design.l_star.squaredNorm(), 0.2, 1e-12);
  const RandomDesign tiny = design_output_random(m, 0.5, 0.1, 0.1 + 1e-12);
  EXPECT_NEAR(tiny.predicted_ratio, 1.0, 1e-10);
  EXPECT_THROW(design_output_random(m, 0.0, 0.1, 0.3), ParameterError);
}
