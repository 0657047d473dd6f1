#pragma once

// Optimal privacy-noise filters. Every designer reduces the identification
// error to tr(error) = l' M l + c and solves a small symmetric eigenproblem.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "firpriv/estimators.hpp"
#include "firpriv/lti.hpp"
#include "firpriv/random.hpp"

namespace firpriv {

/// Which estimator the adversary runs. LS needs only the model order; RLS
/// also needs the kernel and the true plant (for the bias term).
class AdversaryModel {
 public:
  static AdversaryModel least_squares(std::size_t n_h);
  static AdversaryModel regularized(Kernel kernel, FirModel h_true);

  Adversary kind() const noexcept { return kind_; }
  std::size_t order() const noexcept { return n_h_; }
  const Kernel* kernel() const noexcept { return kernel_ ? &*kernel_ : nullptr; }
  const FirModel* truth() const noexcept { return h_true_ ? &*h_true_ : nullptr; }

  /// (M, c) for this adversary on regressor r with noise filter length n_l.
  TraceDecomposition decompose(const RegressorMatrix& r, double sigma2, std::size_t n_l) const;
  /// Estimator gain C (h_hat = C y).
  Matrix gain(const RegressorMatrix& r) const;

 private:
  AdversaryModel(Adversary kind, std::size_t n_h) : kind_(kind), n_h_(n_h) {}

  Adversary kind_;
  std::size_t n_h_;
  std::optional<Kernel> kernel_;
  std::optional<FirModel> h_true_;
};

struct DesignResult {
  Vector l_star;
  /// tr(P_h) (LS) or tr(MSE) (RLS) at l_star.
  double predicted_trace = 0.0;
  /// Noise contribution to the output variance at r = 0, including sigma2.
  double lambda_y = 0.0;
  /// lambda_y / sigma2
  double rho = 0.0;
  bool active_constraint = false;
  /// Top eigenvalue repeated (relative gap < 1e-9); any vector of the
  /// eigenspace is optimal, the solver's choice is returned.
  bool degenerate_top_eigenspace = false;
  /// M numerically zero: no filter changes the objective, l_star = 0.
  bool degenerate_objective = false;
  /// (l'Ml + c)^{-1} + gamma2 ||l||^2, weighted design only.
  std::optional<double> weighted_cost;
  NoiseChannel channel = NoiseChannel::output;
};

/// Sign convention for eigenvector-derived filters: the largest-magnitude
/// entry is made positive, lowest index winning magnitude ties.
Vector canonical_sign(Vector v);

/// max l'Ml s.t. ||l||^2 <= gamma1 - sigma2: l* = sqrt(gamma1 - sigma2) eta*,
/// eta* the unit top eigenvector of M.
DesignResult design_output_capped(const Matrix& m, double c, double sigma2, double gamma1);

/// (l'Ml + c)^{-1} + gamma2 ||l||^2
double weighted_cost(const Matrix& m, double c, double gamma2, const Vector& l);

/// min (l'Ml + c)^{-1} + gamma2 ||l||^2. l* = 0 when lambda1 <= gamma2 c^2,
/// otherwise ||l*||^2 = 1/sqrt(gamma2 lambda1) - c/lambda1 along the top
/// eigenvector. sigma2 only enters lambda_y and rho.
DesignResult design_output_weighted(const Matrix& m, double c, double sigma2, double gamma2);

/// Input-channel design: max l'M'l s.t. ||h * l||^2 <= gamma1 - sigma2, with
/// M' = H' M_f H and H the convolution matrix of h. Solved in whitened
/// coordinates: l* = sqrt(gamma1 - sigma2) (H'H)^{-1/2} eta*, eta* the top
/// eigenvector of (H'H)^{-1/2} M' (H'H)^{-1/2}. Throws RankError if H'H is
/// numerically singular.
DesignResult design_input_capped(const SignalSeq& r, const FirModel& h, double sigma2, double gamma1,
                                 std::size_t n_l, const AdversaryModel& adversary);

/// Draws an input of length N from the given counter stream.
using InputSampler = std::function<Vector(std::size_t n, const CounterStream& stream)>;

InputSampler iid_gaussian_inputs();

/// Random experiment length N ~ p(N) over a finite support and inputs
/// r ~ p(r | N); theta length draws with vartheta input draws each.
class RandomInputModel {
 public:
  RandomInputModel(std::vector<std::pair<std::size_t, double>> length_pmf, InputSampler sampler,
                   std::size_t theta, std::size_t vartheta);

  /// Lengths equiprobable on {lo, ..., hi}, i.i.d. standard Gaussian inputs.
  static RandomInputModel uniform_gaussian(std::size_t lo, std::size_t hi, std::size_t theta,
                                           std::size_t vartheta);

  const std::vector<std::pair<std::size_t, double>>& length_pmf() const noexcept { return pmf_; }
  std::size_t theta() const noexcept { return theta_; }
  std::size_t vartheta() const noexcept { return vartheta_; }
  std::size_t min_length() const noexcept;

  /// Inverse-CDF draw of N from uniform u in (0,1).
  std::size_t length_from_uniform(double u) const noexcept;
  Vector sample_input(std::size_t n, const CounterStream& stream) const { return sampler_(n, stream); }

 private:
  std::vector<std::pair<std::size_t, double>> pmf_;
  InputSampler sampler_;
  std::size_t theta_;
  std::size_t vartheta_;
};

struct RandomTraceEstimate {
  /// Sample average of the per-instance M over theta * vartheta (N, r) draws.
  Matrix m;
  /// Sample average of the per-instance c.
  double c_mean = 0.0;
  std::size_t samples = 0;
  /// Ill-conditioned input draws that were replaced.
  std::size_t redraws = 0;
};

/// Monte Carlo estimate of E{M(r,N)} and E{c(r,N)}. Ill-conditioned draws
/// (cond > kMaxCondition) are redrawn; more than 1% redraws throws
/// ConditioningError. Deterministic in seed for any thread count.
RandomTraceEstimate estimate_M_random(const RandomInputModel& model, std::size_t n_l, double sigma2,
                                      const AdversaryModel& adversary, std::uint64_t seed,
                                      unsigned threads = 1);

struct RandomDesign {
  DesignResult design;
  /// 1 + eta*' M eta* (gamma1 - sigma2) / E{c}
  double predicted_ratio = 1.0;
};

RandomDesign design_output_random(const Matrix& m, double c_mean, double sigma2, double gamma1);

}  // namespace firpriv
