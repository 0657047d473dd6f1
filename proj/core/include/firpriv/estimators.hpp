#pragma once

// The adversary's estimators and the exact second-order error formulas the
// noise designer optimizes against. Formulas use 1-based indices in comments.

#include <cstddef>
#include <string_view>

#include "firpriv/lti.hpp"

namespace firpriv {

/// Rejection threshold on cond(R'R) (and cond(R'R + eta K^{-1})).
inline constexpr double kMaxCondition = 1e12;

enum class Adversary { ls, rls };

std::string_view to_string(Adversary adversary) noexcept;

struct LsEstimate {
  Vector h_hat;
  /// ||y - R h_hat||_2
  double residual_norm;
};

/// Regularization kernel K (symmetric PSD) with weight eta > 0, as used in
/// J(h) = ||y - R h||^2 + eta h' K^{-1} h.
///
/// A singular K is rejected unless `allow_singular` is set, in which case
/// K is regularized to K + 1e-8 P_null (P_null the projector on its null
/// space) before inversion: the precision becomes pinv(K) + 1e8 P_null.
class Kernel {
 public:
  Kernel(Matrix k, double eta, bool allow_singular = false);

  const Matrix& matrix() const noexcept { return k_; }
  double eta() const noexcept { return eta_; }
  /// K^{-1}, or the regularized inverse described above.
  const Matrix& precision() const noexcept { return precision_; }
  bool regularized() const noexcept { return regularized_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(k_.rows()); }

 private:
  Matrix k_;
  double eta_;
  Matrix precision_;
  bool regularized_ = false;
};

/// P_h (LS) or MSE (RLS) with its trace.
struct ErrorReport {
  Matrix matrix;
  double trace;
  Adversary adversary;
};

/// tr(error) = l' M l + c for every noise filter l of the decomposition's length.
struct TraceDecomposition {
  Matrix m;
  double c;
};

/// K_ij = beta^max(i,j), i,j = 1..n. Throws ParameterError unless 0 < beta < 1.
Matrix stable_spline_kernel(std::size_t n, double beta);

/// C = (R'R)^{-1} R', so that h_hat = C y.
Matrix ls_gain(const RegressorMatrix& r);
/// C = (R'R + eta K^{-1})^{-1} R'.
Matrix rls_gain(const RegressorMatrix& r, const Kernel& kernel);

LsEstimate ls_estimate(const RegressorMatrix& r, const SignalSeq& y);
LsEstimate rls_estimate(const RegressorMatrix& r, const SignalSeq& y, const Kernel& kernel);

/// P_h = C (L L' + sigma2 I) C' with C the LS gain.
ErrorReport ls_covariance(const RegressorMatrix& r, const BandedFilterMatrix& noise, double sigma2);
/// P_h = sigma2 (R'R)^{-1}
ErrorReport ls_covariance(const RegressorMatrix& r, double sigma2);

/// MSE = (I - C R) h h' (I - C R)' + C L L' C' + sigma2 C C' with C the RLS gain.
ErrorReport rls_mse(const RegressorMatrix& r, const FirModel& h_true, const BandedFilterMatrix& noise,
                    double sigma2, const Kernel& kernel);
ErrorReport rls_mse(const RegressorMatrix& r, const FirModel& h_true, double sigma2, const Kernel& kernel);

/// The n x n matrix of the quadratic form l -> tr(C L L' C') for a gain C with
/// N columns. Equals Q_l' (I kron C'C) Q_l; since column k of L is a shifted
/// reversed copy of l, entry (a,b) is the sum of the (b-a)-th diagonal of
/// E = C'C, i.e. sum_i c_i' c_{i+|a-b|} over columns c_i of C. The result is
/// symmetric Toeplitz and E is never formed.
Matrix trace_form_matrix(const Matrix& gain, std::size_t n);

/// LS adversary: E = R (R'R)^{-2} R', c = sigma2 tr((R'R)^{-1}).
TraceDecomposition decompose_ls_trace(const RegressorMatrix& r, double sigma2, std::size_t n_l);

/// RLS adversary: E = C'C, c = tr((I - C R) h h' (I - C R)' + sigma2 C C').
TraceDecomposition decompose_rls_trace(const RegressorMatrix& r, const FirModel& h_true,
                                       const Kernel& kernel, double sigma2, std::size_t n_l);

}  // namespace firpriv
