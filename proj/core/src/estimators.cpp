#include "firpriv/estimators.hpp"

#include <cmath>
#include <string>

#include "firpriv/errors.hpp"

namespace firpriv {
namespace {

// Cholesky solve of a symmetric positive-definite system, rejecting
// cond(a) > kMaxCondition. The condition number is exact (eigenvalues of a
// small n_h x n_h matrix).
Matrix spd_solve(const Matrix& a, const Matrix& rhs, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxCondition)) {
    throw ConditioningError(std::string(what) + " is singular or ill-conditioned", cond);
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw ConditioningError(std::string(what) + " is not positive definite", cond);
  }
  return llt.solve(rhs);
}

void require_sigma2(double sigma2) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ParameterError("sigma2 must be finite and >= 0");
}

ErrorReport make_report(Matrix m, Adversary adversary) {
  m = (0.5 * (m + m.transpose())).eval();
  const double trace = m.trace();
  return ErrorReport{std::move(m), trace, adversary};
}

void check_noise_rows(const RegressorMatrix& r, const BandedFilterMatrix& noise) {
  if (noise.rows() != r.rows()) {
    throw DimensionError("noise matrix has " + std::to_string(noise.rows()) + " rows, regressor has " +
                         std::to_string(r.rows()));
  }
}

void check_kernel(const RegressorMatrix& r, const Kernel& kernel) {
  if (kernel.size() != r.cols()) throw DimensionError("kernel size does not match n_h");
}

}  // namespace

std::string_view to_string(Adversary adversary) noexcept {
  return adversary == Adversary::ls ? "ls" : "rls";
}

Kernel::Kernel(Matrix k, double eta, bool allow_singular) : k_(std::move(k)), eta_(eta) {
  if (k_.rows() != k_.cols() || k_.rows() < 1) throw DimensionError("kernel must be square and non-empty");
  if (!(eta_ > 0.0) || !std::isfinite(eta_)) throw ParameterError("kernel weight eta must be > 0");
  if (!k_.allFinite()) throw ParameterError("kernel has non-finite entries");
  const double scale = std::max(k_.cwiseAbs().maxCoeff(), 1e-300);
  if ((k_ - k_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ParameterError("kernel must be symmetric");
  }
  k_ = (0.5 * (k_ + k_.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(k_);
  const Vector& lambda = es.eigenvalues();
  const double top = lambda.maxCoeff();
  if (lambda.minCoeff() < -1e-10 * std::max(top, scale)) {
    throw ParameterError("kernel must be positive semidefinite");
  }
  const double floor = 1e-12 * top;
  const bool singular = !(top > 0.0) || lambda.minCoeff() <= floor;
  if (!singular) {
    precision_ = es.eigenvectors() * lambda.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return;
  }
  if (!allow_singular) {
    throw ParameterError("kernel is singular; enable the regularized pseudo-inverse explicitly");
  }
  regularized_ = true;
  Vector inv(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    inv[i] = lambda[i] > floor ? 1.0 / lambda[i] : 1.0 / 1e-8;
  }
  precision_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Matrix stable_spline_kernel(std::size_t n, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("stable spline beta must lie in (0, 1)");
  if (n < 1) throw DimensionError("kernel size must be >= 1");
  const auto size = static_cast<Eigen::Index>(n);
  Matrix k(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < size; ++j) k(i, j) = std::pow(beta, static_cast<double>(std::max(i, j) + 1));
  }
  return k;
}

Matrix ls_gain(const RegressorMatrix& r) {
  const Matrix& rm = r.matrix();
  return spd_solve(rm.transpose() * rm, rm.transpose(), "R'R");
}

Matrix rls_gain(const RegressorMatrix& r, const Kernel& kernel) {
  check_kernel(r, kernel);
  const Matrix& rm = r.matrix();
  const Matrix a = rm.transpose() * rm + kernel.eta() * kernel.precision();
  return spd_solve(a, rm.transpose(), "R'R + eta K^{-1}");
}

namespace {

LsEstimate finish_estimate(const RegressorMatrix& r, const SignalSeq& y, Vector h_hat) {
  const double residual = (y.samples() - r.matrix() * h_hat).norm();
  return LsEstimate{std::move(h_hat), residual};
}

}  // namespace

LsEstimate ls_estimate(const RegressorMatrix& r, const SignalSeq& y) {
  if (y.size() != r.rows()) throw DimensionError("output length does not match regressor rows");
  const Matrix& rm = r.matrix();
  Vector h_hat = spd_solve(rm.transpose() * rm, rm.transpose() * y.samples(), "R'R");
  return finish_estimate(r, y, std::move(h_hat));
}

LsEstimate rls_estimate(const RegressorMatrix& r, const SignalSeq& y, const Kernel& kernel) {
  if (y.size() != r.rows()) throw DimensionError("output length does not match regressor rows");
  check_kernel(r, kernel);
  const Matrix& rm = r.matrix();
  const Matrix a = rm.transpose() * rm + kernel.eta() * kernel.precision();
  Vector h_hat = spd_solve(a, rm.transpose() * y.samples(), "R'R + eta K^{-1}");
  return finish_estimate(r, y, std::move(h_hat));
}

ErrorReport ls_covariance(const RegressorMatrix& r, const BandedFilterMatrix& noise, double sigma2) {
  require_sigma2(sigma2);
  check_noise_rows(r, noise);
  const Matrix c = ls_gain(r);
  const Matrix cl = noise.left_multiply(c);
  return make_report(cl * cl.transpose() + sigma2 * c * c.transpose(), Adversary::ls);
}

ErrorReport ls_covariance(const RegressorMatrix& r, double sigma2) {
  require_sigma2(sigma2);
  const Matrix c = ls_gain(r);
  return make_report(sigma2 * c * c.transpose(), Adversary::ls);
}

namespace {

Matrix rls_fixed_part(const RegressorMatrix& r, const FirModel& h_true, const Matrix& c, double sigma2) {
  if (h_true.size() != r.cols()) throw DimensionError("true model length does not match n_h");
  const auto nh = static_cast<Eigen::Index>(r.cols());
  const Vector bias = (Matrix::Identity(nh, nh) - c * r.matrix()) * h_true.coeffs();
  return bias * bias.transpose() + sigma2 * c * c.transpose();
}

}  // namespace

ErrorReport rls_mse(const RegressorMatrix& r, const FirModel& h_true, const BandedFilterMatrix& noise,
                    double sigma2, const Kernel& kernel) {
  require_sigma2(sigma2);
  check_noise_rows(r, noise);
  const Matrix c = rls_gain(r, kernel);
  const Matrix cl = noise.left_multiply(c);
  return make_report(rls_fixed_part(r, h_true, c, sigma2) + cl * cl.transpose(), Adversary::rls);
}

ErrorReport rls_mse(const RegressorMatrix& r, const FirModel& h_true, double sigma2, const Kernel& kernel) {
  require_sigma2(sigma2);
  const Matrix c = rls_gain(r, kernel);
  return make_report(rls_fixed_part(r, h_true, c, sigma2), Adversary::rls);
}

Matrix trace_form_matrix(const Matrix& gain, std::size_t n) {
  if (n < 1) throw DimensionError("noise filter length must be >= 1");
  const Eigen::Index cols = gain.cols();
  const auto size = static_cast<Eigen::Index>(n);
  Vector diag_sums = Vector::Zero(size);
  for (Eigen::Index k = 0; k < size && k < cols; ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i + k < cols; ++i) acc += gain.col(i).dot(gain.col(i + k));
    diag_sums[k] = acc;
  }
  Matrix m(size, size);
  for (Eigen::Index a = 0; a < size; ++a) {
    for (Eigen::Index b = 0; b < size; ++b) m(a, b) = diag_sums[std::abs(a - b)];
  }
  return m;
}

TraceDecomposition decompose_ls_trace(const RegressorMatrix& r, double sigma2, std::size_t n_l) {
  require_sigma2(sigma2);
  const Matrix c = ls_gain(r);
  // C C' = (R'R)^{-1}, so ||C||_F^2 = tr((R'R)^{-1}).
  return TraceDecomposition{trace_form_matrix(c, n_l), sigma2 * c.squaredNorm()};
}

TraceDecomposition decompose_rls_trace(const RegressorMatrix& r, const FirModel& h_true,
                                       const Kernel& kernel, double sigma2, std::size_t n_l) {
  require_sigma2(sigma2);
  const Matrix c = rls_gain(r, kernel);
  return TraceDecomposition{trace_form_matrix(c, n_l), rls_fixed_part(r, h_true, c, sigma2).trace()};
}

}  // namespace firpriv
