#pragma once

// Differential-privacy calibration of i.i.d. additive output noise for FIR
// plants whose coefficients lie in a box [lower, upper]^{n_h}. Adjacent
// coefficient vectors differ in one entry.

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "firpriv/lti.hpp"

namespace firpriv {

struct CoefficientBox {
  CoefficientBox(double lower, double upper, std::size_t n_h);

  double lower;
  double upper;
  std::size_t n_h;

  double width() const noexcept { return upper - lower; }
};

/// sup ||R h - R h'||_1 over adjacent h, h' in the box:
/// (upper - lower) * sum_{k=1}^{N} |r_k|.
double l1_sensitivity(const SignalSeq& r, const CoefficientBox& box);

/// sup ||R h - R h'||_2 over adjacent h, h' in the box. A difference in entry
/// j scales column j of R, whose norm is largest for j = 1, giving
/// (upper - lower) * ||r||_2. This closed form is derived here, not quoted.
double l2_sensitivity(const SignalSeq& r, const CoefficientBox& box);

enum class MechanismKind { laplace, gaussian };

std::string_view to_string(MechanismKind kind) noexcept;

struct DpMechanism {
  MechanismKind kind;
  /// Laplace scale b, or Gaussian standard deviation.
  double scale;
  double epsilon;
  /// 0 for Laplace.
  double delta;
  double sensitivity;
  double sigma2;
  /// Laplace: 2 b^2 + sigma2. Gaussian: std^2 + sigma2.
  double lambda_y;
};

/// Tight Laplace calibration b = sensitivity / epsilon.
DpMechanism laplace_mechanism(double epsilon, double sensitivity, double sigma2);

/// Standard Gaussian upper tail Q(x) = P{Z > x}.
double gaussian_tail(double x);

/// Q^{-1}(delta) for delta in (0,1), by safeguarded bisection + Newton on log Q.
double inverse_gaussian_tail(double delta);

/// kappa(eps, delta) = (Q^{-1}(delta) + sqrt(Q^{-1}(delta)^2 + 2 eps)) / 2
double kappa(double epsilon, double delta);

/// Tight Gaussian calibration std = kappa(eps, delta) * l2_sensitivity / eps.
DpMechanism gaussian_mechanism(double epsilon, double delta, double l2_sensitivity, double sigma2);

/// n i.i.d. draws of the mechanism noise w_t, deterministic in (seed, replicate).
SignalSeq sample_mechanism(const DpMechanism& mech, std::size_t n, std::uint64_t seed,
                           std::uint64_t replicate = 0);

/// log of the density of w + e, w ~ Laplace(0, b), e ~ N(0, sigma2), by
/// trapezoid quadrature in the log domain (split at the Laplace kink).
double laplace_gaussian_log_density(double x, double b, double sigma2);

struct AuditResult {
  /// max over adjacent corner pairs and grid points of |log p(y|h) - log p(y|h')|
  double max_log_ratio;
  double epsilon;
  std::size_t pairs;

  bool within(double tolerance) const noexcept { return max_log_ratio <= epsilon + tolerance; }
};

/// Numerical check of epsilon-DP for y = R h + w + e on tiny instances
/// (N <= 4, n_h <= 2; SizeError otherwise). The output density factorizes
/// over samples, so the maximum over the product grid is the sum of the
/// per-sample extrema. Each sample is gridded on its midpoint +- (10 scale
/// + |shift|), scale = max(b, sigma), with grid_points >= 2001 points.
AuditResult privacy_audit(const SignalSeq& r, const CoefficientBox& box, double epsilon, double b,
                          double sigma2, std::size_t grid_points = 2001);

}  // namespace firpriv
