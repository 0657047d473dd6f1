#pragma once

// SISO FIR / rational system representations and the structured matrices of
// the identification problem. Polynomials are in the delay operator q^{-1}:
// entry k of a coefficient vector multiplies q^{-k}. All systems start at
// rest (zero initial state).

#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "firpriv/random.hpp"

namespace firpriv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Impulse-response coefficients h_0 ... h_{n_h-1} of an FIR plant.
class FirModel {
 public:
  explicit FirModel(Vector coeffs);

  const Vector& coeffs() const noexcept { return coeffs_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(coeffs_.size()); }
  double operator[](std::size_t k) const { return coeffs_[static_cast<Eigen::Index>(k)]; }

 private:
  Vector coeffs_;
};

/// B(q^{-1}) / A(q^{-1}) with A monic and all poles strictly inside the unit
/// circle (|pole| < 1 - 1e-9), checked on construction.
class RationalFilter {
 public:
  RationalFilter(Vector numerator, Vector denominator);

  static RationalFilter identity();
  static RationalFilter fir(const Vector& coeffs);

  const Vector& numerator() const noexcept { return numerator_; }
  const Vector& denominator() const noexcept { return denominator_; }
  bool is_fir() const noexcept { return denominator_.size() == 1; }

  /// y = G x with zero initial state.
  Vector apply(const Vector& x) const;

 private:
  Vector numerator_;
  Vector denominator_;
};

enum class SignalKind { input, output, sensor_noise, privacy_noise, white };

std::string_view to_string(SignalKind kind) noexcept;

class SignalSeq {
 public:
  SignalSeq(Vector samples, SignalKind kind);

  const Vector& samples() const noexcept { return samples_; }
  SignalKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(samples_.size()); }

 private:
  Vector samples_;
  SignalKind kind_;
};

/// N x n_h lower-banded Toeplitz matrix with entry (i,j) = r_{i-j+1} (1-based,
/// zero when i < j), so that the noiseless output is R h.
class RegressorMatrix {
 public:
  const Matrix& matrix() const noexcept { return matrix_; }
  const Vector& source() const noexcept { return source_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(matrix_.cols()); }

 private:
  friend RegressorMatrix build_regressor(const SignalSeq& r, std::size_t n_h);
  RegressorMatrix(Matrix m, Vector source) : matrix_(std::move(m)), source_(std::move(source)) {}

  Matrix matrix_;
  Vector source_;
};

/// N x (N+m-1) matrix mapping the white driving sequence
/// v = [v_{-m+2} ... v_N] to the MA noise w_t = sum_k l_k v_{t-k}.
/// Row i holds (l_{m-1} ... l_0) starting at column i.
class BandedFilterMatrix {
 public:
  const Vector& coeffs() const noexcept { return coeffs_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return rows_ + static_cast<std::size_t>(coeffs_.size()) - 1; }

  Matrix dense() const;
  /// L v using the band only, O(N m).
  Vector apply(const Vector& v) const;
  /// A L for a dense left factor A with N columns, O(rows(A) N m).
  Matrix left_multiply(const Matrix& a) const;

 private:
  friend BandedFilterMatrix build_filter_matrix(const Vector& l, std::size_t n);
  BandedFilterMatrix(Vector coeffs, std::size_t rows) : coeffs_(std::move(coeffs)), rows_(rows) {}

  Vector coeffs_;
  std::size_t rows_;
};

/// First n samples of the impulse response (impulse at the first sample).
Vector impulse_response(const RationalFilter& g, std::size_t n);

struct FirTruncation {
  FirModel model;
  /// l1 norm of the discarded impulse-response tail.
  double tail_l1;
};

/// Truncates g to its first `order` impulse-response samples. The tail is
/// summed until the filter state drops below rel_tol times the running sum.
FirTruncation fir_truncate(const RationalFilter& g, std::size_t order, double rel_tol = 1e-12);

/// Throws DimensionError when N < n_h.
RegressorMatrix build_regressor(const SignalSeq& r, std::size_t n_h);

BandedFilterMatrix build_filter_matrix(const Vector& l, std::size_t n);

/// (n_h + n_l - 1) x n_l convolution matrix H with H l = h * l.
Matrix toeplitz_cascade(const FirModel& h, std::size_t n_l);

/// Full polynomial product of two coefficient vectors.
Vector convolve(const Vector& a, const Vector& b);

enum class NoiseChannel { none, output, input };

std::string_view to_string(NoiseChannel channel) noexcept;

/// Output-noise: y = R h + L v + e. Input-noise: y = R h + F v + e with
/// F built from f = h * l, i.e. the plant driven by r + x where the MA noise x
/// is stationary and r is at rest. none: y = R h + e.
/// v and e come from counter streams keyed by (seed, replicate).
SignalSeq simulate(const FirModel& h, const SignalSeq& r, NoiseChannel channel, const Vector& l,
                   double sigma2, std::uint64_t seed, std::uint64_t replicate = 0,
                   NoiseDistribution dist = NoiseDistribution::gaussian);

/// Unit-variance white Gaussian noise passed through w, zero initial state.
SignalSeq generate_filtered_input(const RationalFilter& w, std::size_t n, std::uint64_t seed,
                                  std::uint64_t replicate = 0);

}  // namespace firpriv
