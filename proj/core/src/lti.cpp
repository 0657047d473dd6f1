#include "firpriv/lti.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "firpriv/errors.hpp"

namespace firpriv {
namespace {

constexpr double kStabilityMargin = 1e-9;
constexpr std::size_t kMaxTailSamples = 10'000'000;

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw ParameterError(std::string(what) + " contains non-finite entries");
  }
}

Vector trim_trailing_zeros(Vector v) {
  Eigen::Index n = v.size();
  while (n > 1 && v[n - 1] == 0.0) --n;
  return v.head(n).eval();
}

double spectral_radius_of_poles(const Vector& den) {
  const Eigen::Index p = den.size() - 1;
  if (p == 0) return 0.0;
  Matrix companion = Matrix::Zero(p, p);
  for (Eigen::Index k = 0; k < p; ++k) companion(0, k) = -den[k + 1];
  for (Eigen::Index k = 1; k < p; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Matrix> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

FirModel::FirModel(Vector coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.size() < 1) throw DimensionError("FIR model needs at least one coefficient");
  require_finite(coeffs_, "FIR model");
}

RationalFilter::RationalFilter(Vector numerator, Vector denominator)
    : numerator_(std::move(numerator)), denominator_(std::move(denominator)) {
  if (numerator_.size() < 1 || denominator_.size() < 1) {
    throw DimensionError("rational filter needs non-empty numerator and denominator");
  }
  require_finite(numerator_, "numerator");
  require_finite(denominator_, "denominator");
  if (std::abs(denominator_[0] - 1.0) > 1e-12) {
    throw ParameterError("denominator must be monic (leading coefficient 1)");
  }
  denominator_[0] = 1.0;
  denominator_ = trim_trailing_zeros(std::move(denominator_));
  const double radius = spectral_radius_of_poles(denominator_);
  if (!(radius < 1.0 - kStabilityMargin)) {
    throw ParameterError("unstable denominator: pole magnitude " + std::to_string(radius));
  }
}

RationalFilter RationalFilter::identity() { return RationalFilter(Vector::Ones(1), Vector::Ones(1)); }

RationalFilter RationalFilter::fir(const Vector& coeffs) { return RationalFilter(coeffs, Vector::Ones(1)); }

Vector RationalFilter::apply(const Vector& x) const {
  const Eigen::Index n = x.size();
  const Eigen::Index nb = numerator_.size();
  const Eigen::Index na = denominator_.size();
  Vector y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < nb && k <= t; ++k) acc += numerator_[k] * x[t - k];
    for (Eigen::Index k = 1; k < na && k <= t; ++k) acc -= denominator_[k] * y[t - k];
    y[t] = acc;
  }
  return y;
}

std::string_view to_string(SignalKind kind) noexcept {
  switch (kind) {
    case SignalKind::input: return "input";
    case SignalKind::output: return "output";
    case SignalKind::sensor_noise: return "sensor_noise";
    case SignalKind::privacy_noise: return "privacy_noise";
    case SignalKind::white: return "white";
  }
  return "unknown";
}

std::string_view to_string(NoiseChannel channel) noexcept {
  switch (channel) {
    case NoiseChannel::none: return "none";
    case NoiseChannel::output: return "output";
    case NoiseChannel::input: return "input";
  }
  return "unknown";
}

SignalSeq::SignalSeq(Vector samples, SignalKind kind) : samples_(std::move(samples)), kind_(kind) {
  require_finite(samples_, "signal");
}

Matrix BandedFilterMatrix::dense() const {
  const auto m = static_cast<Eigen::Index>(coeffs_.size());
  const auto n = static_cast<Eigen::Index>(rows_);
  Matrix out = Matrix::Zero(n, n + m - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) out(i, i + j) = coeffs_[m - 1 - j];
  }
  return out;
}

Vector BandedFilterMatrix::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != cols()) {
    throw DimensionError("banded filter: driving sequence has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(cols()));
  }
  const auto m = static_cast<Eigen::Index>(coeffs_.size());
  const auto n = static_cast<Eigen::Index>(rows_);
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) acc += coeffs_[m - 1 - j] * v[i + j];
    w[i] = acc;
  }
  return w;
}

Matrix BandedFilterMatrix::left_multiply(const Matrix& a) const {
  if (static_cast<std::size_t>(a.cols()) != rows_) {
    throw DimensionError("banded filter: left factor has wrong column count");
  }
  const auto m = static_cast<Eigen::Index>(coeffs_.size());
  const auto n = static_cast<Eigen::Index>(rows_);
  Matrix out = Matrix::Zero(a.rows(), n + m - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) out.col(i + j) += coeffs_[m - 1 - j] * a.col(i);
  }
  return out;
}

Vector impulse_response(const RationalFilter& g, std::size_t n) {
  if (n < 1) throw DimensionError("impulse response length must be >= 1");
  Vector delta = Vector::Zero(static_cast<Eigen::Index>(n));
  delta[0] = 1.0;
  return g.apply(delta);
}

FirTruncation fir_truncate(const RationalFilter& g, std::size_t order, double rel_tol) {
  if (order < 1) throw DimensionError("FIR truncation order must be >= 1");
  const Vector& b = g.numerator();
  const Vector& a = g.denominator();
  const std::size_t nb = static_cast<std::size_t>(b.size());
  const std::size_t na = static_cast<std::size_t>(a.size());
  const std::size_t memory = std::max<std::size_t>(na, 1);

  std::vector<double> y;
  y.reserve(order + 64);
  double head_l1 = 0.0;
  double tail = 0.0;
  for (std::size_t t = 0; t < kMaxTailSamples; ++t) {
    double acc = t < nb ? b[static_cast<Eigen::Index>(t)] : 0.0;
    for (std::size_t k = 1; k < na && k <= t; ++k) acc -= a[static_cast<Eigen::Index>(k)] * y[t - k];
    y.push_back(acc);
    if (t < order) {
      head_l1 += std::abs(acc);
      continue;
    }
    tail += std::abs(acc);
    // Once the numerator is exhausted the response is driven only by the
    // last `memory` samples; stop when they are negligible.
    if (t + 1 >= nb && t + 1 >= order + memory) {
      double state = 0.0;
      for (std::size_t k = 0; k < memory; ++k) state = std::max(state, std::abs(y[t - k]));
      if (state <= rel_tol * tail || state == 0.0) break;
    }
  }
  Vector head(static_cast<Eigen::Index>(order));
  for (std::size_t k = 0; k < order; ++k) head[static_cast<Eigen::Index>(k)] = y[k];
  return FirTruncation{FirModel(std::move(head)), tail};
}

RegressorMatrix build_regressor(const SignalSeq& r, std::size_t n_h) {
  const std::size_t n = r.size();
  if (n_h < 1) throw DimensionError("regressor needs n_h >= 1");
  if (n < n_h) {
    throw DimensionError("regressor: N = " + std::to_string(n) + " < n_h = " + std::to_string(n_h) +
                         " leaves the least-squares problem underdetermined");
  }
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(n_h);
  Matrix m = Matrix::Zero(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) m.col(j).tail(rows - j) = r.samples().head(rows - j);
  return RegressorMatrix(std::move(m), r.samples());
}

BandedFilterMatrix build_filter_matrix(const Vector& l, std::size_t n) {
  if (n < 1) throw DimensionError("filter matrix needs N >= 1");
  if (l.size() < 1) throw DimensionError("filter matrix needs at least one coefficient");
  require_finite(l, "noise filter");
  return BandedFilterMatrix(l, n);
}

Matrix toeplitz_cascade(const FirModel& h, std::size_t n_l) {
  if (n_l < 1) throw DimensionError("cascade needs n_l >= 1");
  const auto nh = static_cast<Eigen::Index>(h.size());
  const auto nl = static_cast<Eigen::Index>(n_l);
  Matrix out = Matrix::Zero(nh + nl - 1, nl);
  for (Eigen::Index j = 0; j < nl; ++j) out.col(j).segment(j, nh) = h.coeffs();
  return out;
}

Vector convolve(const Vector& a, const Vector& b) {
  if (a.size() == 0 || b.size() == 0) return Vector();
  Vector out = Vector::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

SignalSeq simulate(const FirModel& h, const SignalSeq& r, NoiseChannel channel, const Vector& l,
                   double sigma2, std::uint64_t seed, std::uint64_t replicate, NoiseDistribution dist) {
  if (!(sigma2 >= 0.0)) throw ParameterError("sigma2 must be >= 0");
  const RegressorMatrix reg = build_regressor(r, h.size());
  const std::size_t n = r.size();
  Vector y = reg.matrix() * h.coeffs();

  if (channel != NoiseChannel::none) {
    if (l.size() < 1) throw DimensionError("noise filter must have at least one coefficient");
    const Vector shaping = channel == NoiseChannel::output ? l : convolve(h.coeffs(), l);
    const BandedFilterMatrix band = build_filter_matrix(shaping, n);
    const CounterStream stream(seed, StreamTag::privacy, replicate);
    Vector v(static_cast<Eigen::Index>(band.cols()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = stream.unit(static_cast<std::uint64_t>(i), dist);
    y += band.apply(v);
  }
  if (sigma2 > 0.0) {
    const CounterStream stream(seed, StreamTag::sensor, replicate);
    const double sd = std::sqrt(sigma2);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sd * stream.gaussian(static_cast<std::uint64_t>(i));
  }
  return SignalSeq(std::move(y), SignalKind::output);
}

SignalSeq generate_filtered_input(const RationalFilter& w, std::size_t n, std::uint64_t seed,
                                  std::uint64_t replicate) {
  if (n < 1) throw DimensionError("input length must be >= 1");
  const CounterStream stream(seed, StreamTag::input, replicate);
  Vector white(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < white.size(); ++i) white[i] = stream.gaussian(static_cast<std::uint64_t>(i));
  return SignalSeq(w.apply(white), SignalKind::input);
}

}  // namespace firpriv
