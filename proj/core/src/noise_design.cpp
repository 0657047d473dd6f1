#include "firpriv/noise_design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "firpriv/errors.hpp"
#include "parallel.hpp"

namespace firpriv {
namespace {

constexpr double kDegenerateGap = 1e-9;
constexpr double kRankFloor = 1e-10;
constexpr double kMaxRedrawFraction = 0.01;
constexpr std::size_t kMaxAttemptsPerDraw = 1000;

struct TopEigen {
  double value;
  double second;
  Vector vector;
  Vector all_values;
};

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void require_psd(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) throw DimensionError("M must be square and non-empty");
  if (!m.allFinite()) throw ParameterError("M has non-finite entries");
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw ParameterError("M must be symmetric");
}

TopEigen top_eigen(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  const Vector& values = es.eigenvalues();
  const Eigen::Index n = values.size();
  const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300);
  if (values.minCoeff() < -1e-10 * scale) throw ParameterError("M must be positive semidefinite");
  return TopEigen{values[n - 1], n > 1 ? values[n - 2] : -std::numeric_limits<double>::infinity(),
                  es.eigenvectors().col(n - 1), values};
}

bool repeated_top(const TopEigen& e) {
  return std::isfinite(e.second) && e.value - e.second < kDegenerateGap * std::abs(e.value);
}

bool numerically_zero(const Matrix& m, double c) {
  return m.cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, std::abs(c));
}

void require_budget(double sigma2, double gamma1) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ParameterError("sigma2 must be > 0");
  if (!(gamma1 > sigma2) || !std::isfinite(gamma1)) {
    throw BudgetError("variance cap gamma1 = " + std::to_string(gamma1) +
                      " must exceed sigma2 = " + std::to_string(sigma2));
  }
}

void finish(DesignResult& d, double sigma2, double noise_power) {
  d.lambda_y = noise_power + sigma2;
  d.rho = d.lambda_y / sigma2;
}

}  // namespace

AdversaryModel AdversaryModel::least_squares(std::size_t n_h) {
  if (n_h < 1) throw DimensionError("adversary model order must be >= 1");
  return AdversaryModel(Adversary::ls, n_h);
}

AdversaryModel AdversaryModel::regularized(Kernel kernel, FirModel h_true) {
  if (kernel.size() != h_true.size()) throw DimensionError("kernel size does not match the true model");
  AdversaryModel out(Adversary::rls, h_true.size());
  out.kernel_.emplace(std::move(kernel));
  out.h_true_.emplace(std::move(h_true));
  return out;
}

TraceDecomposition AdversaryModel::decompose(const RegressorMatrix& r, double sigma2, std::size_t n_l) const {
  if (r.cols() != n_h_) throw DimensionError("regressor order does not match the adversary model");
  if (kind_ == Adversary::ls) return decompose_ls_trace(r, sigma2, n_l);
  return decompose_rls_trace(r, *h_true_, *kernel_, sigma2, n_l);
}

Matrix AdversaryModel::gain(const RegressorMatrix& r) const {
  if (r.cols() != n_h_) throw DimensionError("regressor order does not match the adversary model");
  return kind_ == Adversary::ls ? ls_gain(r) : rls_gain(r, *kernel_);
}

Vector canonical_sign(Vector v) {
  if (v.size() == 0) return v;
  const double top = v.cwiseAbs().maxCoeff();
  if (top == 0.0) return v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= top * (1.0 - 1e-12)) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  }
  return v;
}

DesignResult design_output_capped(const Matrix& m, double c, double sigma2, double gamma1) {
  require_psd(m);
  require_budget(sigma2, gamma1);
  DesignResult d;
  d.channel = NoiseChannel::output;
  if (numerically_zero(m, c)) {
    d.l_star = Vector::Zero(m.rows());
    d.predicted_trace = c;
    d.degenerate_objective = true;
    finish(d, sigma2, 0.0);
    return d;
  }
  const TopEigen top = top_eigen(m);
  d.l_star = std::sqrt(gamma1 - sigma2) * canonical_sign(top.vector);
  d.predicted_trace = d.l_star.dot(m * d.l_star) + c;
  d.active_constraint = true;
  d.degenerate_top_eigenspace = repeated_top(top);
  finish(d, sigma2, d.l_star.squaredNorm());
  return d;
}

double weighted_cost(const Matrix& m, double c, double gamma2, const Vector& l) {
  return 1.0 / (l.dot(m * l) + c) + gamma2 * l.squaredNorm();
}

DesignResult design_output_weighted(const Matrix& m, double c, double sigma2, double gamma2) {
  require_psd(m);
  if (!(gamma2 > 0.0) || !std::isfinite(gamma2)) throw ParameterError("gamma2 must be > 0");
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("c must be > 0");
  if (!(sigma2 > 0.0)) throw ParameterError("sigma2 must be > 0");
  DesignResult d;
  d.channel = NoiseChannel::output;
  const TopEigen top = top_eigen(m);
  const double lambda1 = top.value;
  if (lambda1 <= gamma2 * c * c) {
    d.l_star = Vector::Zero(m.rows());
    d.degenerate_objective = numerically_zero(m, c);
  } else {
    const double norm2 = 1.0 / std::sqrt(gamma2 * lambda1) - c / lambda1;
    d.l_star = std::sqrt(norm2) * canonical_sign(top.vector);
    d.degenerate_top_eigenspace = repeated_top(top);
  }
  d.predicted_trace = d.l_star.dot(m * d.l_star) + c;
  d.weighted_cost = weighted_cost(m, c, gamma2, d.l_star);
  finish(d, sigma2, d.l_star.squaredNorm());
  return d;
}

DesignResult design_input_capped(const SignalSeq& r, const FirModel& h, double sigma2, double gamma1,
                                 std::size_t n_l, const AdversaryModel& adversary) {
  require_budget(sigma2, gamma1);
  if (adversary.order() != h.size()) throw DimensionError("adversary model order does not match the plant");
  if (n_l < 1) throw DimensionError("noise filter length must be >= 1");

  const Matrix conv = toeplitz_cascade(h, n_l);
  Eigen::SelfAdjointEigenSolver<Matrix> gram(conv.transpose() * conv);
  const Vector& g = gram.eigenvalues();
  const double gmax = g.maxCoeff();
  if (!(g.minCoeff() > kRankFloor * gmax)) {
    throw RankError("H'H is numerically singular (min/max eigenvalue " +
                    std::to_string(g.minCoeff() / std::max(gmax, 1e-300)) + ")");
  }
  const Matrix whiten = gram.eigenvectors() * g.cwiseSqrt().cwiseInverse().asDiagonal() *
                        gram.eigenvectors().transpose();

  const RegressorMatrix reg = build_regressor(r, h.size());
  const std::size_t n_f = h.size() + n_l - 1;
  const TraceDecomposition dec = adversary.decompose(reg, sigma2, n_f);
  const Matrix m_input = symmetrized(conv.transpose() * dec.m * conv);

  DesignResult d;
  d.channel = NoiseChannel::input;
  if (numerically_zero(m_input, dec.c)) {
    d.l_star = Vector::Zero(static_cast<Eigen::Index>(n_l));
    d.predicted_trace = dec.c;
    d.degenerate_objective = true;
    finish(d, sigma2, 0.0);
    return d;
  }
  const TopEigen top = top_eigen(symmetrized(whiten * m_input * whiten));
  d.l_star = canonical_sign(std::sqrt(gamma1 - sigma2) * (whiten * top.vector));
  d.predicted_trace = d.l_star.dot(m_input * d.l_star) + dec.c;
  d.active_constraint = true;
  d.degenerate_top_eigenspace = repeated_top(top);
  finish(d, sigma2, (conv * d.l_star).squaredNorm());
  return d;
}

InputSampler iid_gaussian_inputs() {
  return [](std::size_t n, const CounterStream& stream) {
    Vector r(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = stream.gaussian(static_cast<std::uint64_t>(i));
    return r;
  };
}

RandomInputModel::RandomInputModel(std::vector<std::pair<std::size_t, double>> length_pmf, InputSampler sampler,
                                   std::size_t theta, std::size_t vartheta)
    : pmf_(std::move(length_pmf)), sampler_(std::move(sampler)), theta_(theta), vartheta_(vartheta) {
  if (pmf_.empty()) throw ParameterError("length distribution has empty support");
  if (!sampler_) throw ParameterError("input sampler is empty");
  if (theta_ < 1 || vartheta_ < 1) throw ParameterError("theta and vartheta must be >= 1");
  double total = 0.0;
  for (const auto& [n, p] : pmf_) {
    if (n < 1) throw ParameterError("support lengths must be >= 1");
    if (!(p >= 0.0)) throw ParameterError("length probabilities must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("length probabilities must sum to 1");
}

RandomInputModel RandomInputModel::uniform_gaussian(std::size_t lo, std::size_t hi, std::size_t theta,
                                                    std::size_t vartheta) {
  if (lo > hi) throw ParameterError("length range is empty");
  std::vector<std::pair<std::size_t, double>> pmf;
  const double p = 1.0 / static_cast<double>(hi - lo + 1);
  for (std::size_t n = lo; n <= hi; ++n) pmf.emplace_back(n, p);
  // absorb rounding so the probabilities sum to 1 exactly enough
  double rest = 1.0;
  for (std::size_t k = 0; k + 1 < pmf.size(); ++k) rest -= pmf[k].second;
  pmf.back().second = rest;
  return RandomInputModel(std::move(pmf), iid_gaussian_inputs(), theta, vartheta);
}

std::size_t RandomInputModel::min_length() const noexcept {
  std::size_t lo = pmf_.front().first;
  for (const auto& entry : pmf_) lo = std::min(lo, entry.first);
  return lo;
}

std::size_t RandomInputModel::length_from_uniform(double u) const noexcept {
  double acc = 0.0;
  for (const auto& [n, p] : pmf_) {
    acc += p;
    if (u < acc) return n;
  }
  return pmf_.back().first;
}

RandomTraceEstimate estimate_M_random(const RandomInputModel& model, std::size_t n_l, double sigma2,
                                      const AdversaryModel& adversary, std::uint64_t seed, unsigned threads) {
  if (model.min_length() < adversary.order()) {
    throw ParameterError("length support contains N < n_h");
  }
  if (n_l < 1) throw DimensionError("noise filter length must be >= 1");
  const std::size_t theta = model.theta();
  const std::size_t vartheta = model.vartheta();
  const auto size = static_cast<Eigen::Index>(n_l);
  const CounterStream lengths(seed, StreamTag::length);

  struct Partial {
    Matrix m;
    double c = 0.0;
    std::size_t redraws = 0;
  };
  std::vector<Partial> partials(theta);

  detail::parallel_for(theta, threads, [&](std::size_t i) {
    const std::size_t n = model.length_from_uniform(lengths.uniform(i));
    Partial part{Matrix::Zero(size, size), 0.0, 0};
    for (std::size_t j = 0; j < vartheta; ++j) {
      const std::uint64_t draw = static_cast<std::uint64_t>(i * vartheta + j);
      for (std::size_t attempt = 0;; ++attempt) {
        if (attempt == kMaxAttemptsPerDraw) {
          throw ConditioningError("no well-conditioned input after repeated redraws", kMaxCondition);
        }
        const CounterStream stream(seed, StreamTag::input, draw * kMaxAttemptsPerDraw + attempt);
        try {
          const RegressorMatrix reg = build_regressor(SignalSeq(model.sample_input(n, stream), SignalKind::input),
                                                      adversary.order());
          const TraceDecomposition dec = adversary.decompose(reg, sigma2, n_l);
          part.m += dec.m;
          part.c += dec.c;
          break;
        } catch (const ConditioningError&) {
          ++part.redraws;
        }
      }
    }
    partials[i] = std::move(part);
  });

  RandomTraceEstimate out;
  out.m = Matrix::Zero(size, size);
  for (const Partial& p : partials) {
    out.m += p.m;
    out.c_mean += p.c;
    out.redraws += p.redraws;
  }
  out.samples = theta * vartheta;
  const double count = static_cast<double>(out.samples);
  out.m /= count;
  out.c_mean /= count;
  if (static_cast<double>(out.redraws) > kMaxRedrawFraction * count) {
    throw ConditioningError("ill-conditioned input draws exceed 1% (" + std::to_string(out.redraws) + " of " +
                                std::to_string(out.samples) + ")",
                            kMaxCondition);
  }
  return out;
}

RandomDesign design_output_random(const Matrix& m, double c_mean, double sigma2, double gamma1) {
  if (!(c_mean > 0.0)) throw ParameterError("mean c must be > 0");
  RandomDesign out{design_output_capped(m, c_mean, sigma2, gamma1), 1.0};
  out.predicted_ratio = out.design.predicted_trace / c_mean;
  return out;
}

}  // namespace firpriv
