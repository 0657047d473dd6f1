#include "firpriv/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "firpriv/errors.hpp"
#include "firpriv/random.hpp"

namespace firpriv {
namespace {

constexpr std::size_t kMaxAuditSamples = 4;
constexpr std::size_t kMaxAuditOrder = 2;

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be > 0");
}

void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in the open interval (0, 1)");
}

void require_sigma2(double sigma2) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw ParameterError("sigma2 must be >= 0");
}

double log_sum_exp(const std::vector<double>& terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

// log of the trapezoid rule for integral_lo^hi exp(f(u)) du.
template <typename F>
double log_trapezoid(F&& f, double lo, double hi, std::size_t intervals) {
  if (!(hi > lo)) return -std::numeric_limits<double>::infinity();
  const double step = (hi - lo) / static_cast<double>(intervals);
  std::vector<double> terms(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) {
    const double weight = (k == 0 || k == intervals) ? 0.5 : 1.0;
    terms[k] = f(lo + step * static_cast<double>(k)) + std::log(weight * step);
  }
  return log_sum_exp(terms);
}

}  // namespace

CoefficientBox::CoefficientBox(double lo, double hi, std::size_t order) : lower(lo), upper(hi), n_h(order) {
  if (!std::isfinite(lower) || !std::isfinite(upper)) throw ParameterError("box bounds must be finite");
  if (lower > upper) throw ParameterError("box lower bound exceeds upper bound");
  if (n_h < 1) throw DimensionError("box dimension must be >= 1");
}

double l1_sensitivity(const SignalSeq& r, const CoefficientBox& box) {
  return box.width() * r.samples().lpNorm<1>();
}

double l2_sensitivity(const SignalSeq& r, const CoefficientBox& box) {
  return box.width() * r.samples().norm();
}

std::string_view to_string(MechanismKind kind) noexcept {
  return kind == MechanismKind::laplace ? "laplace" : "gaussian";
}

DpMechanism laplace_mechanism(double epsilon, double sensitivity, double sigma2) {
  require_epsilon(epsilon);
  require_sigma2(sigma2);
  if (!(sensitivity >= 0.0)) throw ParameterError("sensitivity must be >= 0");
  const double b = sensitivity / epsilon;
  return DpMechanism{MechanismKind::laplace, b, epsilon, 0.0, sensitivity, sigma2, 2.0 * b * b + sigma2};
}

double gaussian_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double inverse_gaussian_tail(double delta) {
  require_delta(delta);
  if (delta > 0.5) return -inverse_gaussian_tail(1.0 - delta);
  // Q is decreasing; for delta <= 0.5 the root lies in [0, 40].
  double lo = 0.0;
  double hi = 40.0;
  if (gaussian_tail(lo) == delta) return lo;
  const double log_delta = std::log(delta);
  double x = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double q = gaussian_tail(x);
    if (q > delta) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(x))) break;
    // Newton on g(x) = log Q(x) - log delta, g'(x) = -phi(x) / Q(x).
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    double next = x;
    if (q > 0.0 && phi > 0.0) next = x + (std::log(q) - log_delta) * q / phi;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }
  return x;
}

double kappa(double epsilon, double delta) {
  require_epsilon(epsilon);
  const double q = inverse_gaussian_tail(delta);
  return 0.5 * (q + std::sqrt(q * q + 2.0 * epsilon));
}

DpMechanism gaussian_mechanism(double epsilon, double delta, double l2_sensitivity, double sigma2) {
  require_epsilon(epsilon);
  require_delta(delta);
  require_sigma2(sigma2);
  if (!(l2_sensitivity >= 0.0)) throw ParameterError("sensitivity must be >= 0");
  const double sd = kappa(epsilon, delta) * l2_sensitivity / epsilon;
  return DpMechanism{MechanismKind::gaussian, sd, epsilon, delta, l2_sensitivity, sigma2, sd * sd + sigma2};
}

SignalSeq sample_mechanism(const DpMechanism& mech, std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
  if (n < 1) throw DimensionError("sample count must be >= 1");
  const CounterStream stream(seed, StreamTag::mechanism, replicate);
  Vector w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    if (mech.kind == MechanismKind::gaussian) {
      w[i] = mech.scale * stream.gaussian(idx);
    } else {
      const double u = stream.uniform(idx) - 0.5;
      w[i] = -mech.scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
    }
  }
  return SignalSeq(std::move(w), SignalKind::privacy_noise);
}

double laplace_gaussian_log_density(double x, double b, double sigma2) {
  if (!(b > 0.0)) throw ParameterError("Laplace scale must be > 0");
  require_sigma2(sigma2);
  const double log_laplace_norm = -std::log(2.0 * b);
  if (sigma2 == 0.0) return log_laplace_norm - std::abs(x) / b;

  const double sigma = std::sqrt(sigma2);
  const double log_gauss_norm = -0.5 * std::log(2.0 * std::numbers::pi * sigma2);
  auto integrand = [&](double u) {
    return log_laplace_norm + log_gauss_norm - std::abs(x - u) / b - 0.5 * u * u / sigma2;
  };
  const double lo = -12.0 * sigma;
  const double hi = 12.0 * sigma;
  const double step = std::min(sigma, b) / 40.0;
  auto intervals = [&](double a, double c) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil((c - a) / step)), 8, 20000);
  };
  if (x <= lo || x >= hi) return log_trapezoid(integrand, lo, hi, intervals(lo, hi));
  const double left = log_trapezoid(integrand, lo, x, intervals(lo, x));
  const double right = log_trapezoid(integrand, x, hi, intervals(x, hi));
  return log_sum_exp({left, right});
}

AuditResult privacy_audit(const SignalSeq& r, const CoefficientBox& box, double epsilon, double b, double sigma2,
                          std::size_t grid_points) {
  require_epsilon(epsilon);
  require_sigma2(sigma2);
  if (!(b > 0.0)) throw ParameterError("Laplace scale must be > 0");
  if (r.size() > kMaxAuditSamples || box.n_h > kMaxAuditOrder) {
    throw SizeError("privacy audit supports N <= 4 and n_h <= 2 (got N = " + std::to_string(r.size()) +
                    ", n_h = " + std::to_string(box.n_h) + ")");
  }
  if (grid_points < 2001) throw ParameterError("audit grid needs at least 2001 points per dimension");

  const RegressorMatrix reg = build_regressor(r, box.n_h);
  const double scale = std::max(b, std::sqrt(sigma2));
  const auto order = static_cast<Eigen::Index>(box.n_h);

  // The log ratio of one sample only depends on the mean shift, so cache the
  // per-sample (max, min) of the log ratio by shift.
  std::map<double, std::pair<double, double>> extrema_by_shift;
  auto extrema = [&](double shift) {
    if (auto it = extrema_by_shift.find(shift); it != extrema_by_shift.end()) return it->second;
    std::pair<double, double> out{0.0, 0.0};
    if (shift != 0.0) {
      const double half = 10.0 * scale + std::abs(shift);
      out = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      for (std::size_t k = 0; k < grid_points; ++k) {
        // y relative to the mean under h; the mean under h' sits at `shift`.
        const double y = 0.5 * shift - half + 2.0 * half * static_cast<double>(k) /
                                                  static_cast<double>(grid_points - 1);
        const double value =
            laplace_gaussian_log_density(y, b, sigma2) - laplace_gaussian_log_density(y - shift, b, sigma2);
        out.first = std::max(out.first, value);
        out.second = std::min(out.second, value);
      }
    }
    extrema_by_shift.emplace(shift, out);
    return out;
  };

  double worst = 0.0;
  std::size_t pairs = 0;
  const std::size_t corners = std::size_t{1} << box.n_h;
  for (std::size_t corner = 0; corner < corners; ++corner) {
    Vector h(order);
    for (Eigen::Index j = 0; j < order; ++j) h[j] = (corner >> j) & 1U ? box.upper : box.lower;
    for (Eigen::Index j = 0; j < order; ++j) {
      Vector h_adj = h;
      h_adj[j] = h[j] == box.upper ? box.lower : box.upper;
      const Vector shift = reg.matrix() * (h_adj - h);
      double total_max = 0.0;
      double total_min = 0.0;
      for (Eigen::Index t = 0; t < shift.size(); ++t) {
        const auto [hi, lo] = extrema(shift[t]);
        total_max += hi;
        total_min += lo;
      }
      worst = std::max({worst, total_max, -total_min});
      ++pairs;
    }
  }
  return AuditResult{worst, epsilon, pairs};
}

}  // namespace firpriv
