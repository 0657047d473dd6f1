#include "firpriv/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "firpriv/errors.hpp"
#include "parallel.hpp"

namespace firpriv {
namespace {

constexpr std::size_t kBlock = 512;
constexpr double kMaxFailureFraction = 0.01;
// Separates the attack-phase streams from the design-phase streams.
constexpr std::uint64_t kAttackSeedSalt = 0x6A09E667F3BCC909ULL;
constexpr std::uint64_t kBaselineSeedSalt = 0xBB67AE8584CAA73BULL;

struct Moments {
  double sum_a = 0.0;
  double sum_aa = 0.0;
  double sum_b = 0.0;
  double sum_bb = 0.0;
  double sum_ab = 0.0;
  std::size_t n = 0;
  std::size_t failures = 0;

  void add(double a, double b) {
    sum_a += a;
    sum_aa += a * a;
    sum_b += b;
    sum_bb += b * b;
    sum_ab += a * b;
    ++n;
  }
  Moments& operator+=(const Moments& o) {
    sum_a += o.sum_a;
    sum_aa += o.sum_aa;
    sum_b += o.sum_b;
    sum_bb += o.sum_bb;
    sum_ab += o.sum_ab;
    n += o.n;
    failures += o.failures;
    return *this;
  }
};

TraceEstimate estimate(double sum, double sum_sq, std::size_t n, std::size_t failures) {
  TraceEstimate t;
  t.samples = n;
  t.failures = failures;
  if (n == 0) return t;
  const double count = static_cast<double>(n);
  t.mean = sum / count;
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - count * t.mean * t.mean) / (count - 1.0));
    t.standard_error = std::sqrt(var / count);
  }
  return t;
}

// Runs body(replicate, moments) over fixed blocks and reduces in block order.
template <typename Body>
Moments run_blocks(std::size_t replicates, unsigned threads, Body&& body) {
  const std::size_t blocks = (replicates + kBlock - 1) / kBlock;
  std::vector<Moments> partial(blocks);
  detail::parallel_for(blocks, threads, [&](std::size_t blk) {
    Moments m;
    const std::size_t end = std::min(replicates, (blk + 1) * kBlock);
    for (std::size_t k = blk * kBlock; k < end; ++k) body(k, m);
    partial[blk] = m;
  });
  Moments total;
  for (const Moments& m : partial) total += m;
  if (static_cast<double>(total.failures) > kMaxFailureFraction * static_cast<double>(replicates)) {
    throw ConditioningError("more than 1% of simulated attacks hit ill-conditioned normal equations (" +
                                std::to_string(total.failures) + " of " + std::to_string(replicates) + ")",
                            kMaxCondition);
  }
  return total;
}

AdversaryModel make_adversary(const ExperimentConfig& cfg, const FirModel& h) {
  if (cfg.design.adversary == Adversary::ls) return AdversaryModel::least_squares(h.size());
  return AdversaryModel::regularized(Kernel(stable_spline_kernel(h.size(), cfg.design.kernel_beta), cfg.design.eta), h);
}

ExperimentReport deterministic_run(const ExperimentConfig& cfg, DesignMode mode, std::uint64_t seed,
                                   unsigned threads) {
  const FirModel h = cfg.fir_plant();
  const SignalSeq r = cfg.make_input(seed);
  const AdversaryModel adversary = make_adversary(cfg, h);
  const RegressorMatrix reg = build_regressor(r, h.size());
  const double sigma2 = cfg.design.sigma2;
  const std::size_t n_l = cfg.design.n_l;

  ExperimentReport rep;
  rep.mode = mode;
  NoiseChannel channel = NoiseChannel::output;
  switch (mode) {
    case DesignMode::output_capped: {
      const TraceDecomposition dec = adversary.decompose(reg, sigma2, n_l);
      rep.analytic = design_output_capped(dec.m, dec.c, sigma2, cfg.design.gamma1);
      break;
    }
    case DesignMode::output_weighted: {
      const TraceDecomposition dec = adversary.decompose(reg, sigma2, n_l);
      rep.analytic = design_output_weighted(dec.m, dec.c, sigma2, cfg.design.gamma2);
      break;
    }
    case DesignMode::input_capped:
      rep.analytic = design_input_capped(r, h, sigma2, cfg.design.gamma1, n_l, adversary);
      channel = NoiseChannel::input;
      break;
    case DesignMode::output_random:
      throw ParameterError("random-input design needs input = random");
  }
  rep.no_privacy_trace = adversary.decompose(reg, sigma2, 1).c;
  rep.baseline_trace = adversary.decompose(reg, rep.analytic.lambda_y, 1).c;
  rep.ratio = rep.analytic.predicted_trace / rep.baseline_trace;

  const Matrix gain = adversary.gain(reg);
  const Vector& l = rep.analytic.l_star;
  const Vector& truth = h.coeffs();
  const std::uint64_t attack_seed = seed ^ kAttackSeedSalt;
  const std::uint64_t baseline_seed = seed ^ kBaselineSeedSalt;
  const double lambda_y = rep.analytic.lambda_y;
  const Moments m = run_blocks(cfg.replicates, threads, [&](std::size_t k, Moments& acc) {
    const SignalSeq y = simulate(h, r, channel, l, sigma2, attack_seed, k);
    const SignalSeq y0 = simulate(h, r, NoiseChannel::none, l, lambda_y, baseline_seed, k);
    acc.add((gain * y.samples() - truth).squaredNorm(), (gain * y0.samples() - truth).squaredNorm());
  });
  rep.empirical = estimate(m.sum_a, m.sum_aa, m.n, m.failures);
  rep.baseline_empirical = estimate(m.sum_b, m.sum_bb, m.n, m.failures);
  return rep;
}

ExperimentReport random_run(const ExperimentConfig& cfg, std::uint64_t seed, unsigned threads) {
  const FirModel h = cfg.fir_plant();
  const AdversaryModel adversary = make_adversary(cfg, h);
  const RandomInputModel model = RandomInputModel::uniform_gaussian(cfg.input.length_min, cfg.input.length_max,
                                                                    cfg.input.theta, cfg.input.vartheta);
  const double sigma2 = cfg.design.sigma2;
  const RandomTraceEstimate est = estimate_M_random(model, cfg.design.n_l, sigma2, adversary, seed, threads);
  const RandomDesign design = design_output_random(est.m, est.c_mean, sigma2, cfg.design.gamma1);

  ExperimentReport rep;
  rep.mode = DesignMode::output_random;
  rep.analytic = design.design;
  rep.no_privacy_trace = est.c_mean;
  rep.baseline_trace = est.c_mean;
  rep.ratio = design.predicted_ratio;
  rep.design_redraws = est.redraws;

  // Each attack draws (N, r) afresh and reuses the same r, e for the w = 0
  // reference (common random numbers).
  const std::uint64_t attack_seed = seed ^ kAttackSeedSalt;
  const CounterStream lengths(attack_seed, StreamTag::length);
  const Vector& l = rep.analytic.l_star;
  const Vector& truth = h.coeffs();
  const Moments m = run_blocks(cfg.replicates, threads, [&](std::size_t k, Moments& acc) {
    const std::size_t n = model.length_from_uniform(lengths.uniform(k));
    const SignalSeq r(model.sample_input(n, CounterStream(attack_seed, StreamTag::input, k)), SignalKind::input);
    Matrix gain;
    try {
      gain = adversary.gain(build_regressor(r, h.size()));
    } catch (const ConditioningError&) {
      ++acc.failures;
      return;
    }
    const SignalSeq y = simulate(h, r, NoiseChannel::output, l, sigma2, attack_seed, k);
    const SignalSeq y0 = simulate(h, r, NoiseChannel::none, l, sigma2, attack_seed, k);
    acc.add((gain * y.samples() - truth).squaredNorm(), (gain * y0.samples() - truth).squaredNorm());
  });
  rep.empirical = estimate(m.sum_a, m.sum_aa, m.n, m.failures);
  rep.baseline_empirical = estimate(m.sum_b, m.sum_bb, m.n, m.failures);
  if (m.n > 1 && rep.baseline_empirical.mean > 0.0) {
    const double n = static_cast<double>(m.n);
    const double mean_a = m.sum_a / n;
    const double mean_b = m.sum_b / n;
    const double ratio = mean_a / mean_b;
    const double var_a = (m.sum_aa - n * mean_a * mean_a) / (n - 1.0);
    const double var_b = (m.sum_bb - n * mean_b * mean_b) / (n - 1.0);
    const double cov = (m.sum_ab - n * mean_a * mean_b) / (n - 1.0);
    const double var_ratio = (var_a - 2.0 * ratio * cov + ratio * ratio * var_b) / (mean_b * mean_b * n);
    rep.simulated_ratio = ratio;
    rep.simulated_ratio_se = std::sqrt(std::max(0.0, var_ratio));
  }
  return rep;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string_view to_string(DesignMode mode) noexcept {
  switch (mode) {
    case DesignMode::output_capped: return "output_capped";
    case DesignMode::input_capped: return "input_capped";
    case DesignMode::output_weighted: return "output_weighted";
    case DesignMode::output_random: return "output_random";
  }
  return "unknown";
}

ExperimentReport attack_simulation(const ExperimentConfig& config, DesignMode mode, std::uint64_t seed,
                                   unsigned threads) {
  if (config.replicates < 1) throw ParameterError("replicates must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport rep;
  if (mode == DesignMode::output_random) {
    if (config.input.kind != InputKind::random) throw ParameterError("random-input design needs input = random");
    rep = random_run(config, seed, threads);
  } else {
    if (config.input.kind == InputKind::random) {
      throw ParameterError("input = random is only supported by the random-input design");
    }
    rep = deterministic_run(config, mode, seed, threads);
  }
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.config_echo = to_config_text(config);
  return rep;
}

std::string to_csv(const ExperimentReport& rep) {
  std::ostringstream out;
  out << "name,paper_value,computed,tolerance,pass\n";
  auto row = [&](const std::string& name, const std::string& value) { out << name << ",," << value << ",,\n"; };
  for (Eigen::Index i = 0; i < rep.analytic.l_star.size(); ++i) {
    row("l_star_" + std::to_string(i), fmt(rep.analytic.l_star[i]));
  }
  row("predicted_trace", fmt(rep.analytic.predicted_trace));
  row("lambda_y", fmt(rep.analytic.lambda_y));
  row("rho", fmt(rep.analytic.rho));
  row("active_constraint", rep.analytic.active_constraint ? "1" : "0");
  row("degenerate_top_eigenspace", rep.analytic.degenerate_top_eigenspace ? "1" : "0");
  if (rep.analytic.weighted_cost) row("weighted_cost", fmt(*rep.analytic.weighted_cost));
  row("no_privacy_trace", fmt(rep.no_privacy_trace));
  row("baseline_trace", fmt(rep.baseline_trace));
  row("ratio", fmt(rep.ratio));
  row("empirical_trace_se", fmt(rep.empirical.standard_error));
  row("baseline_empirical_trace", fmt(rep.baseline_empirical.mean));
  row("baseline_empirical_trace_se", fmt(rep.baseline_empirical.standard_error));
  row("replicates", std::to_string(rep.empirical.samples));
  row("failed_replicates", std::to_string(rep.empirical.failures));
  // Agreement of the simulated attack with the analytic prediction, within 3 standard errors.
  const double tol = 3.0 * rep.empirical.standard_error;
  out << "empirical_trace,," << fmt(rep.empirical.mean) << ",[" << fmt(rep.analytic.predicted_trace - tol) << ';'
      << fmt(rep.analytic.predicted_trace + tol) << "],"
      << (std::abs(rep.empirical.mean - rep.analytic.predicted_trace) <= tol ? "true" : "false") << '\n';
  if (rep.simulated_ratio) {
    const double rtol = 3.0 * *rep.simulated_ratio_se;
    out << "simulated_ratio,," << fmt(*rep.simulated_ratio) << ",[" << fmt(rep.ratio - rtol) << ';'
        << fmt(rep.ratio + rtol) << "]," << (std::abs(*rep.simulated_ratio - rep.ratio) <= rtol ? "true" : "false")
        << '\n';
    row("design_redraws", std::to_string(rep.design_redraws));
  }
  return out.str();
}

std::string summary(const ExperimentReport& rep) {
  std::ostringstream out;
  out << "design mode        " << to_string(rep.mode) << '\n';
  out << "filter l*          [";
  for (Eigen::Index i = 0; i < rep.analytic.l_star.size(); ++i) out << (i ? ", " : "") << fmt(rep.analytic.l_star[i]);
  out << "]\n";
  out << "lambda_y / rho     " << fmt(rep.analytic.lambda_y) << " / " << fmt(rep.analytic.rho) << '\n';
  out << "predicted trace    " << fmt(rep.analytic.predicted_trace) << '\n';
  out << "empirical trace    " << fmt(rep.empirical.mean) << " +- " << fmt(rep.empirical.standard_error) << " ("
      << rep.empirical.samples << " attacks, " << rep.empirical.failures << " failed)\n";
  out << "baseline trace     " << fmt(rep.baseline_trace) << " (empirical " << fmt(rep.baseline_empirical.mean)
      << " +- " << fmt(rep.baseline_empirical.standard_error) << ")\n";
  out << "ratio              " << fmt(rep.ratio) << '\n';
  if (rep.simulated_ratio) {
    out << "simulated ratio    " << fmt(*rep.simulated_ratio) << " +- " << fmt(*rep.simulated_ratio_se) << '\n';
  }
  out << "runtime            " << fmt(rep.runtime_seconds) << " s\n";
  return out.str();
}

}  // namespace firpriv
