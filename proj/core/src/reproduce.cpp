#include "firpriv/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "firpriv/config.hpp"
#include "firpriv/errors.hpp"
#include "firpriv/experiment.hpp"
#include "firpriv/noise_design.hpp"
#include "parallel.hpp"

namespace firpriv {
namespace {

// Plant of the published example, with its impulse response truncated to 9 taps.
const Vector& plant_numerator() {
  static const Vector v = (Vector(2) << 1.0, -0.2).finished();
  return v;
}
const Vector& plant_denominator() {
  static const Vector v = (Vector(3) << 1.0, -0.9, 0.17).finished();
  return v;
}
constexpr std::size_t kPlantOrder = 9;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string band(double lo, double hi) { return "[" + fmt(lo) + ";" + fmt(hi) + "]"; }

ReproRow band_row(std::string name, double reference, const std::vector<double>& sample) {
  const double lo = quantile(sample, 0.1);
  const double hi = quantile(sample, 0.9);
  return {std::move(name), reference, quantile(sample, 0.5), band(lo, hi), lo <= reference && reference <= hi};
}

ReproRow within_row(std::string name, double reference, double computed, double tol) {
  return {std::move(name), reference, computed, band(reference - tol, reference + tol), std::abs(computed - reference) <= tol};
}

struct TracePairs {
  std::vector<double> designed;
  std::vector<double> baseline;
};

TracePairs deterministic_pairs(const ReproOptions& opt, Adversary kind) {
  constexpr std::size_t kLength = 200;
  constexpr double kSigma2 = 1.0;
  constexpr double kGamma1 = 2.0;
  constexpr std::size_t kNoiseLength = 10;
  if (opt.realizations < 2) throw ParameterError("need at least two input realizations");

  const FirModel h = fir_truncate(RationalFilter(plant_numerator(), plant_denominator()), kPlantOrder).model;
  const AdversaryModel adversary =
      kind == Adversary::ls ? AdversaryModel::least_squares(h.size())
                            : AdversaryModel::regularized(Kernel(stable_spline_kernel(h.size(), 0.7), 0.1), h);
  const RationalFilter shaping(Vector::Ones(1), (Vector(2) << 1.0, -0.95).finished());

  TracePairs out{std::vector<double>(opt.realizations), std::vector<double>(opt.realizations)};
  detail::parallel_for(opt.realizations, opt.threads, [&](std::size_t k) {
    const SignalSeq r = generate_filtered_input(shaping, kLength, opt.seed, k);
    const RegressorMatrix reg = build_regressor(r, h.size());
    const TraceDecomposition dec = adversary.decompose(reg, kSigma2, kNoiseLength);
    const DesignResult design = design_output_capped(dec.m, dec.c, kSigma2, kGamma1);
    out.designed[k] = design.predicted_trace;
    // White noise with the same total variance as the designed noise.
    out.baseline[k] = adversary.decompose(reg, design.lambda_y, 1).c;
  });
  return out;
}

}  // namespace

bool ReproReport::all_pass() const noexcept {
  return std::all_of(rows.begin(), rows.end(), [](const ReproRow& r) { return r.pass; });
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DimensionError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ReproReport reproduce_deterministic(const ReproOptions& opt) {
  const TracePairs t = deterministic_pairs(opt, Adversary::ls);
  std::vector<double> increase(t.designed.size());
  for (std::size_t k = 0; k < increase.size(); ++k) increase[k] = t.designed[k] / t.baseline[k] - 1.0;
  const double median_increase = quantile(increase, 0.5);

  ReproReport rep{"deterministic", {}};
  rep.rows.push_back(band_row("ls_designed_trace", 0.25, t.designed));
  rep.rows.push_back(band_row("ls_baseline_trace", 0.17, t.baseline));
  rep.rows.push_back({"ls_median_increase", 0.5, median_increase, ">=0.3", median_increase >= 0.3});
  return rep;
}

ReproReport reproduce_rls(const ReproOptions& opt) {
  const TracePairs t = deterministic_pairs(opt, Adversary::rls);
  const double designed = quantile(t.designed, 0.5);
  const double baseline = quantile(t.baseline, 0.5);

  ReproReport rep{"rls", {}};
  rep.rows.push_back(band_row("rls_designed_mse", 0.17, t.designed));
  rep.rows.push_back(band_row("rls_baseline_mse", 0.13, t.baseline));
  rep.rows.push_back({"rls_median_gap", std::nullopt, designed - baseline, ">0", designed > baseline});
  return rep;
}

ReproReport reproduce_random(const ReproOptions& opt) {
  ExperimentConfig cfg;
  cfg.plant.kind = PlantKind::rational;
  cfg.plant.numerator = plant_numerator();
  cfg.plant.denominator = plant_denominator();
  cfg.plant.order = kPlantOrder;
  cfg.input.kind = InputKind::random;
  cfg.input.length_min = 10;
  cfg.input.length_max = 20;
  cfg.input.theta = 100;
  cfg.input.vartheta = 1000;
  cfg.design.adversary = Adversary::ls;
  cfg.design.sigma2 = 0.1;
  cfg.design.gamma1 = 0.2;
  cfg.design.n_l = 5;
  cfg.replicates = opt.attacks;

  const ExperimentReport exp = attack_simulation(cfg, DesignMode::output_random, opt.seed, opt.threads);
  const Vector paper_filter = (Vector(5) << 0.1450, 0.0799, 0.2125, 0.0799, 0.1450).finished();
  Vector l = exp.analytic.l_star;
  if (l.dot(paper_filter) < 0.0) l = -l;

  ReproReport rep{"random", {}};
  for (Eigen::Index i = 0; i < paper_filter.size(); ++i) {
    rep.rows.push_back(within_row("random_filter_" + std::to_string(i), paper_filter[i], l[i], 0.02));
  }
  rep.rows.push_back(within_row("random_predicted_ratio", 1.9639, exp.ratio, 0.05));
  const double sim = exp.simulated_ratio.value_or(std::nan(""));
  const double se = exp.simulated_ratio_se.value_or(std::nan(""));
  rep.rows.push_back({"random_simulated_ratio", std::nullopt, sim, band(exp.ratio - 3.0 * se, exp.ratio + 3.0 * se),
                      std::abs(sim - exp.ratio) <= 3.0 * se});
  return rep;
}

std::string to_csv(const std::vector<ReproReport>& reports) {
  std::ostringstream out;
  out << "name,paper_value,computed,tolerance,pass\n";
  for (const ReproReport& rep : reports) {
    for (const ReproRow& row : rep.rows) {
      out << row.name << ',' << (row.paper_value ? fmt(*row.paper_value) : std::string()) << ','
          << fmt(row.computed) << ',' << row.tolerance << ',' << (row.pass ? "true" : "false") << '\n';
    }
  }
  return out.str();
}

std::string summary(const ReproReport& rep) {
  std::ostringstream out;
  out << "== " << rep.experiment << (rep.all_pass() ? " (pass)" : " (FAIL)") << '\n';
  for (const ReproRow& row : rep.rows) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-26s paper %-10s computed %-14s %-32s %s\n", row.name.c_str(),
                  row.paper_value ? fmt(*row.paper_value).c_str() : "-", fmt(row.computed).c_str(),
                  row.tolerance.c_str(), row.pass ? "pass" : "FAIL");
    out << line;
  }
  return out.str();
}

}  // namespace firpriv
