// firpriv command-line harness.
//
// Exit codes: 0 success, 1 parameter/conditioning/config errors,
// 2 reproduction rows outside tolerance.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "firpriv/config.hpp"
#include "firpriv/dp.hpp"
#include "firpriv/errors.hpp"
#include "firpriv/experiment.hpp"
#include "firpriv/reproduce.hpp"

namespace fs = std::filesystem;
using namespace firpriv;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  fs::path out_dir = ".";
};

std::uint64_t resolve_seed(const GlobalOptions& g, const std::optional<std::uint64_t>& config_seed) {
  if (g.seed) return *g.seed;
  if (const char* env = std::getenv("FIRPRIV_SEED"); env && *env) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(env, &pos);
      if (pos != std::string(env).size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ParameterError(std::string("FIRPRIV_SEED is not a non-negative integer: ") + env);
    }
  }
  return config_seed.value_or(0);
}

void write_file(const fs::path& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path.string());
  out << content;
  std::cout << "wrote " << path.string() << '\n';
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int run_design(const GlobalOptions& g, const fs::path& config_path, std::optional<std::size_t> replicates,
               DesignMode mode) {
  ExperimentConfig cfg = parse_config(config_path);
  if (replicates) {
    if (*replicates < 1) throw ParameterError("replicates must be >= 1");
    cfg.replicates = *replicates;
  }
  const std::uint64_t seed = resolve_seed(g, cfg.seed);
  const ExperimentReport rep = attack_simulation(cfg, mode, seed, g.threads);
  std::cout << summary(rep) << "seed               " << seed << '\n';
  write_file(g.out_dir, std::string(to_string(mode)) + ".csv", to_csv(rep));
  return 0;
}

int run_dp(const GlobalOptions& g, const fs::path& config_path, MechanismKind kind, std::size_t draws) {
  const ExperimentConfig cfg = parse_config(config_path);
  const std::uint64_t seed = resolve_seed(g, cfg.seed);
  const SignalSeq r = cfg.make_input(seed);
  const CoefficientBox box(cfg.dp.h_lower, cfg.dp.h_upper, cfg.fir_plant().size());
  const DpMechanism mech =
      kind == MechanismKind::laplace
          ? laplace_mechanism(cfg.dp.epsilon, l1_sensitivity(r, box), cfg.design.sigma2)
          : gaussian_mechanism(cfg.dp.epsilon, cfg.dp.delta, l2_sensitivity(r, box), cfg.design.sigma2);

  // Empirical check of the noise variance: lambda_y - sigma2 against sample moments.
  const Vector w = sample_mechanism(mech, draws, seed).samples();
  const double mean = w.mean();
  const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() > 1 ? w.size() - 1 : 1);
  const double expected = mech.lambda_y - mech.sigma2;
  const double tol = 0.01 * expected;

  std::string csv = "name,paper_value,computed,tolerance,pass\n";
  csv += "sensitivity,," + fmt(mech.sensitivity) + ",,\n";
  csv += "scale,," + fmt(mech.scale) + ",,\n";
  csv += "epsilon,," + fmt(mech.epsilon) + ",,\n";
  if (kind == MechanismKind::gaussian) csv += "delta,," + fmt(mech.delta) + ",,\n";
  csv += "lambda_y,," + fmt(mech.lambda_y) + ",,\n";
  csv += "sample_variance,," + fmt(var) + ",[" + fmt(expected - tol) + ";" + fmt(expected + tol) + "]," +
         (std::abs(var - expected) <= tol ? "true" : "false") + "\n";

  std::cout << "mechanism          " << to_string(kind) << '\n'
            << "sensitivity        " << fmt(mech.sensitivity) << '\n'
            << "scale              " << fmt(mech.scale) << '\n'
            << "lambda_y           " << fmt(mech.lambda_y) << '\n'
            << "sample variance    " << fmt(var) << " (expected " << fmt(expected) << ", " << draws << " draws)\n"
            << "seed               " << seed << '\n';
  write_file(g.out_dir, std::string("dp_") + std::string(to_string(kind)) + ".csv", csv);
  return 0;
}

int run_simulate(const GlobalOptions& g, const fs::path& config_path) {
  const ExperimentConfig cfg = parse_config(config_path);
  const std::uint64_t seed = resolve_seed(g, cfg.seed);
  const FirModel h = cfg.fir_plant();
  const SignalSeq r = cfg.make_input(seed);
  const Vector& l = cfg.design.noise_filter;
  const NoiseChannel channel = l.size() == 0 ? NoiseChannel::none : cfg.design.channel;
  const SignalSeq y = simulate(h, r, channel, l.size() == 0 ? Vector::Zero(1) : l, cfg.design.sigma2, seed);

  std::string csv = "t,r,y\n";
  for (std::size_t t = 0; t < y.size(); ++t) {
    csv += std::to_string(t) + "," + fmt(r.samples()[static_cast<Eigen::Index>(t)]) + "," +
           fmt(y.samples()[static_cast<Eigen::Index>(t)]) + "\n";
  }
  std::cout << "simulated " << y.size() << " samples, channel " << to_string(channel) << ", seed " << seed << '\n';
  write_file(g.out_dir, "simulate.csv", csv);
  return 0;
}

int run_reproduce(const GlobalOptions& g, const std::string& which, std::size_t realizations, std::size_t attacks) {
  ReproOptions opt;
  opt.seed = resolve_seed(g, std::nullopt);
  opt.threads = g.threads;
  opt.realizations = realizations;
  opt.attacks = attacks;

  std::vector<ReproReport> reports;
  if (which == "deterministic" || which == "all") reports.push_back(reproduce_deterministic(opt));
  if (which == "rls" || which == "all") reports.push_back(reproduce_rls(opt));
  if (which == "random" || which == "all") reports.push_back(reproduce_random(opt));

  bool ok = true;
  for (const ReproReport& rep : reports) {
    std::cout << summary(rep);
    ok = ok && rep.all_pass();
  }
  std::cout << "seed " << opt.seed << ", " << (ok ? "all rows within tolerance" : "some rows outside tolerance")
            << '\n';
  write_file(g.out_dir, "reproduce_" + which + ".csv", to_csv(reports));
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving noise design against FIR system identification"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed_flag = 0;
  auto* seed_opt = app.add_option("--seed", seed_flag, "Random seed (overrides FIRPRIV_SEED and the config)");
  app.add_option("--threads", g.threads, "Worker threads (0 = machine parallelism)");
  app.add_option("--out-dir", g.out_dir, "Directory for CSV reports");

  fs::path config;
  std::optional<std::size_t> replicates;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
  };

  struct DesignCmd {
    const char* name;
    const char* help;
    DesignMode mode;
  };
  const DesignCmd design_cmds[] = {
      {"design-output", "Output-noise design under a variance cap", DesignMode::output_capped},
      {"design-input", "Input-noise design under a variance cap", DesignMode::input_capped},
      {"design-weighted", "Output-noise design trading privacy against performance", DesignMode::output_weighted},
      {"design-random", "Output-noise design for random inputs", DesignMode::output_random},
  };
  std::vector<std::pair<CLI::App*, DesignMode>> design_subs;
  for (const DesignCmd& cmd : design_cmds) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    add_config(sub);
    sub->add_option("--replicates", replicates, "Override the number of simulated attacks");
    design_subs.emplace_back(sub, cmd.mode);
  }

  std::size_t draws = 1000000;
  CLI::App* laplace = app.add_subcommand("dp-laplace", "Calibrate the Laplace mechanism");
  add_config(laplace);
  laplace->add_option("--draws", draws, "Samples for the variance check")->check(CLI::PositiveNumber);
  CLI::App* gaussian = app.add_subcommand("dp-gaussian", "Calibrate the Gaussian mechanism");
  add_config(gaussian);
  gaussian->add_option("--draws", draws, "Samples for the variance check")->check(CLI::PositiveNumber);

  CLI::App* sim = app.add_subcommand("simulate", "Simulate the plant and write t,r,y");
  add_config(sim);

  std::string which = "all";
  std::size_t realizations = 100;
  std::size_t attacks = 100000;
  CLI::App* repro = app.add_subcommand("reproduce", "Reproduce the published experiments");
  repro->add_option("which", which, "deterministic | rls | random | all")
      ->check(CLI::IsMember({"deterministic", "rls", "random", "all"}));
  repro->add_option("--realizations", realizations, "Input realizations for the deterministic experiments")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  repro->add_option("--attacks", attacks, "Simulated attacks for the random-input experiment")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (seed_opt->count() > 0) g.seed = seed_flag;

  try {
    for (const auto& [sub, mode] : design_subs) {
      if (sub->parsed()) return run_design(g, config, replicates, mode);
    }
    if (laplace->parsed()) return run_dp(g, config, MechanismKind::laplace, draws);
    if (gaussian->parsed()) return run_dp(g, config, MechanismKind::gaussian, draws);
    if (sim->parsed()) return run_simulate(g, config);
    if (repro->parsed()) return run_reproduce(g, which, realizations, attacks);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
