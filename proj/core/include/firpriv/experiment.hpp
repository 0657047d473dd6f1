#pragma once

// Attacker simulation: design a privacy filter for a configured experiment,
// then replay the attack many times and compare the empirical identification
// error with the analytic prediction and a variance-matched white-noise
// baseline.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "firpriv/config.hpp"
#include "firpriv/noise_design.hpp"

namespace firpriv {

enum class DesignMode { output_capped, input_capped, output_weighted, output_random };

std::string_view to_string(DesignMode mode) noexcept;

/// Monte Carlo mean of ||h_hat - h||^2 with its standard error.
struct TraceEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
  /// Replicates dropped because the adversary's normal equations were
  /// ill-conditioned.
  std::size_t failures = 0;
};

struct ExperimentReport {
  DesignMode mode;
  DesignResult analytic;
  /// Error without privacy noise (c).
  double no_privacy_trace = 0.0;
  /// Deterministic inputs: analytic error under white noise of variance
  /// lambda_y (the variance-matched baseline). Random inputs: E{c}, the
  /// error with w = 0.
  double baseline_trace = 0.0;
  /// analytic.predicted_trace / baseline_trace
  double ratio = 0.0;
  TraceEstimate empirical;
  TraceEstimate baseline_empirical;
  /// Random inputs only: ratio of simulated mean errors with and without
  /// privacy noise, with its delta-method standard error.
  std::optional<double> simulated_ratio;
  std::optional<double> simulated_ratio_se;
  std::size_t design_redraws = 0;
  double runtime_seconds = 0.0;
  std::string config_echo;
};

/// Runs the configured experiment. Replicates are processed in fixed blocks
/// with counter-based seeds, so the report is identical for any thread count.
/// Throws ConditioningError when more than 1% of replicates fail.
ExperimentReport attack_simulation(const ExperimentConfig& config, DesignMode mode, std::uint64_t seed,
                                   unsigned threads = 1);

/// CSV of the report (name,paper_value,computed,tolerance,pass) (runtime excluded, so reruns are byte-identical).
std::string to_csv(const ExperimentReport& report);
/// Human-readable summary.
std::string summary(const ExperimentReport& report);

}  // namespace firpriv
