#pragma once

// Reproduction of the published experiments as comparison tables.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace firpriv {

struct ReproRow {
  std::string name;
  std::optional<double> paper_value;
  double computed = 0.0;
  /// Accepted region, e.g. "[0.1;0.3]" or ">=0.3". No commas (CSV-safe).
  std::string tolerance;
  bool pass = false;
};

struct ReproReport {
  std::string experiment;
  std::vector<ReproRow> rows;
  bool all_pass() const noexcept;
};

struct ReproOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Input realizations for the deterministic-input experiments.
  std::size_t realizations = 100;
  /// Simulated attacks for the random-input experiment.
  std::size_t attacks = 100000;
};

/// Least-squares adversary, deterministic filtered input: quantile bands of the
/// designed and variance-matched baseline traces over many input realizations.
ReproReport reproduce_deterministic(const ReproOptions& options);
/// Same protocol with a stable-spline regularized adversary.
ReproReport reproduce_rls(const ReproOptions& options);
/// Random input length and samples: designed filter, predicted and simulated ratio.
ReproReport reproduce_random(const ReproOptions& options);

std::string to_csv(const std::vector<ReproReport>& reports);
std::string summary(const ReproReport& report);

/// Linear-interpolation sample quantile (the common "type 7" definition).
double quantile(std::vector<double> values, double p);

}  // namespace firpriv
