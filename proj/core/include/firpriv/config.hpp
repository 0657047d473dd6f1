#pragma once

// Flat key-value experiment configuration:
//
//   # comment
//   key = value
//   vector_key = 1, -0.9, 0.17
//
// Unknown keys, duplicate keys, type mismatches and missing required keys are
// errors naming the offending line. Required: `plant` with its coefficient
// keys, and `sigma2`. Everything else has a default (see ExperimentConfig).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "firpriv/estimators.hpp"
#include "firpriv/lti.hpp"

namespace firpriv {

enum class PlantKind { fir, rational };
enum class InputKind { white, filtered, file, random };
enum class BudgetMode { cap, weight };

struct PlantSpec {
  PlantKind kind = PlantKind::fir;
  /// plant = fir
  Vector coeffs;
  /// plant = rational
  Vector numerator;
  Vector denominator;
  /// FIR truncation order for rational plants.
  std::size_t order = 9;
};

struct InputSpec {
  InputKind kind = InputKind::white;
  std::size_t length = 200;
  Vector filter_numerator = Vector::Ones(1);
  Vector filter_denominator = Vector::Ones(1);
  /// Whitespace- or comma-separated samples; relative paths resolve against
  /// the config file's directory.
  std::filesystem::path file;
  std::size_t length_min = 10;
  std::size_t length_max = 20;
  std::size_t theta = 100;
  std::size_t vartheta = 1000;
};

struct DesignSettings {
  NoiseChannel channel = NoiseChannel::output;
  Adversary adversary = Adversary::ls;
  double kernel_beta = 0.7;
  double eta = 0.1;
  BudgetMode budget = BudgetMode::cap;
  double gamma1 = 2.0;
  double gamma2 = 1.0;
  std::size_t n_l = 10;
  double sigma2 = 1.0;
  /// Explicit noise filter for `simulate`; empty means no privacy noise.
  Vector noise_filter;
};

struct DpSettings {
  double epsilon = 1.0;
  double delta = 1e-3;
  double h_lower = 0.0;
  double h_upper = 1.0;
};

struct ExperimentConfig {
  PlantSpec plant;
  InputSpec input;
  DesignSettings design;
  DpSettings dp;
  std::size_t replicates = 100000;
  std::optional<std::uint64_t> seed;

  /// The plant as an FIR model (rational plants are truncated).
  FirModel fir_plant() const;
  /// Deterministic input sequence (white / filtered / file).
  SignalSeq make_input(std::uint64_t seed) const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

ExperimentConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Canonical text form; parse_config_text(to_config_text(c)) == c.
std::string to_config_text(const ExperimentConfig& config);

}  // namespace firpriv
