#include "firpriv/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "firpriv/errors.hpp"

namespace firpriv {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double parse_real(std::string_view token, std::size_t line, std::string_view key) {
  const std::string text(trim(token));
  if (text.empty()) fail(line, "key '" + std::string(key) + "' expects a real number");
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(value)) {
    fail(line, "key '" + std::string(key) + "' expects a real number, got '" + text + "'");
  }
  return value;
}

std::uint64_t parse_unsigned(std::string_view token, std::size_t line, std::string_view key) {
  const std::string_view text = trim(token);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    fail(line, "key '" + std::string(key) + "' expects a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

Vector parse_vector(std::string_view text, std::size_t line, std::string_view key) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    values.push_back(parse_real(piece, line, key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

template <typename Enum>
Enum parse_enum(std::string_view text, std::size_t line, std::string_view key,
                std::initializer_list<std::pair<std::string_view, Enum>> options) {
  const std::string_view value = trim(text);
  std::string allowed;
  for (const auto& [name, e] : options) {
    if (name == value) return e;
    allowed += allowed.empty() ? "" : "|";
    allowed += name;
  }
  fail(line, "key '" + std::string(key) + "' expects one of " + allowed + ", got '" + std::string(value) + "'");
}

bool same(const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; }

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_vector(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_real(v[i]);
  }
  return out;
}

std::string_view name_of(PlantKind k) { return k == PlantKind::fir ? "fir" : "rational"; }
std::string_view name_of(InputKind k) {
  switch (k) {
    case InputKind::white: return "white";
    case InputKind::filtered: return "filtered";
    case InputKind::file: return "file";
    case InputKind::random: return "random";
  }
  return "white";
}
std::string_view name_of(BudgetMode m) { return m == BudgetMode::cap ? "cap" : "weight"; }

Vector read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read input file " + path.string());
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::stringstream pieces(line);
    std::string piece;
    while (pieces >> piece) {
      char* end = nullptr;
      const double v = std::strtod(piece.c_str(), &end);
      if (end != piece.c_str() + piece.size() || !std::isfinite(v)) {
        throw ConfigError("input file " + path.string() + ": bad sample '" + piece + "'");
      }
      values.push_back(v);
    }
  }
  if (values.empty()) throw ConfigError("input file " + path.string() + " has no samples");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

FirModel ExperimentConfig::fir_plant() const {
  if (plant.kind == PlantKind::fir) return FirModel(plant.coeffs);
  return fir_truncate(RationalFilter(plant.numerator, plant.denominator), plant.order).model;
}

SignalSeq ExperimentConfig::make_input(std::uint64_t run_seed) const {
  switch (input.kind) {
    case InputKind::white:
      return generate_filtered_input(RationalFilter::identity(), input.length, run_seed);
    case InputKind::filtered:
      return generate_filtered_input(RationalFilter(input.filter_numerator, input.filter_denominator),
                                     input.length, run_seed);
    case InputKind::file:
      return SignalSeq(read_samples(input.file), SignalKind::input);
    case InputKind::random:
      break;
  }
  throw ParameterError("random input model has no single deterministic input sequence");
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  const auto& pa = a.plant;
  const auto& pb = b.plant;
  const auto& ia = a.input;
  const auto& ib = b.input;
  const auto& da = a.design;
  const auto& db = b.design;
  return pa.kind == pb.kind && same(pa.coeffs, pb.coeffs) && same(pa.numerator, pb.numerator) &&
         same(pa.denominator, pb.denominator) && pa.order == pb.order && ia.kind == ib.kind &&
         ia.length == ib.length && same(ia.filter_numerator, ib.filter_numerator) &&
         same(ia.filter_denominator, ib.filter_denominator) && ia.file == ib.file &&
         ia.length_min == ib.length_min && ia.length_max == ib.length_max && ia.theta == ib.theta &&
         ia.vartheta == ib.vartheta && da.channel == db.channel && da.adversary == db.adversary &&
         da.kernel_beta == db.kernel_beta && da.eta == db.eta && da.budget == db.budget && da.gamma1 == db.gamma1 &&
         da.gamma2 == db.gamma2 && da.n_l == db.n_l && da.sigma2 == db.sigma2 &&
         same(da.noise_filter, db.noise_filter) && a.dp.epsilon == b.dp.epsilon && a.dp.delta == b.dp.delta &&
         a.dp.h_lower == b.dp.h_lower && a.dp.h_upper == b.dp.h_upper && a.replicates == b.replicates &&
         a.seed == b.seed;
}

ExperimentConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  std::map<std::string, std::size_t, std::less<>> seen;

  using Setter = std::function<void(std::string_view value, std::size_t line, std::string_view key)>;
  auto real = [](double& field) -> Setter {
    return [&field](std::string_view v, std::size_t line, std::string_view key) { field = parse_real(v, line, key); };
  };
  auto count = [](std::size_t& field) -> Setter {
    return [&field](std::string_view v, std::size_t line, std::string_view key) {
      field = static_cast<std::size_t>(parse_unsigned(v, line, key));
    };
  };
  auto vec = [](Vector& field) -> Setter {
    return [&field](std::string_view v, std::size_t line, std::string_view key) { field = parse_vector(v, line, key); };
  };

  const std::map<std::string, Setter, std::less<>> setters = {
      {"plant",
       [&](std::string_view v, std::size_t line, std::string_view key) {
         cfg.plant.kind = parse_enum<PlantKind>(v, line, key, {{"fir", PlantKind::fir}, {"rational", PlantKind::rational}});
       }},
      {"plant_coeffs", vec(cfg.plant.coeffs)},
      {"plant_numerator", vec(cfg.plant.numerator)},
      {"plant_denominator", vec(cfg.plant.denominator)},
      {"plant_order", count(cfg.plant.order)},
      {"input",
       [&](std::string_view v, std::size_t line, std::string_view key) {
         cfg.input.kind = parse_enum<InputKind>(v, line, key,
                                                {{"white", InputKind::white},
                                                 {"filtered", InputKind::filtered},
                                                 {"file", InputKind::file},
                                                 {"random", InputKind::random}});
       }},
      {"input_length", count(cfg.input.length)},
      {"input_filter_numerator", vec(cfg.input.filter_numerator)},
      {"input_filter_denominator", vec(cfg.input.filter_denominator)},
      {"input_file",
       [&](std::string_view v, std::size_t line, std::string_view) {
         const std::filesystem::path p{std::string(trim(v))};
         if (p.empty()) fail(line, "key 'input_file' expects a path");
         cfg.input.file = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
         if (!std::filesystem::exists(cfg.input.file)) {
           fail(line, "input file '" + cfg.input.file.string() + "' does not exist");
         }
       }},
      {"length_min", count(cfg.input.length_min)},
      {"length_max", count(cfg.input.length_max)},
      {"theta", count(cfg.input.theta)},
      {"vartheta", count(cfg.input.vartheta)},
      {"channel",
       [&](std::string_view v, std::size_t line, std::string_view key) {
         cfg.design.channel = parse_enum<NoiseChannel>(
             v, line, key, {{"output", NoiseChannel::output}, {"input", NoiseChannel::input}, {"none", NoiseChannel::none}});
       }},
      {"adversary",
       [&](std::string_view v, std::size_t line, std::string_view key) {
         cfg.design.adversary = parse_enum<Adversary>(v, line, key, {{"ls", Adversary::ls}, {"rls", Adversary::rls}});
       }},
      {"kernel_beta", real(cfg.design.kernel_beta)},
      {"eta", real(cfg.design.eta)},
      {"budget",
       [&](std::string_view v, std::size_t line, std::string_view key) {
         cfg.design.budget = parse_enum<BudgetMode>(v, line, key, {{"cap", BudgetMode::cap}, {"weight", BudgetMode::weight}});
       }},
      {"gamma1", real(cfg.design.gamma1)},
      {"gamma2", real(cfg.design.gamma2)},
      {"n_l", count(cfg.design.n_l)},
      {"sigma2", real(cfg.design.sigma2)},
      {"noise_filter", vec(cfg.design.noise_filter)},
      {"epsilon", real(cfg.dp.epsilon)},
      {"delta", real(cfg.dp.delta)},
      {"h_lower", real(cfg.dp.h_lower)},
      {"h_upper", real(cfg.dp.h_upper)},
      {"replicates", count(cfg.replicates)},
      {"seed",
       [&](std::string_view v, std::size_t line, std::string_view key) { cfg.seed = parse_unsigned(v, line, key); }},
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) fail(line_no, "unknown key '" + std::string(key) + "'");
    if (const auto prev = seen.find(key); prev != seen.end()) {
      fail(line_no, "duplicate key '" + std::string(key) + "' (first set on line " + std::to_string(prev->second) + ")");
    }
    seen.emplace(std::string(key), line_no);
    it->second(value, line_no, key);
  }

  auto require = [&](std::string_view key, const std::string& why) {
    if (!seen.contains(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": missing required key '" + std::string(key) + "'" + why);
    }
  };
  require("plant", "");
  require("sigma2", "");
  if (cfg.plant.kind == PlantKind::fir) {
    require("plant_coeffs", " for plant = fir");
  } else {
    require("plant_numerator", " for plant = rational");
    require("plant_denominator", " for plant = rational");
  }
  if (cfg.input.kind == InputKind::file) require("input_file", " for input = file");
  if (cfg.input.kind == InputKind::filtered) require("input_filter_denominator", " for input = filtered");
  if (cfg.replicates < 1) throw ConfigError("line " + std::to_string(seen.at("replicates")) + ": replicates must be >= 1");
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.parent_path());
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "plant = " << name_of(c.plant.kind) << '\n';
  if (c.plant.coeffs.size() > 0) out << "plant_coeffs = " << format_vector(c.plant.coeffs) << '\n';
  if (c.plant.numerator.size() > 0) out << "plant_numerator = " << format_vector(c.plant.numerator) << '\n';
  if (c.plant.denominator.size() > 0) out << "plant_denominator = " << format_vector(c.plant.denominator) << '\n';
  out << "plant_order = " << c.plant.order << '\n';
  out << "input = " << name_of(c.input.kind) << '\n';
  out << "input_length = " << c.input.length << '\n';
  out << "input_filter_numerator = " << format_vector(c.input.filter_numerator) << '\n';
  out << "input_filter_denominator = " << format_vector(c.input.filter_denominator) << '\n';
  if (!c.input.file.empty()) out << "input_file = " << c.input.file.string() << '\n';
  out << "length_min = " << c.input.length_min << '\n';
  out << "length_max = " << c.input.length_max << '\n';
  out << "theta = " << c.input.theta << '\n';
  out << "vartheta = " << c.input.vartheta << '\n';
  out << "channel = " << to_string(c.design.channel) << '\n';
  out << "adversary = " << to_string(c.design.adversary) << '\n';
  out << "kernel_beta = " << format_real(c.design.kernel_beta) << '\n';
  out << "eta = " << format_real(c.design.eta) << '\n';
  out << "budget = " << name_of(c.design.budget) << '\n';
  out << "gamma1 = " << format_real(c.design.gamma1) << '\n';
  out << "gamma2 = " << format_real(c.design.gamma2) << '\n';
  out << "n_l = " << c.design.n_l << '\n';
  out << "sigma2 = " << format_real(c.design.sigma2) << '\n';
  if (c.design.noise_filter.size() > 0) out << "noise_filter = " << format_vector(c.design.noise_filter) << '\n';
  out << "epsilon = " << format_real(c.dp.epsilon) << '\n';
  out << "delta = " << format_real(c.dp.delta) << '\n';
  out << "h_lower = " << format_real(c.dp.h_lower) << '\n';
  out << "h_upper = " << format_real(c.dp.h_upper) << '\n';
  out << "replicates = " << c.replicates << '\n';
  if (c.seed) out << "seed = " << *c.seed << '\n';
  return out.str();
}

}  // namespace firpriv
