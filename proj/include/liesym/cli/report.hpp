#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "liesym/stochastic/stochastic.hpp"

namespace liesym::cli {

inline constexpr const char* version = "0.1.0";

/// Below this many paths the statistical checks are flagged as underpowered.
inline constexpr std::size_t underpowered_paths = 1000;

struct RunConfig {
  std::string subcommand;
  std::string problem;
  std::string candidate;
  std::vector<double> a_values;
  std::size_t steps = 200;  ///< N, number of time steps
  std::size_t paths = 10000;  ///< M
  std::uint64_t seed = 42;
  int degree = 3;
  std::string out;

  /// Throws ConfigError for N < 2, M < 1, non-finite a or degree < 1.
  void validate() const;
};

struct SymbolicCheck {
  std::string label;
  std::string residual;
  bool pass = false;

  bool operator==(const SymbolicCheck&) const = default;
};

struct SymbolicSection {
  std::vector<SymbolicCheck> checks;
  bool pass = false;

  bool operator==(const SymbolicSection&) const = default;
};

struct FlowEntry {
  double a = 0;
  std::string rule;  ///< matched closed-form rule, empty if none
  double max_error_Xi = 0;
  double max_error_phi = 0;
  double max_error_eta = 0;
  double max_error_zeta = 0;
  bool pass = false;

  bool operator==(const FlowEntry&) const = default;
};

struct StochasticEntry {
  double a = 0;
  bool identity = false;  ///< a = 0
  std::string stage;      ///< stage label of the block
  stochastic::StatReport report;
  std::optional<double> oracle_y_error;  ///< max over checkpoints of mean |Y - oracle|
  std::optional<double> oracle_z_error;  ///< max over checkpoints of mean |Z - Z_oracle|
  std::optional<double> identity_error;
  double rms_original = 0;
  double rms_transformed = 0;
  bool pass = false;

  bool operator==(const StochasticEntry&) const = default;
};

struct Provenance {
  nlohmann::json config;  ///< RunConfig plus the text of the input files
  std::uint64_t seed = 0;
  std::string version;
  std::string compiler;

  bool operator==(const Provenance&) const = default;
};

struct VerificationReport {
  std::string command;
  std::optional<SymbolicSection> symbolic;
  std::vector<FlowEntry> flow;
  std::vector<StochasticEntry> stochastic;
  std::vector<std::string> warnings;
  Provenance provenance;
  bool pass = false;

  bool operator==(const VerificationReport&) const = default;
};

nlohmann::json config_json(const RunConfig& c);

void to_json(nlohmann::json& j, const VerificationReport& r);
void from_json(const nlohmann::json& j, VerificationReport& r);

/// Pretty JSON text; non-finite doubles are written as strings.
std::string dump(const VerificationReport& r);
VerificationReport load_report(const std::string& text);

}  // namespace liesym::cli
