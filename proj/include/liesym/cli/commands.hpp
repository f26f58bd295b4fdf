#pragma once

#include <ostream>
#include <string>

#include "liesym/cli/report.hpp"
#include "liesym/error.hpp"

namespace liesym::cli {

/// An upstream error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Prints the split determining system; writes system.txt and system.json
/// under `out` when set.
VerificationReport cmd_derive(const RunConfig& c, std::ostream& out);

/// Symbolic verdict for the candidate, plus terminal compatibility for an
/// FBSDE.
VerificationReport cmd_verify(const RunConfig& c, std::ostream& out);

/// Tabulates Xi, phi, eta and zeta for each a, comparing the integrated
/// flow with the closed form when one is recognized. Writes flow_a<a>.csv.
VerificationReport cmd_exponentiate(const RunConfig& c, std::ostream& out);

/// BSDE: simulate, solve, transform, time-change and test, once per a.
/// FBSDE: forward SDE only. Writes paths_a<a>.csv.
VerificationReport cmd_simulate(const RunConfig& c, std::ostream& out);

/// Dispatches on c.subcommand, writes report.json under `out` when set and
/// returns the exit code: 0 when every check passes, 1 when a check fails,
/// 2 on an error.
int run(const RunConfig& c, std::ostream& out, std::ostream& err);

}  // namespace liesym::cli
