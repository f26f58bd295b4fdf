#include "liesym/cli/report.hpp"

#include <cmath>
#include <limits>

#include "liesym/error.hpp"

namespace liesym::cli {

using nlohmann::json;

namespace {

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double get_num(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error("bad number '" + s + "' in report");
  }
  return j.get<double>();
}

json opt_num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

std::optional<double> get_opt_num(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_num(j.at(key));
}

json stat_json(const stochastic::StatReport& r) {
  json tests = json::array();
  for (const auto& t : r.tests) {
    tests.push_back({{"name", t.name},
                     {"statistic", num(t.statistic)},
                     {"lower", num(t.lower)},
                     {"upper", num(t.upper)},
                     {"pass", t.pass},
                     {"samples", t.samples}});
  }
  return tests;
}

stochastic::StatReport stat_from(const json& j) {
  stochastic::StatReport r;
  for (const auto& t : j) {
    r.tests.push_back({t.at("name").get<std::string>(), get_num(t.at("statistic")),
                       get_num(t.at("lower")), get_num(t.at("upper")), t.at("pass").get<bool>(),
                       t.at("samples").get<std::size_t>()});
  }
  return r;
}

}  // namespace

void RunConfig::validate() const {
  const std::string where = "<command line>";
  if (steps < 2) throw ConfigError(where, 0, "--steps must be at least 2");
  if (paths < 1) throw ConfigError(where, 0, "--paths must be at least 1");
  if (degree < 1) throw ConfigError(where, 0, "--degree must be at least 1");
  for (double a : a_values) {
    if (!std::isfinite(a)) throw ConfigError(where, 0, "--a must be finite");
  }
}

json config_json(const RunConfig& c) {
  json a = json::array();
  for (double v : c.a_values) a.push_back(num(v));
  return {{"subcommand", c.subcommand}, {"problem", c.problem}, {"candidate", c.candidate},
          {"a", a},  {"steps", c.steps},     {"paths", c.paths},
          {"seed", c.seed}, {"degree", c.degree}, {"out", c.out}};
}

void to_json(json& j, const VerificationReport& r) {
  j = json::object();
  j["command"] = r.command;
  if (r.symbolic) {
    json checks = json::array();
    for (const auto& c : r.symbolic->checks) {
      checks.push_back({{"label", c.label}, {"residual", c.residual}, {"pass", c.pass}});
    }
    j["symbolic"] = {{"checks", checks}, {"pass", r.symbolic->pass}};
  } else {
    j["symbolic"] = nullptr;
  }
  j["flow"] = json::array();
  for (const auto& f : r.flow) {
    j["flow"].push_back({{"a", num(f.a)},
                         {"rule", f.rule},
                         {"max_error_Xi", num(f.max_error_Xi)},
                         {"max_error_phi", num(f.max_error_phi)},
                         {"max_error_eta", num(f.max_error_eta)},
                         {"max_error_zeta", num(f.max_error_zeta)},
                         {"pass", f.pass}});
  }
  j["stochastic"] = json::array();
  for (const auto& s : r.stochastic) {
    j["stochastic"].push_back({{"a", num(s.a)},
                               {"identity", s.identity},
                               {"stage", s.stage},
                               {"tests", stat_json(s.report)},
                               {"oracle_y_error", opt_num(s.oracle_y_error)},
                               {"oracle_z_error", opt_num(s.oracle_z_error)},
                               {"identity_error", opt_num(s.identity_error)},
                               {"rms_original", num(s.rms_original)},
                               {"rms_transformed", num(s.rms_transformed)},
                               {"pass", s.pass}});
  }
  j["warnings"] = r.warnings;
  j["provenance"] = {{"config", r.provenance.config},
                     {"seed", r.provenance.seed},
                     {"version", r.provenance.version},
                     {"compiler", r.provenance.compiler}};
  j["pass"] = r.pass;
}

void from_json(const json& j, VerificationReport& r) {
  r = {};
  r.command = j.at("command").get<std::string>();
  if (!j.at("symbolic").is_null()) {
    SymbolicSection s;
    for (const auto& c : j.at("symbolic").at("checks")) {
      s.checks.push_back({c.at("label").get<std::string>(), c.at("residual").get<std::string>(),
                          c.at("pass").get<bool>()});
    }
    s.pass = j.at("symbolic").at("pass").get<bool>();
    r.symbolic = std::move(s);
  }
  for (const auto& f : j.at("flow")) {
    r.flow.push_back({get_num(f.at("a")), f.at("rule").get<std::string>(),
                      get_num(f.at("max_error_Xi")), get_num(f.at("max_error_phi")),
                      get_num(f.at("max_error_eta")), get_num(f.at("max_error_zeta")),
                      f.at("pass").get<bool>()});
  }
  for (const auto& s : j.at("stochastic")) {
    StochasticEntry e;
    e.a = get_num(s.at("a"));
    e.identity = s.at("identity").get<bool>();
    e.stage = s.at("stage").get<std::string>();
    e.report = stat_from(s.at("tests"));
    e.oracle_y_error = get_opt_num(s, "oracle_y_error");
    e.oracle_z_error = get_opt_num(s, "oracle_z_error");
    e.identity_error = get_opt_num(s, "identity_error");
    e.rms_original = get_num(s.at("rms_original"));
    e.rms_transformed = get_num(s.at("rms_transformed"));
    e.pass = s.at("pass").get<bool>();
    r.stochastic.push_back(std::move(e));
  }
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  const auto& p = j.at("provenance");
  r.provenance.config = p.at("config");
  r.provenance.seed = p.at("seed").get<std::uint64_t>();
  r.provenance.version = p.at("version").get<std::string>();
  r.provenance.compiler = p.at("compiler").get<std::string>();
  r.pass = j.at("pass").get<bool>();
}

std::string dump(const VerificationReport& r) { return json(r).dump(2) + "\n"; }

VerificationReport load_report(const std::string& text) {
  try {
    return json::parse(text).get<VerificationReport>();
  } catch (const json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

}  // namespace liesym::cli
