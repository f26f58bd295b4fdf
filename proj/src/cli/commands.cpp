#include "liesym/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "liesym/determining/determining.hpp"
#include "liesym/expr/calculus.hpp"
#include "liesym/expr/eval.hpp"
#include "liesym/expr/parse.hpp"
#include "liesym/solver/solver.hpp"
#include "liesym/stochastic/stochastic.hpp"

namespace liesym::cli {

using determining::BsdeProblem;
using determining::FbsdeProblem;
using determining::Problem;
using nlohmann::json;

namespace {

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what());
  }
}

const std::vector<determining::Constant>& constants_of(const Problem& p) {
  return std::visit([](const auto& q) -> const std::vector<determining::Constant>& { return q.constants; }, p);
}

bool is_fbsde(const Problem& p) { return std::holds_alternative<FbsdeProblem>(p); }

expr::SymbolTable table_of(const Problem& p) {
  return is_fbsde(p) ? determining::fbsde_table(constants_of(p))
                     : determining::bsde_table(constants_of(p));
}

Problem load(const RunConfig& c) {
  if (c.problem.empty()) throw ConfigError("<command line>", 0, "--problem is required");
  return determining::load_problem(c.problem);
}

solver::SymmetryCandidate candidate(const RunConfig& c, const Problem& p) {
  if (c.candidate.empty()) throw ConfigError("<command line>", 0, "--candidate is required");
  return solver::load_candidate(c.candidate, table_of(p));
}

determining::DeterminingSystem system_of(const Problem& p) {
  return stage("determining", [&] {
    return std::visit(
        [](const auto& q) {
          if constexpr (std::is_same_v<std::decay_t<decltype(q)>, BsdeProblem>) {
            return determining::bsde_system(q);
          } else {
            return determining::fbsde_determining(q);
          }
        },
        p);
  });
}

std::string file_text(const std::string& path) {
  if (path.empty()) return "";
  try {
    return determining::read_file(path);
  } catch (const Error&) {
    return "";
  }
}

VerificationReport start(const RunConfig& c) {
  VerificationReport r;
  r.command = c.subcommand;
  json cfg = config_json(c);
  cfg["problem_text"] = file_text(c.problem);
  cfg["candidate_text"] = file_text(c.candidate);
  r.provenance.config = cfg;
  r.provenance.seed = c.seed;
  r.provenance.version = version;
#ifdef __VERSION__
  r.provenance.compiler = __VERSION__;
#endif
  return r;
}

std::string monomial(const std::vector<std::string>& vars, const std::vector<int>& degrees) {
  std::string s;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (!s.empty()) s += "*";
    s += vars[i] + "^" + std::to_string(degrees[i]);
  }
  return s.empty() ? "1" : s;
}

std::filesystem::path out_file(const RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.out);
  return std::filesystem::path(c.out) / name;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream f(file);
  if (!f) throw Error("cannot write " + file.string());
  f << text;
}

std::string a_tag(double a) {
  std::ostringstream s;
  s << a;
  return s.str();
}

std::vector<double> a_values(const RunConfig& c, std::vector<double> fallback) {
  return c.a_values.empty() ? fallback : c.a_values;
}

}  // namespace

VerificationReport cmd_derive(const RunConfig& c, std::ostream& out) {
  VerificationReport r = start(c);
  Problem p = load(c);
  auto sys = system_of(p);
  auto terms = stage("split", [&] { return determining::split_terms(sys); });

  std::ostringstream text;
  text << (is_fbsde(p) ? "FBSDE" : "BSDE") << " determining system\n";
  for (const auto& res : sys.residuals) {
    text << "residual " << res.label << ": " << expr::to_string(res.expr) << " = 0\n";
  }
  for (const auto& s : sys.side_constraints) text << "side constraint: " << s << "\n";
  text << "conditions, split in";
  for (const auto& v : sys.indeterminates) text << " " << v;
  text << ":\n";

  SymbolicSection sec;
  json conditions = json::array();
  for (const auto& t : terms) {
    std::string label = t.source + "[" + monomial(sys.indeterminates, t.degrees) + "]";
    std::string coeff = expr::to_string(t.coefficient);
    text << "  " << label << ": " << coeff << " = 0\n";
    sec.checks.push_back({label, coeff, true});
    conditions.push_back({{"source", t.source}, {"degrees", t.degrees}, {"coefficient", coeff}});
  }
  sec.pass = true;
  r.symbolic = sec;

  json solution = nullptr;
  try {
    auto sol = solver::solve_constant_coeff(sys);
    text << "solution:\n";
    json bases = json::object();
    auto bindings = determining::constant_bindings(constants_of(p));
    for (const auto& [name, basis] : sol.unknown_bases) {
      text << "  " << name << " in span{";
      json items = json::array();
      for (std::size_t i = 0; i < basis.size(); ++i) {
        text << (i ? ", " : "") << expr::to_string(basis[i]);
        items.push_back(expr::to_string(basis[i]));
      }
      text << "}\n";
      bases[name] = items;
      if (!bindings.empty()) {
        text << "  with the declared constant values: " << name << " in span{";
        json numeric = json::array();
        for (std::size_t i = 0; i < basis.size(); ++i) {
          auto v = expr::to_string(expr::substitute(basis[i], bindings));
          text << (i ? ", " : "") << v;
          numeric.push_back(v);
        }
        text << "}\n";
        bases[name + "_bound"] = numeric;
      }
    }
    for (const auto& f : sol.free_components) text << "  " << f << " free\n";
    if (!sol.note.empty()) text << "  note: " << sol.note << "\n";
    solution = {{"bases", bases}, {"free", sol.free_components}, {"note", sol.note}};
  } catch (const OutOfClassError& e) {
    r.warnings.push_back(std::string("no closed-form solution: ") + e.what());
    text << "solution: outside the constant-coefficient class (" << e.what() << ")\n";
  }
  out << text.str();

  if (!c.out.empty()) {
    write_text(out_file(c, "system.txt"), text.str());
    json sj = {{"residuals", json::array()},
               {"side_constraints", sys.side_constraints},
               {"indeterminates", sys.indeterminates},
               {"conditions", conditions},
               {"solution", solution}};
    for (const auto& res : sys.residuals) {
      sj["residuals"].push_back({{"label", res.label}, {"expr", expr::to_string(res.expr)}});
    }
    write_text(out_file(c, "system.json"), sj.dump(2) + "\n");
  }
  r.pass = true;
  return r;
}

VerificationReport cmd_verify(const RunConfig& c, std::ostream& out) {
  VerificationReport r = start(c);
  Problem p = load(c);
  auto cand = candidate(c, p);
  auto sys = system_of(p);
  auto rep = stage("verify", [&] { return solver::verify_candidate(sys, cand, c.seed); });

  SymbolicSection sec;
  for (const auto& res : rep.residuals) {
    sec.checks.push_back({res.label, expr::to_string(res.residual), res.exact_zero});
  }
  sec.checks.push_back({"initial_condition", expr::to_string(rep.h_at_zero), rep.initial_condition});
  if (!rep.numeric_agrees) {
    r.warnings.push_back("sampled residuals disagree with the symbolic verdict");
  }
  bool pass = rep.pass;
  if (auto* f = std::get_if<FbsdeProblem>(&p)) {
    auto tc = stage("terminal", [&] { return solver::terminal_compatibility(*f, cand); });
    sec.checks.push_back({"terminal_compatibility", expr::to_string(tc.residual), tc.pass});
    pass = pass && tc.pass;
  }
  sec.pass = pass;
  for (const auto& ch : sec.checks) {
    out << (ch.pass ? "PASS " : "FAIL ") << ch.label << ": " << ch.residual << "\n";
  }
  out << (pass ? "candidate admitted\n" : "candidate rejected\n");
  r.symbolic = sec;
  r.pass = pass;
  return r;
}

VerificationReport cmd_exponentiate(const RunConfig& c, std::ostream& out) {
  VerificationReport r = start(c);
  Problem p = load(c);
  auto cand = candidate(c, p);
  auto constants = determining::constant_values(constants_of(p));
  const bool fb = is_fbsde(p);
  std::optional<expr::CompiledExpr> sigma;
  if (const auto* f = std::get_if<FbsdeProblem>(&p)) {
    sigma.emplace(f->sigma, std::vector<std::string>{"t", "x"}, constants);
  }
  const std::vector<double> xs = fb ? std::vector<double>{-1, 0, 1} : std::vector<double>{0};
  const std::vector<double> zs{-1, 0.5, 2};

  bool pass = true;
  for (double a : a_values(c, {0.25, 0.5, 1})) {
    FlowEntry e;
    e.a = a;
    flow::FlowOptions numeric_only;
    numeric_only.use_closed_form = false;
    auto integrated = stage("flow", [&] { return flow::exponentiate_flow(cand, a, constants, numeric_only); });
    auto closed = stage("flow", [&] { return flow::exponentiate_flow(cand, a, constants); });
    if (closed.has_closed_form()) e.rule = closed.closed_form()->rule;

    std::ostringstream csv;
    csv.precision(17);
    csv << "a,t,x,y,z,Xi,phi,phix,eta,zeta";
    if (!e.rule.empty()) csv << ",Xi_closed,phi_closed,phix_closed,eta_closed,zeta_closed";
    csv << "\n";
    stage("flow", [&] {
      for (int i = 1; i <= 20; ++i) {
        const double t = 0.1 * i;
        for (int j = 0; j <= 20; ++j) {
          const double y = -2 + 0.2 * j;
          for (double x : xs) {
            auto tg = integrated.tangent(t, y, x);
            const double xt = tg.jacobian[0][0];
            if (!(xt > 0)) {
              throw NonPositiveRateError("Xi_t = " + std::to_string(xt) + " at (t,y)=(" +
                                         std::to_string(t) + "," + std::to_string(y) + ")");
            }
            const double eta = std::sqrt(xt);
            const double s = sigma ? (*sigma)({t, x}) : 0.0;
            std::optional<flow::State> cs;
            double ceta = 0;
            if (!e.rule.empty()) {
              cs = closed(t, y, x);
              ceta = flow::time_rate_eta(closed, t, y, x);
              e.max_error_Xi = std::max(e.max_error_Xi, std::abs(tg.state.time - cs->time));
              e.max_error_phi = std::max({e.max_error_phi, std::abs(tg.state.y - cs->y),
                                          std::abs(tg.state.x - cs->x)});
              e.max_error_eta = std::max(e.max_error_eta, std::abs(eta - ceta));
            }
            for (double z : zs) {
              const double zeta = (tg.jacobian[1][1] * z + s * tg.jacobian[1][2]) / eta;
              csv << a << "," << t << "," << x << "," << y << "," << z << "," << tg.state.time << ","
                  << tg.state.y << "," << tg.state.x << "," << eta << "," << zeta;
              if (cs) {
                const double cz = fb ? flow::zeta_fbsde(closed, s, t, x, y, z)
                                     : flow::zeta_bsde(closed, t, y, z);
                e.max_error_zeta = std::max(e.max_error_zeta, std::abs(zeta - cz));
                csv << "," << cs->time << "," << cs->y << "," << cs->x << "," << ceta << "," << cz;
              }
              csv << "\n";
            }
          }
        }
      }
    });
    e.pass = e.rule.empty() || (e.max_error_Xi < 1e-8 && e.max_error_phi < 1e-8 &&
                                e.max_error_eta < 1e-8 && e.max_error_zeta < 1e-10);
    pass = pass && e.pass;
    out << "a=" << a << ": ";
    if (e.rule.empty()) {
      out << "no closed form recognized; integrated table only\n";
    } else {
      out << (e.pass ? "PASS" : "FAIL") << " closed form (" << e.rule << ")"
          << " max|dXi|=" << e.max_error_Xi << " max|dphi|=" << e.max_error_phi
          << " max|deta|=" << e.max_error_eta << " max|dzeta|=" << e.max_error_zeta << "\n";
    }
    if (!c.out.empty()) write_text(out_file(c, "flow_a" + a_tag(a) + ".csv"), csv.str());
    r.flow.push_back(e);
  }
  r.pass = pass;
  return r;
}

namespace {

void append(stochastic::StatReport& into, const std::string& prefix,
            const stochastic::StatReport& from) {
  for (auto t : from.tests) {
    t.name = prefix + t.name;
    into.tests.push_back(std::move(t));
  }
}

// max over checkpoints of mean |P - Q|.
double checkpoint_error(const stochastic::Process& P, const std::function<double(std::size_t, std::size_t)>& q) {
  double worst = 0;
  for (std::size_t k : stochastic::checkpoints(P.grid.steps())) {
    double s = 0;
    for (std::size_t i = 0; i < P.paths; ++i) s += std::abs(P.at(i, k) - q(i, k));
    worst = std::max(worst, s / static_cast<double>(P.paths));
  }
  return worst;
}

bool linear_terminal(const BsdeProblem& p) {
  return expr::simplify_basic(p.H) == expr::symbol(determining::terminal_var);
}

bool quadratic_generator(const BsdeProblem& p) {
  auto t = determining::bsde_table(p.constants);
  return expr::simplify_basic(p.g) == expr::simplify_basic(expr::parse("z^2", t));
}

}  // namespace

VerificationReport cmd_simulate(const RunConfig& c, std::ostream& out) {
  VerificationReport r = start(c);
  Problem p = load(c);
  auto grid = stage("grid", [&] {
    return stochastic::TimeGrid::uniform(std::visit([](const auto& q) { return q.T; }, p), c.steps);
  });
  if (c.paths < underpowered_paths) {
    r.warnings.push_back("underpowered sample: M=" + std::to_string(c.paths) + " < " +
                         std::to_string(underpowered_paths) +
                         "; statistical checks have little power");
  }

  if (const auto* f = std::get_if<FbsdeProblem>(&p)) {
    r.warnings.push_back("FBSDE simulation covers the forward SDE only");
    auto pe = stage("forward", [&] { return stochastic::euler_forward_sde(*f, grid, c.paths, c.seed); });
    StochasticEntry e;
    e.stage = "forward";
    e.report = stage("statistics", [&] { return stochastic::bm_statistics(pe, "B"); });
    for (auto& t : e.report.tests) t.name = "B:" + t.name;
    e.pass = e.report.all_pass();
    out << "forward SDE: " << e.report.failures() << " of " << e.report.tests.size()
        << " driving-noise checks failed\n";
    if (!c.out.empty()) stochastic::write_csv(pe, {"B", "X"}, out_file(c, "paths_forward.csv").string(), 20);
    r.stochastic.push_back(std::move(e));
    r.pass = r.stochastic.back().pass;
    for (const auto& w : r.warnings) out << "warning: " << w << "\n";
    return r;
  }

  const auto& bp = std::get<BsdeProblem>(p);
  auto cand = candidate(c, p);
  auto constants = determining::constant_values(bp.constants);
  auto base = stage("simulate", [&] { return stochastic::simulate_brownian(grid, c.paths, c.seed); });
  stochastic::RegressionOptions ro;
  ro.degree = c.degree;
  stage("regression", [&] { stochastic::solve_bsde_regression(bp, base, ro); });
  auto bstats = stage("statistics", [&] { return stochastic::bm_statistics(base, "B"); });

  std::optional<double> y_err, z_err;
  if (quadratic_generator(bp)) {
    auto oracle = stage("oracle", [&] { return stochastic::quadratic_oracle(bp, base); });
    y_err = checkpoint_error(base.get("Y"), [&](std::size_t i, std::size_t k) { return oracle.at(i, k); });
    if (linear_terminal(bp)) {
      z_err = checkpoint_error(base.get("Z"), [](std::size_t, std::size_t) { return 1.0; });
    }
  }

  bool pass = true;
  for (double a : a_values(c, {0.5})) {
    StochasticEntry e;
    e.a = a;
    e.identity = a == 0;
    if (e.identity) r.warnings.push_back("a=0 is the identity transformation");
    e.stage = "verification";
    auto pe = base;
    auto f = stage("flow", [&] { return flow::exponentiate_flow(cand, a, constants); });
    stage("time change", [&] { stochastic::transformed_brownian(pe, stochastic::rate_of(f)); });
    auto tstats = stage("statistics", [&] { return stochastic::bm_statistics(pe, "Bbar_alpha"); });
    auto check = stage("verification", [&] { return stochastic::verify_transformed_solution(bp, f, pe); });
    append(e.report, "B:", bstats);
    append(e.report, "Bbar_alpha:", tstats);
    append(e.report, "transformed:", check.report);
    e.rms_original = check.rms_original;
    e.rms_transformed = check.rms_transformed;
    for (const auto& t : check.report.tests) {
      if (t.name == "pathwise_identity") e.identity_error = t.statistic;
    }
    e.oracle_y_error = y_err;
    e.oracle_z_error = z_err;
    e.pass = e.report.all_pass() && (!y_err || *y_err < 0.05) && (!z_err || *z_err < 0.1);
    pass = pass && e.pass;

    out << "a=" << a << (e.identity ? " (identity)" : "") << ": " << (e.pass ? "PASS" : "FAIL")
        << ", " << e.report.failures() << " of " << e.report.tests.size() << " checks failed"
        << ", rms " << e.rms_original << " -> " << e.rms_transformed;
    if (e.identity_error) out << ", identity error " << *e.identity_error;
    if (y_err) out << ", oracle |Y| error " << *y_err;
    if (z_err) out << ", oracle |Z| error " << *z_err;
    out << "\n";
    for (const auto& t : e.report.tests) {
      if (!t.pass) {
        out << "  failed " << t.name << ": " << t.statistic << " not in [" << t.lower << ", "
            << t.upper << "]\n";
      }
    }
    if (!c.out.empty()) {
      stochastic::write_csv(pe, {"B", "Y", "Z", "Bbar", "Ybar", "Zbar", "beta"},
                            out_file(c, "paths_a" + a_tag(a) + ".csv").string(), 20);
    }
    r.stochastic.push_back(std::move(e));
  }
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  r.pass = pass;
  return r;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    c.validate();
    VerificationReport r;
    if (c.subcommand == "derive") {
      r = cmd_derive(c, out);
    } else if (c.subcommand == "verify") {
      r = cmd_verify(c, out);
    } else if (c.subcommand == "exponentiate") {
      r = cmd_exponentiate(c, out);
    } else if (c.subcommand == "simulate") {
      r = cmd_simulate(c, out);
    } else {
      throw ConfigError("<command line>", 0, "unknown subcommand '" + c.subcommand + "'");
    }
    if (!c.out.empty()) write_text(out_file(c, "report.json"), dump(r));
    return r.pass ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace liesym::cli
