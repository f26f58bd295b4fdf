#include "liesym/determining/problem.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "liesym/error.hpp"
#include "liesym/expr/calculus.hpp"
#include "liesym/expr/parse.hpp"

namespace liesym::determining {

using expr::Expr;
using expr::SymbolTable;

namespace {

void add_constants(SymbolTable& t, const std::vector<Constant>& constants) {
  for (const auto& c : constants) t.add_constant(c.name, c.value);
}

void check_symbols(const Expr& e, const std::set<std::string>& allowed,
                   const std::vector<Constant>& constants, const std::string& what) {
  if (expr::contains_function(e)) throw Error(what + " must not contain unknown functions");
  for (const auto& s : expr::free_symbols(e)) {
    bool constant = std::any_of(constants.begin(), constants.end(),
                                [&](const Constant& c) { return c.name == s; });
    if (!allowed.contains(s) && !constant) {
      throw Error(what + " depends on '" + s + "', which is not allowed");
    }
  }
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_identifier(const std::string& s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

double parse_real(const Entry& e, const std::string& file) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size() || !std::isfinite(v)) {
    throw ConfigError(file, e.line, "'" + e.key + "' must be a number, got '" + e.value + "'");
  }
  return v;
}

Expr parse_entry(const Entry& e, const SymbolTable& table, const std::string& file) {
  try {
    return expr::simplify_basic(expr::parse(e.value, table));
  } catch (const Error& err) {
    throw ConfigError(file, e.line, "in '" + e.key + "': " + err.what());
  }
}

}  // namespace

SymbolTable bsde_table(const std::vector<Constant>& constants) {
  SymbolTable t{"t", "y", "z"};
  add_constants(t, constants);
  t.add_function(gamma_name, {"t", "y"});
  t.add_function(h_name, {"t", "y"});
  return t;
}

SymbolTable fbsde_table(const std::vector<Constant>& constants) {
  SymbolTable t{"t", "x", "y", "z"};
  add_constants(t, constants);
  t.add_function(gamma_name, {"t", "x", "y"});
  t.add_function(h_name, {"t", "x", "y"});
  t.add_function(xi_name, {"t", "x", "y"});
  return t;
}

SymbolTable terminal_table(const std::vector<Constant>& constants) {
  SymbolTable t{terminal_var};
  add_constants(t, constants);
  return t;
}

expr::Values constant_values(const std::vector<Constant>& constants) {
  expr::Values v;
  for (const auto& c : constants) {
    if (c.value) v[c.name] = c.value->to_double();
  }
  return v;
}

std::map<std::string, Expr> constant_bindings(const std::vector<Constant>& constants) {
  std::map<std::string, Expr> m;
  for (const auto& c : constants) {
    if (c.value) m[c.name] = expr::number(*c.value);
  }
  return m;
}

void validate(const BsdeProblem& p) {
  if (!(p.T > 0) || !std::isfinite(p.T)) throw Error("horizon T must be positive");
  check_symbols(p.g, {"t", "y", "z"}, p.constants, "generator g");
  check_symbols(p.H, {terminal_var}, p.constants, "terminal map H");
}

void validate(const FbsdeProblem& p) {
  if (!(p.T > 0) || !std::isfinite(p.T)) throw Error("horizon T must be positive");
  check_symbols(p.b, {"t", "x"}, p.constants, "drift b");
  check_symbols(p.sigma, {"t", "x"}, p.constants, "diffusion sigma");
  check_symbols(p.g, {"t", "x", "y", "z"}, p.constants, "generator g");
  check_symbols(p.H, {terminal_var}, p.constants, "terminal map H");
  if (expr::simplify_basic(p.sigma).is_zero()) throw Error("diffusion sigma is identically zero");
}

std::vector<Entry> read_entries(const std::string& text, const std::string& file) {
  std::vector<Entry> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    // Strip a comment that is not inside quotes.
    bool in_quote = false;
    std::size_t cut = raw.size();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') in_quote = !in_quote;
      if (raw[i] == '#' && !in_quote) {
        cut = i;
        break;
      }
    }
    std::string body = trim(std::string_view(raw).substr(0, cut));
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(file, line, "expected 'key = value'");
    Entry e;
    e.line = line;
    e.key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (e.key.rfind("const ", 0) == 0) {
      std::string name = trim(std::string_view(e.key).substr(6));
      if (!is_identifier(name)) throw ConfigError(file, line, "bad constant name '" + name + "'");
      e.key = "const " + name;
    } else if (!is_identifier(e.key)) {
      throw ConfigError(file, line, "bad key '" + e.key + "'");
    }
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') {
        throw ConfigError(file, line, "unterminated string");
      }
      e.value = value.substr(1, value.size() - 2);
      e.quoted = true;
    } else {
      e.value = value;
    }
    if (e.value.empty()) throw ConfigError(file, line, "empty value for '" + e.key + "'");
    if (!seen.insert(e.key).second) throw ConfigError(file, line, "duplicate key '" + e.key + "'");
    out.push_back(std::move(e));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Problem parse_problem(const std::string& text, const std::string& file) {
  auto entries = read_entries(text, file);
  std::vector<Constant> constants;
  std::map<std::string, const Entry*> keys;
  for (const auto& e : entries) {
    if (e.key.rfind("const ", 0) == 0) {
      Constant c{e.key.substr(6), std::nullopt};
      if (e.value != "?") {
        Expr v = parse_entry(e, SymbolTable{}, file);
        if (!v.is_number()) throw ConfigError(file, e.line, "constant value must be numeric");
        c.value = v.number();
      }
      constants.push_back(c);
    } else {
      keys[e.key] = &e;
    }
  }

  auto kind_it = keys.find("kind");
  if (kind_it == keys.end()) throw ConfigError(file, 0, "missing key 'kind'");
  const std::string kind = kind_it->second->value;
  if (kind != "bsde" && kind != "fbsde") {
    throw ConfigError(file, kind_it->second->line, "kind must be bsde or fbsde");
  }
  const bool fbsde = kind == "fbsde";
  std::set<std::string> allowed = fbsde ? std::set<std::string>{"kind", "name", "g", "b", "sigma",
                                                                "H", "T", "x0"}
                                        : std::set<std::string>{"kind", "name", "g", "H", "T"};
  for (const auto& [k, e] : keys) {
    if (!allowed.contains(k)) throw ConfigError(file, e->line, "unknown key '" + k + "'");
  }
  auto need = [&](const std::string& k) -> const Entry& {
    auto it = keys.find(k);
    if (it == keys.end()) throw ConfigError(file, 0, "missing key '" + k + "'");
    return *it->second;
  };

  SymbolTable data = fbsde ? fbsde_table(constants) : bsde_table(constants);
  SymbolTable term = terminal_table(constants);
  auto checked = [&](auto p) {
    try {
      validate(p);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      throw ConfigError(file, 0, err.what());
    }
    return p;
  };

  if (!fbsde) {
    BsdeProblem p;
    p.g = parse_entry(need("g"), data, file);
    p.H = parse_entry(need("H"), term, file);
    p.T = keys.contains("T") ? parse_real(need("T"), file) : 1.0;
    p.constants = constants;
    return checked(p);
  }
  FbsdeProblem p;
  p.b = parse_entry(need("b"), data, file);
  p.sigma = parse_entry(need("sigma"), data, file);
  p.g = parse_entry(need("g"), data, file);
  p.H = parse_entry(need("H"), term, file);
  p.T = keys.contains("T") ? parse_real(need("T"), file) : 1.0;
  p.x0 = keys.contains("x0") ? parse_real(need("x0"), file) : 0.0;
  p.constants = constants;
  return checked(p);
}

Problem load_problem(const std::string& path) { return parse_problem(read_file(path), path); }

}  // namespace liesym::determining
