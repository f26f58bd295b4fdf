#include "liesym/expr/parse.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <string>

#include "liesym/error.hpp"

namespace liesym::expr {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const SymbolTable& table) : text_(text), table_(table) {}

  Expr run() {
    skip_space();
    Expr e = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + parse_term();
      } else if (accept('-')) {
        lhs = lhs - parse_term();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * parse_unary();
      } else if (peek() == '/') {
        std::size_t at = pos_;
        ++pos_;
        Expr rhs = parse_unary();
        if (rhs.is_number() && rhs.number().is_zero()) {
          pos_ = at;
          fail("division by zero");
        }
        lhs = lhs / rhs;
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    std::size_t start = pos_;
    Expr base = parse_primary();
    if (accept('^')) {
      Expr exponent = parse_unary();
      try {
        return pow(base, exponent);
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        pos_ = start;
        fail(e.what());
      }
    }
    return base;
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    bool is_float = false;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      is_float = true;
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        is_float = true;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    std::string lexeme(text_.substr(start, pos_ - start));
    if (is_float) return floating(std::strtod(lexeme.c_str(), nullptr));
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), v);
    if (ec != std::errc() || ptr != lexeme.data() + lexeme.size()) {
      pos_ = start;
      fail("integer literal out of range");
    }
    return number(v);
  }

  std::string parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  Expr parse_application(const std::string& name, std::size_t name_pos) {
    // Caller consumed '('.
    if (name == "exp" || name == "ln" || name == "sqrt") {
      Expr arg = parse_expr();
      if (!accept(')')) fail("expected ')'");
      if (name == "exp") return exp(arg);
      if (name == "ln") return ln(arg);
      return sqrt(arg);
    }

    std::string base = name;
    std::string suffix;
    if (!table_.has_function(name)) {
      auto us = name.rfind('_');
      if (us == std::string::npos || !table_.has_function(name.substr(0, us))) {
        pos_ = name_pos;
        throw UnknownNameError(name);
      }
      base = name.substr(0, us);
      suffix = name.substr(us + 1);
      if (suffix.empty()) {
        pos_ = name_pos;
        fail("empty derivative suffix");
      }
    }

    std::vector<std::string> args;
    if (!accept(')')) {
      for (;;) {
        skip_space();
        std::size_t arg_pos = pos_;
        if (pos_ >= text_.size() ||
            !(std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
          fail("unknown-function arguments must be variable names");
        }
        std::string arg = parse_identifier();
        if (!table_.is_variable(arg)) {
          pos_ = arg_pos;
          throw UnknownNameError(arg);
        }
        args.push_back(arg);
        if (accept(')')) break;
        if (!accept(',')) fail("expected ',' or ')'");
      }
    }
    if (args.size() != table_.function_args(base).size()) {
      pos_ = name_pos;
      fail("function '" + base + "' expects " +
           std::to_string(table_.function_args(base).size()) + " arguments");
    }

    std::vector<int> orders(args.size(), 0);
    for (char c : suffix) {
      std::size_t i = 0;
      while (i < args.size() && args[i] != std::string(1, c)) ++i;
      if (i == args.size()) {
        pos_ = name_pos;
        fail(std::string("derivative suffix letter '") + c + "' is not an argument of " + base);
      }
      ++orders[i];
    }
    return function(base, std::move(args), std::move(orders));
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t name_pos = pos_;
      std::string name = parse_identifier();
      if (accept('(')) return parse_application(name, name_pos);
      if (table_.has_symbol(name)) return symbol(name);
      pos_ = name_pos;
      if (table_.has_function(name)) fail("function '" + name + "' requires arguments");
      throw UnknownNameError(name);
    }
    fail(std::string("unexpected '") + c + "'");
  }

  std::string_view text_;
  const SymbolTable& table_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const SymbolTable& table) { return Parser(text, table).run(); }

}  // namespace liesym::expr
