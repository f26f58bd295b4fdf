#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "liesym/expr/calculus.hpp"
#include "liesym/expr/eval.hpp"
#include "liesym/expr/parse.hpp"

namespace testing_support {

using namespace liesym::expr;

/// Random concrete expressions over a fixed symbol set, kept well-behaved
/// on [0.5, 1.5]^n: logs only see positive arguments, exponents are small
/// naturals.
class ExprGen {
 public:
  ExprGen(std::uint64_t seed, std::vector<std::string> symbols)
      : rng_(seed), symbols_(std::move(symbols)) {}

  Expr operator()(int depth = 3) {
    int pick = depth <= 0 ? uniform(0, 1) : uniform(0, 7);
    switch (pick) {
      case 0:
        return uniform(0, 1) ? number(uniform(-3, 4)) : rational(uniform(-5, 5), uniform(1, 4));
      case 1:
        return symbol(symbols_[uniform(0, static_cast<int>(symbols_.size()) - 1)]);
      case 2:
      case 3:
        return (*this)(depth - 1) + (*this)(depth - 1);
      case 4:
      case 5:
        return (*this)(depth - 1) * (*this)(depth - 1);
      case 6:
        return pow((*this)(depth - 1), number(uniform(0, 3)));
      default:
        if (uniform(0, 1)) return exp(rational(uniform(-3, 3), 4) * (*this)(depth - 1));
        return ln(number(1) + pow((*this)(depth - 1), number(2)));
    }
  }

  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  Values point(double lo = 0.5, double hi = 1.5) {
    Values v;
    for (const auto& s : symbols_) v[s] = real(lo, hi);
    return v;
  }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
  std::vector<std::string> symbols_;
};

inline bool close(double a, double b, double rel, double abs = 1e-12) {
  return std::abs(a - b) <= abs + rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace testing_support

namespace testing_support {

/// Assigns each distinct unknown-function node an independent random value,
/// so numeric evaluation treats the derivative nodes as free symbols.
class NodeValues {
 public:
  explicit NodeValues(std::uint64_t seed) : rng_(seed) {}
  double operator()(const Expr& node, const Values&) {
    auto key = to_string(node);
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    double v = std::uniform_real_distribution<double>(-2, 2)(rng_);
    values_[key] = v;
    return v;
  }
  void reset() { values_.clear(); }

 private:
  std::mt19937_64 rng_;
  std::map<std::string, double> values_;
};

/// Numeric identity check of two expressions over random points and random
/// unknown-function values.
inline bool numerically_equal(const Expr& a, const Expr& b, const std::vector<std::string>& vars,
                              std::uint64_t seed, int trials = 100, const Values& constants = {}) {
  ExprGen gen(seed, vars);
  NodeValues nodes(seed + 1);
  auto cb = [&](const Expr& n, const Values& v) { return nodes(n, v); };
  for (int i = 0; i < trials; ++i) {
    Values v = gen.point(-1.5, 1.5);
    for (const auto& [k, c] : constants) v[k] = c;
    nodes.reset();
    if (!close(evaluate(a, v, cb), evaluate(b, v, cb), 1e-10, 1e-10)) return false;
  }
  return true;
}

}  // namespace testing_support
