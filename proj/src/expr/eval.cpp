#include "liesym/expr/eval.hpp"

#include <algorithm>
#include <cmath>

#include "liesym/error.hpp"

namespace liesym::expr {

double evaluate(const Expr& e, const Values& values, const FunctionValue& functions) {
  switch (e.kind()) {
    case Kind::number:
      return e.number().to_double();
    case Kind::symbol: {
      auto it = values.find(e.name());
      if (it == values.end()) throw UnknownNameError(e.name());
      return it->second;
    }
    case Kind::function:
      if (!functions) throw Error("no value for unknown function " + to_string(e));
      return functions(e, values);
    case Kind::add: {
      double s = 0;
      for (const auto& c : e.children()) s += evaluate(c, values, functions);
      return s;
    }
    case Kind::mul: {
      double p = 1;
      for (const auto& c : e.children()) p *= evaluate(c, values, functions);
      return p;
    }
    case Kind::pow:
      return std::pow(evaluate(e.children()[0], values, functions),
                      evaluate(e.children()[1], values, functions));
    case Kind::exp:
      return std::exp(evaluate(e.children()[0], values, functions));
    case Kind::log:
      return std::log(evaluate(e.children()[0], values, functions));
  }
  return 0;
}

CompiledExpr::CompiledExpr(const Expr& e, std::vector<std::string> variables,
                           const Values& constants)
    : variables_(std::move(variables)) {
  emit(e, constants);
  // Stack depth bound: one slot per instruction is always enough.
  depth_ = code_.size();
}

void CompiledExpr::emit(const Expr& e, const Values& constants) {
  switch (e.kind()) {
    case Kind::number:
      code_.push_back({Op::constant, e.number().to_double()});
      return;
    case Kind::symbol: {
      auto it = std::find(variables_.begin(), variables_.end(), e.name());
      if (it != variables_.end()) {
        code_.push_back({Op::variable, 0, static_cast<std::size_t>(it - variables_.begin())});
        return;
      }
      auto c = constants.find(e.name());
      if (c == constants.end()) throw UnknownNameError(e.name());
      code_.push_back({Op::constant, c->second});
      return;
    }
    case Kind::function:
      throw Error("cannot compile unknown function " + to_string(e));
    case Kind::add:
    case Kind::mul:
      for (const auto& c : e.children()) emit(c, constants);
      code_.push_back({e.kind() == Kind::add ? Op::add : Op::mul, 0, e.children().size()});
      return;
    case Kind::pow:
      emit(e.children()[0], constants);
      emit(e.children()[1], constants);
      code_.push_back({Op::pow});
      return;
    case Kind::exp:
    case Kind::log:
      emit(e.children()[0], constants);
      code_.push_back({e.kind() == Kind::exp ? Op::exp : Op::log});
      return;
  }
}

namespace {

double int_pow(double b, double k) {
  if (k == std::trunc(k) && std::abs(k) <= 16) {
    int n = static_cast<int>(std::abs(k));
    double r = 1;
    for (double p = b; n; n >>= 1, p *= p) {
      if (n & 1) r *= p;
    }
    return k < 0 ? 1 / r : r;
  }
  return std::pow(b, k);
}

}  // namespace

double CompiledExpr::operator()(std::span<const double> point) const {
  if (point.size() != variables_.size()) throw ArityError("wrong number of evaluation arguments");
  if (code_.empty()) return 0;
  constexpr std::size_t local = 64;
  double buf[local];
  thread_local std::vector<double> heap;
  double* base = buf;
  if (depth_ > local) {
    heap.resize(depth_);
    base = heap.data();
  }
  double* sp = base;  // one past the top
  for (const auto& in : code_) {
    switch (in.op) {
      case Op::constant:
        *sp++ = in.value;
        break;
      case Op::variable:
        *sp++ = point[in.index];
        break;
      case Op::add: {
        double acc = 0;
        for (double* p = sp - in.index; p < sp; ++p) acc += *p;
        sp -= in.index;
        *sp++ = acc;
        break;
      }
      case Op::mul: {
        double acc = 1;
        for (double* p = sp - in.index; p < sp; ++p) acc *= *p;
        sp -= in.index;
        *sp++ = acc;
        break;
      }
      case Op::pow: {
        double k = *--sp;
        sp[-1] = int_pow(sp[-1], k);
        break;
      }
      case Op::exp:
        sp[-1] = std::exp(sp[-1]);
        break;
      case Op::log:
        sp[-1] = std::log(sp[-1]);
        break;
    }
  }
  return sp[-1];
}

}  // namespace liesym::expr
