#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace find {

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Tan, Exp, Log, Sqrt, Atan, Abs };

/// Value-semantics expression tree.
struct Expr {
  Op op = Op::Const;
  double value = 0.0;    // Const
  std::size_t index = 0;  // Var
  std::string name;       // Var
  std::vector<Expr> args;

  bool operator==(const Expr& o) const;
  bool is_const() const { return op == Op::Const; }
};

Expr constant(double v);
Expr variable(std::size_t index, std::string name);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr pow(Expr a, Expr b);
Expr neg(Expr a);
Expr apply(Op unary, Expr a);

std::size_t arity(Op op);
std::string_view op_symbol(Op op);

/// Node count (operators plus operands).
std::size_t complexity(const Expr& e);

/// Infix text; `digits` significant digits for constants.
std::string render_text(const Expr& e, int digits = 6);

/// Canonical s-expression with %.17g constants, e.g. `(* 0.49 (* (^ d 3) rho))`.
std::string render_sexpr(const Expr& e);

class ExprParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inverse of render_sexpr. Variable indices come from `vars`; when `vars`
/// is empty, indices follow first appearance.
Expr parse_sexpr(std::string_view text, const std::vector<std::string>& vars = {});

/// Forward-mode dual number: val + der·ε.
struct Dual {
  double val = 0.0;
  double der = 0.0;
};

inline Dual operator+(Dual a, Dual b) { return {a.val + b.val, a.der + b.der}; }
inline Dual operator-(Dual a, Dual b) { return {a.val - b.val, a.der - b.der}; }
inline Dual operator-(Dual a) { return {-a.val, -a.der}; }
inline Dual operator*(Dual a, Dual b) { return {a.val * b.val, a.der * b.val + a.val * b.der}; }
inline Dual operator/(Dual a, Dual b) {
  return {a.val / b.val, (a.der * b.val - a.val * b.der) / (b.val * b.val)};
}

namespace math {

inline double lift(double v) { return v; }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double tan(double x) { return std::tan(x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double atan(double x) { return std::atan(x); }
inline double abs(double x) { return std::fabs(x); }
inline double pow_const(double x, double c) { return std::pow(x, c); }
inline double pow(double x, double y) { return std::pow(x, y); }

inline Dual sin(Dual x) { return {std::sin(x.val), std::cos(x.val) * x.der}; }
inline Dual cos(Dual x) { return {std::cos(x.val), -std::sin(x.val) * x.der}; }
inline Dual tan(Dual x) {
  const double t = std::tan(x.val);
  return {t, (1.0 + t * t) * x.der};
}
inline Dual exp(Dual x) {
  const double e = std::exp(x.val);
  return {e, e * x.der};
}
inline Dual log(Dual x) { return {std::log(x.val), x.der / x.val}; }
inline Dual sqrt(Dual x) {
  const double s = std::sqrt(x.val);
  return {s, 0.5 * x.der / s};
}
inline Dual atan(Dual x) { return {std::atan(x.val), x.der / (1.0 + x.val * x.val)}; }
inline Dual abs(Dual x) { return x.val < 0 ? -x : x; }
inline Dual pow_const(Dual x, double c) {
  if (c == 0.0) return {1.0, 0.0};
  return {std::pow(x.val, c), c * std::pow(x.val, c - 1.0) * x.der};
}
inline Dual pow(Dual x, Dual y) { return exp(y * log(x)); }

}  // namespace math

/// Evaluates with variable values looked up by index.
template <typename T, typename Vars>
T eval(const Expr& e, const Vars& vars) {
  switch (e.op) {
    case Op::Const: return T{e.value};
    case Op::Var: return vars[e.index];
    case Op::Add: return eval<T>(e.args[0], vars) + eval<T>(e.args[1], vars);
    case Op::Sub: return eval<T>(e.args[0], vars) - eval<T>(e.args[1], vars);
    case Op::Mul: return eval<T>(e.args[0], vars) * eval<T>(e.args[1], vars);
    case Op::Div: return eval<T>(e.args[0], vars) / eval<T>(e.args[1], vars);
    case Op::Pow:
      if (e.args[1].is_const()) return math::pow_const(eval<T>(e.args[0], vars), e.args[1].value);
      return math::pow(eval<T>(e.args[0], vars), eval<T>(e.args[1], vars));
    case Op::Neg: return -eval<T>(e.args[0], vars);
    case Op::Sin: return math::sin(eval<T>(e.args[0], vars));
    case Op::Cos: return math::cos(eval<T>(e.args[0], vars));
    case Op::Tan: return math::tan(eval<T>(e.args[0], vars));
    case Op::Exp: return math::exp(eval<T>(e.args[0], vars));
    case Op::Log: return math::log(eval<T>(e.args[0], vars));
    case Op::Sqrt: return math::sqrt(eval<T>(e.args[0], vars));
    case Op::Atan: return math::atan(eval<T>(e.args[0], vars));
    case Op::Abs: return math::abs(eval<T>(e.args[0], vars));
  }
  throw std::logic_error("unhandled op");
}

}  // namespace find
