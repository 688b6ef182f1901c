#pragma once

// Parser and evaluator for the generating-function DSL.
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := atom ('^' exponent)?
//   exponent := '-'? number ('^' exponent)?
//   atom     := number | ident | fname '(' expr ')' | '(' expr ')'
//
// Identifiers are x1..xn and p1..pn (cotangent) or y1..yn (tangent);
// fname is one of sin, cos, exp, log, sqrt.  Exponents are literals, and a
// tower a^b^c folds right to left into a single literal exponent.

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hfq/jet.hpp"
#include "hfq/phase_point.hpp"

namespace hfq {

enum class Func { Sin, Cos, Exp, Log, Sqrt };

class Expr {
 public:
  enum class Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

  struct Node {
    Kind kind = Kind::Const;
    double value = 0.0;  // Const value or Pow exponent
    int var = 0;         // coordinate slot 0..2n-1
    Func func = Func::Exp;
    std::shared_ptr<const Node> a, b;
  };

  Expr() = default;
  Expr(std::shared_ptr<const Node> root, int n, Bundle bundle) : root_(std::move(root)), n_(n), bundle_(bundle) {}

  const Node& root() const { return *root_; }
  const std::shared_ptr<const Node>& root_ptr() const { return root_; }
  bool empty() const { return !root_; }
  int n() const { return n_; }
  Bundle bundle() const { return bundle_; }

 private:
  std::shared_ptr<const Node> root_;
  int n_ = 0;
  Bundle bundle_ = Bundle::Cotangent;
};

Expr parse(std::string_view src, int n, Bundle bundle);

// Canonical fully parenthesised text; parse(to_string(e)) reproduces e.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

// Name of coordinate slot i (x1.., then p1.. or y1..).
std::string variable_name(int slot, int n, Bundle bundle);

Jet<double> eval_jet(const Expr& e, const PhasePoint& pt, int order);

// Plain scalar evaluation at coordinates u = (x, fiber).
template <typename T>
T evaluate(const Expr::Node& node, const std::vector<T>& u) {
  using std::cos, std::exp, std::log, std::pow, std::sin, std::sqrt;
  switch (node.kind) {
    case Expr::Kind::Const: return T(node.value);
    case Expr::Kind::Var: return u[node.var];
    case Expr::Kind::Neg: return -evaluate(*node.a, u);
    case Expr::Kind::Add: return evaluate(*node.a, u) + evaluate(*node.b, u);
    case Expr::Kind::Sub: return evaluate(*node.a, u) - evaluate(*node.b, u);
    case Expr::Kind::Mul: return evaluate(*node.a, u) * evaluate(*node.b, u);
    case Expr::Kind::Div: return evaluate(*node.a, u) / evaluate(*node.b, u);
    case Expr::Kind::Pow: return pow(evaluate(*node.a, u), T(node.value));
    case Expr::Kind::Call: {
      T x = evaluate(*node.a, u);
      switch (node.func) {
        case Func::Sin: return sin(x);
        case Func::Cos: return cos(x);
        case Func::Exp: return exp(x);
        case Func::Log: return log(x);
        case Func::Sqrt: return sqrt(x);
      }
    }
  }
  return T(0);
}

template <typename T>
T evaluate(const Expr& e, const std::vector<T>& u) {
  return evaluate(e.root(), u);
}

}  // namespace hfq
