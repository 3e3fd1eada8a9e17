#pragma once

// Symbolic expression trees for (possibly non-polynomial) dynamics.
// Node set: constant, variable, +, *, integer power, sin, cos. Anything
// else must be pre-expanded by the caller.

#include <memory>
#include <stdexcept>
#include <vector>

#include "funnelkit/poly.hpp"

namespace funnelkit {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
 public:
  enum class Kind { Const, Var, Add, Mul, Pow, Sin, Cos };

  static ExprPtr constant(double c) {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::Const;
    e->value_ = c;
    return e;
  }
  static ExprPtr var(VarId v) {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::Var;
    e->var_ = v;
    return e;
  }
  static ExprPtr add(std::vector<ExprPtr> kids) {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::Add;
    e->kids_ = std::move(kids);
    return e;
  }
  static ExprPtr mul(std::vector<ExprPtr> kids) {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::Mul;
    e->kids_ = std::move(kids);
    return e;
  }
  static ExprPtr pow(ExprPtr base, int exp) {
    if (exp < 0) throw std::invalid_argument("Expr::pow: negative exponent");
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::Pow;
    e->kids_ = {std::move(base)};
    e->exp_ = exp;
    return e;
  }
  static ExprPtr sin(ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::Sin;
    e->kids_ = {std::move(a)};
    return e;
  }
  static ExprPtr cos(ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::Cos;
    e->kids_ = {std::move(a)};
    return e;
  }

  double eval(const Eigen::VectorXd& x) const {
    switch (kind_) {
      case Kind::Const: return value_;
      case Kind::Var:
        if (var_ >= static_cast<VarId>(x.size()))
          throw std::out_of_range("Expr::eval: missing assignment");
        return x[var_];
      case Kind::Add: {
        double s = 0;
        for (auto& k : kids_) s += k->eval(x);
        return s;
      }
      case Kind::Mul: {
        double p = 1;
        for (auto& k : kids_) p *= k->eval(x);
        return p;
      }
      case Kind::Pow: return std::pow(kids_[0]->eval(x), exp_);
      case Kind::Sin: return std::sin(kids_[0]->eval(x));
      case Kind::Cos: return std::cos(kids_[0]->eval(x));
    }
    throw std::logic_error("Expr::eval: bad kind");
  }

  ExprPtr derivative(VarId v) const {
    switch (kind_) {
      case Kind::Const: return constant(0);
      case Kind::Var: return constant(var_ == v ? 1 : 0);
      case Kind::Add: {
        std::vector<ExprPtr> d;
        for (auto& k : kids_) d.push_back(k->derivative(v));
        return add(std::move(d));
      }
      case Kind::Mul: {
        std::vector<ExprPtr> sum;
        for (std::size_t i = 0; i < kids_.size(); ++i) {
          std::vector<ExprPtr> prod;
          for (std::size_t j = 0; j < kids_.size(); ++j)
            prod.push_back(i == j ? kids_[j]->derivative(v) : kids_[j]);
          sum.push_back(mul(std::move(prod)));
        }
        return add(std::move(sum));
      }
      case Kind::Pow: {
        if (exp_ == 0) return constant(0);
        return mul({constant(exp_), pow(kids_[0], exp_ - 1), kids_[0]->derivative(v)});
      }
      case Kind::Sin: return mul({cos(kids_[0]), kids_[0]->derivative(v)});
      case Kind::Cos: return mul({constant(-1), sin(kids_[0]), kids_[0]->derivative(v)});
    }
    throw std::logic_error("Expr::derivative: bad kind");
  }

  // Truncated Taylor polynomial in deviation variables: substitutes
  // x_v -> center_v + x_v and returns the exact Taylor polynomial of the
  // result about 0 up to total degree `deg`. Coefficients are exact
  // (series arithmetic, no finite differences).
  Polynomial taylor(const Eigen::VectorXd& center, int deg) const {
    if (deg < 0) throw std::invalid_argument("taylor: negative degree");
    switch (kind_) {
      case Kind::Const: return Polynomial(value_);
      case Kind::Var: {
        if (var_ >= static_cast<VarId>(center.size()))
          throw std::out_of_range("taylor: center misses variable");
        Polynomial p(center[var_]);
        if (deg >= 1) p += Polynomial::var(var_);
        return p;
      }
      case Kind::Add: {
        Polynomial s;
        for (auto& k : kids_) s += k->taylor(center, deg);
        return s;
      }
      case Kind::Mul: {
        Polynomial p(1.0);
        for (auto& k : kids_) p = (p * k->taylor(center, deg)).truncate(deg);
        return p;
      }
      case Kind::Pow: {
        Polynomial b = kids_[0]->taylor(center, deg);
        Polynomial p(1.0);
        for (int i = 0; i < exp_; ++i) p = (p * b).truncate(deg);
        return p;
      }
      case Kind::Sin:
      case Kind::Cos: {
        Polynomial a = kids_[0]->taylor(center, deg);
        double a0 = a.coeff(Monomial::one());
        Polynomial q = a - Polynomial(a0);  // zero constant term
        // sin(a0+q) = sin(a0) cos(q) + cos(a0) sin(q), series in q
        Polynomial sin_q, cos_q(1.0), qk(1.0);
        double fact = 1.0;
        for (int k = 1; k <= deg; ++k) {
          qk = (qk * q).truncate(deg);
          if (qk.is_zero()) break;
          fact *= k;
          int r = k % 4;
          if (r == 1) sin_q += qk * (1.0 / fact);
          else if (r == 2) cos_q -= qk * (1.0 / fact);
          else if (r == 3) sin_q -= qk * (1.0 / fact);
          else cos_q += qk * (1.0 / fact);
        }
        if (kind_ == Kind::Sin)
          return sin_q * std::cos(a0) + cos_q * std::sin(a0);
        return cos_q * std::cos(a0) - sin_q * std::sin(a0);
      }
    }
    throw std::logic_error("taylor: bad kind");
  }

  Kind kind() const { return kind_; }

 private:
  Kind kind_ = Kind::Const;
  double value_ = 0;
  VarId var_ = 0;
  int exp_ = 0;
  std::vector<ExprPtr> kids_;
};

// Convenience builders.
inline ExprPtr operator+(ExprPtr a, ExprPtr b) { return Expr::add({std::move(a), std::move(b)}); }
inline ExprPtr operator-(ExprPtr a, ExprPtr b) {
  return Expr::add({std::move(a), Expr::mul({Expr::constant(-1), std::move(b)})});
}
inline ExprPtr operator*(ExprPtr a, ExprPtr b) { return Expr::mul({std::move(a), std::move(b)}); }
inline ExprPtr operator*(double a, ExprPtr b) { return Expr::mul({Expr::constant(a), std::move(b)}); }

// taylor_expand(f, c, d): polynomial in deviation variables x - c whose
// derivatives at 0 match f's at c up to total degree d.
inline Polynomial taylor_expand(const ExprPtr& f, const Eigen::VectorXd& center, int deg) {
  return f->taylor(center, deg);
}

}  // namespace funnelkit
