#pragma once

// Sparse multivariate polynomials over named indeterminates.
//
// Monomial ordering is graded lexicographic (total degree first, then
// lexicographic on exponents in ascending variable-id order) and is fixed
// globally so that Gram-matrix indexing and serialization are deterministic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace funnelkit {

using VarId = std::uint32_t;

// Coefficients smaller than this are dropped after arithmetic to bound
// term growth without affecting certificates at solver tolerance.
inline constexpr double kCoeffPrune = 1e-14;

class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<std::pair<VarId, int>> exps) {
    for (auto& [v, e] : exps) {
      if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
      if (e > 0) exps_.emplace_back(v, e);
    }
    std::sort(exps_.begin(), exps_.end());
    for (std::size_t i = 1; i < exps_.size(); ++i)
      if (exps_[i - 1].first == exps_[i].first)
        throw std::invalid_argument("Monomial: duplicate variable");
  }
  static Monomial one() { return Monomial(); }
  static Monomial var(VarId v, int e = 1) {
    return Monomial({{v, e}});
  }

  int degree() const {
    int d = 0;
    for (auto& [v, e] : exps_) d += e;
    return d;
  }
  int degree_of(VarId v) const {
    for (auto& [w, e] : exps_)
      if (w == v) return e;
    return 0;
  }
  bool is_one() const { return exps_.empty(); }
  const std::vector<std::pair<VarId, int>>& exponents() const { return exps_; }

  Monomial operator*(const Monomial& o) const {
    Monomial r;
    std::size_t i = 0, j = 0;
    while (i < exps_.size() || j < o.exps_.size()) {
      if (j == o.exps_.size() || (i < exps_.size() && exps_[i].first < o.exps_[j].first))
        r.exps_.push_back(exps_[i++]);
      else if (i == exps_.size() || o.exps_[j].first < exps_[i].first)
        r.exps_.push_back(o.exps_[j++]);
      else {
        r.exps_.emplace_back(exps_[i].first, exps_[i].second + o.exps_[j].second);
        ++i, ++j;
      }
    }
    return r;
  }

  // Graded lexicographic: by total degree, then lexicographic with higher
  // power of the smallest variable id ranking earlier.
  bool operator<(const Monomial& o) const {
    int da = degree(), db = o.degree();
    if (da != db) return da < db;
    std::size_t i = 0, j = 0;
    while (i < exps_.size() && j < o.exps_.size()) {
      if (exps_[i].first != o.exps_[j].first)
        return exps_[i].first < o.exps_[j].first;
      if (exps_[i].second != o.exps_[j].second)
        return exps_[i].second > o.exps_[j].second;
      ++i, ++j;
    }
    return false;
  }
  bool operator==(const Monomial& o) const { return exps_ == o.exps_; }
  bool operator!=(const Monomial& o) const { return !(*this == o); }

  double eval(const Eigen::VectorXd& point) const {
    double r = 1.0;
    for (auto& [v, e] : exps_) {
      if (v >= static_cast<VarId>(point.size()))
        throw std::out_of_range("Monomial::eval: missing assignment for variable");
      r *= std::pow(point[v], e);
    }
    return r;
  }

  std::string str() const {
    if (exps_.empty()) return "1";
    std::ostringstream os;
    bool first = true;
    for (auto& [v, e] : exps_) {
      if (!first) os << "*";
      os << "x" << v;
      if (e > 1) os << "^" << e;
      first = false;
    }
    return os.str();
  }

 private:
  // invariant: sorted by variable id, no zero exponents stored
  std::vector<std::pair<VarId, int>> exps_;
};

class Polynomial {
 public:
  Polynomial() = default;
  /* implicit */ Polynomial(double c) {
    if (std::abs(c) > 0.0) terms_[Monomial::one()] = c;
  }
  explicit Polynomial(const Monomial& m, double c = 1.0) {
    if (std::abs(c) > 0.0) terms_[m] = c;
  }
  static Polynomial var(VarId v) { return Polynomial(Monomial::var(v)); }

  const std::map<Monomial, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const {
    int d = 0;
    for (auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }
  int degree_of(VarId v) const {
    int d = 0;
    for (auto& [m, c] : terms_) d = std::max(d, m.degree_of(v));
    return d;
  }
  std::set<VarId> variables() const {
    std::set<VarId> s;
    for (auto& [m, c] : terms_)
      for (auto& [v, e] : m.exponents()) s.insert(v);
    return s;
  }
  double coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }
  double max_abs_coeff() const {
    double r = 0.0;
    for (auto& [m, c] : terms_) r = std::max(r, std::abs(c));
    return r;
  }

  void add_term(const Monomial& m, double c) {
    auto it = terms_.find(m);
    double nc = (it == terms_.end() ? 0.0 : it->second) + c;
    if (std::abs(nc) <= kCoeffPrune)
      { if (it != terms_.end()) terms_.erase(it); }
    else
      terms_[m] = nc;
  }

  Polynomial& operator+=(const Polynomial& o) {
    for (auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    for (auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial operator+(const Polynomial& o) const { Polynomial r = *this; r += o; return r; }
  Polynomial operator-(const Polynomial& o) const { Polynomial r = *this; r -= o; return r; }
  Polynomial operator-() const { Polynomial r; for (auto& [m, c] : terms_) r.terms_[m] = -c; return r; }

  Polynomial operator*(const Polynomial& o) const {
    Polynomial r;
    for (auto& [ma, ca] : terms_)
      for (auto& [mb, cb] : o.terms_) r.add_term(ma * mb, ca * cb);
    return r;
  }
  Polynomial& operator*=(const Polynomial& o) { *this = *this * o; return *this; }
  Polynomial operator*(double s) const {
    Polynomial r;
    for (auto& [m, c] : terms_)
      if (std::abs(c * s) > kCoeffPrune) r.terms_[m] = c * s;
    return r;
  }
  friend Polynomial operator*(double s, const Polynomial& p) { return p * s; }

  double eval(const Eigen::VectorXd& point) const {
    double r = 0.0;
    for (auto& [m, c] : terms_) r += c * m.eval(point);
    return r;
  }

  Polynomial differentiate(VarId v) const {
    Polynomial r;
    for (auto& [m, c] : terms_) {
      int e = m.degree_of(v);
      if (e == 0) continue;
      std::vector<std::pair<VarId, int>> ne;
      for (auto& [w, d] : m.exponents())
        if (w != v) ne.emplace_back(w, d);
        else if (d > 1) ne.emplace_back(w, d - 1);
      r.add_term(Monomial(ne), c * e);
    }
    return r;
  }

  // Substitute a polynomial for a variable (powers expanded by repeated
  // multiplication; degrees here are small).
  Polynomial substitute(VarId v, const Polynomial& q) const {
    Polynomial r;
    for (auto& [m, c] : terms_) {
      int e = m.degree_of(v);
      std::vector<std::pair<VarId, int>> rest;
      for (auto& [w, d] : m.exponents())
        if (w != v) rest.emplace_back(w, d);
      Polynomial t(Monomial(rest), c);
      for (int i = 0; i < e; ++i) t *= q;
      r += t;
    }
    return r;
  }
  Polynomial substitute(VarId v, double value) const {
    return substitute(v, Polynomial(value));
  }

  // Drop every term of total degree above `deg`.
  Polynomial truncate(int deg) const {
    Polynomial r;
    for (auto& [m, c] : terms_)
      if (m.degree() <= deg) r.terms_[m] = c;
    return r;
  }

  bool near_equal(const Polynomial& o, double tol) const {
    Polynomial d = *this - o;
    return d.max_abs_coeff() <= tol;
  }

  // Copy with coefficients below eps dropped (recovery hygiene).
  Polynomial pruned(double eps) const {
    Polynomial r;
    for (auto& [m, c] : terms_)
      if (std::abs(c) > eps) r.terms_[m] = c;
    return r;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [m, c] : terms_) {
      if (!first) os << (c >= 0 ? " + " : " - ");
      else if (c < 0) os << "-";
      os << std::abs(c);
      if (!m.is_one()) os << "*" << m.str();
      first = false;
    }
    return os.str();
  }

 private:
  std::map<Monomial, double> terms_;
};

// All monomials over `vars` of total degree <= max_degree, in the global
// graded-lexicographic order. Length is C(n + d, d).
inline std::vector<Monomial> monomial_basis(const std::vector<VarId>& vars, int max_degree) {
  if (max_degree < 0) throw std::invalid_argument("monomial_basis: negative degree");
  std::vector<VarId> v = vars;
  std::sort(v.begin(), v.end());
  std::vector<Monomial> out;
  std::vector<int> exp(v.size(), 0);
  // enumerate exponent tuples recursively, then sort into grlex order
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int budget) {
    if (i == v.size()) {
      std::vector<std::pair<VarId, int>> e;
      for (std::size_t k = 0; k < v.size(); ++k)
        if (exp[k] > 0) e.emplace_back(v[k], exp[k]);
      out.emplace_back(e);
      return;
    }
    for (int d = 0; d <= budget; ++d) {
      exp[i] = d;
      rec(i + 1, budget - d);
    }
    exp[i] = 0;
  };
  rec(0, max_degree);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace funnelkit
