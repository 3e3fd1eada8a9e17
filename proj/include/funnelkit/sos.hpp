#pragma once

// Sums-of-squares programming layer: polynomial templates whose
// coefficients are decision variables, SOS constraints compiled to
// coefficient-matching SDP equalities against Gram matrices, and the
// generalized S-procedure for implications over semialgebraic sets.
//
// Bilinear products of two decision polynomials are rejected at
// construction time; alternation schemes must fix one side.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "funnelkit/conic/maxdet.hpp"
#include "funnelkit/conic/problem.hpp"
#include "funnelkit/conic/sdp.hpp"
#include "funnelkit/poly.hpp"

namespace funnelkit::sos {

struct BilinearError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Affine function of decision scalars.
struct AffExpr {
  double c = 0.0;
  std::vector<std::pair<int, double>> lin;  // sorted by id, coalesced

  AffExpr() = default;
  /* implicit */ AffExpr(double constant) : c(constant) {}
  static AffExpr variable(int id, double coeff = 1.0) {
    AffExpr e;
    if (coeff != 0.0) e.lin.emplace_back(id, coeff);
    return e;
  }
  bool is_constant() const { return lin.empty(); }

  AffExpr& operator+=(const AffExpr& o) {
    c += o.c;
    std::vector<std::pair<int, double>> merged;
    merged.reserve(lin.size() + o.lin.size());
    std::size_t i = 0, j = 0;
    while (i < lin.size() || j < o.lin.size()) {
      if (j == o.lin.size() || (i < lin.size() && lin[i].first < o.lin[j].first))
        merged.push_back(lin[i++]);
      else if (i == lin.size() || o.lin[j].first < lin[i].first)
        merged.push_back(o.lin[j++]);
      else {
        double v = lin[i].second + o.lin[j].second;
        if (std::abs(v) > 1e-300) merged.emplace_back(lin[i].first, v);
        ++i, ++j;
      }
    }
    lin = std::move(merged);
    return *this;
  }
  AffExpr operator+(const AffExpr& o) const { AffExpr r = *this; r += o; return r; }
  AffExpr operator-(const AffExpr& o) const { return *this + o * -1.0; }
  AffExpr operator*(double s) const {
    AffExpr r;
    r.c = c * s;
    if (s != 0.0)
      for (auto& [id, v] : lin) r.lin.emplace_back(id, v * s);
    return r;
  }
  friend AffExpr operator*(double s, const AffExpr& e) { return e * s; }
};

// Polynomial with affine-in-decision coefficients.
class DecPoly {
 public:
  DecPoly() = default;
  /* implicit */ DecPoly(const Polynomial& p, std::string label = "") : label_(std::move(label)) {
    for (auto& [m, c] : p.terms()) terms_[m] = AffExpr(c);
  }
  /* implicit */ DecPoly(double c) { if (c != 0.0) terms_[Monomial::one()] = AffExpr(c); }
  DecPoly(const Monomial& m, AffExpr a, std::string label = "") : label_(std::move(label)) {
    terms_[m] = std::move(a);
  }

  const std::map<Monomial, AffExpr>& terms() const { return terms_; }
  const std::string& label() const { return label_; }
  void set_label(std::string l) { label_ = std::move(l); }

  bool is_constant_poly() const {
    for (auto& [m, a] : terms_)
      if (!a.is_constant()) return false;
    return true;
  }

  void add_term(const Monomial& m, const AffExpr& a) {
    auto it = terms_.find(m);
    if (it == terms_.end()) terms_[m] = a;
    else it->second += a;
  }

  DecPoly& operator+=(const DecPoly& o) {
    for (auto& [m, a] : o.terms_) add_term(m, a);
    return *this;
  }
  DecPoly operator+(const DecPoly& o) const { DecPoly r = *this; r += o; return r; }
  DecPoly operator-(const DecPoly& o) const { DecPoly r = *this; r += o * -1.0; return r; }
  DecPoly operator*(double s) const {
    DecPoly r;
    r.label_ = label_;
    for (auto& [m, a] : terms_) r.terms_[m] = a * s;
    return r;
  }
  friend DecPoly operator*(double s, const DecPoly& p) { return p * s; }

  // product with a fixed polynomial; decision x decision is rejected
  DecPoly operator*(const DecPoly& o) const {
    const DecPoly* fixed = nullptr;
    const DecPoly* dec = nullptr;
    if (o.is_constant_poly()) { fixed = &o; dec = this; }
    else if (is_constant_poly()) { fixed = this; dec = &o; }
    else
      throw BilinearError("bilinear product of decision polynomials '" +
                          (label_.empty() ? std::string("?") : label_) + "' and '" +
                          (o.label_.empty() ? std::string("?") : o.label_) + "'");
    DecPoly r;
    for (auto& [mf, af] : fixed->terms_)
      for (auto& [md, ad] : dec->terms_) r.add_term(mf * md, ad * af.c);
    return r;
  }
  DecPoly operator*(const Polynomial& p) const { return *this * DecPoly(p); }

  DecPoly differentiate(VarId v) const {
    DecPoly r;
    r.label_ = label_;
    for (auto& [m, a] : terms_) {
      int e = m.degree_of(v);
      if (e == 0) continue;
      std::vector<std::pair<VarId, int>> ne;
      for (auto& [w, d] : m.exponents())
        if (w != v) ne.emplace_back(w, d);
        else if (d > 1) ne.emplace_back(w, d - 1);
      r.add_term(Monomial(ne), a * static_cast<double>(e));
    }
    return r;
  }

  DecPoly substitute(VarId v, double value) const {
    DecPoly r;
    r.label_ = label_;
    for (auto& [m, a] : terms_) {
      int e = m.degree_of(v);
      std::vector<std::pair<VarId, int>> ne;
      for (auto& [w, d] : m.exponents())
        if (w != v) ne.emplace_back(w, d);
      r.add_term(Monomial(ne), a * std::pow(value, e));
    }
    return r;
  }

  Polynomial to_polynomial() const {
    Polynomial p;
    for (auto& [m, a] : terms_) {
      if (!a.is_constant()) throw std::logic_error("DecPoly::to_polynomial: has decision terms");
      p.add_term(m, a.c);
    }
    return p;
  }

  int degree() const {
    int d = 0;
    for (auto& [m, a] : terms_) d = std::max(d, m.degree());
    return d;
  }

 private:
  std::map<Monomial, AffExpr> terms_;
  std::string label_;
};

struct MatVar {
  int id = -1;
  int dim = 0;
};

struct SosCertificate {
  std::vector<Monomial> basis;
  Eigen::MatrixXd Q;
  double residual = 0.0;
};

// Gram basis selection: total and per-variable degree bounds followed by
// the classic diagonal-consistency prune (a basis monomial whose square is
// neither in the support nor reachable as a cross product must have zero
// Gram diagonal, hence zero row/column).
inline std::vector<Monomial> gram_basis_for(const std::set<Monomial>& support) {
  std::set<VarId> varset;
  int maxdeg = 0;
  std::map<VarId, int> maxvar;
  for (auto& m : support) {
    maxdeg = std::max(maxdeg, m.degree());
    for (auto& [v, e] : m.exponents()) {
      varset.insert(v);
      maxvar[v] = std::max(maxvar[v], e);
    }
  }
  const int half = maxdeg / 2;
  std::vector<VarId> vars(varset.begin(), varset.end());
  std::vector<Monomial> cand = monomial_basis(vars, half);
  std::vector<Monomial> basis;
  for (auto& m : cand) {
    bool ok = true;
    for (auto& [v, e] : m.exponents())
      if (2 * e > maxvar[v]) { ok = false; break; }
    if (ok) basis.push_back(m);
  }
  // iterative prune
  bool changed = true;
  while (changed) {
    changed = false;
    std::set<Monomial> squares_reachable;
    for (std::size_t a = 0; a < basis.size(); ++a)
      for (std::size_t b = a + 1; b < basis.size(); ++b)
        squares_reachable.insert(basis[a] * basis[b]);
    std::vector<Monomial> kept;
    for (auto& m : basis) {
      Monomial sq = m * m;
      if (support.count(sq) || squares_reachable.count(sq)) kept.push_back(m);
      else changed = true;
    }
    basis = std::move(kept);
  }
  return basis;
}

class Program {
 public:
  // --- decision variables -------------------------------------------------
  int add_scalar(const std::string& name) {
    scalars_.push_back({Scalar::Free, -1, -1, -1, name});
    return static_cast<int>(scalars_.size()) - 1;
  }

  MatVar add_psd_matrix(int dim, const std::string& name, double logdet_weight = 0.0) {
    MatVar mv;
    mv.id = static_cast<int>(matvars_.size());
    mv.dim = dim;
    matvars_.push_back({dim, logdet_weight, name, {}});
    auto& entries = matvars_.back().entry_scalar;
    entries.resize(conic::svec_len(dim));
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i <= j; ++i) {
        scalars_.push_back({Scalar::MatEntry, mv.id, i, j, name});
        entries[conic::svec_index(i, j)] = static_cast<int>(scalars_.size()) - 1;
      }
    return mv;
  }

  AffExpr entry(const MatVar& mv, int i, int j) const {
    if (i > j) std::swap(i, j);
    return AffExpr::variable(matvars_[mv.id].entry_scalar[conic::svec_index(i, j)]);
  }

  // x' P x over the given linear monomials (one per matrix row/column)
  DecPoly quad_form(const MatVar& mv, const std::vector<Monomial>& lin) const {
    if (static_cast<int>(lin.size()) != mv.dim)
      throw std::invalid_argument("quad_form: basis size != matrix dim");
    DecPoly r;
    r.set_label(matvars_[mv.id].name);
    for (int j = 0; j < mv.dim; ++j)
      for (int i = 0; i <= j; ++i)
        r.add_term(lin[i] * lin[j], entry(mv, i, j) * (i == j ? 1.0 : 2.0));
    return r;
  }

  // free polynomial template over an explicit monomial basis
  DecPoly add_free_poly(const std::vector<Monomial>& basis, const std::string& name) {
    DecPoly p;
    p.set_label(name);
    for (auto& m : basis)
      p.add_term(m, AffExpr::variable(add_scalar(name + "[" + m.str() + "]")));
    return p;
  }

  // SOS-constrained polynomial, parameterized directly by its Gram matrix
  DecPoly add_sos_poly(const std::vector<Monomial>& gram_basis, const std::string& name) {
    MatVar Q = add_psd_matrix(static_cast<int>(gram_basis.size()), name);
    sos_poly_grams_.push_back(Q.id);
    return quad_form(Q, gram_basis);
  }

  // --- constraints ---------------------------------------------------------
  int require_sos(const DecPoly& expr, const std::string& name) {
    sos_constraints_.push_back({expr, name});
    return static_cast<int>(sos_constraints_.size()) - 1;
  }
  void require_eq(const AffExpr& e) { eqs_.push_back(e); }
  void require_eq_poly(const DecPoly& p) {
    for (auto& [m, a] : p.terms()) eqs_.push_back(a);
  }

  // --- objective -----------------------------------------------------------
  void minimize(const AffExpr& obj) { objective_ = obj; }
  void maximize_logdet(const MatVar& mv, double w) { matvars_[mv.id].logdet += w; }

  // --- compile -------------------------------------------------------------
  struct Compiled {
    conic::SdpProblem sdp;
    // recovery data
    struct ScalarLoc {
      bool free = true;
      int free_idx = -1;
      int block = -1, i = -1, j = -1;
    };
    std::vector<ScalarLoc> scalar_loc;
    std::vector<int> matvar_block;              // matvar id -> sdp block
    std::vector<int> gram_block;                // sos constraint -> sdp block
    std::vector<std::vector<Monomial>> gram_basis;
    std::vector<DecPoly> sos_exprs;

    double scalar_value(const conic::SdpSolution& s, int id) const {
      const auto& loc = scalar_loc[id];
      if (loc.free) return s.free_vals[loc.free_idx];
      return s.X[loc.block](loc.i, loc.j);
    }
    double aff_value(const conic::SdpSolution& s, const AffExpr& a) const {
      double v = a.c;
      for (auto& [id, coef] : a.lin) v += coef * scalar_value(s, id);
      return v;
    }
    Polynomial poly_value(const conic::SdpSolution& s, const DecPoly& p) const {
      Polynomial out;
      for (auto& [m, a] : p.terms()) out.add_term(m, aff_value(s, a));
      return out;
    }
    Eigen::MatrixXd matrix_value(const conic::SdpSolution& s, const MatVar& mv) const {
      return s.X[matvar_block[mv.id]];
    }
    // Gram certificate for an SOS constraint, with residual check
    SosCertificate certificate(const conic::SdpSolution& s, int sos_idx) const {
      if (sos_idx < 0 || sos_idx >= static_cast<int>(gram_block.size()))
        throw std::out_of_range("certificate: no such SOS constraint");
      SosCertificate cert;
      cert.basis = gram_basis[sos_idx];
      Eigen::MatrixXd Q = s.X[gram_block[sos_idx]];
      // clamp tiny negative eigenvalues
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
      Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);
      cert.Q = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
      Polynomial reconstructed;
      for (std::size_t a = 0; a < cert.basis.size(); ++a)
        for (std::size_t b = 0; b < cert.basis.size(); ++b)
          reconstructed.add_term(cert.basis[a] * cert.basis[b],
                                 cert.Q(static_cast<int>(a), static_cast<int>(b)));
      Polynomial target = poly_value(s, sos_exprs[sos_idx]);
      cert.residual = (target - reconstructed).max_abs_coeff();
      return cert;
    }
  };

  Compiled compile() const {
    Compiled out;
    auto& sdp = out.sdp;
    out.scalar_loc.resize(scalars_.size());
    out.matvar_block.resize(matvars_.size(), -1);

    // matrix variables become sdp blocks
    for (std::size_t v = 0; v < matvars_.size(); ++v) {
      int blk = sdp.add_block(matvars_[v].dim, matvars_[v].logdet);
      out.matvar_block[v] = blk;
    }
    // free scalars
    int nfree = 0;
    for (std::size_t i = 0; i < scalars_.size(); ++i) {
      if (scalars_[i].kind == Scalar::Free) {
        out.scalar_loc[i] = {true, nfree++, -1, -1, -1};
      } else {
        out.scalar_loc[i] = {false, -1, out.matvar_block[scalars_[i].matvar], scalars_[i].i,
                             scalars_[i].j};
      }
    }
    sdp.add_free(nfree);

    auto add_aff_to_row = [&](conic::SdpProblem::Row& row, const AffExpr& a, double scale) {
      row.rhs -= scale * a.c;
      for (auto& [id, coef] : a.lin) {
        const auto& loc = out.scalar_loc[id];
        if (loc.free) row.free_terms.emplace_back(loc.free_idx, scale * coef);
        else conic::SdpProblem::row_add_entry(row, loc.block, loc.i, loc.j, scale * coef);
      }
    };

    // SOS constraints: gram block + coefficient matching
    for (std::size_t k = 0; k < sos_constraints_.size(); ++k) {
      const auto& [expr, name] = sos_constraints_[k];
      std::set<Monomial> support;
      for (auto& [m, a] : expr.terms()) support.insert(m);
      // odd-degree guard: a nonconstant coefficient might vanish at the
      // optimum, but a fixed top-degree odd term can never be SOS
      std::vector<Monomial> basis = gram_basis_for(support);
      out.gram_basis.push_back(basis);
      out.sos_exprs.push_back(expr);
      int gblk = sdp.add_block(std::max<int>(1, static_cast<int>(basis.size())));
      out.gram_block.push_back(gblk);

      // all product monomials
      std::map<Monomial, std::vector<std::tuple<int, int, double>>> products;
      for (std::size_t a = 0; a < basis.size(); ++a)
        for (std::size_t b = a; b < basis.size(); ++b)
          products[basis[a] * basis[b]].emplace_back(static_cast<int>(a), static_cast<int>(b),
                                                     a == b ? 1.0 : 2.0);
      std::set<Monomial> all_monos = support;
      for (auto& [m, v] : products) all_monos.insert(m);

      for (auto& mono : all_monos) {
        conic::SdpProblem::Row row;
        auto it = expr.terms().find(mono);
        if (it != expr.terms().end()) add_aff_to_row(row, it->second, 1.0);
        auto pit = products.find(mono);
        if (pit != products.end())
          for (auto& [a, b, mult] : pit->second)
            conic::SdpProblem::row_add_entry(row, gblk, a, b, -mult);
        // structurally-zero rows carry no information; anything else stays,
        // including inconsistent "0 = c" rows, which surface as infeasibility
        if (row.mat.empty() && row.free_terms.empty() && std::abs(row.rhs) < 1e-13) continue;
        sdp.rows.push_back(std::move(row));
      }
    }

    // plain equalities
    for (auto& e : eqs_) {
      conic::SdpProblem::Row row;
      add_aff_to_row(row, e, 1.0);
      sdp.rows.push_back(std::move(row));
    }

    // objective
    sdp.c_free = Eigen::VectorXd::Zero(nfree);
    sdp.cost_const = objective_.c;
    for (auto& [id, coef] : objective_.lin) {
      const auto& loc = out.scalar_loc[id];
      if (loc.free) sdp.c_free[loc.free_idx] += coef;
      else {
        double half = (loc.i == loc.j) ? coef : coef / 2.0;
        sdp.C[loc.block](loc.i, loc.j) += half;
        if (loc.i != loc.j) sdp.C[loc.block](loc.j, loc.i) += half;
      }
    }
    return out;
  }

  int num_scalars() const { return static_cast<int>(scalars_.size()); }

 private:
  struct Scalar {
    enum Kind { Free, MatEntry } kind;
    int matvar, i, j;
    std::string name;
  };
  struct MatVarInfo {
    int dim;
    double logdet;
    std::string name;
    std::vector<int> entry_scalar;
  };
  std::vector<Scalar> scalars_;
  std::vector<MatVarInfo> matvars_;
  std::vector<int> sos_poly_grams_;
  std::vector<std::pair<DecPoly, std::string>> sos_constraints_;
  std::vector<AffExpr> eqs_;
  AffExpr objective_;
};

// ---------------------------------------------------------------------------
// check_sos: solves  min t  s.t.  Y = Q + tI psd, <A_a, Q> = p_a.
// t* < 0 certifies SOS with margin; t* > 0 is a robust rejection.
// ---------------------------------------------------------------------------
enum class SosVerdict { Sos, NotSos, Indeterminate };

struct SosCheckResult {
  SosVerdict verdict = SosVerdict::Indeterminate;
  SosCertificate cert;  // valid when verdict == Sos
  double t_star = 0.0;  // min eigenvalue shift needed
};

inline SosCheckResult check_sos(const Polynomial& p_in, double tol = 1e-8) {
  SosCheckResult out;
  // structural decisions ignore numerically insignificant coefficients;
  // the final residual is still validated against the full input
  Polynomial p = p_in.pruned(0.1 * tol * std::max(1.0, p_in.max_abs_coeff()));
  if (p.is_zero()) {
    out.verdict = SosVerdict::Sos;
    out.cert.basis = {Monomial::one()};
    out.cert.Q = Eigen::MatrixXd::Zero(1, 1);
    return out;
  }
  if (p.degree() % 2 != 0) {
    out.verdict = SosVerdict::NotSos;
    return out;
  }
  std::set<Monomial> support;
  for (auto& [m, c] : p.terms()) support.insert(m);
  std::vector<Monomial> basis = gram_basis_for(support);
  const int n = static_cast<int>(basis.size());
  if (n == 0) {
    out.verdict = SosVerdict::NotSos;  // nothing can represent the support
    return out;
  }

  std::map<Monomial, std::vector<std::tuple<int, int, double>>> products;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      products[basis[a] * basis[b]].emplace_back(a, b, a == b ? 1.0 : 2.0);

  // consistency: every significant support monomial must be reachable;
  // numerically tiny strays are left to the final residual check
  double scale0 = p.max_abs_coeff();
  for (auto& m : support)
    if (!products.count(m) && std::abs(p.coeff(m)) > tol * std::max(1.0, scale0)) {
      out.verdict = SosVerdict::NotSos;
      return out;
    }

  conic::SdpProblem prob;
  int blk = prob.add_block(n);
  int tf = prob.add_free(1);
  prob.c_free = Eigen::VectorXd::Zero(1);
  prob.c_free[0] = 1.0;
  double scale = p.max_abs_coeff();
  for (auto& [mono, pairs] : products) {
    conic::SdpProblem::Row row;
    double diag_count = 0;
    for (auto& [a, b, mult] : pairs) {
      conic::SdpProblem::row_add_entry(row, blk, a, b, mult);
      if (a == b) diag_count += 1.0;
    }
    if (diag_count > 0) row.free_terms.emplace_back(tf, -diag_count);
    row.rhs = p.coeff(mono) / scale;
    prob.rows.push_back(std::move(row));
  }

  conic::SolveOptions opts;
  opts.tol = std::min(1e-9, tol);
  auto sol = conic::solve_sdp(prob, opts);
  if (sol.status == conic::SolveStatus::Infeasible ||
      sol.status == conic::SolveStatus::Unbounded) {
    out.verdict = SosVerdict::NotSos;
    return out;
  }
  // On MaxIter the final iterate is still examined: the certificate check
  // below is what actually decides a Sos verdict.
  bool clean = sol.status == conic::SolveStatus::Optimal;
  double t = sol.free_vals[0] * scale;
  out.t_star = t;
  if (t > std::max(tol, 1e-7) * std::max(1.0, scale)) {
    out.verdict = clean ? SosVerdict::NotSos : SosVerdict::Indeterminate;
    return out;
  }
  // recover Q = Y - tI; only lift eigenvalues that dip barely below zero,
  // a hard projection would break the coefficient equalities
  Eigen::MatrixXd Q = sol.X[0] * scale;
  Q.diagonal().array() -= t;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    double lo = es.eigenvalues().minCoeff();
    if (lo < 0) {
      Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);
      Q = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    }
  }
  Polynomial rec;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) rec.add_term(basis[a] * basis[b], Q(a, b));
  double residual = (p_in - rec).max_abs_coeff();
  if (residual <= tol * std::max(1.0, scale)) {
    out.verdict = SosVerdict::Sos;
    out.cert = {basis, Q, residual};
  } else {
    out.verdict = t < 0 ? SosVerdict::Indeterminate : SosVerdict::NotSos;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generalized S-procedure: to certify
//     g_eq = 0, g_ineq >= 0  =>  p >= 0
// emit  p - sum L_eq g_eq - sum L_ineq g_ineq  is SOS, with L_ineq SOS and
// L_eq free. Returns the residual expression; the caller adds require_sos.
// ---------------------------------------------------------------------------
struct SProcedureFragment {
  DecPoly residual;
  std::vector<DecPoly> eq_multipliers;
  std::vector<DecPoly> ineq_multipliers;
};

inline SProcedureFragment s_procedure(Program& prog, const DecPoly& p,
                                      const std::vector<Polynomial>& eqs,
                                      const std::vector<Polynomial>& ineqs,
                                      const std::vector<int>& eq_degrees,
                                      const std::vector<int>& ineq_degrees,
                                      const std::string& name) {
  if (eqs.size() != eq_degrees.size() || ineqs.size() != ineq_degrees.size())
    throw std::invalid_argument("s_procedure: degree list size mismatch");
  // variables appearing anywhere
  std::set<VarId> varset;
  auto collect = [&](const Polynomial& q) {
    for (auto v : q.variables()) varset.insert(v);
  };
  for (auto& [m, a] : p.terms())
    for (auto& [v, e] : m.exponents()) varset.insert(v);
  for (auto& q : eqs) collect(q);
  for (auto& q : ineqs) collect(q);
  std::vector<VarId> vars(varset.begin(), varset.end());

  SProcedureFragment frag;
  frag.residual = p;
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    DecPoly L = prog.add_free_poly(monomial_basis(vars, eq_degrees[i]),
                                   name + ".Leq" + std::to_string(i));
    frag.residual += L * eqs[i] * -1.0;
    frag.eq_multipliers.push_back(L);
  }
  for (std::size_t i = 0; i < ineqs.size(); ++i) {
    int half = ineq_degrees[i] / 2;
    DecPoly L = prog.add_sos_poly(monomial_basis(vars, half),
                                  name + ".Lineq" + std::to_string(i));
    frag.residual += L * ineqs[i] * -1.0;
    frag.ineq_multipliers.push_back(L);
  }
  // degree-mismatch guard: an odd-degree fixed top term can never be part
  // of an SOS identity and no decision coefficient can cancel it
  int maxdeg = frag.residual.degree();
  if (maxdeg % 2 != 0) {
    for (auto& [m, a] : frag.residual.terms())
      if (m.degree() == maxdeg && a.is_constant() && std::abs(a.c) > 1e-12)
        throw std::invalid_argument("s_procedure: " + name +
                                    ": odd-degree fixed term " + m.str() +
                                    "; adjust multiplier degrees");
  }
  return frag;
}

}  // namespace funnelkit::sos
