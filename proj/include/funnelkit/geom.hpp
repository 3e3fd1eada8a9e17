#pragma once

// Ellipsoid algebra (projection, shifted containment via the ellipsoid-in-
// ellipsoid LMI), convex polytopes, and support-function GJK distance
// queries producing the collision normals and distances the planner's
// QCQP consumes.

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "funnelkit/conic/problem.hpp"
#include "funnelkit/conic/sdp.hpp"

namespace funnelkit::geom {

struct Ellipsoid {
  Eigen::VectorXd center;
  Eigen::MatrixXd S;  // spd; { x : (x-c)' S (x-c) <= 1 }

  int dim() const { return static_cast<int>(center.size()); }

  double mahalanobis(const Eigen::VectorXd& x) const {
    Eigen::VectorXd d = x - center;
    return d.dot(S * d);
  }
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const {
    return mahalanobis(x) <= 1.0 + tol;
  }
  // farthest point in direction u (unit not required)
  Eigen::VectorXd support(const Eigen::VectorXd& u) const {
    Eigen::VectorXd w = S.ldlt().solve(u);
    double s = std::sqrt(u.dot(w));
    return center + w / s;
  }
  static Ellipsoid ball(const Eigen::VectorXd& c, double radius) {
    Ellipsoid e;
    e.center = c;
    e.S = Eigen::MatrixXd::Identity(c.size(), c.size()) / (radius * radius);
    return e;
  }
};

struct Polytope {
  // columns are vertices; convex position not required (hull is implicit)
  Eigen::MatrixXd vertices;

  int dim() const { return static_cast<int>(vertices.rows()); }
  Eigen::VectorXd support(const Eigen::VectorXd& u) const {
    Eigen::Index best = 0;
    (u.transpose() * vertices).maxCoeff(&best);
    return vertices.col(best);
  }
  static Polytope box2(double xlo, double xhi, double ylo, double yhi) {
    Polytope p;
    p.vertices.resize(2, 4);
    p.vertices << xlo, xhi, xhi, xlo, ylo, ylo, yhi, yhi;
    return p;
  }
};

// Tagged union of the planner's collision geometry. The hull of two
// ellipsoids covers one funnel segment between consecutive time samples;
// `inflate` applies a Minkowski sum with a ball of that radius (exact in
// support-function form).
struct ConvexBody {
  std::variant<Ellipsoid, Polytope, std::pair<Ellipsoid, Ellipsoid>> shape;
  double inflate = 0.0;

  static ConvexBody ellipsoid(Ellipsoid e, double r = 0.0) { return {std::move(e), r}; }
  static ConvexBody polytope(Polytope p, double r = 0.0) { return {std::move(p), r}; }
  static ConvexBody hull(Ellipsoid a, Ellipsoid b, double r = 0.0) {
    return {std::make_pair(std::move(a), std::move(b)), r};
  }

  int dim() const {
    if (auto* e = std::get_if<Ellipsoid>(&shape)) return e->dim();
    if (auto* p = std::get_if<Polytope>(&shape)) return p->dim();
    return std::get<std::pair<Ellipsoid, Ellipsoid>>(shape).first.dim();
  }

  Eigen::VectorXd support(const Eigen::VectorXd& u) const {
    Eigen::VectorXd s;
    if (auto* e = std::get_if<Ellipsoid>(&shape)) s = e->support(u);
    else if (auto* p = std::get_if<Polytope>(&shape)) s = p->support(u);
    else {
      auto& [a, b] = std::get<std::pair<Ellipsoid, Ellipsoid>>(shape);
      Eigen::VectorXd sa = a.support(u), sb = b.support(u);
      s = (u.dot(sa) >= u.dot(sb)) ? sa : sb;
    }
    if (inflate > 0.0) s += inflate * u.normalized();
    return s;
  }

  ConvexBody shifted(const Eigen::VectorXd& delta) const {
    ConvexBody out = *this;
    if (auto* e = std::get_if<Ellipsoid>(&out.shape)) e->center += delta;
    else if (auto* p = std::get_if<Polytope>(&out.shape)) p->vertices.colwise() += delta;
    else {
      auto& pr = std::get<std::pair<Ellipsoid, Ellipsoid>>(out.shape);
      pr.first.center += delta;
      pr.second.center += delta;
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// project_ellipsoid: image of an ellipsoid under a full-row-rank linear map.
// shape' = (P S^-1 P')^-1, center' = P c.
// ---------------------------------------------------------------------------
inline Ellipsoid project_ellipsoid(const Ellipsoid& e, const Eigen::MatrixXd& P) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
  if (svd.rank() < P.rows()) throw std::invalid_argument("project_ellipsoid: P is rank-deficient");
  Ellipsoid out;
  out.center = P * e.center;
  Eigen::MatrixXd Sinv = e.S.ldlt().solve(Eigen::MatrixXd::Identity(e.dim(), e.dim()));
  Eigen::MatrixXd M = P * Sinv * P.transpose();
  out.S = M.ldlt().solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
  out.S = 0.5 * (out.S + out.S.transpose().eval());
  return out;
}

// Projection onto a coordinate subset.
inline Ellipsoid project_ellipsoid(const Ellipsoid& e, const std::vector<int>& coords) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<int>(coords.size()), e.dim());
  for (std::size_t i = 0; i < coords.size(); ++i) P(static_cast<int>(i), coords[i]) = 1.0;
  return project_ellipsoid(e, P);
}

// ---------------------------------------------------------------------------
// contains_shifted: find a shift d supported on free_dims with
// (E_in + d) inside E_out, by the matrix semidefiniteness condition for an
// affine image of the unit ball inside a quadratic-form ellipsoid. Solved
// as a max-margin SDP so the verdict is robust near the boundary.
// ---------------------------------------------------------------------------
struct ContainsResult {
  bool feasible = false;
  Eigen::VectorXd shift;   // zero outside free_dims
  double lambda = 0.0;     // S-procedure multiplier
  double margin = 0.0;     // smallest eigenvalue of the certificate matrix
};

inline ContainsResult contains_shifted(const Ellipsoid& outer, const Ellipsoid& inner,
                                       const std::vector<int>& free_dims,
                                       double tol = 1e-8) {
  const int n = outer.dim();
  if (inner.dim() != n) throw std::invalid_argument("contains_shifted: dim mismatch");
  ContainsResult out;
  out.shift = Eigen::VectorXd::Zero(n);

  // B with B B' = S_in^-1  (inner ellipsoid as image of the unit ball)
  Eigen::LLT<Eigen::MatrixXd> llt_in(inner.S);
  if (llt_in.info() != Eigen::Success)
    throw std::invalid_argument("contains_shifted: inner shape not spd");
  Eigen::MatrixXd B = Eigen::MatrixXd(llt_in.matrixL())
                          .triangularView<Eigen::Lower>()
                          .solve(Eigen::MatrixXd::Identity(n, n))
                          .transpose();
  Eigen::MatrixXd So_inv = outer.S.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
  So_inv = 0.5 * (So_inv + So_inv.transpose().eval());

  // M(lambda, delta) = [ 1-lambda , 0      , e'      ]
  //                    [ 0        , lam*I  , B'      ]
  //                    [ e        , B      , So_inv  ]   with e = c_in + delta - c_out
  const int nm = 2 * n + 1;
  conic::SdpProblem prob;
  int Y = prob.add_block(nm);
  int lam = prob.add_block(1);
  int nfree = static_cast<int>(free_dims.size());
  int d0 = prob.add_free(nfree + 1);  // shifts + margin s
  int s_idx = d0 + nfree;
  prob.c_free = Eigen::VectorXd::Zero(nfree + 1);
  prob.c_free[s_idx] = -1.0;  // maximize margin

  Eigen::VectorXd e0 = inner.center - outer.center;
  for (int j = 0; j < nm; ++j)
    for (int i = 0; i <= j; ++i) {
      conic::SdpProblem::Row row;
      conic::SdpProblem::row_add_entry(row, Y, i, j, 1.0);
      if (i == j) row.free_terms.emplace_back(s_idx, 1.0);  // Y + sI = M
      double m0 = 0.0;
      if (i == 0 && j == 0) {
        m0 = 1.0;
        conic::SdpProblem::row_add_entry(row, lam, 0, 0, 1.0);  // ... = 1 - lambda
      } else if (i == 0 && j >= n + 1) {
        int col = j - (n + 1);
        m0 = e0[col];
        for (int f = 0; f < nfree; ++f)
          if (free_dims[f] == col) row.free_terms.emplace_back(d0 + f, -1.0);
      } else if (i >= 1 && i <= n && j >= 1 && j <= n) {
        if (i == j) conic::SdpProblem::row_add_entry(row, lam, 0, 0, -1.0);
        m0 = 0.0;
      } else if (i >= 1 && i <= n && j >= n + 1) {
        m0 = B(j - (n + 1), i - 1);  // lower-left block is B
      } else if (i >= n + 1 && j >= n + 1) {
        m0 = So_inv(i - (n + 1), j - (n + 1));
      }
      row.rhs = m0;
      prob.rows.push_back(std::move(row));
    }

  conic::SolveOptions opts;
  opts.tol = 1e-9;
  auto sol = conic::solve_sdp(prob, opts);
  if (sol.status == conic::SolveStatus::Infeasible) return out;  // cannot happen: s unbounded below
  double s = sol.free_vals[s_idx];
  out.margin = s;
  out.lambda = sol.X[lam](0, 0);
  if (sol.status != conic::SolveStatus::Optimal && sol.status != conic::SolveStatus::MaxIter)
    return out;
  if (s < -tol) return out;
  for (int f = 0; f < nfree; ++f) out.shift[free_dims[f]] = sol.free_vals[d0 + f];
  out.feasible = true;
  return out;
}

// Plain containment test (no shift allowed).
inline bool contains(const Ellipsoid& outer, const Ellipsoid& inner, double tol = 1e-8) {
  return contains_shifted(outer, inner, {}, tol).feasible;
}

// ---------------------------------------------------------------------------
// GJK distance between convex bodies in the plane, with witness points.
// ---------------------------------------------------------------------------
struct CollisionResult {
  bool intersecting = false;
  double distance = 0.0;         // > 0 when separated
  Eigen::Vector2d normal;        // unit, from body witness toward obstacle witness
  Eigen::Vector2d witness_body;
  Eigen::Vector2d witness_obs;
};

namespace detail {

struct SimplexVertex {
  Eigen::Vector2d v;  // point in the Minkowski difference A - B
  Eigen::Vector2d a, b;
};

// closest point to origin on a segment, with barycentric weight of q
inline double segment_param(const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
  Eigen::Vector2d d = q - p;
  double dd = d.squaredNorm();
  if (dd < 1e-300) return 0.0;
  return std::min(1.0, std::max(0.0, -p.dot(d) / dd));
}

}  // namespace detail

inline CollisionResult collision_query(const ConvexBody& body, const ConvexBody& obs) {
  if (body.dim() != 2 || obs.dim() != 2)
    throw std::invalid_argument("collision_query: planar bodies expected");
  CollisionResult res;
  auto support_md = [&](const Eigen::Vector2d& u, detail::SimplexVertex& out) {
    Eigen::VectorXd sa = body.support(u);
    Eigen::VectorXd sb = obs.support(-u);
    out.a = sa;
    out.b = sb;
    out.v = out.a - out.b;
  };

  std::vector<detail::SimplexVertex> simplex;
  detail::SimplexVertex w;
  support_md(Eigen::Vector2d(1, 0), w);
  simplex.push_back(w);
  Eigen::Vector2d v = w.v;
  double lam0 = 1.0, lam1 = 0.0;  // barycentric weights over simplex

  const int kMaxIter = 200;
  for (int it = 0; it < kMaxIter; ++it) {
    double vnorm = v.norm();
    if (vnorm < 1e-12) {
      res.intersecting = true;
      return res;
    }
    support_md(-v / vnorm, w);
    // termination: no support progress toward the origin
    double gain = (w.v - v).dot(v / vnorm);
    if (gain > -1e-12 * std::max(1.0, vnorm)) break;
    simplex.push_back(w);

    if (simplex.size() == 2) {
      double t = detail::segment_param(simplex[0].v, simplex[1].v);
      if (t >= 1.0 - 1e-15) {
        simplex.erase(simplex.begin());
        lam0 = 1.0;
        v = simplex[0].v;
      } else {
        lam0 = 1.0 - t;
        lam1 = t;
        v = (1 - t) * simplex[0].v + t * simplex[1].v;
      }
    } else {
      // triangle: check if origin inside, else keep the best edge
      const Eigen::Vector2d &A = simplex[0].v, &Bv = simplex[1].v, &C = simplex[2].v;
      double d1 = (Bv - A).x() * (-A).y() - (Bv - A).y() * (-A).x();
      double d2 = (C - Bv).x() * (-Bv).y() - (C - Bv).y() * (-Bv).x();
      double d3 = (A - C).x() * (-C).y() - (A - C).y() * (-C).x();
      bool neg = d1 < 0 || d2 < 0 || d3 < 0, pos = d1 > 0 || d2 > 0 || d3 > 0;
      if (!(neg && pos)) {
        res.intersecting = true;
        return res;
      }
      // evaluate both edges touching the new vertex C
      double tAC = detail::segment_param(A, C);
      double tBC = detail::segment_param(Bv, C);
      Eigen::Vector2d pAC = (1 - tAC) * A + tAC * C;
      Eigen::Vector2d pBC = (1 - tBC) * Bv + tBC * C;
      if (pAC.squaredNorm() <= pBC.squaredNorm()) {
        simplex.erase(simplex.begin() + 1);
        lam0 = 1 - tAC;
        lam1 = tAC;
        v = pAC;
      } else {
        simplex.erase(simplex.begin());
        lam0 = 1 - tBC;
        lam1 = tBC;
        v = pBC;
      }
      if (simplex.size() == 2 && lam1 >= 1.0 - 1e-15) {
        simplex.erase(simplex.begin());
        lam0 = 1.0;
        v = simplex[0].v;
      }
    }
  }

  double d = v.norm();
  if (d < 1e-10) {
    res.intersecting = true;
    return res;
  }
  res.distance = d;
  if (simplex.size() == 1) {
    res.witness_body = simplex[0].a;
    res.witness_obs = simplex[0].b;
  } else {
    res.witness_body = lam0 * simplex[0].a + lam1 * simplex[1].a;
    res.witness_obs = lam0 * simplex[0].b + lam1 * simplex[1].b;
  }
  res.normal = (res.witness_obs - res.witness_body).normalized();
  return res;
}

// ---------------------------------------------------------------------------
// bounding_box: tight axis-aligned bounds from the support function.
// ---------------------------------------------------------------------------
struct Box {
  Eigen::VectorXd lo, hi;
};

inline Box bounding_box(const ConvexBody& body) {
  const int n = body.dim();
  Box box;
  box.lo.resize(n);
  box.hi.resize(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    u[i] = 1.0;
    box.hi[i] = body.support(u)[i];
    u[i] = -1.0;
    box.lo[i] = body.support(u)[i];
  }
  return box;
}

inline Box bounding_box(const Ellipsoid& e, double inflate = 0.0) {
  return bounding_box(ConvexBody::ellipsoid(e, inflate));
}

}  // namespace funnelkit::geom
