#pragma once

// Log-barrier Newton solver for the small convex QCQPs used when shifting
// funnels: one ellipsoidal constraint, a handful of halfspaces, and a
// convex quadratic objective, in <= 4 or so dimensions.

#include <limits>

#include <Eigen/Dense>

namespace funnelkit::conic {

struct QcqpProblem {
  int dim = 0;
  // (x - center)' S (x - center) <= 1,  S spd
  Eigen::MatrixXd S;
  Eigen::VectorXd center;
  // lin_normals * x <= lin_rhs, row-wise
  Eigen::MatrixXd lin_normals;
  Eigen::VectorXd lin_rhs;
  // objective 0.5 x'Hx + g'x, H psd
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
};

struct QcqpResult {
  bool feasible = false;
  Eigen::VectorXd x;
  double obj = 0.0;
};

namespace detail {

// Minimizes t*f0 + barrier over the constraint functions, Newton with
// backtracking. Constraints are given as value/gradient/hessian callbacks.
struct QcqpConstraint {
  // returns value; fills grad and hess
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)> eval;
};

inline Eigen::VectorXd barrier_minimize(
    int dim, const std::vector<QcqpConstraint>& cons,
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>& obj,
    Eigen::VectorXd x, double tol) {
  double t = 1.0;
  const double mu_factor = 12.0;
  const int n_cons = static_cast<int>(cons.size());
  Eigen::VectorXd grad(dim), cg(dim);
  Eigen::MatrixXd hess(dim, dim), ch(dim, dim);
  while (true) {
    for (int it = 0; it < 60; ++it) {
      double f = t * obj(x, grad, hess);
      grad *= t;
      hess *= t;
      bool interior = true;
      for (auto& c : cons) {
        double v = c.eval(x, cg, ch);
        if (v >= 0) { interior = false; break; }
        f += -std::log(-v);
        grad += cg / (-v);
        hess += (cg * cg.transpose()) / (v * v) + ch / (-v);
      }
      if (!interior) break;  // should not happen; bail to outer loop
      Eigen::LLT<Eigen::MatrixXd> llt(hess + 1e-12 * Eigen::MatrixXd::Identity(dim, dim));
      Eigen::VectorXd dx = -llt.solve(grad);
      double decrement = -grad.dot(dx);
      if (decrement / 2 <= 1e-12) break;
      double alpha = 1.0;
      for (int ls = 0; ls < 50; ++ls) {
        Eigen::VectorXd xt = x + alpha * dx;
        bool ok = true;
        Eigen::VectorXd dummyg(dim);
        Eigen::MatrixXd dummyh(dim, dim);
        double ft = t * obj(xt, dummyg, dummyh);
        for (auto& c : cons) {
          double v = c.eval(xt, dummyg, dummyh);
          if (v >= 0) { ok = false; break; }
          ft += -std::log(-v);
        }
        if (ok && ft <= f - 0.25 * alpha * decrement) { x = xt; break; }
        alpha *= 0.5;
        if (ls == 49) alpha = 0;
      }
      if (alpha == 0) break;
    }
    if (n_cons / t < tol) break;
    t *= mu_factor;
    if (t > 1e14) break;
  }
  return x;
}

}  // namespace detail

inline QcqpResult solve_qcqp(const QcqpProblem& q, double tol = 1e-9) {
  QcqpResult out;
  const int n = q.dim;
  const int k = static_cast<int>(q.lin_normals.rows());

  auto ellipsoid_val = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd d = x - q.center;
    return d.dot(q.S * d) - 1.0;
  };

  // phase 1 if the ellipsoid center violates a halfspace
  Eigen::VectorXd x0 = q.center;
  double worst = -1.0;
  for (int i = 0; i < k; ++i) worst = std::max(worst, q.lin_normals.row(i).dot(x0) - q.lin_rhs[i]);
  if (worst >= 0) {
    // minimize s subject to f_i(x) <= s; variables (x, s)
    std::vector<detail::QcqpConstraint> cons;
    cons.push_back({[&](const Eigen::VectorXd& xs, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
      Eigen::VectorXd x = xs.head(n);
      Eigen::VectorXd d = x - q.center;
      g.setZero();
      g.head(n) = 2.0 * q.S * d;
      g[n] = -1.0;
      h.setZero();
      h.topLeftCorner(n, n) = 2.0 * q.S;
      return d.dot(q.S * d) - 1.0 - xs[n];
    }});
    for (int i = 0; i < k; ++i) {
      cons.push_back({[&, i](const Eigen::VectorXd& xs, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
        g.setZero();
        g.head(n) = q.lin_normals.row(i).transpose();
        g[n] = -1.0;
        h.setZero();
        return q.lin_normals.row(i).dot(xs.head(n)) - q.lin_rhs[i] - xs[n];
      }});
    }
    auto obj = [&](const Eigen::VectorXd& xs, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
      g.setZero();
      g[n] = 1.0;
      h.setZero();
      return xs[n];
    };
    Eigen::VectorXd xs0(n + 1);
    xs0.head(n) = x0;
    xs0[n] = worst + 1.0;
    Eigen::VectorXd xs = detail::barrier_minimize(n + 1, cons, obj, xs0, 1e-10);
    if (xs[n] >= -1e-9) {
      out.feasible = false;
      return out;
    }
    x0 = xs.head(n);
  }

  // phase 2
  std::vector<detail::QcqpConstraint> cons;
  cons.push_back({[&](const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    Eigen::VectorXd d = x - q.center;
    g = 2.0 * q.S * d;
    h = 2.0 * q.S;
    return d.dot(q.S * d) - 1.0;
  }});
  for (int i = 0; i < k; ++i) {
    cons.push_back({[&, i](const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
      g = q.lin_normals.row(i).transpose();
      h.setZero();
      return q.lin_normals.row(i).dot(x) - q.lin_rhs[i];
    }});
  }
  auto obj = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    g = q.H * x + q.g;
    h = q.H;
    return 0.5 * x.dot(q.H * x) + q.g.dot(x);
  };
  // nudge strictly inside the ellipsoid if phase 1 left us on its boundary
  if (ellipsoid_val(x0) >= -1e-12) x0 = q.center + 0.999 * (x0 - q.center);
  out.x = detail::barrier_minimize(n, cons, obj, x0, tol);
  out.feasible = true;
  out.obj = 0.5 * out.x.dot(q.H * out.x) + q.g.dot(out.x);
  return out;
}

}  // namespace funnelkit::conic
