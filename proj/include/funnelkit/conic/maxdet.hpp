#pragma once

// Damped-Newton log-barrier solver for SDPs whose objective carries
// weighted logdet terms:
//
//   min  sum_b <C_b, X_b> + c_free' u - sum_b w_b logdet(X_b)
//   s.t. A(X) + F u = b,   X_b > 0
//
// Blocks with w_b = 0 are kept positive definite by the barrier itself
// (effective weight w_b + mu); driving mu -> 0 recovers the psd optimum.

#include <cstdio>

#include "funnelkit/conic/kkt.hpp"
#include "funnelkit/conic/problem.hpp"

namespace funnelkit::conic {

inline SdpSolution solve_maxdet(const SdpProblem& prob, const SolveOptions& opts = {}) {
  prob.validate();
  const int nb = static_cast<int>(prob.block_dims.size());
  const int m = static_cast<int>(prob.rows.size());
  const int nf = prob.num_free;

  detail::BlockRows br(prob);
  detail::KktSolver kkt(prob, br);

  std::vector<Eigen::MatrixXd> C(nb);
  for (int b = 0; b < nb; ++b)
    C[b] = prob.C.empty() ? Eigen::MatrixXd::Zero(prob.block_dims[b], prob.block_dims[b])
                          : prob.C[b];
  Eigen::VectorXd cf = prob.c_free.size() ? prob.c_free : Eigen::VectorXd::Zero(nf);

  double bnorm = br.b.size() ? br.b.lpNorm<Eigen::Infinity>() : 0.0;
  double cnorm = cf.size() ? cf.lpNorm<Eigen::Infinity>() : 0.0;
  for (auto& Cb : C) cnorm = std::max(cnorm, Cb.lpNorm<Eigen::Infinity>());

  SdpSolution sol;
  sol.X.resize(nb);
  for (int b = 0; b < nb; ++b)
    sol.X[b] = std::max(1.0, bnorm) * Eigen::MatrixXd::Identity(prob.block_dims[b], prob.block_dims[b]);
  sol.free_vals = Eigen::VectorXd::Zero(nf);
  sol.y = Eigen::VectorXd::Zero(m);

  std::vector<Eigen::MatrixXd> Xinv(nb), Rd(nb), Rs(nb), dX(nb);
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llt(nb);
  std::vector<Eigen::VectorXd> xs(nb);

  auto apply_rows = [&](const std::vector<Eigen::MatrixXd>& M) {
    for (int b = 0; b < nb; ++b) xs[b] = svec(M[b]);
    return br.apply(xs);
  };

  // residual norm of the mu-perturbed KKT system at a trial point
  auto kkt_residual = [&](const std::vector<Eigen::MatrixXd>& X, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& y, double mu) {
    Eigen::VectorXd rp = br.b - apply_rows(X) - br.apply_free(u);
    double r2 = rp.squaredNorm();
    for (int b = 0; b < nb; ++b) {
      Eigen::LLT<Eigen::MatrixXd> l(X[b]);
      if (l.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
      Eigen::MatrixXd Xi = l.solve(Eigen::MatrixXd::Identity(X[b].rows(), X[b].cols()));
      Eigen::MatrixXd rd = C[b] - (prob.logdet_weight[b] + mu) * Xi -
                           br.adjoint_block(b, y, prob.block_dims[b]);
      r2 += rd.squaredNorm();
    }
    if (nf) r2 += (cf - br.adjoint_free(y, nf)).squaredNorm();
    return std::sqrt(r2);
  };

  double mu = std::max(1.0, cnorm);
  const double mu_min = std::min(1e-9, opts.tol * 1e-3);
  int total_iters = 0;
  double scale = 1 + bnorm + cnorm;

  while (total_iters < opts.max_iter) {
    bool inner_done = false;
    for (int inner = 0; inner < 40 && total_iters < opts.max_iter; ++inner, ++total_iters) {
      sol.iterations = total_iters;
      Eigen::VectorXd rp = br.b - apply_rows(sol.X) - br.apply_free(sol.free_vals);
      Eigen::VectorXd rf = cf - br.adjoint_free(sol.y, nf);
      bool fail = false;
      for (int b = 0; b < nb; ++b) {
        llt[b].compute(sol.X[b]);
        if (llt[b].info() != Eigen::Success) { fail = true; break; }
        Xinv[b] = llt[b].solve(Eigen::MatrixXd::Identity(sol.X[b].rows(), sol.X[b].cols()));
        Rd[b] = C[b] - (prob.logdet_weight[b] + mu) * Xinv[b] -
                br.adjoint_block(b, sol.y, prob.block_dims[b]);
      }
      if (fail) { sol.status = SolveStatus::MaxIter; return sol; }

      double res = std::sqrt(rp.squaredNorm() + rf.squaredNorm() +
                             [&] {
                               double s = 0;
                               for (auto& r : Rd) s += r.squaredNorm();
                               return s;
                             }());
      if (opts.trace)
        std::printf("  maxdet it %3d mu %.2e res %.3e\n", total_iters, mu, res);
      if (res <= std::max(0.3 * mu, 0.01 * opts.tol * scale)) { inner_done = true; break; }

      // Newton direction
      for (int b = 0; b < nb; ++b) {
        double w = prob.logdet_weight[b] + mu;
        Rs[b] = llt[b].matrixL();
        Rs[b] *= std::pow(w, -0.25);
      }
      kkt.factor(Rs);
      Eigen::VectorXd q = Eigen::VectorXd::Zero(m);
      {
        std::vector<Eigen::MatrixXd> T(nb);
        for (int b = 0; b < nb; ++b) {
          double w = prob.logdet_weight[b] + mu;
          T[b] = sol.X[b] * Rd[b] * sol.X[b] / w;
        }
        q = apply_rows(T);
      }
      Eigen::VectorXd dyu = kkt.solve(rp + q, rf);
      Eigen::VectorXd dy = dyu.head(m);
      Eigen::VectorXd du = nf ? dyu.tail(nf).eval() : Eigen::VectorXd();
      for (int b = 0; b < nb; ++b) {
        double w = prob.logdet_weight[b] + mu;
        Eigen::MatrixXd rhs = -Rd[b] + br.adjoint_block(b, dy, prob.block_dims[b]);
        dX[b] = sol.X[b] * rhs * sol.X[b] / w;
        dX[b] = 0.5 * (dX[b] + dX[b].transpose().eval());
      }

      // fraction to the psd boundary
      double amax = 1.0;
      for (int b = 0; b < nb; ++b) {
        Eigen::MatrixXd L = llt[b].matrixL();
        Eigen::MatrixXd E = L.triangularView<Eigen::Lower>().solve(dX[b]);
        E = L.triangularView<Eigen::Lower>().solve(E.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E, Eigen::EigenvaluesOnly);
        double lo = es.eigenvalues().minCoeff();
        if (lo < 0) amax = std::min(amax, -0.95 / lo);
      }
      double alpha = std::min(1.0, amax);
      double res0 = res;
      for (int ls = 0; ls < 30; ++ls) {
        std::vector<Eigen::MatrixXd> Xt(nb);
        for (int b = 0; b < nb; ++b) Xt[b] = sol.X[b] + alpha * dX[b];
        Eigen::VectorXd ut = sol.free_vals;
        if (nf) ut += alpha * du;
        Eigen::VectorXd yt = sol.y + alpha * dy;
        double rt = kkt_residual(Xt, ut, yt, mu);
        if (rt <= (1 - 0.01 * alpha) * res0) {
          sol.X = std::move(Xt);
          sol.free_vals = ut;
          sol.y = yt;
          break;
        }
        alpha *= 0.5;
        if (ls == 29) { inner_done = true; }  // stalled; shrink mu and retry
      }
      if (inner_done) break;
    }
    if (mu <= mu_min && inner_done) break;
    mu = std::max(mu * 0.15, mu_min);
    if (!inner_done && total_iters >= opts.max_iter) break;
  }

  // final residuals against the true problem
  Eigen::VectorXd rp = br.b - apply_rows(sol.X) - br.apply_free(sol.free_vals);
  double dres = 0;
  for (int b = 0; b < nb; ++b) {
    Eigen::LLT<Eigen::MatrixXd> l(sol.X[b]);
    if (l.info() != Eigen::Success) { sol.status = SolveStatus::MaxIter; return sol; }
    Eigen::MatrixXd Xi = l.solve(Eigen::MatrixXd::Identity(sol.X[b].rows(), sol.X[b].cols()));
    Eigen::MatrixXd rd = C[b] - (prob.logdet_weight[b] + mu) * Xi -
                         br.adjoint_block(b, sol.y, prob.block_dims[b]);
    dres = std::max(dres, rd.lpNorm<Eigen::Infinity>());
  }
  if (nf) dres = std::max(dres, (cf - br.adjoint_free(sol.y, nf)).lpNorm<Eigen::Infinity>());

  sol.primal_res = (m ? rp.lpNorm<Eigen::Infinity>() : 0.0) / (1 + bnorm);
  sol.dual_res = dres / (1 + cnorm);
  sol.primal_obj = cf.dot(sol.free_vals) + prob.cost_const;
  for (int b = 0; b < nb; ++b) {
    sol.primal_obj += C[b].cwiseProduct(sol.X[b]).sum();
    if (prob.logdet_weight[b] > 0) {
      Eigen::LLT<Eigen::MatrixXd> l(sol.X[b]);
      double ld = 0;
      Eigen::MatrixXd L = l.matrixL();
      for (int i = 0; i < L.rows(); ++i) ld += 2 * std::log(L(i, i));
      sol.primal_obj -= prob.logdet_weight[b] * ld;
    }
  }
  sol.dual_obj = br.b.dot(sol.y) + prob.cost_const;
  sol.gap = mu * [&] {
    int n = 0;
    for (int d : prob.block_dims) n += d;
    return n;
  }();
  double rtol = opts.tol * 100;  // stationarity is judged at barrier scale
  sol.status = (sol.primal_res <= rtol && sol.dual_res <= rtol) ? SolveStatus::Optimal
                                                                : SolveStatus::MaxIter;
  return sol;
}

}  // namespace funnelkit::conic
