#pragma once

// Infeasible-start primal-dual path-following solver for linear SDPs in
// standard form, with Nesterov-Todd scaling and a Mehrotra predictor-
// corrector step. Free variables ride along in an augmented KKT system.
//
// Primal infeasibility is reported through an improving dual ray
// (y with  A'(y) <= 0, F'y = 0, b'y > 0), dual infeasibility through an
// improving primal ray.

#include <cstdio>
#include <vector>

#include "funnelkit/conic/kkt.hpp"
#include "funnelkit/conic/problem.hpp"

namespace funnelkit::conic {

namespace detail {

// Largest alpha in (0, 1] with lambda + alpha*T psd, for diagonal lambda.
inline double max_step(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& T) {
  const int n = static_cast<int>(lambda.size());
  Eigen::MatrixXd E(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      E(i, j) = T(i, j) / std::sqrt(lambda[i] * lambda[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  if (lo >= 0) return 1.0;
  return std::min(1.0, -1.0 / lo);
}

struct NtScaling {
  Eigen::MatrixXd R, Rinv;
  Eigen::VectorXd lambda;

  void compute(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z) {
    Eigen::LLT<Eigen::MatrixXd> lx(X), lz(Z);
    Eigen::MatrixXd Lx, Lz;
    if (lx.info() == Eigen::Success) Lx = lx.matrixL();
    else Lx = chol_repaired(X);
    if (lz.info() == Eigen::Success) Lz = lz.matrixL();
    else Lz = chol_repaired(Z);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lz.transpose() * Lx,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    lambda = svd.singularValues();
    Eigen::VectorXd s = lambda.array().sqrt().inverse().matrix();
    R = Lx * svd.matrixV() * s.asDiagonal();
    Rinv = s.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
  }

  static Eigen::MatrixXd chol_repaired(const Eigen::MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    Eigen::VectorXd d = es.eigenvalues().cwiseMax(1e-14 * std::max(1.0, S.norm()));
    Eigen::MatrixXd fixed = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    return Eigen::LLT<Eigen::MatrixXd>(fixed).matrixL();
  }

  // Solves the Lyapunov system L_lambda(G) = D for diagonal lambda.
  Eigen::MatrixXd lyap_inv(const Eigen::MatrixXd& D) const {
    const int n = static_cast<int>(lambda.size());
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = 2.0 * D(i, j) / (lambda[i] + lambda[j]);
    return G;
  }
};

}  // namespace detail

inline SdpSolution solve_sdp(const SdpProblem& prob, const SolveOptions& opts = {}) {
  prob.validate();
  if (prob.has_logdet())
    throw std::invalid_argument("solve_sdp: logdet objective requires solve_maxdet");

  const int nb = static_cast<int>(prob.block_dims.size());
  const int m = static_cast<int>(prob.rows.size());
  const int nf = prob.num_free;
  SdpSolution sol;
  sol.X.resize(nb);
  sol.Z.resize(nb);

  detail::BlockRows br(prob);
  detail::KktSolver kkt(prob, br);

  // objective data
  std::vector<Eigen::MatrixXd> C(nb);
  for (int b = 0; b < nb; ++b)
    C[b] = prob.C.empty() ? Eigen::MatrixXd::Zero(prob.block_dims[b], prob.block_dims[b])
                          : prob.C[b];
  Eigen::VectorXd cf = prob.c_free.size() ? prob.c_free : Eigen::VectorXd::Zero(nf);

  double bnorm = br.b.size() ? br.b.lpNorm<Eigen::Infinity>() : 0.0;
  double cnorm = cf.size() ? cf.lpNorm<Eigen::Infinity>() : 0.0;
  for (auto& Cb : C) cnorm = std::max(cnorm, Cb.lpNorm<Eigen::Infinity>());

  // cold start
  int ndim = 0;
  for (int b = 0; b < nb; ++b) ndim += prob.block_dims[b];
  if (ndim == 0) {  // no matrix blocks: not a meaningful SDP here
    sol.status = m == 0 ? SolveStatus::Optimal : SolveStatus::MaxIter;
    sol.free_vals = Eigen::VectorXd::Zero(nf);
    sol.y = Eigen::VectorXd::Zero(m);
    return sol;
  }
  double tau_p = std::sqrt(static_cast<double>(ndim)) * std::max(1.0, bnorm);
  double tau_d = std::sqrt(static_cast<double>(ndim)) * std::max(1.0, cnorm);
  for (int b = 0; b < nb; ++b) {
    sol.X[b] = tau_p * Eigen::MatrixXd::Identity(prob.block_dims[b], prob.block_dims[b]);
    sol.Z[b] = tau_d * Eigen::MatrixXd::Identity(prob.block_dims[b], prob.block_dims[b]);
  }
  sol.free_vals = Eigen::VectorXd::Zero(nf);
  sol.y = Eigen::VectorXd::Zero(m);

  std::vector<detail::NtScaling> nt(nb);
  std::vector<Eigen::MatrixXd> Rs(nb), Rd(nb), dXt(nb), dZt(nb), G(nb);
  std::vector<Eigen::VectorXd> xs(nb);
  double mu_prev = std::numeric_limits<double>::infinity();
  int stall_count = 0;
  double best_score = std::numeric_limits<double>::infinity();
  SdpSolution best;

  auto pack_all = [&](const std::vector<Eigen::MatrixXd>& M) {
    for (int b = 0; b < nb; ++b) xs[b] = svec(M[b]);
    return br.apply(xs);
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    sol.iterations = iter;
    // residuals
    Eigen::VectorXd rp = br.b - pack_all(sol.X) - br.apply_free(sol.free_vals);
    double gap = 0;
    for (int b = 0; b < nb; ++b) gap += sol.X[b].cwiseProduct(sol.Z[b]).sum();
    double mu = gap / ndim;
    double dres = 0;
    for (int b = 0; b < nb; ++b) {
      Rd[b] = C[b] - br.adjoint_block(b, sol.y, prob.block_dims[b]) - sol.Z[b];
      dres = std::max(dres, Rd[b].lpNorm<Eigen::Infinity>());
    }
    Eigen::VectorXd rf = cf - br.adjoint_free(sol.y, nf);
    if (nf > 0) dres = std::max(dres, rf.lpNorm<Eigen::Infinity>());

    double pobj = cf.dot(sol.free_vals) + prob.cost_const;
    for (int b = 0; b < nb; ++b) pobj += C[b].cwiseProduct(sol.X[b]).sum();
    double dobj = br.b.dot(sol.y) + prob.cost_const;

    sol.primal_obj = pobj;
    sol.dual_obj = dobj;
    sol.primal_res = (m ? rp.lpNorm<Eigen::Infinity>() : 0.0) / (1 + bnorm);
    sol.dual_res = dres / (1 + cnorm);
    sol.gap = gap / (1 + std::abs(pobj) + std::abs(dobj));
    if (opts.iter_callback) opts.iter_callback(pobj, dobj, gap);
    if (opts.trace)
      std::printf("  it %3d  pobj %+.6e dobj %+.6e  rp %.2e rd %.2e mu %.2e\n", iter, pobj,
                  dobj, sol.primal_res, sol.dual_res, mu);

    double score = std::max({sol.primal_res, sol.dual_res, std::abs(sol.gap)});
    if (score < best_score) {
      best_score = score;
      best = sol;
    }
    if (sol.primal_res <= opts.tol && sol.dual_res <= opts.tol && sol.gap <= opts.tol) {
      sol.status = SolveStatus::Optimal;
      return sol;
    }
    // stall exit: degenerate optima (no strict complementarity) grind mu
    // to a halt; stop early and let the caller judge the iterate
    if (mu > 0.9 * mu_prev) ++stall_count;
    else stall_count = 0;
    mu_prev = mu;
    if (stall_count >= 6) break;
    if (mu <= 1e-15 * (tau_p * tau_d)) break;  // complementarity exhausted

    // infeasibility certificates
    if (iter >= 3) {
      double ynorm = sol.y.size() ? sol.y.lpNorm<Eigen::Infinity>() : 0.0;
      if (ynorm > 1.0) {
        Eigen::VectorXd yh = sol.y / ynorm;
        double by = br.b.dot(yh);
        if (by > opts.infeas_margin) {
          double err = nf > 0 ? br.adjoint_free(yh, nf).lpNorm<Eigen::Infinity>() : 0.0;
          for (int b = 0; b < nb; ++b) {
            Eigen::MatrixXd Ay = br.adjoint_block(b, yh, prob.block_dims[b]);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-Ay, Eigen::EigenvaluesOnly);
            err = std::max(err, std::max(0.0, -es.eigenvalues().minCoeff()));
          }
          if (err <= opts.infeas_margin * by) {
            sol.status = SolveStatus::Infeasible;
            sol.y = yh;
            return sol;
          }
        }
      }
      double xnorm = 0;
      for (int b = 0; b < nb; ++b) xnorm = std::max(xnorm, sol.X[b].lpNorm<Eigen::Infinity>());
      xnorm = std::max(xnorm, nf ? sol.free_vals.lpNorm<Eigen::Infinity>() : 0.0);
      if (xnorm > 1e4 * tau_p) {
        double cobj = cf.dot(sol.free_vals);
        for (int b = 0; b < nb; ++b) cobj += C[b].cwiseProduct(sol.X[b]).sum();
        cobj /= xnorm;
        double err = (pack_all(sol.X) + br.apply_free(sol.free_vals)).lpNorm<Eigen::Infinity>() / xnorm;
        if (cobj < -opts.infeas_margin && err <= opts.infeas_margin * (-cobj)) {
          sol.status = SolveStatus::Unbounded;
          return sol;
        }
      }
    }

    // NT scaling and KKT factorization
    for (int b = 0; b < nb; ++b) {
      nt[b].compute(sol.X[b], sol.Z[b]);
      Rs[b] = nt[b].R;
    }
    kkt.factor(Rs);

    auto solve_direction = [&](const std::vector<Eigen::MatrixXd>& d,
                               std::vector<Eigen::MatrixXd>& dX,
                               std::vector<Eigen::MatrixXd>& dZ, Eigen::VectorXd& dy,
                               Eigen::VectorXd& du) {
      // r1 = rp - A(R G R' - W Rd W)
      std::vector<Eigen::MatrixXd> T(nb);
      for (int b = 0; b < nb; ++b) {
        G[b] = nt[b].lyap_inv(d[b]);
        Eigen::MatrixXd WRdW =
            nt[b].R * (nt[b].R.transpose() * Rd[b] * nt[b].R) * nt[b].R.transpose();
        T[b] = nt[b].R * G[b] * nt[b].R.transpose() - WRdW;
      }
      Eigen::VectorXd r1 = rp - pack_all(T);
      Eigen::VectorXd dyu = kkt.solve(r1, rf);
      dy = dyu.head(m);
      du = dyu.tail(nf);
      for (int b = 0; b < nb; ++b) {
        dZ[b] = Rd[b] - br.adjoint_block(b, dy, prob.block_dims[b]);
        Eigen::MatrixXd WdZW =
            nt[b].R * (nt[b].R.transpose() * dZ[b] * nt[b].R) * nt[b].R.transpose();
        dX[b] = nt[b].R * G[b] * nt[b].R.transpose() - WdZW;
      }
    };

    // predictor
    std::vector<Eigen::MatrixXd> d(nb), dXa(nb), dZa(nb);
    for (int b = 0; b < nb; ++b) {
      d[b] = Eigen::MatrixXd::Zero(prob.block_dims[b], prob.block_dims[b]);
      d[b].diagonal() = -nt[b].lambda.array().square();
    }
    Eigen::VectorXd dya, dua;
    solve_direction(d, dXa, dZa, dya, dua);

    double ap = 1.0, ad = 1.0;
    for (int b = 0; b < nb; ++b) {
      dXt[b] = nt[b].Rinv * dXa[b] * nt[b].Rinv.transpose();
      dZt[b] = nt[b].R.transpose() * dZa[b] * nt[b].R;
      ap = std::min(ap, detail::max_step(nt[b].lambda, dXt[b]));
      ad = std::min(ad, detail::max_step(nt[b].lambda, dZt[b]));
    }
    double mu_aff = 0;
    for (int b = 0; b < nb; ++b)
      mu_aff += (sol.X[b] + ap * dXa[b]).cwiseProduct(sol.Z[b] + ad * dZa[b]).sum();
    mu_aff = std::max(mu_aff / ndim, 0.0);
    double sigma = std::pow(mu_aff / mu, 3.0);
    sigma = std::min(std::max(sigma, 1e-8), 0.99);

    // corrector (combined direction)
    for (int b = 0; b < nb; ++b) {
      Eigen::MatrixXd corr = 0.5 * (dXt[b] * dZt[b] + dZt[b] * dXt[b]);
      d[b] = -corr;
      d[b].diagonal().array() += sigma * mu;
      d[b].diagonal() -= nt[b].lambda.array().square().matrix();
    }
    std::vector<Eigen::MatrixXd> dX(nb), dZ(nb);
    Eigen::VectorXd dy, du;
    solve_direction(d, dX, dZ, dy, du);

    ap = 1.0;
    ad = 1.0;
    for (int b = 0; b < nb; ++b) {
      dXt[b] = nt[b].Rinv * dX[b] * nt[b].Rinv.transpose();
      dZt[b] = nt[b].R.transpose() * dZ[b] * nt[b].R;
      ap = std::min(ap, detail::max_step(nt[b].lambda, dXt[b]));
      ad = std::min(ad, detail::max_step(nt[b].lambda, dZt[b]));
    }
    const double eta = 0.98;
    ap = std::min(1.0, eta * ap);
    ad = std::min(1.0, eta * ad);

    for (int b = 0; b < nb; ++b) {
      sol.X[b] += ap * dX[b];
      sol.Z[b] += ad * dZ[b];
      sol.X[b] = 0.5 * (sol.X[b] + sol.X[b].transpose().eval());
      sol.Z[b] = 0.5 * (sol.Z[b] + sol.Z[b].transpose().eval());
    }
    sol.y += ad * dy;
    if (nf > 0) sol.free_vals += ap * du;
  }

  // no clean convergence: hand back the best iterate seen
  if (best_score < std::numeric_limits<double>::infinity()) {
    int it = sol.iterations;
    sol = best;
    sol.iterations = it;
  }
  sol.status = (sol.primal_res <= opts.tol && sol.dual_res <= opts.tol && sol.gap <= opts.tol)
                   ? SolveStatus::Optimal
                   : SolveStatus::MaxIter;
  return sol;
}

}  // namespace funnelkit::conic
