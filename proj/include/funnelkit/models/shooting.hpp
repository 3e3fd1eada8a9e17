#pragma once

// Nominal trajectory generation by single shooting: piecewise-linear input
// knots, running cost int(1 + u'Ru) dt with fixed horizon, and quadratic
// penalties pulling the endpoint onto the target state. Levenberg-Marquardt
// with finite-difference Jacobians and penalty continuation.

#include "funnelkit/models/model.hpp"
#include "funnelkit/tvlqr.hpp"

namespace funnelkit::models {

struct ShootingOptions {
  int knots = 9;
  int rollout_steps = 120;
  int max_outer = 6;           // penalty continuation rounds
  int max_lm_iters = 60;
  double penalty0 = 1e2;
  double terminal_tol = 1e-2;  // required endpoint accuracy (per state unit)
  Eigen::VectorXd u_bound;     // optional per-input nominal bound
};

struct TrajectoryError : std::runtime_error {
  tvlqr::NominalTrajectory best;
  TrajectoryError(const std::string& msg, tvlqr::NominalTrajectory b)
      : std::runtime_error(msg), best(std::move(b)) {}
};

namespace detail {

inline tvlqr::NominalTrajectory rollout(const Model& m, const Eigen::VectorXd& x0,
                                        const Eigen::MatrixXd& knots,  // nu x K
                                        double T, int steps) {
  const int K = static_cast<int>(knots.cols());
  auto u_of_t = [&](double t) {
    double s = std::min(1.0, std::max(0.0, t / T)) * (K - 1);
    int k = std::min(K - 2, static_cast<int>(s));
    double a = s - k;
    return ((1 - a) * knots.col(k) + a * knots.col(k + 1)).eval();
  };
  DisturbanceProfile nom = DisturbanceProfile::zero(m, T);
  Trace tr = integrate(
      m, [&](double t, const Eigen::VectorXd&) { return u_of_t(t); }, nom, x0, T, T / steps,
      T / steps);
  tvlqr::NominalTrajectory out;
  out.times = tr.times;
  out.states = tr.states;
  out.inputs.resize(tr.times.size());
  for (std::size_t i = 0; i < tr.times.size(); ++i) out.inputs[i] = u_of_t(tr.times[i]);
  return out;
}

}  // namespace detail

inline tvlqr::NominalTrajectory generate_trajectory(const Model& m, const Eigen::VectorXd& x0,
                                                    const Eigen::VectorXd& x_target,
                                                    const Eigen::MatrixXd& R, double T,
                                                    ShootingOptions opts = {}) {
  const int K = opts.knots, nu = m.nu;
  const int np = K * nu;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(np);
  Eigen::MatrixXd Rchol = Eigen::LLT<Eigen::MatrixXd>(R).matrixL();

  double penalty = opts.penalty0;
  double best_term_err = std::numeric_limits<double>::infinity();
  tvlqr::NominalTrajectory best_traj;

  auto residuals = [&](const Eigen::VectorXd& th, double pen) {
    Eigen::MatrixXd knots = Eigen::Map<const Eigen::MatrixXd>(th.data(), nu, K);
    if (opts.u_bound.size())
      for (int i = 0; i < nu; ++i)
        knots.row(i) = knots.row(i).cwiseMin(opts.u_bound[i]).cwiseMax(-opts.u_bound[i]);
    auto traj = detail::rollout(m, x0, knots, T, opts.rollout_steps);
    double h = T / (K - 1);
    Eigen::VectorXd r(np + m.nx);
    for (int k = 0; k < K; ++k) {
      double w = (k == 0 || k == K - 1) ? 0.5 * h : h;  // trapezoid weights
      r.segment(k * nu, nu) = std::sqrt(w) * (Rchol.transpose() * knots.col(k));
    }
    r.tail(m.nx) = std::sqrt(pen) * (traj.states.back() - x_target);
    return std::make_pair(r, traj);
  };

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    double lambda = 1e-3;
    auto [r, traj] = residuals(theta, penalty);
    double cost = r.squaredNorm();
    for (int it = 0; it < opts.max_lm_iters; ++it) {
      // finite-difference Jacobian
      Eigen::MatrixXd J(r.size(), np);
      for (int p = 0; p < np; ++p) {
        Eigen::VectorXd tp = theta;
        double step = 1e-5 * std::max(1.0, std::abs(theta[p]));
        tp[p] += step;
        auto [rp, _] = residuals(tp, penalty);
        J.col(p) = (rp - r) / step;
      }
      Eigen::MatrixXd H = J.transpose() * J;
      Eigen::VectorXd g = J.transpose() * r;
      bool improved = false;
      for (int tries = 0; tries < 12; ++tries) {
        Eigen::MatrixXd Hl = H;
        Hl.diagonal().array() += lambda * (1.0 + H.diagonal().array());
        Eigen::VectorXd step = Hl.ldlt().solve(-g);
        Eigen::VectorXd tn = theta + step;
        auto [rn, trajn] = residuals(tn, penalty);
        double cn = rn.squaredNorm();
        if (cn < cost - 1e-14) {
          theta = tn;
          r = rn;
          traj = trajn;
          cost = cn;
          lambda = std::max(lambda * 0.3, 1e-10);
          improved = true;
          break;
        }
        lambda *= 4.0;
      }
      if (!improved) break;
      if (g.lpNorm<Eigen::Infinity>() < 1e-10 * (1 + cost)) break;
    }
    double term_err = (traj.states.back() - x_target).lpNorm<Eigen::Infinity>();
    if (term_err < best_term_err) {
      best_term_err = term_err;
      best_traj = traj;
    }
    if (term_err <= opts.terminal_tol) return traj;
    penalty *= 10.0;
  }
  throw TrajectoryError("generate_trajectory: stagnated, terminal error " +
                            std::to_string(best_term_err),
                        best_traj);
}

}  // namespace funnelkit::models
