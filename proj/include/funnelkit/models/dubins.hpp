#pragma once

// Ground vehicle: Dubins-style model at (uncertain) fixed forward speed,
// steered through the second derivative of yaw.
//
//   state (x, y, psi, psidot):  xdot = -v sin(psi), ydot = v cos(psi),
//   psiddot = u,  with v(t) in [9, 11] m/s as the disturbance.

#include "funnelkit/models/model.hpp"

namespace funnelkit::models {

struct DubinsParams {
  double v_lo = 9.0, v_hi = 11.0;  // speed uncertainty band
  double u_limit = 1000.0;         // hard steering bound, rad/s^2
  double u_nominal_limit = 500.0;  // trajectory-generation bound, rad/s^2
};

inline Model make_dubins(const DubinsParams& p = {}) {
  Model m;
  m.name = "dubins";
  m.nx = 4;
  m.nu = 1;
  m.nw = 1;
  const int X = 0, Y = 1, PSI = 2, PSIDOT = 3, U = 4, V = 5;
  m.f.resize(4);
  m.f[0] = Expr::mul({Expr::constant(-1), Expr::var(V), Expr::sin(Expr::var(PSI))});
  m.f[1] = Expr::mul({Expr::var(V), Expr::cos(Expr::var(PSI))});
  m.f[2] = Expr::var(PSIDOT);
  m.f[3] = Expr::var(U);
  m.eval = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
    Eigen::VectorXd dx(4);
    double v = w[0];
    dx[0] = -v * std::sin(x[2]);
    dx[1] = v * std::cos(x[2]);
    dx[2] = x[3];
    dx[3] = u[0];
    return dx;
  };
  m.cyclic = {X, Y};
  m.config_dims = {X, Y};
  m.u_min = Eigen::VectorXd::Constant(1, -p.u_limit);
  m.u_max = Eigen::VectorXd::Constant(1, p.u_limit);
  m.w_lo = Eigen::VectorXd::Constant(1, p.v_lo);
  m.w_hi = Eigen::VectorXd::Constant(1, p.v_hi);
  m.w_nominal = Eigen::VectorXd::Constant(1, 0.5 * (p.v_lo + p.v_hi));
  return m;
}

}  // namespace funnelkit::models
