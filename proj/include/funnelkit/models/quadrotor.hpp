#pragma once

// Quadrotor in NED coordinates (z down): 12 states
//   (x, y, z, roll, pitch, yaw, and their time derivatives),
// inputs (total thrust, angular accelerations), plus a bounded cross-wind
// acting on the x acceleration. Attitude kinematics use the near-hover
// Euler-rate identification (angular accelerations commanded directly),
// which keeps the dynamics inside the {sin, cos, *, +} tree node set.
//
//   xddot = -(u1/m)(c_phi s_th c_psi + s_phi s_psi) + w
//   yddot = -(u1/m)(c_phi s_th s_psi - s_phi c_psi)
//   zddot =  g - (u1/m) c_phi c_th
//   (roll, pitch, yaw)ddot = (u2, u3, u4)

#include "funnelkit/models/model.hpp"
#include "funnelkit/tvlqr.hpp"

namespace funnelkit::models {

struct QuadrotorParams {
  double mass = 0.5;      // kg; defaults follow common small-quadrotor builds
  double gravity = 9.81;  // m/s^2
  double wind = 0.1;      // |wind| bound on x acceleration, m/s^2
  double radius = 0.3;    // collision sphere, m
  double thrust_max = 15.0;
  double ang_acc_max = 150.0;
};

inline Model make_quadrotor(const QuadrotorParams& p = {}) {
  Model m;
  m.name = "quadrotor";
  m.nx = 12;
  m.nu = 4;
  m.nw = 1;
  const int PHI = 3, TH = 4, PSI = 5;
  const int U1 = 12, U2 = 13, U3 = 14, U4 = 15, W = 16;
  auto c = [](double v) { return Expr::constant(v); };
  auto sphi = Expr::sin(Expr::var(PHI)), cphi = Expr::cos(Expr::var(PHI));
  auto sth = Expr::sin(Expr::var(TH)), cth = Expr::cos(Expr::var(TH));
  auto spsi = Expr::sin(Expr::var(PSI)), cpsi = Expr::cos(Expr::var(PSI));
  auto a = Expr::mul({c(-1.0 / p.mass), Expr::var(U1)});

  m.f.resize(12);
  for (int i = 0; i < 3; ++i) m.f[i] = Expr::var(6 + i);   // positions
  for (int i = 3; i < 6; ++i) m.f[i] = Expr::var(6 + i);   // angles
  m.f[6] = Expr::add({Expr::mul({a, Expr::add({Expr::mul({cphi, sth, cpsi}),
                                               Expr::mul({sphi, spsi})})}),
                      Expr::var(W)});
  m.f[7] = Expr::mul({a, Expr::add({Expr::mul({cphi, sth, spsi}),
                                    Expr::mul({c(-1), sphi, cpsi})})});
  m.f[8] = Expr::add({c(p.gravity), Expr::mul({a, cphi, cth})});
  m.f[9] = Expr::var(U2);
  m.f[10] = Expr::var(U3);
  m.f[11] = Expr::var(U4);

  double mass = p.mass, g = p.gravity;
  m.eval = [mass, g](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& w) {
    Eigen::VectorXd dx(12);
    dx.head(6) = x.tail(6);
    double cph = std::cos(x[3]), sph = std::sin(x[3]);
    double cth = std::cos(x[4]), sth = std::sin(x[4]);
    double cps = std::cos(x[5]), sps = std::sin(x[5]);
    double a = -u[0] / mass;
    dx[6] = a * (cph * sth * cps + sph * sps) + w[0];
    dx[7] = a * (cph * sth * sps - sph * cps);
    dx[8] = g + a * cph * cth;
    dx[9] = u[1];
    dx[10] = u[2];
    dx[11] = u[3];
    return dx;
  };
  m.cyclic = {0, 1, 2};
  m.config_dims = {0, 1};  // 2.5-D planning in the x-y plane
  m.u_min = Eigen::VectorXd(4);
  m.u_min << 0, -p.ang_acc_max, -p.ang_acc_max, -p.ang_acc_max;
  m.u_max = Eigen::VectorXd(4);
  m.u_max << p.thrust_max, p.ang_acc_max, p.ang_acc_max, p.ang_acc_max;
  m.w_lo = Eigen::VectorXd::Constant(1, -p.wind);
  m.w_hi = Eigen::VectorXd::Constant(1, p.wind);
  m.w_nominal = Eigen::VectorXd::Zero(1);
  return m;
}

// Lateral-shift maneuver built from flat outputs: fly forward at 2 m/s in y
// while moving x through a 7th-order rest-to-rest polynomial (zero velocity,
// acceleration and jerk at both ends, so the attitude starts and ends level
// with zero pitch rate, matching the trim state). Exactly dynamically
// consistent up to the grid spacing of the finite-difference derivatives.
inline tvlqr::NominalTrajectory quadrotor_maneuver(const Model& m, double x_shift, double T,
                                                   double forward_speed = 2.0,
                                                   const QuadrotorParams& p = {}) {
  const int N = 241;
  tvlqr::NominalTrajectory traj;
  auto quintic = [&](double t) {
    double s = t / T;
    double s4 = s * s * s * s;
    return x_shift * s4 * (35 - 84 * s + 70 * s * s - 20 * s * s * s);
  };
  auto quintic_d = [&](double t) {
    double s = t / T;
    double s3 = s * s * s;
    return x_shift * s3 * (140 - 420 * s + 420 * s * s - 140 * s * s * s) / T;
  };
  auto quintic_dd = [&](double t) {
    double s = t / T;
    double s2 = s * s;
    return x_shift * s2 * (420 - 1680 * s + 2100 * s * s - 840 * s * s * s) / (T * T);
  };
  auto pitch = [&](double t) { return std::atan2(-quintic_dd(t), p.gravity); };

  double dt = T / (N - 1);
  for (int i = 0; i < N; ++i) {
    double t = i * dt;
    double th = pitch(t);
    double hd = std::min(dt, 1e-4);
    double t0 = std::min(std::max(t, hd), T - hd);
    double thd = (pitch(t0 + hd) - pitch(t0 - hd)) / (2 * hd);
    double thdd = (pitch(t0 + hd) - 2 * pitch(t0) + pitch(t0 - hd)) / (hd * hd);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(12);
    x[0] = quintic(t);
    x[1] = forward_speed * t;
    x[4] = th;
    x[6] = quintic_d(t);
    x[7] = forward_speed;
    x[10] = thd;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(4);
    u[0] = p.mass * std::sqrt(quintic_dd(t) * quintic_dd(t) + p.gravity * p.gravity);
    u[2] = thdd;
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.inputs.push_back(u);
  }
  (void)m;
  return traj;
}

// Straight trim segment at the given forward speed.
inline tvlqr::NominalTrajectory quadrotor_trim(const Model& m, double T,
                                               double forward_speed = 2.0,
                                               const QuadrotorParams& p = {}) {
  return quadrotor_maneuver(m, 0.0, T, forward_speed, p);
}

}  // namespace funnelkit::models
