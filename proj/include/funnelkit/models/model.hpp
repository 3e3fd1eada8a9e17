#pragma once

// Dynamical-system interface: expression trees for Taylor expansion and
// linearization, a matching fast numeric evaluator for simulation, input
// bounds, the disturbance box, and cyclic-coordinate metadata.
//
// Tree variable ids: states 0..nx-1, inputs nx..nx+nu-1, disturbances
// nx+nu..nx+nu+nw-1.

#include <functional>
#include <string>
#include <vector>

#include "funnelkit/expr.hpp"
#include "funnelkit/poly.hpp"
#include "funnelkit/util/rng.hpp"

namespace funnelkit::models {

struct Model {
  std::string name;
  int nx = 0, nu = 0, nw = 0;
  std::vector<ExprPtr> f;  // nx expression trees over (x, u, w)
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                const Eigen::VectorXd&)>
      eval;
  std::vector<int> cyclic;       // indices of cyclic coordinates
  std::vector<int> config_dims;  // configuration-space coordinates (collision space)
  Eigen::VectorXd u_min, u_max;  // hard input bounds, clamped at execution
  Eigen::VectorXd w_lo, w_hi;    // disturbance box
  Eigen::VectorXd w_nominal;     // disturbance value used for nominal planning

  int var_x(int i) const { return i; }
  int var_u(int i) const { return nx + i; }
  int var_w(int i) const { return nx + nu + i; }

  Eigen::VectorXd clamp_input(Eigen::VectorXd u) const {
    for (int i = 0; i < nu; ++i) u[i] = std::min(u_max[i], std::max(u_min[i], u[i]));
    return u;
  }

  // stacked (x, u, w) point for tree evaluation
  Eigen::VectorXd pack(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& w) const {
    Eigen::VectorXd z(nx + nu + nw);
    z << x, u, w;
    return z;
  }

  Eigen::VectorXd eval_trees(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& w) const {
    Eigen::VectorXd z = pack(x, u, w);
    Eigen::VectorXd dx(nx);
    for (int i = 0; i < nx; ++i) dx[i] = f[i]->eval(z);
    return dx;
  }
};

// Piecewise-constant disturbance profile with switch times.
struct DisturbanceProfile {
  std::vector<double> switch_times;     // ascending segment starts; one per value
  std::vector<Eigen::VectorXd> values;  // value[i] applies on [t_i, t_{i+1})

  Eigen::VectorXd at(double t) const {
    if (values.empty()) return Eigen::VectorXd();
    std::size_t seg = 0;
    while (seg + 1 < values.size() && t >= switch_times[seg + 1]) ++seg;
    return values[seg];
  }

  static DisturbanceProfile zero(const Model& m, double /*T*/) {
    DisturbanceProfile p;
    p.switch_times = {0.0};
    p.values = {m.w_nominal};
    return p;
  }

  // Extreme-point switching: each period draws a random vertex of the box.
  static DisturbanceProfile extreme_switching(const Model& m, double T, double period,
                                              Rng& rng) {
    DisturbanceProfile p;
    double t = 0;
    while (t < T) {
      p.switch_times.push_back(t);
      Eigen::VectorXd w(m.nw);
      for (int i = 0; i < m.nw; ++i) w[i] = rng.bernoulli(0.5) ? m.w_hi[i] : m.w_lo[i];
      p.values.push_back(w);
      t += period;
    }
    if (p.switch_times.empty()) {
      p.switch_times.push_back(0.0);
      p.values.push_back(m.w_nominal);
    }
    return p;
  }

  bool inside(const Model& m, double tol = 0.0) const {
    for (auto& w : values)
      for (int i = 0; i < m.nw; ++i)
        if (w[i] < m.w_lo[i] - tol || w[i] > m.w_hi[i] + tol) return false;
    return true;
  }
};

struct Trace {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;
};

// RK4 with zero-order-hold control at the control rate. Deterministic.
// Throws on non-finite states, attaching the step index in the message.
inline Trace integrate(const Model& m,
                       const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& controller,
                       const DisturbanceProfile& dist, const Eigen::VectorXd& x0, double T,
                       double dt, double control_dt = 0.0) {
  if (dt <= 0) throw std::invalid_argument("integrate: dt must be positive");
  if (control_dt <= 0) control_dt = dt;
  Trace trace;
  Eigen::VectorXd x = x0;
  double t = 0;
  Eigen::VectorXd u = m.clamp_input(controller(0.0, x));
  double next_control = control_dt;
  int steps = static_cast<int>(std::ceil(T / dt - 1e-12));
  trace.times.push_back(0);
  trace.states.push_back(x);
  trace.inputs.push_back(u);
  for (int k = 0; k < steps; ++k) {
    double h = std::min(dt, T - t);
    Eigen::VectorXd w = dist.at(t);
    Eigen::VectorXd k1 = m.eval(x, u, w);
    Eigen::VectorXd k2 = m.eval(x + 0.5 * h * k1, u, dist.at(t + 0.5 * h));
    Eigen::VectorXd k3 = m.eval(x + 0.5 * h * k2, u, dist.at(t + 0.5 * h));
    Eigen::VectorXd k4 = m.eval(x + h * k3, u, dist.at(t + h));
    x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
    if (!x.allFinite())
      throw std::runtime_error("integrate: non-finite state at step " + std::to_string(k));
    if (t >= next_control - 1e-12) {
      u = m.clamp_input(controller(t, x));
      next_control += control_dt;
    }
    trace.times.push_back(t);
    trace.states.push_back(x);
    trace.inputs.push_back(u);
  }
  return trace;
}

}  // namespace funnelkit::models
