#include <catch2/catch_amalgamated.hpp>

#include "funnelkit/models/dubins.hpp"
#include "funnelkit/tvlqr.hpp"

using namespace funnelkit;
using namespace funnelkit::tvlqr;

namespace {
// scalar integrator xdot = u as a Model
models::Model scalar_integrator() {
  models::Model m;
  m.name = "integrator";
  m.nx = 1;
  m.nu = 1;
  m.nw = 0;
  m.f = {Expr::var(1)};
  m.eval = [](const Eigen::VectorXd&, const Eigen::VectorXd& u, const Eigen::VectorXd&) {
    return u;
  };
  m.u_min = Eigen::VectorXd::Constant(1, -1e9);
  m.u_max = Eigen::VectorXd::Constant(1, 1e9);
  m.w_lo.resize(0);
  m.w_hi.resize(0);
  m.w_nominal.resize(0);
  return m;
}

NominalTrajectory rest_trajectory(int nx, int nu, double T, int n) {
  NominalTrajectory traj;
  for (int i = 0; i < n; ++i) {
    traj.times.push_back(T * i / (n - 1));
    traj.states.push_back(Eigen::VectorXd::Zero(nx));
    traj.inputs.push_back(Eigen::VectorXd::Zero(nu));
  }
  return traj;
}
}  // namespace

TEST_CASE("linearize dubins at straight-line nominal") {
  auto m = models::make_dubins();
  NominalTrajectory traj = rest_trajectory(4, 1, 1.0, 5);
  auto lin = linearize(m, traj);
  // at psi = 0, v = 10: d(xdot)/dpsi = -10, d(ydot)/dpsi = 0
  REQUIRE(lin.A[0](0, 2) == Catch::Approx(-10.0));
  REQUIRE(lin.A[0](1, 2) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(lin.A[0](2, 3) == Catch::Approx(1.0));
  REQUIRE(lin.B[0](3, 0) == Catch::Approx(1.0));
}

TEST_CASE("linear system linearization is constant") {
  auto m = scalar_integrator();
  NominalTrajectory traj = rest_trajectory(1, 1, 2.0, 7);
  auto lin = linearize(m, traj);
  for (auto& A : lin.A) REQUIRE(A(0, 0) == Catch::Approx(0.0).margin(1e-14));
  for (auto& B : lin.B) REQUIRE(B(0, 0) == Catch::Approx(1.0));
}

TEST_CASE("riccati: algebraic fixed point stays put") {
  // xdot = u, Q = R = 1, S_f = 1: ARE 0 = 1 - S^2 -> S = 1, K = 1
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> A, B;
  for (int i = 0; i <= 10; ++i) {
    times.push_back(i * 0.2);
    A.push_back(Eigen::MatrixXd::Zero(1, 1));
    B.push_back(Eigen::MatrixXd::Ones(1, 1));
  }
  auto res = solve_riccati(A, B, Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
                           Eigen::MatrixXd::Ones(1, 1), times);
  for (auto& S : res.S) REQUIRE(S(0, 0) == Catch::Approx(1.0).margin(1e-9));
  for (auto& K : res.K) REQUIRE(K(0, 0) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("riccati: zero data gives zero") {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> A, B;
  for (int i = 0; i <= 5; ++i) {
    times.push_back(i * 0.1);
    A.push_back(Eigen::MatrixXd::Random(1, 1));
    B.push_back(Eigen::MatrixXd::Ones(1, 1));
  }
  auto res = solve_riccati(A, B, Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1),
                           Eigen::MatrixXd::Zero(1, 1), times);
  for (auto& S : res.S) REQUIRE(std::abs(S(0, 0)) < 1e-12);
}

TEST_CASE("riccati: long horizon converges to the ARE root") {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> A, B;
  int N = 101;
  for (int i = 0; i < N; ++i) {
    times.push_back(i * 0.1);
    A.push_back(Eigen::MatrixXd::Zero(1, 1));
    B.push_back(Eigen::MatrixXd::Ones(1, 1));
  }
  auto res = solve_riccati(A, B, Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
                           Eigen::MatrixXd::Zero(1, 1), times);
  REQUIRE(res.S[0](0, 0) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("riccati on dubins: symmetric, psd, step-doubling converges") {
  auto m = models::make_dubins();
  NominalTrajectory traj = rest_trajectory(4, 1, 0.5, 15);
  auto lin = linearize(m, traj);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(4, 4);
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(1, 1);
  Eigen::MatrixXd Sf = Eigen::MatrixXd::Identity(4, 4);
  auto r8 = solve_riccati(lin.A, lin.B, Q, R, Sf, traj.times, 8);
  auto r16 = solve_riccati(lin.A, lin.B, Q, R, Sf, traj.times, 16);
  for (auto& S : r8.S) {
    REQUIRE((S - S.transpose()).lpNorm<Eigen::Infinity>() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    REQUIRE(es.eigenvalues().minCoeff() >= -1e-8);
  }
  double rel = (r8.S[0] - r16.S[0]).norm() / r16.S[0].norm();
  REQUIRE(rel <= 1e-6);
}

TEST_CASE("closed-loop linearized simulation decays in the ARE regime") {
  // xdot = u with long horizon; u = -Kx with K from tvlqr; x should decay
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> A, B;
  int N = 81;
  for (int i = 0; i < N; ++i) {
    times.push_back(i * 0.1);
    A.push_back(Eigen::MatrixXd::Zero(1, 1));
    B.push_back(Eigen::MatrixXd::Ones(1, 1));
  }
  auto res = solve_riccati(A, B, Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
                           Eigen::MatrixXd::Zero(1, 1), times);
  double x = 0.5;
  double dt = 0.01;
  for (double t = 0; t < 4.0; t += dt) {
    int k = std::min<int>(N - 1, static_cast<int>(t / 0.1));
    x += dt * (-res.K[k](0, 0) * x);
  }
  REQUIRE(std::abs(x) < 0.01);
}

TEST_CASE("care solve recovers scalar root and rejects uncontrollable marginal modes") {
  auto S = solve_care(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1),
                      Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1));
  REQUIRE(S.has_value());
  REQUIRE((*S)(0, 0) == Catch::Approx(1.0).margin(1e-9));

  // uncontrollable neutral mode: A = 0, B = 0 in that coordinate
  Eigen::MatrixXd A2 = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd B2 = Eigen::MatrixXd::Zero(2, 1);
  B2(0, 0) = 1;
  auto S2 = solve_care(A2, B2, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Ones(1, 1));
  REQUIRE_FALSE(S2.has_value());
}

TEST_CASE("trajectory interpolation hits samples and stays smooth") {
  NominalTrajectory traj;
  for (int i = 0; i <= 4; ++i) {
    traj.times.push_back(i * 0.25);
    Eigen::VectorXd s(1), u(1);
    s << std::sin(i * 0.25 * 3.0);
    u << i * 1.0;
    traj.states.push_back(s);
    traj.inputs.push_back(u);
  }
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    REQUIRE(traj.state_at(traj.times[i])[0] == Catch::Approx(traj.states[i][0]).margin(1e-12));
    REQUIRE(traj.input_at(traj.times[i])[0] == Catch::Approx(traj.inputs[i][0]).margin(1e-12));
  }
  // cubic interpolation of sin stays close to truth between samples
  for (double t = 0; t <= 1.0; t += 0.01)
    REQUIRE(traj.state_at(t)[0] == Catch::Approx(std::sin(3.0 * t)).margin(0.02));
}
