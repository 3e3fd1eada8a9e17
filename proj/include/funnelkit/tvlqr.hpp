#pragma once

// Time-varying linearization along a nominal trajectory and backward
// Riccati integration: the initializing controller and Lyapunov candidate
// for funnel synthesis.

#include <optional>
#include <vector>

#include "funnelkit/models/model.hpp"

namespace funnelkit::tvlqr {

struct NominalTrajectory {
  std::vector<double> times;            // strictly increasing
  std::vector<Eigen::VectorXd> states;  // one per time
  std::vector<Eigen::VectorXd> inputs;  // one per time

  double horizon() const { return times.empty() ? 0.0 : times.back() - times.front(); }

  void validate() const {
    if (times.size() < 2) throw std::invalid_argument("NominalTrajectory: need >= 2 samples");
    if (states.size() != times.size() || inputs.size() != times.size())
      throw std::invalid_argument("NominalTrajectory: size mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (times[i] <= times[i - 1])
        throw std::invalid_argument("NominalTrajectory: times must increase");
  }

  std::size_t segment(double t) const {
    std::size_t k = 0;
    while (k + 2 < times.size() && t >= times[k + 1]) ++k;
    return k;
  }

  // piecewise cubic (Catmull-Rom slopes) state interpolation
  Eigen::VectorXd state_at(double t) const {
    std::size_t k = segment(t);
    double h = times[k + 1] - times[k];
    double s = std::min(1.0, std::max(0.0, (t - times[k]) / h));
    const Eigen::VectorXd &p0 = states[k], &p1 = states[k + 1];
    Eigen::VectorXd m0 = slope(k), m1 = slope(k + 1);
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * h * m0 +
           (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * h * m1;
  }

  // piecewise linear input interpolation
  Eigen::VectorXd input_at(double t) const {
    std::size_t k = segment(t);
    double h = times[k + 1] - times[k];
    double s = std::min(1.0, std::max(0.0, (t - times[k]) / h));
    return (1 - s) * inputs[k] + s * inputs[k + 1];
  }

  // resample onto a uniform grid of n points over the horizon
  NominalTrajectory resample(int n) const {
    NominalTrajectory out;
    for (int i = 0; i < n; ++i) {
      double t = times.front() + (times.back() - times.front()) * i / (n - 1);
      out.times.push_back(t);
      out.states.push_back(state_at(t));
      out.inputs.push_back(input_at(t));
    }
    return out;
  }

 private:
  Eigen::VectorXd slope(std::size_t k) const {
    if (k == 0) return (states[1] - states[0]) / (times[1] - times[0]);
    if (k + 1 == times.size())
      return (states[k] - states[k - 1]) / (times[k] - times[k - 1]);
    return (states[k + 1] - states[k - 1]) / (times[k + 1] - times[k - 1]);
  }
};

struct Linearization {
  std::vector<Eigen::MatrixXd> A, B;  // one per trajectory sample
};

// Jacobians of f w.r.t. x and u along the nominal, from the degree-1
// Taylor coefficients of the dynamics trees.
inline Linearization linearize(const models::Model& m, const NominalTrajectory& traj) {
  traj.validate();
  Linearization lin;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    Eigen::VectorXd center = m.pack(traj.states[k], traj.inputs[k], m.w_nominal);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m.nx, m.nx);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m.nx, m.nu);
    for (int i = 0; i < m.nx; ++i) {
      Polynomial lin1 = taylor_expand(m.f[i], center, 1);
      for (int j = 0; j < m.nx; ++j) A(i, j) = lin1.coeff(Monomial::var(m.var_x(j)));
      for (int j = 0; j < m.nu; ++j) B(i, j) = lin1.coeff(Monomial::var(m.var_u(j)));
    }
    lin.A.push_back(A);
    lin.B.push_back(B);
  }
  return lin;
}

struct TvlqrResult {
  std::vector<Eigen::MatrixXd> S;  // value matrices, one per sample, S(t_N) = S_f
  std::vector<Eigen::MatrixXd> K;  // gains K = R^-1 B' S
  Eigen::MatrixXd Q, R, S_f;
};

// Backward RK4 integration of
//   -Sdot = Q - S B R^-1 B' S + S A + A' S
// on the sample grid with substeps; A(t), B(t) interpolate linearly.
inline TvlqrResult solve_riccati(const std::vector<Eigen::MatrixXd>& A,
                                 const std::vector<Eigen::MatrixXd>& B,
                                 const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                 const Eigen::MatrixXd& S_f,
                                 const std::vector<double>& times, int substeps = 8) {
  const int N = static_cast<int>(times.size());
  if (static_cast<int>(A.size()) != N || static_cast<int>(B.size()) != N)
    throw std::invalid_argument("solve_riccati: A/B size mismatch");
  Eigen::LLT<Eigen::MatrixXd> rllt(R);
  if (rllt.info() != Eigen::Success) throw std::invalid_argument("solve_riccati: R not spd");

  auto interp = [&](const std::vector<Eigen::MatrixXd>& M, double t) {
    int k = 0;
    while (k + 2 < N && t >= times[k + 1]) ++k;
    double s = (t - times[k]) / (times[k + 1] - times[k]);
    s = std::min(1.0, std::max(0.0, s));
    return ((1 - s) * M[k] + s * M[k + 1]).eval();
  };
  auto neg_sdot = [&](double t, const Eigen::MatrixXd& S) {
    Eigen::MatrixXd At = interp(A, t), Bt = interp(B, t);
    Eigen::MatrixXd SB = S * Bt;
    Eigen::MatrixXd M = Q - SB * rllt.solve(SB.transpose()) + S * At + At.transpose() * S;
    return (0.5 * (M + M.transpose().eval())).eval();
  };

  TvlqrResult out;
  out.Q = Q;
  out.R = R;
  out.S_f = S_f;
  out.S.assign(N, Eigen::MatrixXd());
  out.K.assign(N, Eigen::MatrixXd());
  out.S[N - 1] = S_f;
  for (int k = N - 1; k > 0; --k) {
    Eigen::MatrixXd S = out.S[k];
    double h = (times[k] - times[k - 1]) / substeps;
    double t = times[k];
    for (int s = 0; s < substeps; ++s) {
      // integrating backward: S(t - h) = S(t) + h * (-Sdot)
      Eigen::MatrixXd k1 = neg_sdot(t, S);
      Eigen::MatrixXd k2 = neg_sdot(t - 0.5 * h, S + 0.5 * h * k1);
      Eigen::MatrixXd k3 = neg_sdot(t - 0.5 * h, S + 0.5 * h * k2);
      Eigen::MatrixXd k4 = neg_sdot(t - h, S + h * k3);
      S = S + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
      S = 0.5 * (S + S.transpose().eval());
      t -= h;
    }
    out.S[k - 1] = S;
  }
  for (int k = 0; k < N; ++k) {
    Eigen::MatrixXd SB = out.S[k] * B[k];
    out.K[k] = rllt.solve(SB.transpose());
  }
  return out;
}

// Stabilizing solution of the continuous algebraic Riccati equation via the
// Hamiltonian's stable invariant subspace. Returns nullopt if no clean
// stabilizing solution exists (e.g. uncontrollable neutral modes).
inline std::optional<Eigen::MatrixXd> solve_care(const Eigen::MatrixXd& A,
                                                 const Eigen::MatrixXd& B,
                                                 const Eigen::MatrixXd& Q,
                                                 const Eigen::MatrixXd& R) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd Rinv = R.llt().solve(Eigen::MatrixXd::Identity(R.rows(), R.cols()));
  Eigen::MatrixXd H(2 * n, 2 * n);
  H << A, -B * Rinv * B.transpose(), -Q, -A.transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) return std::nullopt;
  Eigen::MatrixXcd V(2 * n, n);
  int found = 0;
  for (int i = 0; i < 2 * n && found < n; ++i) {
    if (es.eigenvalues()[i].real() < -1e-9) V.col(found++) = es.eigenvectors().col(i);
  }
  if (found != n) return std::nullopt;
  Eigen::MatrixXcd X1 = V.topRows(n), X2 = V.bottomRows(n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(X1);
  if (!lu.isInvertible()) return std::nullopt;
  Eigen::MatrixXcd Sc = X2 * lu.inverse();
  Eigen::MatrixXd S = Sc.real();
  S = 0.5 * (S + S.transpose().eval());
  if (Sc.imag().lpNorm<Eigen::Infinity>() > 1e-6 * (1 + S.lpNorm<Eigen::Infinity>()))
    return std::nullopt;
  Eigen::LLT<Eigen::MatrixXd> llt(S + 1e-12 * Eigen::MatrixXd::Identity(n, n));
  if (llt.info() != Eigen::Success) return std::nullopt;
  return S;
}

}  // namespace funnelkit::tvlqr
