#pragma once

// Shared KKT machinery for the interior-point solvers: per-block row
// indexing, Schur complement assembly M = sum_b A_b (W (.) W) A_b' with
// W = R R', and the augmented solve carrying the free-variable columns.

#include <algorithm>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "funnelkit/conic/problem.hpp"

namespace funnelkit::conic::detail {

inline const std::vector<std::pair<int, int>>& svec_coords(int dim) {
  thread_local std::vector<std::vector<std::pair<int, int>>> cache;
  if (static_cast<int>(cache.size()) <= dim) cache.resize(dim + 1);
  auto& tab = cache[dim];
  if (tab.empty() && dim > 0) {
    tab.resize(svec_len(dim));
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i <= j; ++i) tab[svec_index(i, j)] = {i, j};
  }
  return tab;
}

struct BlockRows {
  struct Touch {
    int row;
    std::vector<std::pair<int, double>> entries;  // (svec index, value)
  };
  std::vector<std::vector<Touch>> per_block;
  std::vector<std::vector<std::pair<int, double>>> free_by_row;
  Eigen::VectorXd b;
  int m = 0;

  explicit BlockRows(const SdpProblem& p) {
    m = static_cast<int>(p.rows.size());
    per_block.resize(p.block_dims.size());
    free_by_row.resize(m);
    b.resize(m);
    std::vector<std::vector<std::pair<int, double>>> scratch(p.block_dims.size());
    for (int i = 0; i < m; ++i) {
      const auto& r = p.rows[i];
      b[i] = r.rhs;
      free_by_row[i] = r.free_terms;
      for (auto& s : scratch) s.clear();
      for (auto& e : r.mat) scratch[e.block].emplace_back(e.idx, e.val);
      for (std::size_t bk = 0; bk < scratch.size(); ++bk) {
        if (scratch[bk].empty()) continue;
        auto& v = scratch[bk];
        std::sort(v.begin(), v.end());
        std::vector<std::pair<int, double>> merged;
        for (auto& [idx, val] : v) {
          if (!merged.empty() && merged.back().first == idx) merged.back().second += val;
          else merged.emplace_back(idx, val);
        }
        per_block[bk].push_back({i, std::move(merged)});
      }
    }
  }

  Eigen::VectorXd apply(const std::vector<Eigen::VectorXd>& svecs) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    for (std::size_t bk = 0; bk < per_block.size(); ++bk)
      for (auto& t : per_block[bk]) {
        double s = 0;
        for (auto& [idx, val] : t.entries) s += val * svecs[bk][idx];
        out[t.row] += s;
      }
    return out;
  }

  Eigen::MatrixXd adjoint_block(std::size_t bk, const Eigen::VectorXd& y, int dim) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(svec_len(dim));
    for (auto& t : per_block[bk]) {
      double yi = y[t.row];
      if (yi == 0.0) continue;
      for (auto& [idx, val] : t.entries) v[idx] += val * yi;
    }
    return smat(v, dim);
  }

  Eigen::VectorXd apply_free(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    if (u.size() == 0) return out;
    for (int i = 0; i < m; ++i)
      for (auto& [k, c] : free_by_row[i]) out[i] += c * u[k];
    return out;
  }

  Eigen::VectorXd adjoint_free(const Eigen::VectorXd& y, int nf) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nf);
    for (int i = 0; i < m; ++i)
      for (auto& [k, c] : free_by_row[i]) out[k] += c * y[i];
    return out;
  }

  // Unpacks one row's block entries into a dense symmetric matrix.
  static void unpack(const Touch& t, int dim, Eigen::MatrixXd& S) {
    S.setZero();
    const double ir2 = 1.0 / std::sqrt(2.0);
    const auto& coords = svec_coords(dim);
    for (auto& [idx, val] : t.entries) {
      auto [i, j] = coords[idx];
      if (i == j) S(i, j) = val;
      else { S(i, j) = val * ir2; S(j, i) = val * ir2; }
    }
  }
};

class KktSolver {
 public:
  KktSolver(const SdpProblem& p, const BlockRows& br) : p_(p), br_(br) {
    m_ = br.m;
    nf_ = p.num_free;
    n_ = m_ + nf_;
    dense_ = n_ <= 700;
    if (!dense_) {
      std::vector<Eigen::Triplet<double>> trips;
      for (auto& touches : br_.per_block)
        for (std::size_t a = 0; a < touches.size(); ++a)
          for (std::size_t c = 0; c < touches.size(); ++c)
            trips.emplace_back(touches[a].row, touches[c].row, 0.0);
      for (int i = 0; i < m_; ++i)
        for (auto& [k, v] : br_.free_by_row[i]) {
          trips.emplace_back(i, m_ + k, 0.0);
          trips.emplace_back(m_ + k, i, 0.0);
        }
      for (int i = 0; i < n_; ++i) trips.emplace_back(i, i, 0.0);
      pattern_.resize(n_, n_);
      pattern_.setFromTriplets(trips.begin(), trips.end());
      pattern_.makeCompressed();
      ldlt_.analyzePattern(pattern_);
    }
  }

  void factor(const std::vector<Eigen::MatrixXd>& scale_R) {
    if (dense_) {
      Kd_ = Eigen::MatrixXd::Zero(n_, n_);
      auto add = [&](int i, int j, double v) { Kd_(i, j) += v; };
      assemble(scale_R, add);
      for (int i = 0; i < m_; ++i) Kd_(i, i) += reg_;
      for (int i = m_; i < n_; ++i) Kd_(i, i) -= reg_;
      dense_lu_.compute(Kd_);
      return;
    }
    Ks_ = pattern_;
    auto add = [&](int i, int j, double v) { Ks_.coeffRef(i, j) += v; };
    assemble(scale_R, add);
    for (int i = 0; i < m_; ++i) Ks_.coeffRef(i, i) += reg_;
    for (int i = m_; i < n_; ++i) Ks_.coeffRef(i, i) -= reg_;
    ldlt_.factorize(Ks_);
    if (ldlt_.info() != Eigen::Success) {
      for (int i = 0; i < n_; ++i) Ks_.coeffRef(i, i) += (i < m_ ? 1.0 : -1.0) * 1e3 * reg_;
      ldlt_.factorize(Ks_);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2) const {
    Eigen::VectorXd rhs(n_);
    rhs.head(m_) = r1;
    if (nf_ > 0) rhs.tail(nf_) = r2;
    Eigen::VectorXd x = dense_ ? dense_lu_.solve(rhs).eval() : ldlt_.solve(rhs).eval();
    // iterative refinement: ill-conditioned scalings near degenerate optima
    // would otherwise stall the outer iteration on the primal residual
    for (int round = 0; round < 2; ++round) {
      Eigen::VectorXd resid = rhs - (dense_ ? (Kd_ * x).eval() : (Ks_ * x).eval());
      double rn = resid.lpNorm<Eigen::Infinity>();
      if (rn <= 1e-13 * (1 + rhs.lpNorm<Eigen::Infinity>())) break;
      x += dense_ ? dense_lu_.solve(resid).eval() : ldlt_.solve(resid).eval();
    }
    return x;
  }

  int m() const { return m_; }
  int nf() const { return nf_; }

 private:
  template <class AddFn>
  void assemble(const std::vector<Eigen::MatrixXd>& R, AddFn&& add) const {
    for (std::size_t bk = 0; bk < br_.per_block.size(); ++bk) {
      const auto& touches = br_.per_block[bk];
      if (touches.empty()) continue;
      const int d = p_.block_dims[bk];
      Eigen::MatrixXd G(static_cast<int>(touches.size()), svec_len(d));
      Eigen::MatrixXd S(d, d), U(d, d);
      for (std::size_t t = 0; t < touches.size(); ++t) {
        BlockRows::unpack(touches[t], d, S);
        U.noalias() = R[bk].transpose() * S * R[bk];
        G.row(static_cast<int>(t)) = svec(U);
      }
      Eigen::MatrixXd MM = G * G.transpose();
      for (std::size_t a = 0; a < touches.size(); ++a)
        for (std::size_t c = 0; c < touches.size(); ++c)
          add(touches[a].row, touches[c].row, MM(a, c));
    }
    for (int i = 0; i < m_; ++i)
      for (auto& [k, v] : br_.free_by_row[i]) {
        add(i, m_ + k, v);
        add(m_ + k, i, v);
      }
  }

  const SdpProblem& p_;
  const BlockRows& br_;
  int m_ = 0, nf_ = 0, n_ = 0;
  bool dense_ = true;
  double reg_ = 1e-11;
  Eigen::MatrixXd Kd_;
  Eigen::PartialPivLU<Eigen::MatrixXd> dense_lu_;
  Eigen::SparseMatrix<double> pattern_, Ks_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

}  // namespace funnelkit::conic::detail
