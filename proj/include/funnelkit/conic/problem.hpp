#pragma once

// Dense conic problem containers shared by the SDP and max-det solvers.
//
// Primal form:
//   min  sum_b <C_b, X_b> + c_free' u + const   -  sum_b w_b logdet(X_b)
//   s.t. sum_b <A_{i,b}, X_b> + f_i' u = b_i    for each row i
//        X_b psd,  u free
//
// Symmetric matrices are handled in scaled svec coordinates so that
// <A, X> = svec(A)' svec(X); svec packs the upper triangle column-major
// with off-diagonal entries scaled by sqrt(2).

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace funnelkit::conic {

inline int svec_len(int n) { return n * (n + 1) / 2; }
inline int svec_index(int i, int j) {  // requires i <= j
  return j * (j + 1) / 2 + i;
}

inline Eigen::VectorXd svec(const Eigen::MatrixXd& S) {
  const int n = static_cast<int>(S.rows());
  Eigen::VectorXd v(svec_len(n));
  const double r2 = std::sqrt(2.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) v[svec_index(i, j)] = (i == j) ? S(i, j) : r2 * S(i, j);
  return v;
}

inline Eigen::MatrixXd smat(const Eigen::VectorXd& v, int n) {
  Eigen::MatrixXd S(n, n);
  const double ir2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      double x = v[svec_index(i, j)];
      if (i == j) S(i, j) = x;
      else S(i, j) = S(j, i) = ir2 * x;
    }
  return S;
}

struct SdpProblem {
  std::vector<int> block_dims;
  std::vector<double> logdet_weight;  // one per block; 0 = plain psd block

  int num_free = 0;

  std::vector<Eigen::MatrixXd> C;  // objective block matrices (may be left empty = zero)
  Eigen::VectorXd c_free;          // objective on free variables
  double cost_const = 0.0;

  struct Row {
    // per-block svec entries: (block, svec index, value)
    struct Entry { int block; int idx; double val; };
    std::vector<Entry> mat;
    std::vector<std::pair<int, double>> free_terms;  // (free var index, coeff)
    double rhs = 0.0;
  };
  std::vector<Row> rows;

  int add_block(int dim, double logdet_w = 0.0) {
    if (dim < 1) throw std::invalid_argument("SdpProblem: block dim must be >= 1");
    block_dims.push_back(dim);
    logdet_weight.push_back(logdet_w);
    C.emplace_back(Eigen::MatrixXd::Zero(dim, dim));
    return static_cast<int>(block_dims.size()) - 1;
  }
  int add_free(int count = 1) {
    int first = num_free;
    num_free += count;
    return first;
  }

  // Adds coefficient c on the unordered entry X_ij (== X_ji) of a block row.
  static void row_add_entry(Row& row, int block, int i, int j, double c) {
    if (i > j) std::swap(i, j);
    double v = (i == j) ? c : c / std::sqrt(2.0);
    row.mat.push_back({block, svec_index(i, j), v});
  }

  void validate() const {
    for (std::size_t b = 0; b < block_dims.size(); ++b) {
      if (!C.empty() && (C[b].rows() != block_dims[b] || C[b].cols() != block_dims[b]))
        throw std::invalid_argument("SdpProblem: C dim mismatch");
      if (logdet_weight[b] < 0) throw std::invalid_argument("SdpProblem: negative logdet weight");
    }
    if (c_free.size() != 0 && c_free.size() != num_free)
      throw std::invalid_argument("SdpProblem: c_free dim mismatch");
    for (auto& r : rows) {
      if (!std::isfinite(r.rhs)) throw std::invalid_argument("SdpProblem: non-finite rhs");
      for (auto& e : r.mat)
        if (e.block < 0 || e.block >= static_cast<int>(block_dims.size()) ||
            e.idx < 0 || e.idx >= svec_len(block_dims[e.block]))
          throw std::invalid_argument("SdpProblem: row entry out of range");
      for (auto& [k, v] : r.free_terms)
        if (k < 0 || k >= num_free) throw std::invalid_argument("SdpProblem: free index out of range");
    }
  }

  bool has_logdet() const {
    for (double w : logdet_weight)
      if (w > 0) return true;
    return false;
  }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::MaxIter: return "MaxIter";
  }
  return "?";
}

struct SdpSolution {
  SolveStatus status = SolveStatus::MaxIter;
  std::vector<Eigen::MatrixXd> X;  // primal blocks
  std::vector<Eigen::MatrixXd> Z;  // dual slacks (linear path only)
  Eigen::VectorXd free_vals;
  Eigen::VectorXd y;  // equality multipliers; on Infeasible, the improving ray
  double primal_obj = 0.0, dual_obj = 0.0;
  double primal_res = 0.0, dual_res = 0.0, gap = 0.0;
  int iterations = 0;
};

struct SolveOptions {
  double tol = 1e-7;
  int max_iter = 200;
  double infeas_margin = 1e-6;
  bool trace = false;  // print per-iteration diagnostics
  // test hook: called with (pobj, dobj, gap) each iteration
  std::function<void(double, double, double)> iter_callback;
};

}  // namespace funnelkit::conic
