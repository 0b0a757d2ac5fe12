#pragma once

#include "hdrprobe/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace hdrprobe {

struct NnlsOptions {
  /// Absolute tolerance on the dual (gradient) feasibility test.
  double tolerance = 1e-10;
  /// Bound on active-set passes (outer plus inner); 0 selects 3n + 50.
  int max_iterations = 0;
};

template <typename Scalar>
struct NnlsResult {
  Vec<Scalar> x;
  int iterations = 0;
  /// max(max_j -g_j, |x . g|, 0) with g = A^T (A x - b).
  Scalar kkt_residual = 0;
  /// 0.5 * ||A x - b||^2
  Scalar objective = 0;
};

/// KKT violation of a candidate x for min ||Ax - b|| s.t. x >= 0.
template <typename DerivedA, typename DerivedB, typename DerivedX>
typename DerivedA::Scalar nnls_kkt_residual(const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedB>& b,
                                            const Eigen::MatrixBase<DerivedX>& x) {
  using Scalar = typename DerivedA::Scalar;
  const Vec<Scalar> g = A.transpose() * (A * x - b);
  Scalar violation = std::max(Scalar(0), -x.minCoeff());
  if (g.size() > 0) violation = std::max(violation, -g.minCoeff());
  return std::max(violation, Scalar(std::abs(x.dot(g))));
}

/// Lawson-Hanson active-set non-negative least squares:
/// x = argmin ||A x - b||_2 subject to x >= 0.
///
/// Throws ConvergenceError when the pass bound is exceeded.
template <typename DerivedA, typename DerivedB>
NnlsResult<typename DerivedA::Scalar> nnls(const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedB>& b,
                                           const NnlsOptions& options = {}) {
  using Scalar = typename DerivedA::Scalar;
  using Index = Eigen::Index;
  const Index m = A.rows();
  const Index n = A.cols();
  if (b.size() != m) {
    throw DomainError("nnls: right-hand side length does not match row count");
  }
  if (n == 0) {
    throw DomainError("nnls: system has no columns");
  }
  const Scalar tol = Scalar(options.tolerance);
  const int max_iterations = options.max_iterations > 0 ? options.max_iterations : int(3 * n + 50);

  Vec<Scalar> x = Vec<Scalar>::Zero(n);
  Vec<Scalar> z = Vec<Scalar>::Zero(n);
  std::vector<bool> passive(std::size_t(n), false);
  // Columns whose admission produced a non-positive coefficient at the
  // current x; cleared whenever x moves.
  std::vector<bool> blocked(std::size_t(n), false);

  auto solve_passive = [&](Vec<Scalar>& out) {
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j) {
      if (passive[std::size_t(j)]) cols.push_back(j);
    }
    out.setZero();
    if (cols.empty()) return;
    Mat<Scalar> sub(m, Index(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(Index(k)) = A.col(cols[k]);
    const Vec<Scalar> sol = sub.colPivHouseholderQr().solve(b);
    for (std::size_t k = 0; k < cols.size(); ++k) out(cols[k]) = sol(Index(k));
  };

  int iterations = 0;
  auto bump = [&] {
    if (++iterations > max_iterations) {
      throw ConvergenceError("nnls: iteration bound of " + std::to_string(max_iterations) + " exceeded",
                             nnls_kkt_residual(A, b, x));
    }
  };

  Vec<Scalar> w = A.transpose() * (b - A * x);
  for (;;) {
    Index best = -1;
    Scalar best_w = tol;
    for (Index j = 0; j < n; ++j) {
      if (!passive[std::size_t(j)] && !blocked[std::size_t(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    bump();

    passive[std::size_t(best)] = true;
    solve_passive(z);
    if (z(best) <= Scalar(0)) {
      passive[std::size_t(best)] = false;
      blocked[std::size_t(best)] = true;
      continue;
    }

    for (;;) {
      Scalar alpha = Scalar(1);
      Index limiting = -1;
      for (Index j = 0; j < n; ++j) {
        if (passive[std::size_t(j)] && z(j) <= Scalar(0)) {
          const Scalar denom = x(j) - z(j);
          const Scalar step = denom > Scalar(0) ? x(j) / denom : Scalar(0);
          if (limiting < 0 || step < alpha) {
            alpha = step;
            limiting = j;
          }
        }
      }
      if (limiting < 0) break;
      bump();
      x += alpha * (z - x);
      x(limiting) = Scalar(0);
      for (Index j = 0; j < n; ++j) {
        if (passive[std::size_t(j)] && x(j) <= Scalar(0)) {
          passive[std::size_t(j)] = false;
          x(j) = Scalar(0);
        }
      }
      solve_passive(z);
    }
    x = z;
    std::fill(blocked.begin(), blocked.end(), false);
    w = A.transpose() * (b - A * x);
  }

  NnlsResult<Scalar> result;
  result.x = std::move(x);
  result.iterations = iterations;
  result.kkt_residual = nnls_kkt_residual(A, b, result.x);
  result.objective = Scalar(0.5) * (A * result.x - b).squaredNorm();
  return result;
}

}  // namespace hdrprobe
