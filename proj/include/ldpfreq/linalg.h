// Copyright 2026 The ldpfreq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LDPFREQ_LINALG_H_
#define LDPFREQ_LINALG_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ldpfreq {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// A pivot fell below tolerance: the matrix is (numerically) rank deficient.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NNLS did not reach its optimality conditions in the allotted passes.
class IterationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gauss-Jordan elimination with partial pivoting. A pivot smaller than
// tol * max|A| raises SingularMatrixError.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> invert(
    const Eigen::MatrixBase<Derived>& a,
    typename Derived::Scalar tol = typename Derived::Scalar(1e-12)) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument("invert: matrix must be square and non-empty");
  }
  const Eigen::Index n = a.rows();
  DenseMatrix<Scalar> work = a;
  DenseMatrix<Scalar> inv = DenseMatrix<Scalar>::Identity(n, n);
  const Scalar scale = std::max(Scalar(1), work.cwiseAbs().maxCoeff());

  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    work.col(col).tail(n - col).cwiseAbs().maxCoeff(&pivot);
    pivot += col;
    if (abs(work(pivot, col)) < tol * scale) {
      throw SingularMatrixError("invert: pivot below tolerance in column " +
                                std::to_string(col));
    }
    if (pivot != col) {
      work.row(col).swap(work.row(pivot));
      inv.row(col).swap(inv.row(pivot));
    }
    const Scalar d = work(col, col);
    work.row(col) /= d;
    inv.row(col) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const Scalar f = work(r, col);
      if (f == Scalar(0)) continue;
      work.row(r) -= f * work.row(col);
      inv.row(r) -= f * inv.row(col);
    }
  }
  return inv;
}

template <typename Scalar>
struct NnlsResult {
  DenseVector<Scalar> x;
  // ||A x - y||_2 at the returned x.
  Scalar residual;
  int iterations;
};

// Lawson-Hanson active-set solver for min ||A x - y||_2 subject to x >= 0.
// max_iter bounds the number of outer passes (one variable freed per pass);
// <= 0 selects 10 * cols(A).
template <typename DerivedA, typename DerivedY>
NnlsResult<typename DerivedA::Scalar> nnls(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedY>& y,
    typename DerivedA::Scalar tol = typename DerivedA::Scalar(1e-10),
    int max_iter = 0) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index h = a.rows();
  const Eigen::Index w = a.cols();
  if (h < 1 || w < 1) throw std::invalid_argument("nnls: empty design matrix");
  if (y.size() != h) throw std::invalid_argument("nnls: target length mismatch");
  if (max_iter <= 0) max_iter = static_cast<int>(10 * w);
  if (max_iter < w) throw std::invalid_argument("nnls: max_iter must be >= cols(A)");

  const DenseMatrix<Scalar> am = a;
  const DenseVector<Scalar> ym = y;
  DenseVector<Scalar> x = DenseVector<Scalar>::Zero(w);
  std::vector<bool> passive(static_cast<std::size_t>(w), false);

  // Unconstrained least squares over the passive columns; zero elsewhere.
  auto solve_passive = [&]() {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < w; ++j) {
      if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    }
    DenseMatrix<Scalar> sub(h, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      sub.col(static_cast<Eigen::Index>(c)) = am.col(cols[c]);
    }
    const DenseVector<Scalar> zs = sub.colPivHouseholderQr().solve(ym);
    DenseVector<Scalar> z = DenseVector<Scalar>::Zero(w);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      z[cols[c]] = zs[static_cast<Eigen::Index>(c)];
    }
    return z;
  };

  int iter = 0;
  DenseVector<Scalar> grad = am.transpose() * (ym - am * x);
  for (;;) {
    Eigen::Index best = -1;
    Scalar best_val = tol;
    for (Eigen::Index j = 0; j < w; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad[j] > best_val) {
        best_val = grad[j];
        best = j;
      }
    }
    if (best < 0) break;
    if (++iter > max_iter) {
      throw IterationLimitError("nnls: no convergence within " +
                                std::to_string(max_iter) + " passes");
    }
    passive[static_cast<std::size_t>(best)] = true;

    DenseVector<Scalar> z = solve_passive();
    for (;;) {
      Scalar alpha = std::numeric_limits<Scalar>::infinity();
      for (Eigen::Index j = 0; j < w; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= Scalar(0)) {
          alpha = std::min(alpha, x[j] / (x[j] - z[j]));
        }
      }
      if (!std::isfinite(alpha)) break;
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < w; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = Scalar(0);
        }
      }
      z = solve_passive();
    }
    x = z;
    grad = am.transpose() * (ym - am * x);
    // The freshly added variable cannot re-enter with a positive gradient.
    grad[best] = std::min(grad[best], Scalar(0));
  }
  return {x, (am * x - ym).norm(), iter};
}

}  // namespace ldpfreq

#endif  // LDPFREQ_LINALG_H_
