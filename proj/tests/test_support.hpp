#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "qpflow/qp_core.hpp"

namespace qpflow::testing {

inline double rel_err(double got, double want) {
  const double scale = std::max(std::abs(got), std::abs(want));
  return scale == 0.0 ? 0.0 : std::abs(got - want) / scale;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

class Random {
 public:
  explicit Random(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  Matrix matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

  Vector vector(Eigen::Index size, double lo, double hi) {
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  // Identity plus a bounded perturbation: condition number stays small.
  Matrix well_conditioned(Eigen::Index n, double spread = 0.4) {
    for (;;) {
      Matrix c = Matrix::Identity(n, n) + matrix(n, n, -spread, spread);
      Eigen::PartialPivLU<Matrix> lu(c);
      if (lu.rcond() > 1e-2) return c;
    }
  }

  QpSystem system(int n, int N, double a = 2.0, double b = 1.0) {
    return QpSystem(matrix(n, N, -a, a), matrix(N, n, -b, b), vector(n, 0.2, 2.0));
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace qpflow::testing
