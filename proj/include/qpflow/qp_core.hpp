#pragma once

// Quasi-polynomial systems
//
//   dx_i/dt = x_i * sum_j A_ij * prod_k x_k^B_jk,   i = 1..n, j = 1..N
//
// and their Lotka-Volterra canonical form du_j/dt = u_j * sum_l M_jl u_l.
// All types are immutable after construction and validated on entry.

#include <Eigen/Dense>

namespace qpflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Reciprocal condition estimate below which a matrix is treated as singular.
inline constexpr double kSingularRcond = 1e-12;

class QpSystem {
 public:
  // Throws Error{DimensionMismatch | NonPositiveInitialCondition |
  // NonFiniteEntry}.
  QpSystem(Matrix A, Matrix B, Vector x0);

  int n() const noexcept { return static_cast<int>(A_.rows()); }
  int N() const noexcept { return static_cast<int>(A_.cols()); }
  const Matrix& A() const noexcept { return A_; }
  const Matrix& B() const noexcept { return B_; }
  const Vector& x0() const noexcept { return x0_; }

  // Same matrices, different initial condition.
  QpSystem with_initial(Vector x0) const;

 private:
  Matrix A_;
  Matrix B_;
  Vector x0_;
};

class LvSystem {
 public:
  LvSystem(Matrix M, Vector u0);

  int N() const noexcept { return static_cast<int>(M_.rows()); }
  const Matrix& M() const noexcept { return M_; }
  const Vector& u0() const noexcept { return u0_; }

  LvSystem with_initial(Vector u0) const;

 private:
  Matrix M_;
  Vector u0_;
};

// Change of variables x_i = prod_k y_k^C_ik. Construction factors C with
// partial pivoting and rejects it as SingularTransform when the reciprocal
// condition estimate is below kSingularRcond.
class QmTransform {
 public:
  explicit QmTransform(Matrix C);

  const Matrix& C() const noexcept { return C_; }
  const Matrix& inverse() const noexcept { return C_inv_; }
  double rcond() const noexcept { return rcond_; }

  // x = prod y^C, for y in the positive cone.
  Vector to_original(const Vector& y) const;
  // y such that x = prod y^C, i.e. log y = C^-1 log x.
  Vector to_transformed(const Vector& x) const;

 private:
  Matrix C_;
  Matrix C_inv_;
  double rcond_;
};

struct LvEmbedding {
  QpSystem source;
  LvSystem lv;
};

QpSystem new_qp_system(Matrix A, Matrix B, Vector x0);

// u_j = prod_k x_k^B_jk. Throws NonPositiveState unless x is strictly
// positive with length n.
Vector evaluate_monomials(const QpSystem& sys, const Vector& x);

// dx_i/dt = x_i * sum_j A_ij u_j.
Vector rhs(const QpSystem& sys, const Vector& x);

// du_j/dt = u_j * sum_l M_jl u_l.
Vector rhs(const LvSystem& sys, const Vector& u);

Matrix invariant_matrix(const QpSystem& sys);

// A' = C^-1 A, B' = B C, x0' with x0 = prod x0'^C.
QpSystem quasimonomial_transform(const QpSystem& sys, const QmTransform& T);

// Monomial embedding: M = BA and u0 = evaluate_monomials(x0). Never inverts B,
// so it covers non-square and singular systems.
LvEmbedding to_lotka_volterra(const QpSystem& sys);

// Square systems with invertible B: transform by C = B^-1, giving B' = I and
// A' = BA. Throws NotSquare or SingularB.
QpSystem square_canonicalize(const QpSystem& sys);

}  // namespace qpflow
