#include "qpflow/qp_core.hpp"

#include <cmath>
#include <string>

#include "qpflow/error.hpp"

namespace qpflow {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveInitialCondition: return "NonPositiveInitialCondition";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::NonPositiveState: return "NonPositiveState";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::SingularB: return "SingularB";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NonzeroConstantTerm: return "NonzeroConstantTerm";
    case ErrorCode::InsufficientOrder: return "InsufficientOrder";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::PositivityLoss: return "PositivityLoss";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UndeclaredVariable: return "UndeclaredVariable";
    case ErrorCode::NonPositiveInitial: return "NonPositiveInitial";
    case ErrorCode::NotQuasiPolynomial: return "NotQuasiPolynomial";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::NonFiniteEntry, std::string(what) + " has a non-finite entry");
  }
}

void require_positive(const Vector& v, ErrorCode code, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) {
      throw Error(code, std::string(what) + "[" + std::to_string(i) +
                            "] = " + std::to_string(v[i]) + " is not strictly positive");
    }
  }
}

void require_state(const Vector& x, Eigen::Index n) {
  if (x.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "state has length " + std::to_string(x.size()) + ", expected " +
                    std::to_string(n));
  }
  require_positive(x, ErrorCode::NonPositiveState, "state");
}

}  // namespace

QpSystem::QpSystem(Matrix A, Matrix B, Vector x0)
    : A_(std::move(A)), B_(std::move(B)), x0_(std::move(x0)) {
  if (A_.rows() < 1 || A_.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "A must be at least 1x1");
  }
  if (B_.rows() != A_.cols() || B_.cols() != A_.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "A is " + std::to_string(A_.rows()) + "x" + std::to_string(A_.cols()) +
                    " so B must be " + std::to_string(A_.cols()) + "x" +
                    std::to_string(A_.rows()) + ", got " + std::to_string(B_.rows()) +
                    "x" + std::to_string(B_.cols()));
  }
  if (x0_.size() != A_.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "x0 has length " + std::to_string(x0_.size()) + ", expected " +
                    std::to_string(A_.rows()));
  }
  require_finite(A_, "A");
  require_finite(B_, "B");
  require_finite(x0_, "x0");
  require_positive(x0_, ErrorCode::NonPositiveInitialCondition, "x0");
}

QpSystem QpSystem::with_initial(Vector x0) const { return QpSystem(A_, B_, std::move(x0)); }

LvSystem::LvSystem(Matrix M, Vector u0) : M_(std::move(M)), u0_(std::move(u0)) {
  if (M_.rows() < 1 || M_.rows() != M_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "M must be square and non-empty");
  }
  if (u0_.size() != M_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "u0 length does not match M");
  }
  require_finite(M_, "M");
  require_finite(u0_, "u0");
  require_positive(u0_, ErrorCode::NonPositiveInitialCondition, "u0");
}

LvSystem LvSystem::with_initial(Vector u0) const { return LvSystem(M_, std::move(u0)); }

QmTransform::QmTransform(Matrix C) : C_(std::move(C)) {
  if (C_.rows() < 1 || C_.rows() != C_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "transform matrix must be square");
  }
  require_finite(C_, "C");
  Eigen::PartialPivLU<Matrix> lu(C_);
  rcond_ = lu.rcond();
  if (!(rcond_ >= kSingularRcond)) {
    throw Error(ErrorCode::SingularTransform,
                "transform matrix is singular (rcond estimate " + std::to_string(rcond_) + ")");
  }
  C_inv_ = lu.inverse();
}

namespace {

// r_i = prod_k base_k^E_ik. pow with exponent 0 or 1 is exact, so identity
// exponent matrices reproduce their input bit for bit.
Vector power_product(const Matrix& E, const Vector& base) {
  Vector r(E.rows());
  for (Eigen::Index i = 0; i < E.rows(); ++i) {
    double p = 1.0;
    for (Eigen::Index k = 0; k < E.cols(); ++k) {
      const double e = E(i, k);
      if (e != 0.0) p *= std::pow(base[k], e);
    }
    r[i] = p;
  }
  return r;
}

}  // namespace

Vector QmTransform::to_original(const Vector& y) const {
  require_state(y, C_.rows());
  return power_product(C_, y);
}

Vector QmTransform::to_transformed(const Vector& x) const {
  require_state(x, C_.rows());
  return power_product(C_inv_, x);
}

QpSystem new_qp_system(Matrix A, Matrix B, Vector x0) {
  return QpSystem(std::move(A), std::move(B), std::move(x0));
}

Vector evaluate_monomials(const QpSystem& sys, const Vector& x) {
  require_state(x, sys.n());
  return power_product(sys.B(), x);
}

Vector rhs(const QpSystem& sys, const Vector& x) {
  const Vector u = evaluate_monomials(sys, x);
  return x.cwiseProduct(sys.A() * u);
}

Vector rhs(const LvSystem& sys, const Vector& u) {
  require_state(u, sys.N());
  return u.cwiseProduct(sys.M() * u);
}

Matrix invariant_matrix(const QpSystem& sys) { return sys.B() * sys.A(); }

QpSystem quasimonomial_transform(const QpSystem& sys, const QmTransform& T) {
  if (T.C().rows() != sys.n()) {
    throw Error(ErrorCode::DimensionMismatch, "transform dimension does not match system");
  }
  Matrix A = T.inverse() * sys.A();
  Matrix B = sys.B() * T.C();
  Vector x0 = T.to_transformed(sys.x0());
  return QpSystem(std::move(A), std::move(B), std::move(x0));
}

LvEmbedding to_lotka_volterra(const QpSystem& sys) {
  return LvEmbedding{sys, LvSystem(invariant_matrix(sys), evaluate_monomials(sys, sys.x0()))};
}

QpSystem square_canonicalize(const QpSystem& sys) {
  if (sys.n() != sys.N()) {
    throw Error(ErrorCode::NotSquare, "system has n = " + std::to_string(sys.n()) +
                                          " but N = " + std::to_string(sys.N()));
  }
  Eigen::PartialPivLU<Matrix> lu(sys.B());
  const double rc = lu.rcond();
  if (!(rc >= kSingularRcond)) {
    throw Error(ErrorCode::SingularB,
                "B is singular (rcond estimate " + std::to_string(rc) + ")");
  }
  return quasimonomial_transform(sys, QmTransform(lu.inverse()));
}

}  // namespace qpflow
