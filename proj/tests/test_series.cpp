#include <cmath>
#include <limits>

#include "doctest.h"
#include "qpflow/error.hpp"
#include "qpflow/oracle.hpp"
#include "qpflow/series.hpp"
#include "test_support.hpp"

using namespace qpflow;
using qpflow::testing::Random;
using qpflow::testing::rel_err;

namespace {

Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }
Vector scalar_vector(double v) { return Vector::Constant(1, v); }

// Direct convolution, written independently of series_product.
SeriesRow convolve(const SeriesRow& a, const SeriesRow& b, int K) {
  SeriesRow c(static_cast<std::size_t>(K) + 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (i + j <= static_cast<std::size_t>(K)) c[i + j] += a[i] * b[j];
  return c;
}

double horner(const SeriesRow& a, double t) {
  double acc = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * t + *it;
  return acc;
}

}  // namespace

TEST_CASE("series_product") {
  const SeriesRow b{0.5, -1.0, 2.0, 3.0};
  CHECK(series_product(SeriesRow{1.0, 0.0, 0.0, 0.0}, b, 3) == b);
  CHECK(series_product(SeriesRow{1.0, 1.0}, SeriesRow{1.0, -1.0}, 2) == SeriesRow{1.0, 0.0, -1.0});

  Random rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = rng.integer(0, 12);
    SeriesRow x(static_cast<std::size_t>(K) + 1), y(static_cast<std::size_t>(K) + 1);
    for (auto& v : x) v = rng.uniform(-2, 2);
    for (auto& v : y) v = rng.uniform(-2, 2);
    const SeriesRow got = series_product(x, y, K);
    const SeriesRow want = convolve(x, y, K);
    for (int k = 0; k <= K; ++k) CHECK(got[static_cast<std::size_t>(k)] == doctest::Approx(want[static_cast<std::size_t>(k)]).epsilon(1e-14));
  }
}

TEST_CASE("series_exp") {
  const SeriesRow one = series_exp(SeriesRow(6, 0.0), 5);
  CHECK(one == SeriesRow{1, 0, 0, 0, 0, 0});

  const SeriesRow e = series_exp(SeriesRow{0.0, 1.0}, 10);
  double fact = 1.0;
  for (int k = 0; k <= 10; ++k) {
    if (k > 0) fact *= k;
    CHECK(e[static_cast<std::size_t>(k)] == doctest::Approx(1.0 / fact).epsilon(1e-15));
  }

  Random rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 24;
    SeriesRow a(static_cast<std::size_t>(K) + 1, 0.0);
    for (int k = 1; k <= 4; ++k) a[static_cast<std::size_t>(k)] = rng.uniform(-1, 1);
    const SeriesRow ea = series_exp(a, K);
    for (double t : {-0.1, 0.03, 0.1}) {
      CHECK(horner(ea, t) == doctest::Approx(std::exp(horner(a, t))).epsilon(1e-8));
    }
  }

  try {
    series_exp(SeriesRow{0.1, 1.0}, 3);
    FAIL("expected NonzeroConstantTerm");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NonzeroConstantTerm);
  }
}

TEST_CASE("series_antiderivative") {
  CHECK(series_antiderivative(SeriesRow{1, 0, 0}, 2) == SeriesRow{0, 1, 0});
  CHECK(series_antiderivative(SeriesRow{0, 2, 0, 0}, 3) == SeriesRow{0, 0, 1, 0});
  const SeriesRow a{0.3, -1.25, 4.0, 0.5, 2.0};
  CHECK(series_derivative(series_antiderivative(a, 5), 4) == a);
}

TEST_CASE("LV coefficients") {
  SUBCASE("M = 0 gives a constant") {
    const SeriesBundle s = lv_taylor_coefficients(LvSystem(Matrix::Zero(2, 2), Vector::Constant(2, 0.7)), 8);
    for (int i = 0; i < 2; ++i) {
      CHECK(s.coeff(i, 0) == 0.7);
      for (int k = 1; k <= 8; ++k) CHECK(s.coeff(i, k) == 0.0);
    }
  }
  SUBCASE("one dimension is geometric") {
    const double m = -0.8, x0 = 1.3;
    const SeriesBundle s = lv_taylor_coefficients(LvSystem(scalar_matrix(m), scalar_vector(x0)), 15);
    for (int k = 0; k <= 15; ++k)
      CHECK(rel_err(s.coeff(0, k), x0 * std::pow(m * x0, k)) < 1e-13);
  }
  SUBCASE("matches the literal formula") {
    Random rng(23);
    for (int trial = 0; trial < 30; ++trial) {
      const int N = rng.integer(1, 3);
      const Matrix M = rng.matrix(N, N, -2, 2);
      const Vector u0 = rng.vector(N, 0.1, 2);
      const SeriesBundle s = lv_taylor_coefficients(LvSystem(M, u0), 6);
      for (int i = 0; i < N; ++i)
        for (int k = 0; k <= 6; ++k) {
          const double want = direct_lv_coefficient(M, u0, i, k);
          const double got = s.coeff(i, k) * static_cast<double>(factorial(k));
          CHECK(rel_err(got, want) < 1e-12);
        }
    }
  }
  SUBCASE("formal derivative satisfies the ODE") {
    Random rng(24);
    const int K = 18;
    for (int trial = 0; trial < 10; ++trial) {
      const int N = rng.integer(1, 4);
      const LvSystem lv(rng.matrix(N, N, -1, 1), rng.vector(N, 0.2, 1.5));
      const SeriesBundle s = lv_taylor_coefficients(lv, K);
      for (int i = 0; i < N; ++i) {
        SeriesRow growth(static_cast<std::size_t>(K) + 1, 0.0);
        for (int j = 0; j < N; ++j)
          for (int k = 0; k <= K; ++k) growth[static_cast<std::size_t>(k)] += lv.M()(i, j) * s.coeff(j, k);
        const SeriesRow lhs = series_derivative(s.row(i), K);
        const SeriesRow rhs = series_product(s.row(i), growth, K);
        for (int k = 0; k < K; ++k) {
          const double l = lhs[static_cast<std::size_t>(k)];
          const double r = rhs[static_cast<std::size_t>(k)];
          CHECK(std::abs(l - r) <= 1e-13 * (std::abs(r) + 1e-300) + 1e-300);
        }
      }
    }
  }
  SUBCASE("overflow is reported") {
    try {
      lv_taylor_coefficients(LvSystem(scalar_matrix(1e200), scalar_vector(1e150)), 5);
      FAIL("expected Overflow");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Overflow);
      CHECK(std::string(e.what()).find("order 1") != std::string::npos);
    }
  }
}

TEST_CASE("QP coefficients") {
  SUBCASE("logistic against the closed form") {
    // Taylor coefficients of 2 / (1 + 3 exp(-2t)) at t = 0, exact rationals.
    const double expected[] = {1.0 / 2,          3.0 / 4,       3.0 / 8,           -1.0 / 16,
                               -5.0 / 32,        -13.0 / 320,   77.0 / 1920,       823.0 / 26880,
                               -25.0 / 10752,    -11593.0 / 967680, -37873.0 / 9676800};
    Matrix A(1, 2), B(2, 1);
    A << 2, -1;
    B << 0, 1;
    const SeriesBundle s = qp_taylor_coefficients(QpSystem(A, B, scalar_vector(0.5)), 10);
    for (int k = 0; k <= 10; ++k) CHECK(std::abs(s.coeff(0, k) - expected[k]) < 1e-12);
  }
  SUBCASE("B = I reproduces the LV series") {
    Random rng(25);
    const Matrix A = rng.matrix(3, 3, -1, 1);
    const Vector x0 = rng.vector(3, 0.3, 1.5);
    const SeriesBundle qp = qp_taylor_coefficients(QpSystem(A, Matrix::Identity(3, 3), x0), 12);
    const SeriesBundle lv = lv_taylor_coefficients(LvSystem(A, x0), 12);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k <= 12; ++k) CHECK(std::abs(qp.coeff(i, k) - lv.coeff(i, k)) <= 1e-12 * (1.0 + std::abs(lv.coeff(i, k))));
  }
  SUBCASE("one-dimensional factorial collapse") {
    const double m = 0.6, x0 = 1.4;
    const SeriesBundle s =
        qp_taylor_coefficients(QpSystem(scalar_matrix(m), scalar_matrix(1.0), scalar_vector(x0)), 12);
    for (int k = 0; k <= 12; ++k) CHECK(rel_err(s.coeff(0, k), std::pow(m, k) * std::pow(x0, k + 1)) < 1e-12);
  }
  SUBCASE("matches the original-variable formula") {
    Random rng(26);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = rng.integer(1, 2);
      const int N = rng.integer(1, 3);
      const QpSystem sys = rng.system(n, N, 1.5, 1.0);
      const SeriesBundle s = qp_taylor_coefficients(sys, 5);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k <= 5; ++k) {
          const double want = direct_qp_coefficient(sys.A(), sys.B(), sys.x0(), i, k);
          const double got = s.coeff(i, k) * static_cast<double>(factorial(k));
          CHECK(rel_err(got, want) < 1e-10);
        }
    }
  }
}

TEST_CASE("radius estimate") {
  SUBCASE("geometric") {
    const double r = 2.5;
    SeriesRow a(21);
    for (int k = 0; k <= 20; ++k) a[static_cast<std::size_t>(k)] = std::pow(r, -k);
    const double rho = estimate_radius(SeriesBundle(0.0, 20, {a}));
    CHECK(std::abs(rho - r) < 0.05 * r);
  }
  SUBCASE("pole of x' = x^2") {
    const SeriesBundle s = lv_taylor_coefficients(LvSystem(scalar_matrix(1.0), scalar_vector(1.0)), 20);
    CHECK(std::abs(estimate_radius(s) - 1.0) < 0.05);
  }
  SUBCASE("constant series is unbounded") {
    const SeriesBundle s = lv_taylor_coefficients(LvSystem(Matrix::Zero(2, 2), Vector::Ones(2)), 10);
    CHECK(std::isinf(estimate_radius(s)));
  }
  SUBCASE("needs order >= 2") {
    try {
      estimate_radius(SeriesBundle(0.0, 1, {SeriesRow{1.0, 2.0}}));
      FAIL("expected InsufficientOrder");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InsufficientOrder);
    }
  }
}

TEST_CASE("series evaluation") {
  const double m = 0.5, x0 = 1.0;
  const SeriesBundle s = lv_taylor_coefficients(LvSystem(scalar_matrix(m), scalar_vector(x0)), 40, 0.25);
  CHECK(evaluate_series(s, 0.25)[0] == x0);
  // radius is 1 / (m x0) = 2
  const double t = 0.25 + 1.0;
  CHECK(evaluate_series(s, t)[0] == doctest::Approx(x0 / (1.0 - m * x0 * 1.0)).epsilon(1e-10));

  const SeriesBundle a(0.0, 2, {SeriesRow{1.0, 2.0, 3.0}});
  const SeriesBundle b(0.0, 2, {SeriesRow{-0.5, 0.25, 4.0}});
  const SeriesBundle sum(0.0, 2, {SeriesRow{0.5, 2.25, 7.0}});
  CHECK(evaluate_series(sum, 0.7)[0] ==
        doctest::Approx(evaluate_series(a, 0.7)[0] + evaluate_series(b, 0.7)[0]).epsilon(1e-15));
}
