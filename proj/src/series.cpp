#include "qpflow/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qpflow/error.hpp"

namespace qpflow {

namespace {

void require_order(int K) {
  if (K < 0) throw Error(ErrorCode::InvalidArgument, "series order must be >= 0");
}

double at(std::span<const double> a, int k) {
  return static_cast<std::size_t>(k) < a.size() ? a[static_cast<std::size_t>(k)] : 0.0;
}

[[noreturn]] void overflow_at(int k) {
  throw Error(ErrorCode::Overflow,
              "Taylor coefficient of order " + std::to_string(k) + " is not finite");
}

}  // namespace

SeriesBundle::SeriesBundle(double t0, int order, std::vector<SeriesRow> coeffs)
    : t0_(t0), order_(order), coeffs_(std::move(coeffs)) {
  if (order_ < 0) throw Error(ErrorCode::InvalidArgument, "series order must be >= 0");
  if (coeffs_.empty()) throw Error(ErrorCode::DimensionMismatch, "series bundle is empty");
  for (const auto& row : coeffs_) {
    if (row.size() != static_cast<std::size_t>(order_) + 1) {
      throw Error(ErrorCode::DimensionMismatch,
                  "series row length does not match order " + std::to_string(order_));
    }
    for (double c : row) {
      if (!std::isfinite(c)) throw Error(ErrorCode::NonFiniteEntry, "non-finite coefficient");
    }
  }
}

Vector SeriesBundle::state() const {
  Vector x(dim());
  for (int i = 0; i < dim(); ++i) x[i] = coeffs_[static_cast<std::size_t>(i)][0];
  return x;
}

SeriesRow series_product(std::span<const double> a, std::span<const double> b, int K) {
  require_order(K);
  SeriesRow c(static_cast<std::size_t>(K) + 1, 0.0);
  for (int k = 0; k <= K; ++k) {
    double s = 0.0;
    for (int m = 0; m <= k; ++m) s += at(a, m) * at(b, k - m);
    c[static_cast<std::size_t>(k)] = s;
  }
  return c;
}

SeriesRow series_exp(std::span<const double> a, int K) {
  require_order(K);
  if (at(a, 0) != 0.0) {
    throw Error(ErrorCode::NonzeroConstantTerm, "series_exp needs a zero constant term");
  }
  SeriesRow e(static_cast<std::size_t>(K) + 1, 0.0);
  e[0] = 1.0;
  for (int k = 1; k <= K; ++k) {
    double s = 0.0;
    for (int m = 1; m <= k; ++m) s += m * at(a, m) * e[static_cast<std::size_t>(k - m)];
    e[static_cast<std::size_t>(k)] = s / k;
  }
  return e;
}

SeriesRow series_antiderivative(std::span<const double> a, int K) {
  require_order(K);
  SeriesRow r(static_cast<std::size_t>(K) + 1, 0.0);
  for (int k = 1; k <= K; ++k) r[static_cast<std::size_t>(k)] = at(a, k - 1) / k;
  return r;
}

SeriesRow series_derivative(std::span<const double> a, int K) {
  require_order(K);
  SeriesRow r(static_cast<std::size_t>(K) + 1, 0.0);
  for (int k = 0; k <= K; ++k) r[static_cast<std::size_t>(k)] = (k + 1) * at(a, k + 1);
  return r;
}

SeriesBundle lv_taylor_coefficients(const LvSystem& lv, int K, double t0) {
  require_order(K);
  const int N = lv.N();
  const auto& M = lv.M();
  const auto len = static_cast<std::size_t>(K) + 1;

  // a[i][k]: solution; w[i][k] = sum_j M_ij a[j][k], the log-derivative series.
  std::vector<SeriesRow> a(static_cast<std::size_t>(N), SeriesRow(len, 0.0));
  std::vector<SeriesRow> w(static_cast<std::size_t>(N), SeriesRow(len, 0.0));
  for (int i = 0; i < N; ++i) a[static_cast<std::size_t>(i)][0] = lv.u0()[i];

  for (int k = 0; k < K; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    for (int i = 0; i < N; ++i) {
      double s = 0.0;
      for (int j = 0; j < N; ++j) s += M(i, j) * a[static_cast<std::size_t>(j)][uk];
      w[static_cast<std::size_t>(i)][uk] = s;
    }
    for (int i = 0; i < N; ++i) {
      const auto& ai = a[static_cast<std::size_t>(i)];
      const auto& wi = w[static_cast<std::size_t>(i)];
      double s = 0.0;
      for (int m = 0; m <= k; ++m) s += ai[static_cast<std::size_t>(m)] * wi[uk - static_cast<std::size_t>(m)];
      const double next = s / (k + 1);
      if (!std::isfinite(next)) overflow_at(k + 1);
      a[static_cast<std::size_t>(i)][uk + 1] = next;
    }
  }
  return SeriesBundle(t0, K, std::move(a));
}

SeriesBundle qp_taylor_coefficients(const QpSystem& sys, int K, double t0) {
  require_order(K);
  const LvEmbedding emb = to_lotka_volterra(sys);
  const SeriesBundle U = lv_taylor_coefficients(emb.lv, K, t0);
  const auto len = static_cast<std::size_t>(K) + 1;

  std::vector<SeriesRow> x(static_cast<std::size_t>(sys.n()));
  for (int i = 0; i < sys.n(); ++i) {
    // d/dt log x_i = sum_j A_ij U_j
    SeriesRow logderiv(len, 0.0);
    for (int j = 0; j < sys.N(); ++j) {
      const double aij = sys.A()(i, j);
      if (aij == 0.0) continue;
      const auto& uj = U.row(j);
      for (std::size_t k = 0; k < len; ++k) logderiv[k] += aij * uj[k];
    }
    SeriesRow xi = series_exp(series_antiderivative(logderiv, K), K);
    const double x0 = sys.x0()[i];
    for (std::size_t k = 0; k < len; ++k) {
      xi[k] *= x0;
      if (!std::isfinite(xi[k])) overflow_at(static_cast<int>(k));
    }
    x[static_cast<std::size_t>(i)] = std::move(xi);
  }
  return SeriesBundle(t0, K, std::move(x));
}

double estimate_radius(const SeriesBundle& s) {
  const int K = s.order();
  if (K < 2) {
    throw Error(ErrorCode::InsufficientOrder,
                "radius estimate needs order >= 2, got " + std::to_string(K));
  }
  const int first = std::max(1, (K + 1) / 2);
  double growth = 0.0;
  for (const auto& row : s.coeffs()) {
    for (int k = first; k <= K; ++k) {
      const double mag = std::abs(row[static_cast<std::size_t>(k)]);
      if (mag == 0.0) continue;
      growth = std::max(growth, std::exp(std::log(mag) / k));
    }
  }
  if (growth == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / growth;
}

Vector evaluate_series(const SeriesBundle& s, double t) {
  const double h = t - s.t0();
  Vector x(s.dim());
  for (int i = 0; i < s.dim(); ++i) {
    const auto& row = s.row(i);
    double acc = 0.0;
    for (auto it = row.rbegin(); it != row.rend(); ++it) acc = acc * h + *it;
    x[i] = acc;
  }
  return x;
}

}  // namespace qpflow
