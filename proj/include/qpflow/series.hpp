#pragma once

// Truncated power series in the monomial basis: row[k] is the coefficient of
// (t - t0)^k, i.e. the k-th derivative divided by k!.

#include <span>
#include <vector>

#include "qpflow/qp_core.hpp"

namespace qpflow {

using SeriesRow = std::vector<double>;

class SeriesBundle {
 public:
  // coeffs[i] has order + 1 entries for every component i.
  SeriesBundle(double t0, int order, std::vector<SeriesRow> coeffs);

  int dim() const noexcept { return static_cast<int>(coeffs_.size()); }
  int order() const noexcept { return order_; }
  double t0() const noexcept { return t0_; }
  const std::vector<SeriesRow>& coeffs() const noexcept { return coeffs_; }
  const SeriesRow& row(int i) const { return coeffs_.at(static_cast<std::size_t>(i)); }
  double coeff(int i, int k) const {
    return coeffs_.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k));
  }
  Vector state() const;

 private:
  double t0_;
  int order_;
  std::vector<SeriesRow> coeffs_;
};

// Cauchy product truncated at order K; missing entries count as zero.
SeriesRow series_product(std::span<const double> a, std::span<const double> b, int K);

// exp(a) for a series with a[0] == 0 (else NonzeroConstantTerm).
SeriesRow series_exp(std::span<const double> a, int K);

// Term-wise antiderivative with zero constant term.
SeriesRow series_antiderivative(std::span<const double> a, int K);

// Term-wise derivative, truncated at K.
SeriesRow series_derivative(std::span<const double> a, int K);

// Taylor coefficients of the Lotka-Volterra flow through lv.u0() at t0, by the
// recursion (k+1) a_i(k+1) = sum_m a_i(m) (M a)_i(k-m). Throws Overflow.
SeriesBundle lv_taylor_coefficients(const LvSystem& lv, int K, double t0 = 0.0);

// Taylor coefficients of x(t) for a QP system: series of the monomial
// embedding, then x_i = x0_i * exp(sum_j A_ij * integral U_j).
SeriesBundle qp_taylor_coefficients(const QpSystem& sys, int K, double t0 = 0.0);

// Root-test radius estimate 1 / max |a_i(k)|^(1/k) over the upper half of the
// retained orders. Returns +infinity when that tail vanishes identically.
// Throws InsufficientOrder for K < 2.
double estimate_radius(const SeriesBundle& s);

// Horner evaluation at t.
Vector evaluate_series(const SeriesBundle& s, double t);

}  // namespace qpflow
