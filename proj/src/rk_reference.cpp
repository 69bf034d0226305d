#include "qpflow/rk_reference.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "qpflow/error.hpp"

namespace qpflow {

namespace {

// Dormand-Prince 5(4) tableau. The system is autonomous, so the stage times
// never enter.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// fifth-order minus embedded fourth-order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

std::optional<Vector> try_rhs(const QpSystem& sys, const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !std::isfinite(x[i])) return std::nullopt;
  }
  return rhs(sys, x);
}

double error_norm(const Vector& err, const Vector& y, const Vector& ynew, double tol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
    const double r = err[i] / sc;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

double initial_step(const QpSystem& sys, const Vector& y, const Vector& f, double tol,
                    double t_end) {
  const Vector sc = (tol + tol * y.array().abs()).matrix();
  const double d0 = std::sqrt(y.cwiseQuotient(sc).squaredNorm() / y.size());
  const double d1 = std::sqrt(f.cwiseQuotient(sc).squaredNorm() / y.size());
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, t_end);
  const Vector y1 = y + h0 * f;
  double d2 = 0.0;
  if (auto f1 = try_rhs(sys, y1)) {
    d2 = std::sqrt((*f1 - f).cwiseQuotient(sc).squaredNorm() / y.size()) / h0;
  } else {
    return 0.1 * h0;
  }
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, t_end});
}

}  // namespace

Trajectory rk_reference(const QpSystem& sys, double t_end, const RkOptions& opt) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw Error(ErrorCode::InvalidArgument, "t_end must be positive and finite");
  }
  if (!(opt.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");

  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0;
  constexpr double beta = 0.04, alpha = 0.2 - 0.75 * beta;
  const double h_min = 1e-14 * t_end;

  Trajectory traj;
  traj.meta.method = "dopri5";
  traj.meta.order = 5;
  traj.meta.tol = opt.tol;

  double t = 0.0;
  Vector y = sys.x0();
  Vector k1 = rhs(sys, y);
  traj.times.push_back(t);
  traj.states.push_back(y);

  double h = initial_step(sys, y, k1, opt.tol, t_end);
  double err_old = 1e-4;
  bool rejected_last = false;

  while (t < t_end) {
    if (traj.meta.accepted + traj.meta.rejected >= opt.max_steps) {
      throw Error(ErrorCode::StepUnderflow, "step budget exhausted at t = " + std::to_string(t));
    }
    const bool last = t + h >= t_end;
    if (last) h = t_end - t;
    if (h < h_min && !last) {
      throw Error(ErrorCode::StepUnderflow,
                  "step size " + std::to_string(h) + " underflowed at t = " + std::to_string(t));
    }

    std::optional<Vector> k2, k3, k4, k5, k6, k7;
    Vector ynew;
    bool stages_ok = (k2 = try_rhs(sys, y + h * a21 * k1)).has_value() &&
                     (k3 = try_rhs(sys, y + h * (a31 * k1 + a32 * *k2))).has_value() &&
                     (k4 = try_rhs(sys, y + h * (a41 * k1 + a42 * *k2 + a43 * *k3))).has_value() &&
                     (k5 = try_rhs(sys, y + h * (a51 * k1 + a52 * *k2 + a53 * *k3 + a54 * *k4)))
                         .has_value() &&
                     (k6 = try_rhs(sys, y + h * (a61 * k1 + a62 * *k2 + a63 * *k3 + a64 * *k4 +
                                                 a65 * *k5)))
                         .has_value();
    double err = 0.0;
    if (stages_ok) {
      ynew = y + h * (b1 * k1 + b3 * *k3 + b4 * *k4 + b5 * *k5 + b6 * *k6);
      k7 = try_rhs(sys, ynew);
      if (k7) {
        const Vector e = h * (e1 * k1 + e3 * *k3 + e4 * *k4 + e5 * *k5 + e6 * *k6 + e7 * *k7);
        err = error_norm(e, y, ynew, opt.tol);
      } else {
        stages_ok = false;
      }
    }

    if (!stages_ok || !std::isfinite(err)) {
      ++traj.meta.rejected;
      if (h < h_min) {
        throw Error(ErrorCode::PositivityLoss,
                    "solution leaves the positive cone near t = " + std::to_string(t));
      }
      h *= 0.25;
      rejected_last = true;
      continue;
    }

    if (err <= 1.0) {
      t = last ? t_end : t + h;
      y = std::move(ynew);
      k1 = std::move(*k7);
      traj.times.push_back(t);
      traj.states.push_back(y);
      ++traj.meta.accepted;
      double fac = err == 0.0 ? fac_max
                              : safety * std::pow(err, -alpha) * std::pow(err_old, beta);
      fac = std::clamp(fac, fac_min, rejected_last ? 1.0 : fac_max);
      h *= fac;
      err_old = std::max(err, 1e-4);
      rejected_last = false;
    } else {
      ++traj.meta.rejected;
      h *= std::max(fac_min, safety * std::pow(err, -alpha));
      rejected_last = true;
    }
  }
  return traj;
}

}  // namespace qpflow
