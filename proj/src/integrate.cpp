#include "qpflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qpflow/error.hpp"

namespace qpflow {

namespace {

bool in_positive_cone(const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !std::isfinite(x[i])) return false;
  }
  return true;
}

// Largest h with |a_i(k)| h^k <= tol for the last two retained orders; using
// the order below K as well guards against a tail coefficient vanishing by
// symmetry.
double tolerance_step(const SeriesBundle& s, double tol) {
  const int K = s.order();
  double h = std::numeric_limits<double>::infinity();
  for (int k : {K, K - 1}) {
    double tail = 0.0;
    for (const auto& row : s.coeffs()) tail = std::max(tail, std::abs(row[static_cast<std::size_t>(k)]));
    if (tail > 0.0) h = std::min(h, std::exp((std::log(tol) - std::log(tail)) / k));
  }
  return h;
}

}  // namespace

TaylorSolution::TaylorSolution(std::vector<SeriesBundle> pieces, Trajectory trajectory)
    : pieces_(std::move(pieces)), trajectory_(std::move(trajectory)) {
  if (trajectory_.times.empty() || pieces_.size() + 1 != trajectory_.times.size()) {
    throw Error(ErrorCode::InvalidArgument, "one series piece per accepted step expected");
  }
}

Vector TaylorSolution::evaluate(double t) const {
  const auto& times = trajectory_.times;
  if (!(t >= times.front() && t <= times.back())) {
    throw Error(ErrorCode::InvalidArgument,
                "t = " + std::to_string(t) + " is outside the integrated interval");
  }
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto p = static_cast<std::size_t>(std::distance(times.begin(), it)) - 1;
  if (times[p] == t) return trajectory_.states[p];
  return evaluate_series(pieces_[p], t);
}

TaylorSolution taylor_solve(const Expander& expand, const Vector& x0, double t_end,
                            const TaylorOptions& opt, const std::string& method) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw Error(ErrorCode::InvalidArgument, "t_end must be positive and finite");
  }
  if (!(opt.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (opt.order < 4) throw Error(ErrorCode::InvalidArgument, "Taylor order must be >= 4");

  const double h_min = 1e-14 * t_end;
  Trajectory traj;
  traj.meta.method = method;
  traj.meta.order = opt.order;
  traj.meta.tol = opt.tol;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  std::vector<SeriesBundle> pieces;

  double t = 0.0;
  Vector x = x0;
  while (t < t_end) {
    SeriesBundle s = expand(x, t);
    const double radius = estimate_radius(s);
    if (pieces.empty()) traj.meta.first_radius = radius;

    const double remaining = t_end - t;
    double h = std::min(opt.safety * radius, tolerance_step(s, opt.tol));
    const bool last = h >= remaining;
    if (last) h = remaining;

    Vector next = evaluate_series(s, t + h);
    while (!in_positive_cone(next)) {
      h *= 0.5;
      ++traj.meta.rejected;
      if (h < h_min) break;
      next = evaluate_series(s, t + h);
    }
    if (h < h_min || !in_positive_cone(next)) {
      throw Error(ErrorCode::StepUnderflow,
                  "step size " + std::to_string(h) + " underflowed at t = " + std::to_string(t) +
                      " (singularity or loss of positivity ahead)");
    }

    const double t_next = (last && h == remaining) ? t_end : t + h;
    pieces.push_back(std::move(s));
    traj.times.push_back(t_next);
    traj.states.push_back(next);
    ++traj.meta.accepted;
    t = t_next;
    x = std::move(next);
  }
  return TaylorSolution(std::move(pieces), std::move(traj));
}

TaylorSolution taylor_solve(const QpSystem& sys, double t_end, const TaylorOptions& opt) {
  const int K = opt.order;
  Expander expand = [&sys, K](const Vector& state, double t0) {
    return qp_taylor_coefficients(sys.with_initial(state), K, t0);
  };
  return taylor_solve(expand, sys.x0(), t_end, opt, "taylor-qp");
}

TaylorSolution taylor_solve(const LvSystem& sys, double t_end, const TaylorOptions& opt) {
  const int K = opt.order;
  Expander expand = [&sys, K](const Vector& state, double t0) {
    return lv_taylor_coefficients(sys.with_initial(state), K, t0);
  };
  return taylor_solve(expand, sys.u0(), t_end, opt, "taylor-lv");
}

Trajectory taylor_step_integrate(const QpSystem& sys, double t_end, double tol, int K) {
  return taylor_solve(sys, t_end, TaylorOptions{tol, K}).trajectory();
}

Trajectory taylor_step_integrate(const LvSystem& sys, double t_end, double tol, int K) {
  return taylor_solve(sys, t_end, TaylorOptions{tol, K}).trajectory();
}

}  // namespace qpflow
