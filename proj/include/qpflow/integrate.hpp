#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qpflow/qp_core.hpp"
#include "qpflow/series.hpp"

namespace qpflow {

struct TrajectoryMeta {
  std::string method;
  int order = 0;
  double tol = 0.0;
  long accepted = 0;
  long rejected = 0;
  // Radius estimate of the first expansion (Taylor only, +inf if unbounded).
  double first_radius = 0.0;
};

// Accepted step endpoints, starting with the initial state.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  TrajectoryMeta meta;

  std::size_t size() const noexcept { return times.size(); }
};

struct TaylorOptions {
  double tol = 1e-10;
  int order = 20;
  double safety = 0.8;
};

// Piecewise Taylor solution: piece p is the expansion at times[p], valid on
// [times[p], times[p+1]].
class TaylorSolution {
 public:
  TaylorSolution(std::vector<SeriesBundle> pieces, Trajectory trajectory);

  const Trajectory& trajectory() const noexcept { return trajectory_; }
  const std::vector<SeriesBundle>& pieces() const noexcept { return pieces_; }
  double t_end() const noexcept { return trajectory_.times.back(); }

  // Dense output anywhere in [0, t_end].
  Vector evaluate(double t) const;

 private:
  std::vector<SeriesBundle> pieces_;
  Trajectory trajectory_;
};

using Expander = std::function<SeriesBundle(const Vector& state, double t0)>;

// Analytic continuation: expand at the current state, step by
// min(safety * radius, h_tol) where max_i |a_i(K)| h^K = tol, re-expand.
// Throws StepUnderflow once h < 1e-14 * t_end, and Overflow.
TaylorSolution taylor_solve(const Expander& expand, const Vector& x0, double t_end,
                            const TaylorOptions& opt, const std::string& method);

TaylorSolution taylor_solve(const QpSystem& sys, double t_end, const TaylorOptions& opt = {});
TaylorSolution taylor_solve(const LvSystem& sys, double t_end, const TaylorOptions& opt = {});

Trajectory taylor_step_integrate(const QpSystem& sys, double t_end, double tol, int K);
Trajectory taylor_step_integrate(const LvSystem& sys, double t_end, double tol, int K);

}  // namespace qpflow
