#pragma once

// Reference integrator for cross-checking the Taylor solver: Dormand-Prince
// 5(4) with PI step-size control. It only evaluates the QP right-hand side and
// shares no series code.

#include "qpflow/integrate.hpp"
#include "qpflow/qp_core.hpp"

namespace qpflow {

struct RkOptions {
  double tol = 1e-10;  // used as both absolute and relative tolerance
  long max_steps = 10'000'000;
};

// Throws PositivityLoss if an accepted state leaves the positive cone and
// StepUnderflow if h drops below 1e-14 * t_end.
Trajectory rk_reference(const QpSystem& sys, double t_end, const RkOptions& opt = {});

inline Trajectory rk_reference(const QpSystem& sys, double t_end, double tol) {
  return rk_reference(sys, t_end, RkOptions{tol});
}

}  // namespace qpflow
