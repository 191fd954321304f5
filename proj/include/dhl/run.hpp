#pragma once

// Settings and results shared by the three trajectory methods.

#include "dhl/analysis.hpp"
#include "dhl/integrator.hpp"

namespace dhl {

struct IntegrationSettings {
  double dt = 0.01;
  double t_end = 1000.0;
  std::size_t sample_stride = 1;  // record every n-th step (or every n*dt when adaptive)
  bool adaptive = false;
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double dt_max = 0.05;

  StepControl step_control() const {
    StepControl c;
    c.mode = adaptive ? StepControl::Mode::Adaptive : StepControl::Mode::Fixed;
    c.dt = dt;
    c.t_end = t_end;
    c.observer_stride = sample_stride;
    c.abs_tol = abs_tol;
    c.rel_tol = rel_tol;
    c.dt_max = dt_max;
    return c;
  }
};

/// Trace drift beyond this aborts a trajectory.
inline constexpr double kTraceAbortTolerance = 1e-6;

struct MethodRun {
  Trajectory trajectory;
  TrajectorySummary summary;
  EvolveStats stats;
};

/// Complex view of a flattened state starting at complex offset `offset`.
inline Eigen::Map<const Eigen::Matrix2cd> view2(const StateVector& y, Eigen::Index offset) {
  return Eigen::Map<const Eigen::Matrix2cd>(reinterpret_cast<const cplx*>(y.data()) + offset);
}
inline Eigen::Map<Eigen::Matrix2cd> view2(StateVector& y, Eigen::Index offset) {
  return Eigen::Map<Eigen::Matrix2cd>(reinterpret_cast<cplx*>(y.data()) + offset);
}

}  // namespace dhl
