#pragma once

// Time stepping on flat real state vectors.
//
// Density matrices are flattened column-major with real and imaginary parts
// interleaved (the in-memory layout of Eigen::MatrixXcd), sublattice A before B.
// Auxiliary blocks, if any, follow.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace dhl {

using StateVector = Eigen::VectorXd;
using RhsFn = std::function<void(double t, const StateVector& y, StateVector& dydt)>;
using ObserverFn = std::function<void(double t, const StateVector& y)>;

/// Raised when the right-hand side produces non-finite values, the adaptive
/// step underflows, or a method-specific conservation check fails.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

/// One classical fourth-order Runge-Kutta step (four RHS evaluations).
StateVector rk4_step(const RhsFn& rhs, const StateVector& y, double t, double dt);

struct StepControl {
  enum class Mode { Fixed, Adaptive };
  Mode mode = Mode::Fixed;
  double dt = 0.01;  // fixed step, or initial step when adaptive
  double t0 = 0.0;
  double t_end = 1.0;
  std::size_t observer_stride = 1;  // fixed: every stride steps; adaptive: at multiples of stride*dt
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double dt_min = 1e-10;
  double dt_max = 0.1;

  void validate() const;
};

struct EvolveStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

struct EvolveResult {
  StateVector state;
  double t = 0.0;
  EvolveStats stats;
};

/// Integrate from control.t0 to control.t_end. The observer sees t0, every
/// sampling point, and t_end. Adaptive mode is an embedded Dormand-Prince 5(4)
/// pair whose steps are clipped to land on the sampling grid.
EvolveResult evolve(const RhsFn& rhs, StateVector y0, const StepControl& control,
                    const ObserverFn& observer = {});

/// Throws NumericalError naming the first non-finite component.
void require_finite(const StateVector& v, double t, const char* where);

}  // namespace dhl
