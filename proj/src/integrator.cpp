#include "dhl/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace dhl {

void require_finite(const StateVector& v, double t, const char* where) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericalError(std::string(where) + ": non-finite value in component " +
                               std::to_string(i) + " at t = " + std::to_string(t),
                           t);
    }
  }
}

void StepControl::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("step size dt must be positive");
  if (!(t_end >= t0)) throw std::invalid_argument("t_end must not precede t0");
  if (observer_stride == 0) throw std::invalid_argument("observer stride must be >= 1");
  if (mode == Mode::Adaptive) {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
      throw std::invalid_argument("adaptive tolerances must be positive");
    }
    if (!(dt_min > 0.0) || !(dt_min <= dt_max)) {
      throw std::invalid_argument("adaptive step bounds need 0 < dt_min <= dt_max");
    }
  }
}

StateVector rk4_step(const RhsFn& rhs, const StateVector& y, double t, double dt) {
  const Eigen::Index n = y.size();
  StateVector k1(n), k2(n), k3(n), k4(n);
  rhs(t, y, k1);
  require_finite(k1, t, "rk4 stage 1");
  rhs(t + 0.5 * dt, y + 0.5 * dt * k1, k2);
  require_finite(k2, t + 0.5 * dt, "rk4 stage 2");
  rhs(t + 0.5 * dt, y + 0.5 * dt * k2, k3);
  require_finite(k3, t + 0.5 * dt, "rk4 stage 3");
  rhs(t + dt, y + dt * k3, k4);
  require_finite(k4, t + dt, "rk4 stage 4");
  return y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
}

namespace {

EvolveResult evolve_fixed(const RhsFn& rhs, StateVector y, const StepControl& c,
                          const ObserverFn& observer) {
  EvolveResult result;
  const double span = c.t_end - c.t0;
  // Round so that t_end lands on the grid when it is an integer number of steps.
  const auto n_steps = static_cast<std::size_t>(std::llround(std::ceil(span / c.dt - 1e-9)));
  if (observer) observer(c.t0, y);
  double t = c.t0;
  for (std::size_t step = 1; step <= n_steps; ++step) {
    const double h = step == n_steps ? (c.t_end - t) : c.dt;
    y = rk4_step(rhs, y, t, h);
    t = step == n_steps ? c.t_end : c.t0 + static_cast<double>(step) * c.dt;
    if (observer && (step % c.observer_stride == 0 || step == n_steps)) observer(t, y);
  }
  result.stats.steps = n_steps;
  result.stats.rhs_evaluations = 4 * n_steps;
  result.state = std::move(y);
  result.t = t;
  return result;
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

EvolveResult evolve_adaptive(const RhsFn& rhs, StateVector y, const StepControl& c,
                             const ObserverFn& observer) {
  EvolveResult result;
  const Eigen::Index n = y.size();
  StateVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y_new(n), err(n);
  const double sample_dt = c.dt * static_cast<double>(c.observer_stride);

  double t = c.t0;
  double h = std::min(c.dt, c.dt_max);
  std::size_t next_sample = 1;
  auto sample_time = [&](std::size_t k) {
    return std::min(c.t0 + static_cast<double>(k) * sample_dt, c.t_end);
  };

  if (observer) observer(t, y);
  rhs(t, y, k1);
  ++result.stats.rhs_evaluations;
  require_finite(k1, t, "dopri stage 1");

  while (t < c.t_end) {
    const double target = sample_time(next_sample);
    bool hits_target = false;
    double step = h;
    if (t + step >= target - 1e-12 * std::max(1.0, std::abs(target))) {
      step = target - t;
      hits_target = true;
    }

    rhs(t + c2 * step, y + step * (a21 * k1), k2);
    rhs(t + c3 * step, y + step * (a31 * k1 + a32 * k2), k3);
    rhs(t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3), k4);
    rhs(t + c5 * step, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
    rhs(t + step, y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
    y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + step, y_new, k7);
    result.stats.rhs_evaluations += 6;
    require_finite(k7, t + step, "dopri stage 7");

    err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err_norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale = c.abs_tol + c.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err_norm = std::max(err_norm, std::abs(err[i]) / scale);
    }
    if (!std::isfinite(err_norm)) err_norm = 1e10;

    const double factor =
        err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
    if (err_norm <= 1.0) {
      t = hits_target ? target : t + step;
      y.swap(y_new);
      k1.swap(k7);
      ++result.stats.steps;
      if (hits_target) {
        if (observer) observer(t, y);
        ++next_sample;
        // A clipped step says nothing about the natural size; keep the larger one.
        h = std::max(h, step * factor);
      } else {
        h = step * factor;
      }
      h = std::min(h, c.dt_max);
    } else {
      ++result.stats.rejected;
      h = step * factor;
      if (h < c.dt_min) {
        throw NumericalError("adaptive step underflow at t = " + std::to_string(t) +
                                 " (dt = " + std::to_string(h) + ")",
                             t);
      }
    }
  }
  result.state = std::move(y);
  result.t = t;
  return result;
}

}  // namespace

EvolveResult evolve(const RhsFn& rhs, StateVector y0, const StepControl& control,
                    const ObserverFn& observer) {
  control.validate();
  require_finite(y0, control.t0, "initial state");
  if (control.mode == StepControl::Mode::Fixed) {
    return evolve_fixed(rhs, std::move(y0), control, observer);
  }
  return evolve_adaptive(rhs, std::move(y0), control, observer);
}

}  // namespace dhl
