#include "dhl/meanfield.hpp"

#include "dhl/propagator.hpp"

#include <cmath>

namespace dhl {

MeanFieldGenerator::MeanFieldGenerator(const ModelParams& params)
    : params_(params), local_(local_liouvillian(params.omega, params.gamma)) {
  params_.validate();
}

Eigen::Matrix2cd MeanFieldGenerator::local(const Eigen::Matrix2cd& rho) const {
  const Eigen::Vector4cd out = local_ * Eigen::Map<const Eigen::Vector4cd>(rho.data());
  return Eigen::Map<const Eigen::Matrix2cd>(out.data());
}

Eigen::Matrix2cd MeanFieldGenerator::field(const Eigen::Matrix2cd& rho,
                                           const Eigen::Matrix2cd& partner) const {
  const auto& s = pauli_table();
  Eigen::Matrix2cd h = Eigen::Matrix2cd::Zero();
  for (int a = 0; a < 3; ++a) {
    h += params_.J[a] * (s[a] * partner).trace() * s[a];
  }
  return -kI * (h * rho - rho * h);
}

SublatticeRates MeanFieldGenerator::operator()(const Eigen::Matrix2cd& rho_a,
                                               const Eigen::Matrix2cd& rho_b) const {
  return {local(rho_a) + field(rho_a, rho_b), local(rho_b) + field(rho_b, rho_a)};
}

SublatticeRates mf_rhs(const SublatticeState& state, const ModelParams& params) {
  return MeanFieldGenerator(params)(state.rho_a, state.rho_b);
}

StateVector pack(const SublatticeState& state) {
  StateVector y(16);
  view2(y, 0) = state.rho_a;
  view2(y, 4) = state.rho_b;
  return y;
}

SublatticeState unpack(const StateVector& y, double t) {
  return {view2(y, 0), view2(y, 4), t};
}

void check_sublattice_trace(const StateVector& y, double t) {
  const double drift = std::max(std::abs(view2(y, 0).trace() - 1.0),
                                std::abs(view2(y, 4).trace() - 1.0));
  if (drift > kTraceAbortTolerance) {
    throw NumericalError("trace drift " + std::to_string(drift) + " at t = " +
                             std::to_string(t) + "; reduce the step size",
                         t);
  }
}

MethodRun evolve_mf(const BlochPair& pair, const ModelParams& params,
                    const IntegrationSettings& integration, const AnalysisSettings& analysis,
                    const SampleSink& sink) {
  pair.validate();
  const MeanFieldGenerator generator(params);
  SublatticeState initial;
  initial.rho_a = bloch_to_density(pair.n_a);
  initial.rho_b = bloch_to_density(pair.n_b);

  const RhsFn rhs = [&](double, const StateVector& y, StateVector& dydt) {
    const SublatticeRates r = generator(view2(y, 0), view2(y, 4));
    dydt.resize(16);
    view2(dydt, 0) = r.d_a;
    view2(dydt, 4) = r.d_b;
  };

  MethodRun run;
  const ObserverFn observer = [&](double t, const StateVector& y) {
    check_sublattice_trace(y, t);
    BlochSample s{t, density_to_bloch(view2(y, 0)), density_to_bloch(view2(y, 4))};
    run.trajectory.push_back(s);
    if (sink) sink(s);
  };
  run.stats = evolve(rhs, pack(initial), integration.step_control(), observer).stats;
  run.summary = summarize(run.trajectory, analysis);
  return run;
}

}  // namespace dhl
