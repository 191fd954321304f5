#include "dhl/cmop.hpp"

#include <cmath>
#include <stdexcept>

namespace dhl {

std::string to_string(MemoryMode m) { return m == MemoryMode::Exact ? "exact" : "quadrature"; }

MemoryMode memory_mode_from_string(const std::string& s) {
  if (s == "exact") return MemoryMode::Exact;
  if (s == "quadrature") return MemoryMode::Quadrature;
  throw std::invalid_argument("unknown memory mode '" + s + "' (expected exact|quadrature)");
}

namespace {

// Tr{sigma^a X}
cplx trace_with_pauli(int axis, const Eigen::Matrix2cd& x) {
  switch (axis) {
    case 0:
      return x(0, 1) + x(1, 0);
    case 1:
      return kI * (x(0, 1) - x(1, 0));
    default:
      return x(0, 0) - x(1, 1);
  }
}

Eigen::Matrix2cd apply4(const Eigen::Matrix4cd& p, const Eigen::Matrix2cd& x) {
  const Eigen::Vector4cd v = p * Eigen::Map<const Eigen::Vector4cd>(x.data());
  return Eigen::Map<const Eigen::Matrix2cd>(v.data());
}

Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  }
  return out;
}

// -(1/z) sum_a J_a [sigma^a, Y^a]
Eigen::Matrix2cd born_commutators(const ModelParams& params,
                                  const std::array<Eigen::Matrix2cd, 3>& y) {
  const auto& s = pauli_table();
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (int a = 0; a < 3; ++a) out += params.J[a] * (s[a] * y[a] - y[a] * s[a]);
  return -out / static_cast<double>(params.z);
}

}  // namespace

FluctuationRecord make_record(const Eigen::Matrix2cd& rho) {
  const auto& s = pauli_table();
  FluctuationRecord r;
  r.rho = rho;
  for (int b = 0; b < 3; ++b) {
    r.means[b] = (s[b] * rho).trace();
    const Eigen::Matrix2cd ds = s[b] - r.means[b] * Eigen::Matrix2cd::Identity();
    r.left[b] = ds * rho;
    r.right[b] = rho * ds;
  }
  return r;
}

HistoryBuffer::HistoryBuffer(double dt, double t_mem) : dt_(dt), t_mem_(t_mem) {
  if (!(dt > 0.0) || !(t_mem > 0.0)) {
    throw std::invalid_argument("history buffer needs positive dt and t_mem");
  }
  window_steps_ = static_cast<std::size_t>(std::llround(t_mem / dt));
}

void HistoryBuffer::push(const Eigen::Matrix2cd& rho_a, const Eigen::Matrix2cd& rho_b) {
  entries_.push_back({make_record(rho_a), make_record(rho_b)});
  while (entries_.size() > window_steps_ + 1) {
    entries_.pop_front();
    ++first_;
  }
}

const FluctuationRecord& HistoryBuffer::record(std::size_t index, Sublattice sublattice) const {
  if (!contains(index)) {
    throw std::out_of_range("history index " + std::to_string(index) + " outside window [" +
                            std::to_string(first_) + ", " +
                            std::to_string(first_ + entries_.size()) + ")");
  }
  return entries_[index - first_][sublattice == Sublattice::A ? 0 : 1];
}

BornKernelValue born_kernels(const FluctuationRecord& source, const Eigen::Matrix4cd& propagator,
                             double tau) {
  BornKernelValue k;
  k.tau = tau;
  for (int b = 0; b < 3; ++b) {
    const Eigen::Matrix2cd pl = apply4(propagator, source.left[b]);
    const Eigen::Matrix2cd pr = apply4(propagator, source.right[b]);
    for (int a = 0; a < 3; ++a) {
      k.d(a, b) = trace_with_pauli(a, pl);
      k.s(a, b) = trace_with_pauli(a, pr);
    }
  }
  return k;
}

BornKernelValue born_kernels(const HistoryBuffer& history, Sublattice source, double t,
                             std::size_t index, const SingleSitePropagator& prop) {
  const double tau = t - history.time(index);
  const double slack = 1e-9 * history.dt();
  if (!history.contains(index) || tau < -slack || tau > history.t_mem() + slack) {
    throw std::out_of_range("history time " + std::to_string(history.time(index)) +
                            " is outside the memory window at t = " + std::to_string(t));
  }
  return born_kernels(history.record(index, source), prop.lookup(std::max(tau, 0.0)),
                      std::max(tau, 0.0));
}

BornQuadrature::BornQuadrature(const ModelParams& params, double dt, double t_mem)
    : params_(params), dt_(dt), t_mem_(t_mem), prop_(params.omega, params.gamma) {
  params_.validate();
  // Half-step spacing covers the RK4 midpoint stages without interpolation.
  const auto count = static_cast<std::size_t>(std::llround(2.0 * t_mem / dt)) + 3;
  prop_.build_cache(0.5 * dt, count);
}

SublatticeRates BornQuadrature::born(const HistoryBuffer& history, double t,
                                     const Eigen::Matrix2cd& rho_a,
                                     const Eigen::Matrix2cd& rho_b) const {
  if (history.empty()) throw std::logic_error("Born quadrature called with empty history");
  const std::size_t n = history.last_index();
  const double h = t - history.time(n);
  if (h < -1e-9 * dt_ || h > dt_ * (1.0 + 1e-9)) {
    throw std::logic_error("insufficient history: stage time " + std::to_string(t) +
                           " is not within one step of the last stored time " +
                           std::to_string(history.time(n)));
  }
  const double half_pos = h / (0.5 * dt_);
  const bool on_half_grid = std::abs(half_pos - std::round(half_pos)) < 1e-6;
  const auto half_steps = static_cast<std::size_t>(std::max(0.0, std::round(half_pos)));

  auto propagator_for = [&](std::size_t k) -> Eigen::Matrix4cd {
    if (on_half_grid) {
      const std::size_t idx = 2 * (n - k) + half_steps;
      if (idx < prop_.cache_size()) return prop_.cached(idx);
    }
    return prop_.superoperator(t - history.time(k));
  };

  const double window_start = (t - t_mem_) / dt_;
  const auto k_lo = static_cast<long long>(std::ceil(window_start - 1e-9));
  const std::size_t k_min =
      std::max<std::size_t>(history.first_index(), static_cast<std::size_t>(std::max(0LL, k_lo)));

  std::array<Eigen::Matrix2cd, 3> ya, yb;
  for (auto& m : ya) m.setZero();
  for (auto& m : yb) m.setZero();

  auto accumulate = [&](const FluctuationRecord& ra, const FluctuationRecord& rb,
                        const Eigen::Matrix4cd& p, double tau, double weight) {
    if (weight == 0.0) return;
    const BornKernelValue from_b = born_kernels(rb, p, tau);
    const BornKernelValue from_a = born_kernels(ra, p, tau);
    std::array<Eigen::Matrix2cd, 3> pla, pra, plb, prb;
    for (int b = 0; b < 3; ++b) {
      pla[b] = apply4(p, ra.left[b]);
      pra[b] = apply4(p, ra.right[b]);
      plb[b] = apply4(p, rb.left[b]);
      prb[b] = apply4(p, rb.right[b]);
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double jw = weight * params_.J[b];
        ya[a] += jw * (from_b.d(a, b) * pla[b] - from_b.s(a, b) * pra[b]);
        yb[a] += jw * (from_a.d(a, b) * plb[b] - from_a.s(a, b) * prb[b]);
      }
    }
  };

  const bool has_endpoint = h > 1e-12 * dt_;
  for (std::size_t k = k_min; k <= n; ++k) {
    const double left_gap = k > k_min ? dt_ : 0.0;
    const double right_gap = k < n ? dt_ : (has_endpoint ? h : 0.0);
    const double weight = 0.5 * (left_gap + right_gap);
    accumulate(history.record(k, Sublattice::A), history.record(k, Sublattice::B),
               propagator_for(k), t - history.time(k), weight);
  }
  if (has_endpoint) {
    const double gap = n >= k_min ? h : 0.0;
    accumulate(make_record(rho_a), make_record(rho_b), Eigen::Matrix4cd::Identity(), 0.0,
               0.5 * gap);
  }
  return {born_commutators(params_, ya), born_commutators(params_, yb)};
}

SublatticeRates cmop_rhs(double t, const SublatticeState& state, const HistoryBuffer& history,
                         const ModelParams& params, const BornQuadrature& quadrature,
                         double born_scale) {
  SublatticeRates r = MeanFieldGenerator(params)(state.rho_a, state.rho_b);
  const SublatticeRates born = quadrature.born(history, t, state.rho_a, state.rho_b);
  r.d_a += born_scale * born.d_a;
  r.d_b += born_scale * born.d_b;
  return r;
}

CmopExactGenerator::CmopExactGenerator(const ModelParams& params, double born_scale)
    : mean_field_(params), params_(params), born_scale_(born_scale) {
  const DenseOperator h = 0.5 * params.omega *
                          (embed(pauli(PauliAxis::X), 0, 2) + embed(pauli(PauliAxis::X), 1, 2));
  const std::array<JumpOperator, 2> jumps{
      JumpOperator{embed(pauli(PauliAxis::Minus), 0, 2), params.gamma},
      JumpOperator{embed(pauli(PauliAxis::Minus), 1, 2), params.gamma}};
  pair_liouvillian_ = dense_liouvillian(h, jumps);
}

std::array<Eigen::Matrix2cd, 3> CmopExactGenerator::partial_traces(const Eigen::Matrix4cd& k) {
  const auto& s = pauli_table();
  std::array<Eigen::Matrix2cd, 3> out;
  for (int a = 0; a < 3; ++a) {
    out[a].setZero();
    for (int p = 0; p < 2; ++p) {
      for (int q = 0; q < 2; ++q) {
        const cplx coeff = s[a](q, p);
        if (coeff == cplx{0.0, 0.0}) continue;
        out[a] += coeff * k.block<2, 2>(2 * p, 2 * q);
      }
    }
  }
  return out;
}

Eigen::Matrix4cd CmopExactGenerator::source(const FluctuationRecord& partner,
                                            const FluctuationRecord& self) const {
  Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
  for (int b = 0; b < 3; ++b) {
    g += params_.J[b] * (kron2(partner.left[b], self.left[b]) -
                         kron2(partner.right[b], self.right[b]));
  }
  return g;
}

StateVector CmopExactGenerator::initial_state(const Eigen::Matrix2cd& rho_a,
                                              const Eigen::Matrix2cd& rho_b) {
  StateVector y = StateVector::Zero(kStateSize);
  view2(y, 0) = rho_a;
  view2(y, 4) = rho_b;
  return y;
}

void CmopExactGenerator::operator()(const StateVector& y, StateVector& dydt) const {
  using Vec16 = Eigen::Matrix<cplx, 16, 1>;
  dydt.resize(kStateSize);
  const auto* in = reinterpret_cast<const cplx*>(y.data());
  auto* out = reinterpret_cast<cplx*>(dydt.data());

  const Eigen::Matrix2cd rho_a = view2(y, 0);
  const Eigen::Matrix2cd rho_b = view2(y, 4);
  const Eigen::Map<const Eigen::Matrix4cd> k_a(in + 8);
  const Eigen::Map<const Eigen::Matrix4cd> k_b(in + 24);

  const SublatticeRates mf = mean_field_(rho_a, rho_b);
  const FluctuationRecord rec_a = make_record(rho_a);
  const FluctuationRecord rec_b = make_record(rho_b);

  const Eigen::Matrix4cd g_a = source(rec_b, rec_a);
  const Eigen::Matrix4cd g_b = source(rec_a, rec_b);
  Eigen::Map<Vec16>(out + 8) =
      pair_liouvillian_ * Eigen::Map<const Vec16>(k_a.data()) + Eigen::Map<const Vec16>(g_a.data());
  Eigen::Map<Vec16>(out + 24) =
      pair_liouvillian_ * Eigen::Map<const Vec16>(k_b.data()) + Eigen::Map<const Vec16>(g_b.data());

  const double scale = born_scale_;
  view2(dydt, 0) = mf.d_a + scale * born_commutators(params_, partial_traces(k_a));
  view2(dydt, 4) = mf.d_b + scale * born_commutators(params_, partial_traces(k_b));
}

namespace {

std::size_t grid_steps(double span, double dt, const char* what) {
  const double ratio = span / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument(std::string(what) + " must be an integer multiple of dt");
  }
  return static_cast<std::size_t>(nearest);
}

}  // namespace

MethodRun evolve_cmop(const BlochPair& pair, const ModelParams& params,
                      const IntegrationSettings& integration, const CmopSettings& cmop,
                      const AnalysisSettings& analysis, const SampleSink& sink) {
  pair.validate();
  params.validate();
  if (integration.adaptive) {
    throw std::invalid_argument("cMoP integration is fixed-step only (history grid alignment)");
  }
  if (!(integration.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (integration.sample_stride == 0) throw std::invalid_argument("sample stride must be >= 1");
  const std::size_t n_steps = grid_steps(integration.t_end, integration.dt, "t_end");
  const Eigen::Matrix2cd rho_a0 = bloch_to_density(pair.n_a);
  const Eigen::Matrix2cd rho_b0 = bloch_to_density(pair.n_b);

  MethodRun run;
  auto observe = [&](double t, const StateVector& y) {
    check_sublattice_trace(y, t);
    BlochSample s{t, density_to_bloch(view2(y, 0)), density_to_bloch(view2(y, 4))};
    run.trajectory.push_back(s);
    if (sink) sink(s);
  };

  if (cmop.memory == MemoryMode::Exact) {
    const CmopExactGenerator generator(params, cmop.born_scale);
    const RhsFn rhs = [&](double, const StateVector& y, StateVector& dydt) { generator(y, dydt); };
    run.stats = evolve(rhs, CmopExactGenerator::initial_state(rho_a0, rho_b0),
                       integration.step_control(), observe)
                    .stats;
  } else {
    grid_steps(cmop.t_mem, integration.dt, "t_mem");
    const MeanFieldGenerator mean_field(params);
    const BornQuadrature quadrature(params, integration.dt, cmop.t_mem);
    HistoryBuffer history(integration.dt, cmop.t_mem);
    history.push(rho_a0, rho_b0);

    const RhsFn rhs = [&](double t, const StateVector& y, StateVector& dydt) {
      const Eigen::Matrix2cd ra = view2(y, 0);
      const Eigen::Matrix2cd rb = view2(y, 4);
      SublatticeRates r = mean_field(ra, rb);
      const SublatticeRates born = quadrature.born(history, t, ra, rb);
      dydt.resize(16);
      view2(dydt, 0) = r.d_a + cmop.born_scale * born.d_a;
      view2(dydt, 4) = r.d_b + cmop.born_scale * born.d_b;
    };

    StateVector y = pack(SublatticeState{rho_a0, rho_b0, 0.0});
    observe(0.0, y);
    for (std::size_t step = 1; step <= n_steps; ++step) {
      const double t_prev = static_cast<double>(step - 1) * integration.dt;
      y = rk4_step(rhs, y, t_prev, integration.dt);
      history.push(view2(y, 0), view2(y, 4));
      const double t = static_cast<double>(step) * integration.dt;
      if (step % integration.sample_stride == 0 || step == n_steps) {
        observe(t, y);
      } else {
        check_sublattice_trace(y, t);
      }
    }
    run.stats.steps = n_steps;
    run.stats.rhs_evaluations = 4 * n_steps;
  }
  run.summary = summarize(run.trajectory, analysis);
  return run;
}

}  // namespace dhl
