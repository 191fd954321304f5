#include "dhl/oracle.hpp"

#include "dhl/clustermf.hpp"
#include "dhl/cmop.hpp"
#include "dhl/integrator.hpp"
#include "dhl/meanfield.hpp"
#include "dhl/propagator.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace dhl {

SmallLattice ring_lattice(std::size_t n_sites, int z) {
  if (n_sites == 0) throw std::invalid_argument("ring_lattice: n_sites must be >= 1");
  if (n_sites > kMaxOracleSites)
    throw std::length_error("ring_lattice: " + std::to_string(n_sites) + " sites exceeds cap of " +
                            std::to_string(kMaxOracleSites));
  if (z < 1) throw std::invalid_argument("ring_lattice: z must be >= 1");
  SmallLattice lattice;
  lattice.n_sites = n_sites;
  lattice.z = z;
  if (n_sites == 2) {
    lattice.bonds.emplace_back(0, 1);
  } else if (n_sites > 2) {
    for (std::size_t i = 0; i < n_sites; ++i) lattice.bonds.emplace_back(i, (i + 1) % n_sites);
  }
  return lattice;
}

namespace {

void check_lattice(const SmallLattice& lattice) {
  if (lattice.n_sites == 0 || lattice.n_sites > kMaxOracleSites)
    throw std::length_error("oracle: lattice size outside [1, " + std::to_string(kMaxOracleSites) +
                            "]");
  for (const auto& [a, b] : lattice.bonds)
    if (a >= lattice.n_sites || b >= lattice.n_sites || a == b)
      throw std::invalid_argument("oracle: malformed bond");
}

DenseOperator as_dense(const Eigen::Matrix2cd& m) { return DenseOperator(m); }

}  // namespace

DenseOperator lattice_hamiltonian(const SmallLattice& lattice, const ModelParams& params,
                                  const PauliTable& table) {
  check_lattice(lattice);
  const std::size_t n = lattice.n_sites;
  const Eigen::Index dim = Eigen::Index{1} << n;
  DenseOperator h = DenseOperator::Zero(dim, dim);
  for (std::size_t j = 0; j < n; ++j) h += 0.5 * params.omega * embed(as_dense(table[0]), j, n);
  for (const auto& [a, b] : lattice.bonds) {
    for (int ax = 0; ax < 3; ++ax) {
      if (params.J[ax] == 0.0) continue;
      const DenseOperator s = as_dense(table[ax]);
      h += (params.J[ax] / lattice.z) * (embed(s, a, n) * embed(s, b, n));
    }
  }
  return h;
}

std::vector<JumpOperator> lattice_jumps(const SmallLattice& lattice, const ModelParams& params,
                                        const PauliTable& table) {
  check_lattice(lattice);
  const DenseOperator lower = as_dense(0.5 * (table[0] - kI * table[1]));
  std::vector<JumpOperator> jumps;
  jumps.reserve(lattice.n_sites);
  for (std::size_t j = 0; j < lattice.n_sites; ++j)
    jumps.push_back({embed(lower, j, lattice.n_sites), params.gamma});
  return jumps;
}

ExactRun exact_evolve(const SmallLattice& lattice, const ModelParams& params,
                      const DenseOperator& rho0, double t_end, double dt, const PauliTable& table) {
  check_lattice(lattice);
  params.validate();
  const Eigen::Index dim = Eigen::Index{1} << lattice.n_sites;
  if (rho0.rows() != dim || rho0.cols() != dim)
    throw std::invalid_argument("exact_evolve: rho0 must be " + std::to_string(dim) + "x" +
                                std::to_string(dim));
  if (!(dt > 0.0) || !(t_end >= 0.0))
    throw std::invalid_argument("exact_evolve: need dt > 0 and t_end >= 0");

  const DenseOperator h = lattice_hamiltonian(lattice, params, table);
  const std::vector<JumpOperator> jumps = lattice_jumps(lattice, params, table);
  const DenseOperator super = dense_liouvillian(h, jumps);
  const Eigen::Index n2 = dim * dim;

  ExactRun run;
  auto record = [&](double t, const StateVector& y) {
    Eigen::Map<const Eigen::VectorXcd> v(reinterpret_cast<const cplx*>(y.data()), n2);
    DenseOperator rho = unvectorize(v);
    const double trace_defect = std::abs(rho.trace() - cplx{1.0, 0.0});
    if (trace_defect > 1e-10)
      throw NumericalError("exact_evolve: trace drift " + std::to_string(trace_defect), t);
    const DenseOperator herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseOperator> solver(herm, Eigen::EigenvaluesOnly);
    run.max_trace_defect = std::max(run.max_trace_defect, trace_defect);
    run.min_eigenvalue = std::min(run.min_eigenvalue, solver.eigenvalues().minCoeff());
    run.t.push_back(t);
    run.states.push_back(std::move(rho));
  };

  StateVector y0(2 * n2);
  Eigen::Map<Eigen::VectorXcd>(reinterpret_cast<cplx*>(y0.data()), n2) = vectorize(rho0);
  if (t_end == 0.0) {
    record(0.0, y0);
    return run;
  }

  const RhsFn rhs = [&](double, const StateVector& y, StateVector& dydt) {
    dydt.resize(y.size());
    Eigen::Map<const Eigen::VectorXcd> v(reinterpret_cast<const cplx*>(y.data()), n2);
    Eigen::Map<Eigen::VectorXcd> out(reinterpret_cast<cplx*>(dydt.data()), n2);
    out.noalias() = super * v;
  };
  StepControl control;
  control.mode = StepControl::Mode::Adaptive;
  control.dt = std::min(dt, 1e-2);
  control.t_end = t_end;
  control.observer_stride = 1;
  control.abs_tol = 1e-13;
  control.rel_tol = 1e-11;
  control.dt_min = 1e-12;
  control.dt_max = dt;
  // Sampling multiples of control.dt, thinned to multiples of dt.
  const double spacing = dt;
  double next = 0.0;
  evolve(rhs, y0, control, [&](double t, const StateVector& y) {
    if (t + 1e-9 * spacing >= next || t == t_end) {
      record(t, y);
      while (next <= t + 1e-9 * spacing) next += spacing;
    }
  });
  return run;
}

Vec3 analytic_single_site(double omega, double gamma) {
  if (!(gamma > 0.0)) throw std::domain_error("analytic_single_site: gamma must be positive");
  const double g2 = gamma * gamma;
  const double z_ss = -g2 / (g2 + 2.0 * omega * omega);
  return {0.0, -2.0 * omega * z_ss / gamma, z_ss};
}

Vec3 site_bloch(const DenseOperator& rho, std::size_t site, const PauliTable& table) {
  const std::size_t n = qubit_count(rho.rows());
  Vec3 out;
  for (int ax = 0; ax < 3; ++ax) out[ax] = expectation(embed(as_dense(table[ax]), site, n), rho).real();
  return out;
}

namespace {

double max_abs(const DenseOperator& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

DenseOperator random_density(std::mt19937_64& rng, Eigen::Index dim) {
  auto uniform = [&rng] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };
  DenseOperator g(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c)
    for (Eigen::Index r = 0; r < dim; ++r) g(r, c) = cplx{uniform(), uniform()};
  DenseOperator rho = g * g.adjoint();
  return rho / rho.trace();
}

ModelParams coupled(int z, int dimension) {
  ModelParams p = parameter_set_a(z, dimension);
  return p;
}

template <class F>
OracleCheck run_check(std::string name, double tolerance, F&& body) {
  OracleCheck check{std::move(name), tolerance, std::numeric_limits<double>::infinity(), false};
  try {
    check.residual = body();
  } catch (const std::exception&) {
    check.residual = std::numeric_limits<double>::infinity();
  }
  check.passed = std::isfinite(check.residual) && check.residual <= tolerance;
  return check;
}

}  // namespace

std::vector<OracleCheck> run_oracle_checks(const PauliTable& table) {
  std::vector<OracleCheck> checks;

  checks.push_back(run_check("pauli_products", 1e-15, [&] {
    // sigma^a sigma^b = delta_ab I + i eps_abc sigma^c
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        Eigen::Matrix2cd expected = Eigen::Matrix2cd::Zero();
        if (a == b) expected = Eigen::Matrix2cd::Identity();
        else {
          const int c = 3 - a - b;
          const double eps = ((b - a + 3) % 3 == 1) ? 1.0 : -1.0;
          expected = eps * kI * table[c];
        }
        worst = std::max(worst, max_abs(table[a] * table[b] - expected));
      }
    }
    return worst;
  }));

  checks.push_back(run_check("pauli_reference_basis", 1e-15, [&] {
    // sigma^z |e> = |e>, sigma^- |e> = |g> with |e> = index 0
    const Eigen::Matrix2cd lower = 0.5 * (table[0] - kI * table[1]);
    double worst = max_abs(table[2] - pauli(PauliAxis::Z));
    worst = std::max(worst, max_abs(lower - pauli(PauliAxis::Minus)));
    for (int a = 0; a < 3; ++a) {
      worst = std::max(worst, max_abs(table[a] - table[a].adjoint()));
      worst = std::max(worst, std::abs(table[a].trace()));
    }
    return worst;
  }));

  checks.push_back(run_check("dense_vs_termwise_liouvillian", 1e-13, [&] {
    const SmallLattice lattice = ring_lattice(3, 2);
    const ModelParams params = coupled(2, 1);
    const DenseOperator h = lattice_hamiltonian(lattice, params, table);
    const auto jumps = lattice_jumps(lattice, params, table);
    const DenseOperator super = dense_liouvillian(h, jumps);
    std::mt19937_64 rng(20240611);
    double worst = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
      const DenseOperator rho = random_density(rng, h.rows());
      const DenseOperator a = unvectorize(super * vectorize(rho));
      const DenseOperator b = lindblad_apply(h, jumps, rho);
      worst = std::max(worst, max_abs(a - b));
    }
    return worst;
  }));

  checks.push_back(run_check("cluster_rhs_vs_dense_steps", 1e-10, [&] {
    const SmallLattice lattice = ring_lattice(2, 1);
    const ModelParams params = coupled(1, 1);
    const ClusterGeometry geometry = build_geometry({2});
    const DenseOperator h = lattice_hamiltonian(lattice, params, table);
    const auto jumps = lattice_jumps(lattice, params, table);
    const DenseOperator super = dense_liouvillian(h, jumps);
    std::mt19937_64 rng(7);
    DenseOperator a = random_density(rng, 4);
    Eigen::VectorXcd b = vectorize(a);
    const double dt = 0.005;
    double worst = 0.0;
    for (int step = 0; step < 200; ++step) {
      auto fa = [&](const DenseOperator& r) { return cluster_internal_rhs(r, geometry, params); };
      const DenseOperator k1 = fa(a);
      const DenseOperator k2 = fa(a + 0.5 * dt * k1);
      const DenseOperator k3 = fa(a + 0.5 * dt * k2);
      const DenseOperator k4 = fa(a + dt * k3);
      a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const Eigen::VectorXcd m1 = super * b;
      const Eigen::VectorXcd m2 = super * (b + 0.5 * dt * m1);
      const Eigen::VectorXcd m3 = super * (b + 0.5 * dt * m2);
      const Eigen::VectorXcd m4 = super * (b + dt * m3);
      b += dt / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
      worst = std::max(worst, max_abs(a - unvectorize(b)));
    }
    return worst;
  }));

  checks.push_back(run_check("exact_single_site_steady_state", 1e-9, [&] {
    ModelParams params;
    params.omega = 1.0;
    const DenseOperator rho0 = as_dense(bloch_to_density(Vec3(0.0, 0.0, -1.0)));
    const ExactRun run = exact_evolve(ring_lattice(1, 1), params, rho0, 80.0, 5.0, table);
    const Vec3 n = site_bloch(run.states.back(), 0, table);
    return (n - analytic_single_site(1.0, 1.0)).cwiseAbs().maxCoeff();
  }));

  checks.push_back(run_check("exact_two_site_factorization", 1e-9, [&] {
    ModelParams params;
    params.omega = 1.0;
    const Eigen::Matrix2cd r1 = bloch_to_density(Vec3(0.3, -0.2, 0.5));
    const Eigen::Matrix2cd r2 = bloch_to_density(Vec3(-0.6, 0.1, -0.4));
    const double t_end = 3.0;
    const ExactRun run =
        exact_evolve(ring_lattice(2, 1), params, kron(as_dense(r1), as_dense(r2)), t_end, 1.0, table);
    const SingleSitePropagator prop(params.omega, params.gamma);
    const DenseOperator expected = kron(as_dense(propagate_local(prop, t_end, r1)),
                                        as_dense(propagate_local(prop, t_end, r2)));
    return max_abs(run.states.back() - expected);
  }));

  const auto coupled_run = [&] {
    const SmallLattice lattice = ring_lattice(4, 2);
    const BlochPair pair = preset_r2();
    DenseOperator rho0 = as_dense(bloch_to_density(pair.n_a));
    for (std::size_t j = 1; j < lattice.n_sites; ++j)
      rho0 = kron(rho0, as_dense(bloch_to_density(j % 2 == 0 ? pair.n_a : pair.n_b)));
    return exact_evolve(lattice, coupled(2, 1), rho0, 5.0, 0.25, table);
  };
  checks.push_back(run_check("exact_trace_preservation", 1e-10,
                             [&] { return coupled_run().max_trace_defect; }));
  checks.push_back(run_check("exact_positivity", 1e-9,
                             [&] { return std::max(0.0, -coupled_run().min_eigenvalue); }));

  checks.push_back(run_check("analytic_state_is_mf_fixed_point", 1e-12, [&] {
    double worst = 0.0;
    for (double omega : {0.0, 0.5, 1.0, 2.25, 10.0}) {
      ModelParams params;
      params.omega = omega;
      SublatticeState state;
      state.rho_a = bloch_to_density(analytic_single_site(omega, 1.0));
      state.rho_b = state.rho_a;
      const SublatticeRates rates = mf_rhs(state, params);
      worst = std::max({worst, max_abs(rates.d_a), max_abs(rates.d_b)});
    }
    return worst;
  }));

  checks.push_back(run_check("propagator_semigroup", 1e-12, [&] {
    double worst = 0.0;
    for (double omega : {1.0, 0.25, 2.25}) {
      const SingleSitePropagator prop(omega, 1.0);
      const Eigen::Matrix4cd lhs = prop.superoperator(1.3);
      const Eigen::Matrix4cd rhs = prop.superoperator(0.5) * prop.superoperator(0.8);
      worst = std::max(worst, max_abs(lhs - rhs));
    }
    return worst;
  }));

  checks.push_back(run_check("born_kernel_equal_time", 1e-12, [&] {
    const Eigen::Matrix2cd rho = bloch_to_density(Vec3(0.3, -0.4, 0.2));
    const BornKernelValue v = born_kernels(make_record(rho), Eigen::Matrix4cd::Identity(), 0.0);
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const cplx mean_a = (table[a] * rho).trace();
        const cplx mean_b = (table[b] * rho).trace();
        const cplx d = (table[a] * table[b] * rho).trace() - mean_a * mean_b;
        const cplx s = (table[b] * table[a] * rho).trace() - mean_a * mean_b;
        worst = std::max({worst, std::abs(v.d(a, b) - d), std::abs(v.s(a, b) - s)});
      }
    }
    return worst;
  }));

  return checks;
}

}  // namespace dhl
