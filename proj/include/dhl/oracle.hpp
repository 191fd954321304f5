#pragma once

// Brute-force references: full Lindblad evolution of a handful of sites under
// the dense superoperator, and the closed-form single-site steady state.

#include "dhl/model.hpp"
#include "dhl/operators.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dhl {

inline constexpr std::size_t kMaxOracleSites = 6;

struct SmallLattice {
  std::size_t n_sites = 1;
  std::vector<std::pair<std::size_t, std::size_t>> bonds;
  int z = 1;  // bond couplings are J_a / z
};

/// Periodic ring; n = 2 has a single bond. Throws std::length_error above kMaxOracleSites.
SmallLattice ring_lattice(std::size_t n_sites, int z);

/// H = (Omega/2) sum sigma^x + sum_bonds sum_a (J_a/z) sigma^a sigma^a, built from `table`.
DenseOperator lattice_hamiltonian(const SmallLattice& lattice, const ModelParams& params,
                                  const PauliTable& table = pauli_table());
/// Decay on every site with sigma^- = (sigma^x - i sigma^y)/2 taken from `table`.
std::vector<JumpOperator> lattice_jumps(const SmallLattice& lattice, const ModelParams& params,
                                        const PauliTable& table = pauli_table());

struct ExactRun {
  std::vector<double> t;
  std::vector<DenseOperator> states;
  double max_trace_defect = 0.0;
  double min_eigenvalue = 1.0;
};

/// Adaptive integration of vec(rho) under the dense Liouvillian, sampled every dt.
ExactRun exact_evolve(const SmallLattice& lattice, const ModelParams& params,
                      const DenseOperator& rho0, double t_end, double dt,
                      const PauliTable& table = pauli_table());

/// (0, -2 Omega z_ss / gamma, z_ss) with z_ss = -gamma^2 / (gamma^2 + 2 Omega^2).
/// Throws std::domain_error for gamma <= 0.
Vec3 analytic_single_site(double omega, double gamma);

/// Bloch vector of site `site` in a multi-site state, using `table`.
Vec3 site_bloch(const DenseOperator& rho, std::size_t site,
                const PauliTable& table = pauli_table());

struct OracleCheck {
  std::string name;
  double tolerance = 0.0;
  double residual = 0.0;
  bool passed = false;
};

/// Equivalence and analytic checks; `table` lets tests inject a corrupted Pauli set.
std::vector<OracleCheck> run_oracle_checks(const PauliTable& table = pauli_table());

}  // namespace dhl
