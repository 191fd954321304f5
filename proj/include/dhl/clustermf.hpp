#pragma once

// Cluster mean field: exact Lindblad dynamics inside a periodically tiled
// cluster, with each boundary site driven by the classical field
//   B_j^a = sum_{links l at j} (J_a / z) <sigma^a>_{mirror(l)}
// of the neighbouring tile. Clusters with an odd side length are evolved as a
// complementary pair (C_A, C_B) whose boundary fields read each other.

#include "dhl/model.hpp"
#include "dhl/run.hpp"

#include <span>
#include <vector>

namespace dhl {

/// Matrix-free Lindblad generator of one cluster. Basis index bit (N-1-j)
/// holds site j, with 0 = |e> and 1 = |g>.
///
/// apply() forms rho H_eff^dag column by column and recovers H_eff rho as its
/// adjoint, so the input must be Hermitian; the output is then exactly Hermitian.
/// Holds scratch buffers: one instance per trajectory.
class ClusterLiouvillian {
 public:
  ClusterLiouvillian(const ClusterGeometry& geometry, const ModelParams& params);

  std::size_t sites() const { return n_sites_; }
  Eigen::Index dim() const { return dim_; }

  /// out = L_C rho - i sum_j [B_j . sigma_j, rho]; `fields` has one entry per site.
  void apply(const cplx* rho, cplx* out, std::span<const Vec3> fields) const;
  DenseOperator apply(const DenseOperator& rho, std::span<const Vec3> fields) const;

  /// Dense Hamiltonian including the fields (tests and small clusters only).
  DenseOperator hamiltonian(std::span<const Vec3> fields) const;

 private:
  struct FlipTerm {
    std::size_t mask;
    std::size_t first_bit;
    std::size_t second_bit;  // equal to first_bit for single-site terms
    std::size_t site;        // single-site terms only
    bool bond;
  };

  std::size_t n_sites_;
  Eigen::Index dim_;
  ModelParams params_;
  std::vector<FlipTerm> terms_;
  std::vector<double> bond_diagonal_;   // sum over bonds of (J_z/z) s_i s_j
  std::vector<double> excited_count_;   // number of |e> factors per basis state
  mutable std::vector<cplx> scratch_;
  mutable std::vector<cplx> coeff_;
};

/// L_C rho with zero boundary field. rho must be Hermitian.
DenseOperator cluster_internal_rhs(const DenseOperator& rho, const ClusterGeometry& geometry,
                                   const ModelParams& params);

/// <sigma^a_j> for every site of a cluster state (raw pointer: dim x dim, column-major).
std::vector<Vec3> site_polarizations(const cplx* rho, std::size_t n_sites);
std::vector<Vec3> site_polarizations(const DenseOperator& rho);

/// Fields on every site of the cluster tagged `self` (zero away from the boundary).
/// `same` are the polarizations of that cluster, `complement` those of its
/// partner; throws std::invalid_argument if a referenced mirror is missing.
std::vector<Vec3> boundary_field(std::span<const Vec3> same, std::span<const Vec3> complement,
                                 const ClusterGeometry& geometry, const ModelParams& params);

/// The coupled ODE for one cluster, or a complementary pair, on a flattened
/// state [rho_CA, rho_CB].
class ClusterMeanFieldSystem {
 public:
  ClusterMeanFieldSystem(ClusterGeometry geometry, const ModelParams& params);

  const ClusterGeometry& geometry() const { return geometry_; }
  std::size_t cluster_count() const { return paired_ ? 2 : 1; }
  Eigen::Index cluster_dim() const { return liouvillian_.dim(); }
  Eigen::Index state_size() const;

  StateVector initial_state(const BlochPair& pair) const;
  void rhs(const StateVector& y, StateVector& dydt) const;

  /// Cluster `index` (0 = C_A, 1 = C_B) as a dense matrix.
  DenseOperator cluster(const StateVector& y, std::size_t index) const;
  /// Polarization averaged over A-labelled and B-labelled sites of all clusters.
  BlochSample sublattice_average(double t, const StateVector& y) const;
  /// max |Tr rho_C - 1| over clusters.
  double trace_defect(const StateVector& y) const;

 private:
  ClusterGeometry geometry_;
  ModelParams params_;
  ClusterLiouvillian liouvillian_;
  bool paired_;
};

/// Throws std::invalid_argument unless params.z == 2 * geometry.dimension().
MethodRun evolve_cmf(const BlochPair& pair, const ClusterGeometry& geometry,
                     const ModelParams& params, const IntegrationSettings& integration,
                     const AnalysisSettings& analysis, const SampleSink& sink = {});

}  // namespace dhl
