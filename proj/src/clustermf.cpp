#include "dhl/clustermf.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace dhl {

namespace {

inline bool is_ground(std::size_t index, std::size_t bit) { return (index >> bit) & 1U; }

}  // namespace

ClusterLiouvillian::ClusterLiouvillian(const ClusterGeometry& geometry, const ModelParams& params)
    : n_sites_(geometry.site_count()),
      dim_(Eigen::Index{1} << geometry.site_count()),
      params_(params) {
  params_.validate();
  const auto d = static_cast<std::size_t>(dim_);
  auto bit_of = [&](std::size_t site) { return n_sites_ - 1 - site; };

  for (std::size_t j = 0; j < n_sites_; ++j) {
    terms_.push_back({std::size_t{1} << bit_of(j), bit_of(j), bit_of(j), j, false});
  }
  for (const auto& bond : geometry.internal_bonds) {
    const std::size_t bi = bit_of(bond.first), bj = bit_of(bond.second);
    terms_.push_back({(std::size_t{1} << bi) | (std::size_t{1} << bj), bi, bj, 0, true});
  }

  const double jz = params_.J.z() / static_cast<double>(params_.z);
  bond_diagonal_.assign(d, 0.0);
  excited_count_.assign(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    for (const auto& bond : geometry.internal_bonds) {
      const bool same = is_ground(c, bit_of(bond.first)) == is_ground(c, bit_of(bond.second));
      bond_diagonal_[c] += same ? jz : -jz;
    }
    for (std::size_t j = 0; j < n_sites_; ++j) {
      if (!is_ground(c, bit_of(j))) excited_count_[c] += 1.0;
    }
  }
  scratch_.resize(d * d);
  coeff_.resize((terms_.size() + 1) * d);
}

void ClusterLiouvillian::apply(const cplx* rho, cplx* out, std::span<const Vec3> fields) const {
  if (fields.size() != n_sites_) {
    throw std::invalid_argument("cluster field list must have one entry per site");
  }
  const Eigen::Index d = dim_;
  const auto du = static_cast<std::size_t>(d);
  const double inv_z = 1.0 / static_cast<double>(params_.z);
  const double bond_equal = (params_.J.x() - params_.J.y()) * inv_z;
  const double bond_differ = (params_.J.x() + params_.J.y()) * inv_z;

  // H_eff[c, c ^ mask] per term, and H_eff[c, c] in the last row; stored conjugated.
  cplx* diag = coeff_.data() + terms_.size() * du;
  for (std::size_t c = 0; c < du; ++c) {
    double field_z = 0.0;
    for (std::size_t j = 0; j < n_sites_; ++j) {
      field_z += is_ground(c, n_sites_ - 1 - j) ? -fields[j].z() : fields[j].z();
    }
    diag[c] = std::conj(cplx(bond_diagonal_[c] + field_z, -0.5 * params_.gamma * excited_count_[c]));
  }
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const FlipTerm& term = terms_[t];
    cplx* row = coeff_.data() + t * du;
    if (term.bond) {
      for (std::size_t c = 0; c < du; ++c) {
        row[c] = is_ground(c, term.first_bit) == is_ground(c, term.second_bit) ? bond_equal
                                                                                : bond_differ;
      }
    } else {
      const Vec3& b = fields[term.site];
      const double real = 0.5 * params_.omega + b.x();
      for (std::size_t c = 0; c < du; ++c) {
        // sigma^y[c, c^mask] = +i when site is |g> in row c, -i otherwise; conjugated
        row[c] = cplx(real, is_ground(c, term.first_bit) ? -b.y() : b.y());
      }
    }
  }

  // N = rho H_eff^dag, column by column.
  const Eigen::Map<const Eigen::MatrixXcd> r(rho, d, d);
  Eigen::Map<Eigen::MatrixXcd> n(scratch_.data(), d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    n.col(c) = diag[cu] * r.col(c);
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      const cplx k = coeff_[t * du + cu];
      if (k == cplx{0.0, 0.0}) continue;
      n.col(c) += k * r.col(static_cast<Eigen::Index>(cu ^ terms_[t].mask));
    }
  }

  // -i (H_eff rho - rho H_eff^dag) with H_eff rho = N^dag for Hermitian rho.
  Eigen::Map<Eigen::MatrixXcd> o(out, d, d);
  o.noalias() = (-kI) * (n.adjoint() - n);

  // gamma sigma^-_j rho sigma^+_j: rows and columns with site j in |g>.
  if (params_.gamma != 0.0) {
    for (std::size_t j = 0; j < n_sites_; ++j) {
      const auto m = static_cast<Eigen::Index>(std::size_t{1} << (n_sites_ - 1 - j));
      for (Eigen::Index c = 0; c < d; ++c) {
        if (!(c & m)) continue;
        for (Eigen::Index base = 0; base < d; base += 2 * m) {
          o.col(c).segment(base + m, m) += params_.gamma * r.col(c ^ m).segment(base, m);
        }
      }
    }
  }
}

DenseOperator ClusterLiouvillian::apply(const DenseOperator& rho,
                                        std::span<const Vec3> fields) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw std::invalid_argument("cluster state dimension " + std::to_string(rho.rows()) +
                                " does not match geometry (" + std::to_string(dim_) + ")");
  }
  DenseOperator out(dim_, dim_);
  apply(rho.data(), out.data(), fields);
  return out;
}

DenseOperator ClusterLiouvillian::hamiltonian(std::span<const Vec3> fields) const {
  const auto& s = pauli_table();
  DenseOperator h = DenseOperator::Zero(dim_, dim_);
  for (std::size_t j = 0; j < n_sites_; ++j) {
    const Eigen::Matrix2cd local = 0.5 * params_.omega * s[0] + fields[j].x() * s[0] +
                                   fields[j].y() * s[1] + fields[j].z() * s[2];
    h += embed(local, j, n_sites_);
  }
  for (const auto& term : terms_) {
    if (!term.bond) continue;
    const std::size_t i = n_sites_ - 1 - term.first_bit, j = n_sites_ - 1 - term.second_bit;
    for (int a = 0; a < 3; ++a) {
      h += (params_.J[a] / params_.z) * embed(s[a], i, n_sites_) * embed(s[a], j, n_sites_);
    }
  }
  return h;
}

DenseOperator cluster_internal_rhs(const DenseOperator& rho, const ClusterGeometry& geometry,
                                   const ModelParams& params) {
  const ClusterLiouvillian l(geometry, params);
  const std::vector<Vec3> zero(geometry.site_count(), Vec3::Zero());
  return l.apply(rho, zero);
}

std::vector<Vec3> site_polarizations(const cplx* rho, std::size_t n_sites) {
  const std::size_t d = std::size_t{1} << n_sites;
  std::vector<Vec3> out(n_sites, Vec3::Zero());
  for (std::size_t j = 0; j < n_sites; ++j) {
    const std::size_t bit = n_sites - 1 - j;
    const std::size_t m = std::size_t{1} << bit;
    cplx sx{0.0, 0.0}, sy{0.0, 0.0};
    double sz = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const cplx flipped = rho[c * d + (c ^ m)];  // rho[c^m, c]
      sx += flipped;
      const bool ground = is_ground(c, bit);
      sy += ground ? kI * flipped : -kI * flipped;
      sz += ground ? -rho[c * d + c].real() : rho[c * d + c].real();
    }
    out[j] = Vec3(sx.real(), sy.real(), sz);
  }
  return out;
}

std::vector<Vec3> site_polarizations(const DenseOperator& rho) {
  return site_polarizations(rho.data(), qubit_count(rho.rows()));
}

std::vector<Vec3> boundary_field(std::span<const Vec3> same, std::span<const Vec3> complement,
                                 const ClusterGeometry& geometry, const ModelParams& params) {
  std::vector<Vec3> fields(geometry.site_count(), Vec3::Zero());
  const Vec3 coupling = params.J / static_cast<double>(params.z);
  for (const auto& link : geometry.boundary_links) {
    const auto& source = link.partner == PartnerTag::Same ? same : complement;
    if (link.mirror >= source.size()) {
      throw std::invalid_argument("missing polarization for mirror site " +
                                  std::to_string(link.mirror) + " of boundary site " +
                                  std::to_string(link.site));
    }
    fields[link.site] += coupling.cwiseProduct(source[link.mirror]);
  }
  return fields;
}

ClusterMeanFieldSystem::ClusterMeanFieldSystem(ClusterGeometry geometry, const ModelParams& params)
    : geometry_(std::move(geometry)),
      params_(params),
      liouvillian_(geometry_, params),
      paired_(geometry_.needs_complement()) {}

Eigen::Index ClusterMeanFieldSystem::state_size() const {
  return 2 * static_cast<Eigen::Index>(cluster_count()) * cluster_dim() * cluster_dim();
}

StateVector ClusterMeanFieldSystem::initial_state(const BlochPair& pair) const {
  StateVector y(state_size());
  const Eigen::Index block = cluster_dim() * cluster_dim();
  auto* data = reinterpret_cast<cplx*>(y.data());
  for (std::size_t k = 0; k < cluster_count(); ++k) {
    const DenseOperator rho =
        product_state(pair, geometry_, k == 0 ? PartnerTag::Same : PartnerTag::Complement);
    std::copy(rho.data(), rho.data() + block, data + static_cast<Eigen::Index>(k) * block);
  }
  return y;
}

void ClusterMeanFieldSystem::rhs(const StateVector& y, StateVector& dydt) const {
  dydt.resize(y.size());
  const Eigen::Index block = cluster_dim() * cluster_dim();
  const auto* in = reinterpret_cast<const cplx*>(y.data());
  auto* out = reinterpret_cast<cplx*>(dydt.data());
  const std::size_t n = geometry_.site_count();

  const std::vector<Vec3> pol_a = site_polarizations(in, n);
  const std::vector<Vec3> pol_b = paired_ ? site_polarizations(in + block, n) : std::vector<Vec3>{};
  liouvillian_.apply(in, out, boundary_field(pol_a, pol_b, geometry_, params_));
  if (paired_) {
    liouvillian_.apply(in + block, out + block, boundary_field(pol_b, pol_a, geometry_, params_));
  }
}

DenseOperator ClusterMeanFieldSystem::cluster(const StateVector& y, std::size_t index) const {
  if (index >= cluster_count()) throw std::out_of_range("cluster index out of range");
  const Eigen::Index d = cluster_dim();
  const auto* in = reinterpret_cast<const cplx*>(y.data()) + static_cast<Eigen::Index>(index) * d * d;
  return Eigen::Map<const DenseOperator>(in, d, d);
}

BlochSample ClusterMeanFieldSystem::sublattice_average(double t, const StateVector& y) const {
  const Eigen::Index block = cluster_dim() * cluster_dim();
  const auto* in = reinterpret_cast<const cplx*>(y.data());
  BlochSample s;
  s.t = t;
  double count_a = 0.0, count_b = 0.0;
  for (std::size_t k = 0; k < cluster_count(); ++k) {
    const auto pols =
        site_polarizations(in + static_cast<Eigen::Index>(k) * block, geometry_.site_count());
    const PartnerTag tag = k == 0 ? PartnerTag::Same : PartnerTag::Complement;
    for (std::size_t j = 0; j < pols.size(); ++j) {
      if (geometry_.label(j, tag) == Sublattice::A) {
        s.n_a += pols[j];
        count_a += 1.0;
      } else {
        s.n_b += pols[j];
        count_b += 1.0;
      }
    }
  }
  if (count_a > 0.0) s.n_a /= count_a;
  if (count_b > 0.0) s.n_b /= count_b;
  return s;
}

double ClusterMeanFieldSystem::trace_defect(const StateVector& y) const {
  double worst = 0.0;
  for (std::size_t k = 0; k < cluster_count(); ++k) {
    const Eigen::Index d = cluster_dim();
    const auto* in = reinterpret_cast<const cplx*>(y.data()) + static_cast<Eigen::Index>(k) * d * d;
    cplx tr{0.0, 0.0};
    for (Eigen::Index i = 0; i < d; ++i) tr += in[i * d + i];
    worst = std::max(worst, std::abs(tr - 1.0));
  }
  return worst;
}

MethodRun evolve_cmf(const BlochPair& pair, const ClusterGeometry& geometry,
                     const ModelParams& params, const IntegrationSettings& integration,
                     const AnalysisSettings& analysis, const SampleSink& sink) {
  pair.validate();
  if (params.z != 2 * static_cast<int>(geometry.dimension())) {
    throw std::invalid_argument("cluster mean field needs z = 2d (z = " + std::to_string(params.z) +
                                ", d = " + std::to_string(geometry.dimension()) + ")");
  }
  const ClusterMeanFieldSystem system(geometry, params);
  const RhsFn rhs = [&](double, const StateVector& y, StateVector& dydt) { system.rhs(y, dydt); };

  MethodRun run;
  const ObserverFn observer = [&](double t, const StateVector& y) {
    const double defect = system.trace_defect(y);
    if (defect > kTraceAbortTolerance) {
      throw NumericalError("cluster trace drift " + std::to_string(defect) + " at t = " +
                               std::to_string(t) + "; reduce the step size",
                           t);
    }
    const BlochSample s = system.sublattice_average(t, y);
    run.trajectory.push_back(s);
    if (sink) sink(s);
  };
  run.stats = evolve(rhs, system.initial_state(pair), integration.step_control(), observer).stats;
  run.summary = summarize(run.trajectory, analysis);
  return run;
}

}  // namespace dhl
