#include "dhl/model.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dhl {

void ModelParams::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (z < 1) throw std::invalid_argument("coordination number z must be >= 1");
  if (dimension < 1) throw std::invalid_argument("lattice dimension must be >= 1");
  if (!J.allFinite() || !std::isfinite(omega)) {
    throw std::invalid_argument("couplings and drive must be finite");
  }
}

ModelParams parameter_set_a(int z, int dimension) {
  return {Vec3(-7.0, 6.0, 2.0), 1.0, 1.0, z, dimension};
}

ModelParams parameter_set_b(int z, int dimension) {
  return {Vec3(-6.4, 3.0, 6.0), 2.25, 1.0, z, dimension};
}

void BlochPair::validate() const {
  constexpr double slack = 1e-12;
  if (!(n_a.norm() <= 1.0 + slack) || !(n_b.norm() <= 1.0 + slack)) {
    throw std::domain_error("Bloch vector outside the unit ball (|n_A| = " +
                            std::to_string(n_a.norm()) + ", |n_B| = " +
                            std::to_string(n_b.norm()) + ")");
  }
}

BlochPair preset_r1() {
  return {Vec3(0.0911, -0.5318, -0.7725), Vec3(-0.0007, -0.6958, 0.0654)};
}

BlochPair preset_r2() {
  return {Vec3(0.2576, 0.1597, 0.1999), Vec3(-0.4684, -0.4306, -0.4928)};
}

bool ClusterGeometry::needs_complement() const {
  for (const auto& link : boundary_links) {
    if (link.partner == PartnerTag::Complement) return true;
  }
  return false;
}

Sublattice ClusterGeometry::label(std::size_t site, PartnerTag cluster) const {
  const Sublattice s = sublattice.at(site);
  return cluster == PartnerTag::Same ? s : other(s);
}

std::vector<std::size_t> ClusterGeometry::coordinates(std::size_t site) const {
  // Row-major: the last axis varies fastest.
  std::vector<std::size_t> coord(shape.size());
  for (std::size_t k = shape.size(); k-- > 0;) {
    coord[k] = site % shape[k];
    site /= shape[k];
  }
  return coord;
}

ClusterGeometry build_geometry(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw std::invalid_argument("cluster shape must have at least one side");
  std::size_t n_sites = 1;
  for (std::size_t side : shape) {
    if (side < 1) throw std::invalid_argument("cluster side lengths must be >= 1");
    n_sites *= side;
    if (n_sites > kMaxClusterSites) {
      throw std::length_error("cluster exceeds " + std::to_string(kMaxClusterSites) +
                              " sites (2^10 state-space cap)");
    }
  }

  ClusterGeometry g;
  g.shape = shape;
  const std::size_t d = shape.size();
  auto index_of = [&](const std::vector<std::size_t>& coord) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < d; ++k) idx = idx * shape[k] + coord[k];
    return idx;
  };

  g.sublattice.resize(n_sites);
  for (std::size_t site = 0; site < n_sites; ++site) {
    const auto coord = g.coordinates(site);
    const std::size_t parity = std::accumulate(coord.begin(), coord.end(), std::size_t{0}) % 2;
    g.sublattice[site] = parity == 0 ? Sublattice::A : Sublattice::B;
  }

  for (std::size_t site = 0; site < n_sites; ++site) {
    const auto coord = g.coordinates(site);
    for (std::size_t axis = 0; axis < d; ++axis) {
      // +axis neighbour
      if (coord[axis] + 1 < shape[axis]) {
        auto next = coord;
        ++next[axis];
        g.internal_bonds.push_back({site, index_of(next), axis});
      } else {
        auto wrapped = coord;
        wrapped[axis] = 0;
        g.boundary_links.push_back({site, axis, +1, index_of(wrapped),
                                    shape[axis] % 2 == 1 ? PartnerTag::Complement
                                                         : PartnerTag::Same});
      }
      // -axis neighbour outside the tile
      if (coord[axis] == 0) {
        auto wrapped = coord;
        wrapped[axis] = shape[axis] - 1;
        g.boundary_links.push_back({site, axis, -1, index_of(wrapped),
                                    shape[axis] % 2 == 1 ? PartnerTag::Complement
                                                         : PartnerTag::Same});
      }
    }
  }
  return g;
}

DenseOperator product_state(const BlochPair& pair, const ClusterGeometry& geometry,
                            PartnerTag cluster) {
  pair.validate();
  DenseOperator rho = DenseOperator::Ones(1, 1);
  for (std::size_t site = 0; site < geometry.site_count(); ++site) {
    const Vec3& n = geometry.label(site, cluster) == Sublattice::A ? pair.n_a : pair.n_b;
    rho = kron(rho, DenseOperator(bloch_to_density(n)));
  }
  return rho;
}

namespace {

double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vec3 sample_ball(std::mt19937_64& rng, BallSampling sampling) {
  for (;;) {
    const Vec3 v(2.0 * unit_interval(rng) - 1.0, 2.0 * unit_interval(rng) - 1.0,
                 2.0 * unit_interval(rng) - 1.0);
    const double r2 = v.squaredNorm();
    if (r2 > 1.0) continue;
    if (sampling == BallSampling::UniformVolume) return v;
    if (r2 > 1e-6) return v / std::sqrt(r2);
  }
}

}  // namespace

BlochPair random_bloch_pair(std::mt19937_64& rng, BallSampling sampling) {
  BlochPair pair;
  pair.n_a = sample_ball(rng, sampling);
  pair.n_b = sample_ball(rng, sampling);
  return pair;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  // splitmix64 finaliser over a combination of root and index
  std::uint64_t x = root + 0x9E3779B97F4A7C15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 derive_stream(std::uint64_t root, std::uint64_t index) {
  return std::mt19937_64(derive_seed(root, index));
}

}  // namespace dhl
