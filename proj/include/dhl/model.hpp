#pragma once

#include "dhl/operators.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dhl {

/// Couplings, drive and decay in units of gamma; z is the coordination number.
struct ModelParams {
  Vec3 J = Vec3::Zero();  // (J_x, J_y, J_z)
  double omega = 0.0;
  double gamma = 1.0;
  int z = 1;
  int dimension = 1;

  /// Throws std::invalid_argument when gamma <= 0 or z < 1.
  void validate() const;
};

/// Two parameter points where the mean-field steady state is a limit cycle.
ModelParams parameter_set_a(int z = 150, int dimension = 2);  // J = (-7, 6, 2), Omega = 1
ModelParams parameter_set_b(int z = 100, int dimension = 2);  // J = (-6.4, 3, 6), Omega = 2.25

struct BlochPair {
  Vec3 n_a = Vec3::Zero();
  Vec3 n_b = Vec3::Zero();

  /// Throws std::domain_error if either vector leaves the unit ball.
  void validate() const;
  BlochPair swapped() const { return {n_b, n_a}; }
};

/// Initial product state that relaxes to a stationary state at set A, z = 150.
BlochPair preset_r1();
/// Initial product state that enters the limit cycle at set A, z = 150.
BlochPair preset_r2();

enum class Sublattice : std::uint8_t { A, B };

inline Sublattice other(Sublattice s) { return s == Sublattice::A ? Sublattice::B : Sublattice::A; }

enum class PartnerTag : std::uint8_t { Same, Complement };

struct InternalBond {
  std::size_t first;
  std::size_t second;
  std::size_t axis;
};

/// Link from a boundary site across the tile face to the neighbouring tile.
struct BoundaryLink {
  std::size_t site;
  std::size_t axis;
  int sign;  // +1 or -1 along `axis`
  std::size_t mirror;
  PartnerTag partner;
};

/// A hypercubic cluster tiled periodically over the infinite lattice.
struct ClusterGeometry {
  std::vector<std::size_t> shape;
  std::vector<InternalBond> internal_bonds;
  std::vector<BoundaryLink> boundary_links;
  std::vector<Sublattice> sublattice;  // labels in cluster C_A; C_B is the complement

  std::size_t site_count() const { return sublattice.size(); }
  std::size_t dimension() const { return shape.size(); }
  /// True if any link lands in the complementary cluster (odd side length).
  bool needs_complement() const;
  /// Sublattice of `site` inside C_A (tag Same) or C_B (tag Complement).
  Sublattice label(std::size_t site, PartnerTag cluster) const;
  std::vector<std::size_t> coordinates(std::size_t site) const;
};

inline constexpr std::size_t kMaxClusterSites = 10;

/// Throws std::invalid_argument for empty shapes or zero sides and
/// std::length_error beyond kMaxClusterSites sites.
ClusterGeometry build_geometry(const std::vector<std::size_t>& shape);

/// Tensor product of 1/2 (I + n.sigma) over the sites of C_A (or of C_B when
/// `cluster` is Complement), each site taking n_A or n_B from its label.
DenseOperator product_state(const BlochPair& pair, const ClusterGeometry& geometry,
                            PartnerTag cluster = PartnerTag::Same);

enum class BallSampling : std::uint8_t { UniformVolume, UniformSurface };

/// Independent draws for n_A and n_B. Uses only the raw 64-bit output of the
/// engine so streams are reproducible across standard library implementations.
BlochPair random_bloch_pair(std::mt19937_64& rng,
                            BallSampling sampling = BallSampling::UniformVolume);

/// Independent stream for item `index` under `root`, stable under any worker split.
std::mt19937_64 derive_stream(std::uint64_t root, std::uint64_t index);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

}  // namespace dhl
