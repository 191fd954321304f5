#include "helpers.hpp"

#include "dhl/model.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <set>

using namespace dhl;
using testing::max_abs;

namespace {

std::size_t incidences(const ClusterGeometry& g) {
  return 2 * g.internal_bonds.size() + g.boundary_links.size();
}

bool all_tags(const ClusterGeometry& g, PartnerTag tag) {
  for (const auto& l : g.boundary_links)
    if (l.partner != tag) return false;
  return true;
}

double site_purity(const Vec3& n) { return 0.5 * (1.0 + n.squaredNorm()); }

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("parameter presets and validation") {
    const ModelParams a = parameter_set_a();
    CHECK(a.J == Vec3(-7.0, 6.0, 2.0));
    CHECK(a.omega == 1.0);
    CHECK(a.gamma == 1.0);
    CHECK(a.z == 150);
    const ModelParams b = parameter_set_b(60, 3);
    CHECK(b.J == Vec3(-6.4, 3.0, 6.0));
    CHECK(b.omega == 2.25);
    CHECK(b.z == 60);
    CHECK(b.dimension == 3);

    ModelParams bad = a;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = a;
    bad.z = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_NOTHROW(a.validate());
  }

  TEST_CASE("Bloch pair presets lie inside the unit ball") {
    CHECK_NOTHROW(preset_r1().validate());
    CHECK_NOTHROW(preset_r2().validate());
    CHECK(preset_r2().n_a == Vec3(0.2576, 0.1597, 0.1999));
    CHECK(preset_r2().n_b == Vec3(-0.4684, -0.4306, -0.4928));
    CHECK(preset_r1().n_a == Vec3(0.0911, -0.5318, -0.7725));
    CHECK(preset_r1().n_b == Vec3(-0.0007, -0.6958, 0.0654));
    BlochPair outside{Vec3(1.0, 0.1, 0.0), Vec3::Zero()};
    CHECK_THROWS_AS(outside.validate(), std::domain_error);
    const BlochPair s = preset_r2().swapped();
    CHECK(s.n_a == preset_r2().n_b);
  }

  TEST_CASE("2x2 geometry") {
    const ClusterGeometry g = build_geometry({2, 2});
    CHECK(g.site_count() == 4);
    CHECK(g.internal_bonds.size() == 4);
    CHECK(g.boundary_links.size() == 8);
    CHECK(all_tags(g, PartnerTag::Same));
    CHECK_FALSE(g.needs_complement());
    // AB / BA
    CHECK(g.sublattice[0] == Sublattice::A);
    CHECK(g.sublattice[1] == Sublattice::B);
    CHECK(g.sublattice[2] == Sublattice::B);
    CHECK(g.sublattice[3] == Sublattice::A);
  }

  TEST_CASE("3x3 geometry needs the complementary cluster") {
    const ClusterGeometry g = build_geometry({3, 3});
    CHECK(g.internal_bonds.size() == 12);
    CHECK(g.boundary_links.size() == 12);
    CHECK(all_tags(g, PartnerTag::Complement));
    CHECK(g.needs_complement());
    std::set<std::size_t> a_sites;
    for (std::size_t s = 0; s < 9; ++s)
      if (g.sublattice[s] == Sublattice::A) a_sites.insert(s);
    CHECK(a_sites == std::set<std::size_t>{0, 2, 4, 6, 8});
    for (std::size_t s = 0; s < 9; ++s) {
      CHECK(g.label(s, PartnerTag::Same) == g.sublattice[s]);
      CHECK(g.label(s, PartnerTag::Complement) == other(g.sublattice[s]));
    }
  }

  TEST_CASE("2x2x2 geometry") {
    const ClusterGeometry g = build_geometry({2, 2, 2});
    CHECK(g.internal_bonds.size() == 12);
    CHECK(g.boundary_links.size() == 24);
    CHECK(all_tags(g, PartnerTag::Same));
  }

  TEST_CASE("every site has 2d incidences and links are reversible") {
    for (const auto& shape : std::vector<std::vector<std::size_t>>{
             {1}, {2}, {3}, {1, 1}, {2, 2}, {3, 3}, {2, 3}, {1, 2}, {2, 5}, {2, 2, 2}, {1, 1, 1}}) {
      const ClusterGeometry g = build_geometry(shape);
      CAPTURE(shape.size());
      CAPTURE(g.site_count());
      CHECK(incidences(g) == 2 * g.dimension() * g.site_count());

      std::map<std::size_t, std::size_t> per_site;
      for (const auto& b : g.internal_bonds) {
        ++per_site[b.first];
        ++per_site[b.second];
      }
      for (const auto& l : g.boundary_links) ++per_site[l.site];
      for (std::size_t s = 0; s < g.site_count(); ++s) CHECK(per_site[s] == 2 * g.dimension());

      for (const auto& l : g.boundary_links) {
        bool found = false;
        for (const auto& r : g.boundary_links)
          if (r.site == l.mirror && r.axis == l.axis && r.sign == -l.sign && r.mirror == l.site &&
              r.partner == l.partner)
            found = true;
        CHECK(found);
        // Complement links connect opposite labels, same links connect opposite sublattices too.
        const Sublattice here = g.label(l.site, PartnerTag::Same);
        CHECK(g.label(l.mirror, l.partner) == other(here));
      }
      for (const auto& b : g.internal_bonds) CHECK(g.sublattice[b.first] != g.sublattice[b.second]);
    }
  }

  TEST_CASE("geometry errors") {
    CHECK_THROWS_AS(build_geometry({}), std::invalid_argument);
    CHECK_THROWS_AS(build_geometry({2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(build_geometry({11}), std::length_error);
    CHECK_THROWS_AS(build_geometry({2, 2, 3}), std::length_error);
    CHECK_NOTHROW(build_geometry({10}));
  }

  TEST_CASE("coordinates are row-major with the last axis fastest") {
    const ClusterGeometry g = build_geometry({2, 3});
    CHECK(g.coordinates(0) == std::vector<std::size_t>{0, 0});
    CHECK(g.coordinates(1) == std::vector<std::size_t>{0, 1});
    CHECK(g.coordinates(3) == std::vector<std::size_t>{1, 0});
  }

  TEST_CASE("product state examples") {
    const ClusterGeometry g = build_geometry({2, 2});
    const BlochPair down{Vec3(0, 0, -1), Vec3(0, 0, -1)};
    const DenseOperator rho = product_state(down, g);
    CHECK(std::abs(rho(15, 15) - 1.0) < 1e-15);  // all bits set = all ground
    for (std::size_t s = 0; s < 4; ++s)
      CHECK(expectation(embed(pauli(PauliAxis::Z), s, 4), rho).real() == doctest::Approx(-1.0));

    const BlochPair mixed_a{Vec3::Zero(), Vec3(0, 0, 1)};
    CHECK((product_state(mixed_a, g) * product_state(mixed_a, g)).trace().real() < 1.0);

    const BlochPair r2 = preset_r2();
    const DenseOperator p = product_state(r2, g);
    const double purity = (p * p).trace().real();
    CHECK(purity == doctest::Approx(std::pow(site_purity(r2.n_a) * site_purity(r2.n_b), 2)));
    for (std::size_t s = 0; s < 4; ++s) {
      const Vec3& n = g.sublattice[s] == Sublattice::A ? r2.n_a : r2.n_b;
      for (int a = 0; a < 3; ++a)
        CHECK(expectation(embed(DenseOperator(pauli_table()[a]), s, 4), p).real() ==
              doctest::Approx(n[a]));
    }
    const DenseOperator c = product_state(r2, g, PartnerTag::Complement);
    CHECK(expectation(embed(pauli(PauliAxis::X), 0, 4), c).real() == doctest::Approx(r2.n_b.x()));

    const BlochPair out{Vec3(0, 0, 1.5), Vec3::Zero()};
    CHECK_THROWS_AS(product_state(out, g), std::domain_error);
  }

  TEST_CASE("product states are physical for random pairs") {
    const ClusterGeometry g = build_geometry({2, 2});
    std::mt19937_64 rng(8);
    double worst_eig = 0.0, worst_trace = 0.0, worst_herm = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const DenseOperator rho = product_state(random_bloch_pair(rng), g);
      Eigen::SelfAdjointEigenSolver<DenseOperator> solver(rho, Eigen::EigenvaluesOnly);
      worst_eig = std::min(worst_eig, solver.eigenvalues().minCoeff());
      worst_trace = std::max(worst_trace, std::abs(rho.trace() - 1.0));
      worst_herm = std::max(worst_herm, hermiticity_defect(rho));
    }
    CHECK(worst_eig > -1e-14);
    CHECK(worst_trace < 1e-14);
    CHECK(worst_herm == 0.0);
  }

  TEST_CASE("random pairs fill the ball uniformly") {
    std::mt19937_64 rng(12345);
    double cube_sum = 0.0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      const BlochPair p = random_bloch_pair(rng);
      CHECK_FALSE(p.n_a.norm() > 1.0);
      CHECK_FALSE(p.n_b.norm() > 1.0);
      cube_sum += std::pow(p.n_a.norm(), 3) + std::pow(p.n_b.norm(), 3);
    }
    CHECK(std::abs(cube_sum / (2.0 * n) - 0.5) < 0.01);

    std::mt19937_64 surface_rng(1);
    for (int k = 0; k < 100; ++k) {
      const BlochPair p = random_bloch_pair(surface_rng, BallSampling::UniformSurface);
      CHECK(p.n_a.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p.n_b.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("seeded streams are reproducible and distinct") {
    auto s1 = derive_stream(42, 7), s2 = derive_stream(42, 7), s3 = derive_stream(42, 8);
    const BlochPair a = random_bloch_pair(s1), b = random_bloch_pair(s2), c = random_bloch_pair(s3);
    CHECK(a.n_a == b.n_a);
    CHECK(a.n_b == b.n_b);
    CHECK(a.n_a != c.n_a);
    CHECK(derive_seed(42, 7) == derive_seed(42, 7));
    CHECK(derive_seed(42, 7) != derive_seed(43, 7));
  }
}
