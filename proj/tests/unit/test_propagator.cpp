#include "helpers.hpp"

#include "dhl/propagator.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace dhl;
using testing::max_abs;

namespace {

/// exp(M) by scaling and squaring with a long Taylor series; independent of the library path.
Eigen::Matrix4cd reference_exp(const Eigen::Matrix4cd& m) {
  int squarings = 0;
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.1) {
    norm /= 2.0;
    ++squarings;
  }
  const Eigen::Matrix4cd a = m / std::pow(2.0, squarings);
  Eigen::Matrix4cd term = Eigen::Matrix4cd::Identity(), sum = Eigen::Matrix4cd::Identity();
  for (int k = 1; k < 30; ++k) {
    term = term * a / double(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

Eigen::Matrix4cd dense_local(double omega, double gamma) {
  const std::vector<JumpOperator> decay{{pauli(PauliAxis::Minus), gamma}};
  return dense_liouvillian(0.5 * omega * pauli(PauliAxis::X), decay);
}

}  // namespace

TEST_SUITE("propagator") {
  TEST_CASE("local generator equals the dense single-site Liouvillian") {
    for (double omega : {0.0, 0.125, 1.0, 2.25})
      CHECK(max_abs(local_liouvillian(omega, 1.0) - dense_local(omega, 1.0)) < 1e-15);
  }

  TEST_CASE("identity at zero delay") {
    const SingleSitePropagator prop(1.0, 1.0);
    CHECK(prop.diagonalised());
    CHECK(max_abs(prop.superoperator(0.0) - Eigen::Matrix4cd::Identity()) < 1e-12);
    std::mt19937_64 rng(1);
    const Eigen::Matrix2cd x = testing::random_matrix(rng, 2);
    CHECK(max_abs(propagate_local(prop, 0.0, x) - x) < 1e-12);
  }

  TEST_CASE("matches an independent matrix exponential") {
    for (double omega : {0.3, 1.0, 2.25, 10.0}) {
      const SingleSitePropagator prop(omega, 1.0);
      for (double tau : {0.01, 0.5, 3.0, 20.0}) {
        CAPTURE(omega);
        CAPTURE(tau);
        CHECK(max_abs(prop.superoperator(tau) - reference_exp(dense_local(omega, 1.0) * tau)) < 1e-11);
      }
    }
  }

  TEST_CASE("relaxes to the analytic steady state") {
    const SingleSitePropagator prop(1.0, 1.0);
    DenseOperator ground = DenseOperator::Zero(2, 2);
    ground(1, 1) = 1.0;
    const Vec3 n = density_to_bloch(propagate_local(prop, 50.0, ground));
    CHECK(std::abs(n.x()) < 1e-8);
    CHECK(std::abs(n.y() - 2.0 / 3.0) < 1e-8);
    CHECK(std::abs(n.z() + 1.0 / 3.0) < 1e-8);
  }

  TEST_CASE("preserves the trace of arbitrary operators") {
    const SingleSitePropagator prop(1.0, 1.0);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Matrix2cd x = testing::random_matrix(rng, 2);
      for (double tau : {0.1, 1.0, 10.0})
        CHECK(std::abs(propagate_local(prop, tau, x).trace() - x.trace()) < 1e-10);
    }
  }

  TEST_CASE("semigroup property") {
    std::mt19937_64 rng(4);
    for (double omega : {0.25, 0.2501, 1.0, 2.25}) {
      const SingleSitePropagator prop(omega, 1.0);
      for (int trial = 0; trial < 10; ++trial) {
        const double t1 = 2.0 * (testing::uniform(rng) + 1.0), t2 = 2.0 * (testing::uniform(rng) + 1.0);
        const Eigen::Matrix2cd x = testing::random_matrix(rng, 2);
        const Eigen::Matrix2cd once = propagate_local(prop, t1 + t2, x);
        const Eigen::Matrix2cd twice = propagate_local(prop, t1, propagate_local(prop, t2, x));
        CHECK(max_abs(once - twice) < 1e-10);
      }
    }
  }

  TEST_CASE("falls back near the exceptional point") {
    // Omega = gamma/4 gives a defective generator.
    const SingleSitePropagator prop(0.25, 1.0);
    CHECK_FALSE(prop.diagonalised());
    CHECK(prop.condition_number() > SingleSitePropagator::kMaxConditionNumber);
    for (double tau : {0.1, 1.0, 7.0})
      CHECK(max_abs(prop.superoperator(tau) - reference_exp(dense_local(0.25, 1.0) * tau)) < 1e-11);
  }

  TEST_CASE("pure decay at zero drive") {
    const SingleSitePropagator prop(0.0, 1.0);
    DenseOperator excited = DenseOperator::Zero(2, 2);
    excited(0, 0) = 1.0;
    const Eigen::Matrix2cd rho = propagate_local(prop, 2.0, excited);
    CHECK(rho(0, 0).real() == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  }

  TEST_CASE("cache entries equal direct evaluation") {
    SingleSitePropagator prop(1.0, 1.0);
    prop.build_cache(0.005, 101);
    CHECK(prop.cache_size() == 101);
    CHECK(prop.cache_spacing() == 0.005);
    for (std::size_t k : {0u, 1u, 37u, 100u}) {
      const double tau = 0.005 * double(k);
      CHECK(max_abs(prop.cached(k) - prop.superoperator(tau)) < 1e-13);
      CHECK(max_abs(prop.lookup(tau) - prop.superoperator(tau)) < 1e-13);
    }
    CHECK(max_abs(prop.lookup(0.0123) - prop.superoperator(0.0123)) == 0.0);
    CHECK(max_abs(prop.lookup(3.0) - prop.superoperator(3.0)) == 0.0);  // past the cache
  }

  TEST_CASE("negative delays are rejected") {
    const SingleSitePropagator prop(1.0, 1.0);
    CHECK_THROWS_AS(prop.superoperator(-1e-3), std::domain_error);
    CHECK_THROWS_AS(propagate_local(prop, -1.0, Eigen::Matrix2cd::Identity()), std::domain_error);
  }
}
