#pragma once

#include "dhl/operators.hpp"

#include <cstddef>
#include <vector>

namespace dhl {

/// exp(L tau) for the single-site Liouvillian
///   L x = -i (Omega/2) [sigma^x, x] + (gamma/2)(2 sigma^- x sigma^+ - {sigma^+ sigma^-, x}),
/// acting on column-stacked 2x2 operators.
///
/// The generator is diagonalised once. Near exceptional points (eigenvector
/// condition number above kMaxConditionNumber) each request falls back to a
/// scaling-and-squaring exponential instead. A uniform cache of exponentials can
/// be attached with build_cache(); after that the object is read-only and safe
/// to share between threads.
class SingleSitePropagator {
 public:
  static constexpr double kMaxConditionNumber = 1e4;

  SingleSitePropagator(double omega, double gamma);

  double omega() const { return omega_; }
  double gamma() const { return gamma_; }
  const Eigen::Matrix4cd& generator() const { return generator_; }
  bool diagonalised() const { return diagonalised_; }
  double condition_number() const { return condition_; }

  /// exp(L tau); throws std::domain_error for tau < 0.
  Eigen::Matrix4cd superoperator(double tau) const;

  /// Cache exp(L k spacing) for k = 0 .. count-1.
  void build_cache(double spacing, std::size_t count);
  double cache_spacing() const { return spacing_; }
  std::size_t cache_size() const { return cache_.size(); }
  const Eigen::Matrix4cd& cached(std::size_t index) const { return cache_.at(index); }

  /// Cached entry when tau sits on the cache grid, otherwise computed directly.
  Eigen::Matrix4cd lookup(double tau) const;

 private:
  double omega_;
  double gamma_;
  Eigen::Matrix4cd generator_;
  Eigen::Vector4cd eigenvalues_;
  Eigen::Matrix4cd eigenvectors_;
  Eigen::Matrix4cd inverse_eigenvectors_;
  bool diagonalised_ = false;
  double condition_ = 0.0;
  double spacing_ = 0.0;
  std::vector<Eigen::Matrix4cd> cache_;
};

/// exp(L tau) X for a general (not necessarily Hermitian) 2x2 operator X.
Eigen::Matrix2cd propagate_local(const SingleSitePropagator& prop, double tau,
                                 const Eigen::Matrix2cd& x);

/// Generator matrix of the single-site Liouvillian (4x4, column-stacked).
Eigen::Matrix4cd local_liouvillian(double omega, double gamma);

}  // namespace dhl
