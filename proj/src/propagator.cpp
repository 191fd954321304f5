#include "dhl/propagator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <string>

namespace dhl {

Eigen::Matrix4cd local_liouvillian(double omega, double gamma) {
  const DenseOperator h = 0.5 * omega * pauli(PauliAxis::X);
  const JumpOperator decay{pauli(PauliAxis::Minus), gamma};
  return dense_liouvillian(h, std::span<const JumpOperator>(&decay, 1));
}

SingleSitePropagator::SingleSitePropagator(double omega, double gamma)
    : omega_(omega), gamma_(gamma), generator_(local_liouvillian(omega, gamma)) {
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> solver(generator_);
  if (solver.info() == Eigen::Success) {
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(eigenvectors_);
    const auto& sv = svd.singularValues();
    condition_ = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
    if (condition_ <= kMaxConditionNumber) {
      inverse_eigenvectors_ = eigenvectors_.inverse();
      diagonalised_ = true;
    }
  }
}

Eigen::Matrix4cd SingleSitePropagator::superoperator(double tau) const {
  if (tau < 0.0) {
    throw std::domain_error("propagator requested for negative delay " + std::to_string(tau));
  }
  if (tau == 0.0) return Eigen::Matrix4cd::Identity();
  if (diagonalised_) {
    const Eigen::Vector4cd growth = (eigenvalues_ * tau).array().exp();
    return eigenvectors_ * growth.asDiagonal() * inverse_eigenvectors_;
  }
  return (generator_ * tau).exp();
}

void SingleSitePropagator::build_cache(double spacing, std::size_t count) {
  if (!(spacing > 0.0)) throw std::invalid_argument("propagator cache spacing must be positive");
  spacing_ = spacing;
  cache_.clear();
  cache_.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    cache_.push_back(superoperator(static_cast<double>(k) * spacing));
  }
}

Eigen::Matrix4cd SingleSitePropagator::lookup(double tau) const {
  if (!cache_.empty()) {
    const double pos = tau / spacing_;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) < 1e-9 && nearest >= 0.0 &&
        nearest < static_cast<double>(cache_.size())) {
      return cache_[static_cast<std::size_t>(nearest)];
    }
  }
  return superoperator(tau);
}

Eigen::Matrix2cd propagate_local(const SingleSitePropagator& prop, double tau,
                                 const Eigen::Matrix2cd& x) {
  const Eigen::Matrix4cd p = prop.lookup(tau);
  const Eigen::Vector4cd out = p * Eigen::Map<const Eigen::Vector4cd>(x.data());
  return Eigen::Map<const Eigen::Matrix2cd>(out.data());
}

}  // namespace dhl
