#pragma once

#include "dhl/operators.hpp"

#include <random>

namespace testing {

inline double uniform(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

inline dhl::DenseOperator random_matrix(std::mt19937_64& rng, Eigen::Index dim) {
  dhl::DenseOperator m(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c)
    for (Eigen::Index r = 0; r < dim; ++r) m(r, c) = {uniform(rng), uniform(rng)};
  return m;
}

inline dhl::DenseOperator random_hermitian(std::mt19937_64& rng, Eigen::Index dim) {
  const dhl::DenseOperator m = random_matrix(rng, dim);
  return 0.5 * (m + m.adjoint());
}

/// Random full-rank density matrix.
inline dhl::DenseOperator random_density(std::mt19937_64& rng, Eigen::Index dim) {
  const dhl::DenseOperator g = random_matrix(rng, dim);
  dhl::DenseOperator rho = g * g.adjoint();
  return rho / rho.trace();
}

inline double max_abs(const dhl::DenseOperator& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing
