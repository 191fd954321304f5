#pragma once

// Dense operator algebra for spin-1/2 systems.
//
// Basis convention: |e> is index 0 and |g> is index 1, so sigma^z|e> = +|e>
// and the decay operator sigma^- maps |e> to |g>. In multi-site spaces site 0
// is the leftmost tensor factor (most significant bit of the basis index).
// Superoperators act on column-stacked vectors: vec(A rho B) = (B^T (x) A) vec(rho).

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dhl {

using cplx = std::complex<double>;
using DenseOperator = Eigen::MatrixXcd;
using Vec3 = Eigen::Vector3d;

inline constexpr cplx kI{0.0, 1.0};

enum class PauliAxis { X, Y, Z, Plus, Minus };

/// 2x2 Pauli matrix or ladder operator; sigma^+- = (sigma^x +- i sigma^y)/2.
DenseOperator pauli(PauliAxis axis);

/// The three Hermitian Pauli matrices, indexed x, y, z.
using PauliTable = std::array<Eigen::Matrix2cd, 3>;
const PauliTable& pauli_table();

/// Identity on every factor except `site`. Throws std::out_of_range.
DenseOperator embed(const DenseOperator& op, std::size_t site, std::size_t n_sites);

DenseOperator kron(const DenseOperator& a, const DenseOperator& b);
DenseOperator commutator(const DenseOperator& a, const DenseOperator& b);

/// Number of tensor factors for a 2^n dimension; throws if dim is not a power of two >= 2.
std::size_t qubit_count(Eigen::Index dim);

struct JumpOperator {
  DenseOperator op;
  double rate;
};

/// -i[H, rho] + sum_k (rate_k/2)(2 L rho L^dag - {L^dag L, rho}), term by term.
DenseOperator lindblad_apply(const DenseOperator& hamiltonian,
                             std::span<const JumpOperator> jumps,
                             const DenseOperator& rho);

/// Largest Hilbert-space dimension accepted by dense_liouvillian.
inline constexpr Eigen::Index kMaxDenseLiouvillianDim = 64;

/// Column-stacked superoperator matrix of lindblad_apply (dim^2 x dim^2).
DenseOperator dense_liouvillian(const DenseOperator& hamiltonian,
                                std::span<const JumpOperator> jumps);

Eigen::VectorXcd vectorize(const DenseOperator& m);
DenseOperator unvectorize(const Eigen::VectorXcd& v);

/// Tr{op rho}. Throws std::invalid_argument on dimension mismatch.
cplx expectation(const DenseOperator& op, const DenseOperator& rho);

/// 1/2 (I + n.sigma).
Eigen::Matrix2cd bloch_to_density(const Vec3& n);
/// (Tr{sigma^x rho}, Tr{sigma^y rho}, Tr{sigma^z rho}), real parts.
Vec3 density_to_bloch(const Eigen::Matrix2cd& rho);

/// Max-norm of A - A^dagger.
double hermiticity_defect(const DenseOperator& a);

}  // namespace dhl
