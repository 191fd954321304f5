#include "dhl/operators.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dhl {

DenseOperator pauli(PauliAxis axis) {
  DenseOperator m = DenseOperator::Zero(2, 2);
  switch (axis) {
    case PauliAxis::X:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case PauliAxis::Y:
      m(0, 1) = -kI;
      m(1, 0) = kI;
      break;
    case PauliAxis::Z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    case PauliAxis::Plus:
      m(0, 1) = 1.0;  // |e><g|
      break;
    case PauliAxis::Minus:
      m(1, 0) = 1.0;  // |g><e|
      break;
  }
  return m;
}

const PauliTable& pauli_table() {
  static const PauliTable table = [] {
    PauliTable t;
    t[0] = pauli(PauliAxis::X);
    t[1] = pauli(PauliAxis::Y);
    t[2] = pauli(PauliAxis::Z);
    return t;
  }();
  return table;
}

std::size_t qubit_count(Eigen::Index dim) {
  if (dim < 2 || !std::has_single_bit(static_cast<std::size_t>(dim))) {
    throw std::invalid_argument("operator dimension " + std::to_string(dim) +
                                " is not a power of two >= 2");
  }
  return static_cast<std::size_t>(std::countr_zero(static_cast<std::size_t>(dim)));
}

DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
  DenseOperator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

DenseOperator embed(const DenseOperator& op, std::size_t site, std::size_t n_sites) {
  if (site >= n_sites) {
    throw std::out_of_range("embed: site " + std::to_string(site) + " outside " +
                            std::to_string(n_sites) + "-site space");
  }
  if (op.rows() != 2 || op.cols() != 2) {
    throw std::invalid_argument("embed: expected a single-site 2x2 operator");
  }
  const Eigen::Index left = Eigen::Index{1} << site;
  const Eigen::Index right = Eigen::Index{1} << (n_sites - site - 1);
  DenseOperator out = kron(DenseOperator::Identity(left, left), op);
  return kron(out, DenseOperator::Identity(right, right));
}

DenseOperator commutator(const DenseOperator& a, const DenseOperator& b) {
  return a * b - b * a;
}

namespace {

void require_square_same(const DenseOperator& a, const DenseOperator& b, const char* what) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

}  // namespace

DenseOperator lindblad_apply(const DenseOperator& hamiltonian,
                             std::span<const JumpOperator> jumps,
                             const DenseOperator& rho) {
  require_square_same(hamiltonian, rho, "lindblad_apply");
  DenseOperator out = -kI * (hamiltonian * rho - rho * hamiltonian);
  for (const auto& jump : jumps) {
    require_square_same(jump.op, rho, "lindblad_apply");
    const DenseOperator ldag = jump.op.adjoint();
    const DenseOperator ldl = ldag * jump.op;
    out += (0.5 * jump.rate) * (2.0 * jump.op * rho * ldag - ldl * rho - rho * ldl);
  }
  return out;
}

DenseOperator dense_liouvillian(const DenseOperator& hamiltonian,
                                std::span<const JumpOperator> jumps) {
  const Eigen::Index dim = hamiltonian.rows();
  if (dim > kMaxDenseLiouvillianDim) {
    throw std::length_error("dense_liouvillian: dimension " + std::to_string(dim) +
                            " exceeds cap " + std::to_string(kMaxDenseLiouvillianDim));
  }
  if (hamiltonian.cols() != dim) {
    throw std::invalid_argument("dense_liouvillian: Hamiltonian is not square");
  }
  const DenseOperator id = DenseOperator::Identity(dim, dim);
  DenseOperator sup = -kI * (kron(id, hamiltonian) - kron(hamiltonian.transpose(), id));
  for (const auto& jump : jumps) {
    require_square_same(jump.op, hamiltonian, "dense_liouvillian");
    const DenseOperator ldl = jump.op.adjoint() * jump.op;
    sup += (0.5 * jump.rate) * (2.0 * kron(jump.op.conjugate(), jump.op) - kron(id, ldl) -
                                kron(ldl.transpose(), id));
  }
  return sup;
}

Eigen::VectorXcd vectorize(const DenseOperator& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

DenseOperator unvectorize(const Eigen::VectorXcd& v) {
  const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (dim * dim != v.size()) {
    throw std::invalid_argument("unvectorize: length is not a perfect square");
  }
  return Eigen::Map<const DenseOperator>(v.data(), dim, dim);
}

cplx expectation(const DenseOperator& op, const DenseOperator& rho) {
  require_square_same(op, rho, "expectation");
  // Tr{A B} = sum_ij A_ij B_ji
  return op.cwiseProduct(rho.transpose()).sum();
}

Eigen::Matrix2cd bloch_to_density(const Vec3& n) {
  const auto& s = pauli_table();
  return 0.5 * (Eigen::Matrix2cd::Identity() + n.x() * s[0] + n.y() * s[1] + n.z() * s[2]);
}

Vec3 density_to_bloch(const Eigen::Matrix2cd& rho) {
  // Tr{sigma^y rho} = i (rho_01 - rho_10)
  return {(rho(0, 1) + rho(1, 0)).real(), (kI * (rho(0, 1) - rho(1, 0))).real(),
          (rho(0, 0) - rho(1, 1)).real()};
}

double hermiticity_defect(const DenseOperator& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace dhl
