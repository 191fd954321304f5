#pragma once

// Self-consistent Mori projector equations truncated at the Born term.
//
// For sublattice A (B is symmetric):
//
//   d rho_A/dt = L rho_A - i sum_a J_a <sigma^a>_B [sigma^a, rho_A]
//              - sum_ab (J_a J_b / z) [sigma^a, Y_ab]
//   Y_ab(t) = int_0^t dt' ( d_ab(t,t') e^{L(t-t')}(ds_A^b rho_A)(t')
//                         - s_ab(t,t') e^{L(t-t')}(rho_A ds_A^b)(t') )
//   d_ab(t,t') = Tr{sigma^a e^{L(t-t')} (ds_B^b rho_B)(t')}
//   s_ab(t,t') = Tr{sigma^a e^{L(t-t')} (rho_B ds_B^b)(t')}
//   ds^b(t) = sigma^b - <sigma^b>(t) I.
//
// Two evaluations of the memory integral are provided:
//  - Quadrature: trapezoidal sum over a stored history, truncated after t_mem.
//  - Exact: since d_ab e^{L tau}(X) is the partial trace of e^{(L (x) 1 + 1 (x) L) tau}
//    applied to a two-site operator, the whole integral equals
//    Tr_B{(sigma^a (x) 1) K(t)} with dK/dt = (L (x) 1 + 1 (x) L) K + G(t), K(0) = 0.
//    This carries the full memory at the cost of one 4x4 auxiliary matrix per
//    sublattice.

#include "dhl/meanfield.hpp"
#include "dhl/propagator.hpp"

#include <array>
#include <deque>

namespace dhl {

enum class MemoryMode { Exact, Quadrature };

std::string to_string(MemoryMode m);
MemoryMode memory_mode_from_string(const std::string& s);

struct CmopSettings {
  MemoryMode memory = MemoryMode::Exact;
  double t_mem = 20.0;      // quadrature window
  double born_scale = 1.0;  // 0 switches the Born term off
};

using Vec3c = Eigen::Vector3cd;

/// Quantities stored for one sublattice at one history time.
struct FluctuationRecord {
  Eigen::Matrix2cd rho;
  Vec3c means;                         // Tr{sigma^b rho}
  std::array<Eigen::Matrix2cd, 3> left;   // ds^b rho
  std::array<Eigen::Matrix2cd, 3> right;  // rho ds^b
};

FluctuationRecord make_record(const Eigen::Matrix2cd& rho);

/// Uniform-grid record of both sublattices. Grid index k sits at time k*dt.
class HistoryBuffer {
 public:
  HistoryBuffer(double dt, double t_mem);

  /// Append the state at the next grid time and evict entries older than t_mem.
  void push(const Eigen::Matrix2cd& rho_a, const Eigen::Matrix2cd& rho_b);

  double dt() const { return dt_; }
  double t_mem() const { return t_mem_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::size_t first_index() const { return first_; }
  std::size_t last_index() const { return first_ + entries_.size() - 1; }
  double time(std::size_t index) const { return static_cast<double>(index) * dt_; }
  std::size_t window_steps() const { return window_steps_; }

  bool contains(std::size_t index) const {
    return !entries_.empty() && index >= first_ && index <= last_index();
  }
  /// Throws std::out_of_range for evicted or future indices.
  const FluctuationRecord& record(std::size_t index, Sublattice sublattice) const;

 private:
  double dt_;
  double t_mem_;
  std::size_t window_steps_;
  std::size_t first_ = 0;
  std::deque<std::array<FluctuationRecord, 2>> entries_;
};

struct BornKernelValue {
  Eigen::Matrix3cd d;  // (alpha, beta)
  Eigen::Matrix3cd s;
  double tau = 0.0;
};

/// Kernels built from a record propagated by `propagator` (= e^{L tau}).
BornKernelValue born_kernels(const FluctuationRecord& source, const Eigen::Matrix4cd& propagator,
                             double tau);

/// Kernels sourced by `source` sublattice at history index `index`, evaluated at time t.
/// Throws std::out_of_range when the index is outside the window or t - t' > t_mem.
BornKernelValue born_kernels(const HistoryBuffer& history, Sublattice source, double t,
                             std::size_t index, const SingleSitePropagator& prop);

/// Born-term contribution to d rho/dt for quadrature mode. The stage state at
/// time t = last grid time + h (h in [0, dt]) closes the integral.
class BornQuadrature {
 public:
  BornQuadrature(const ModelParams& params, double dt, double t_mem);

  const SingleSitePropagator& propagator() const { return prop_; }

  /// Throws std::logic_error when the history does not reach the stage time.
  SublatticeRates born(const HistoryBuffer& history, double t, const Eigen::Matrix2cd& rho_a,
                       const Eigen::Matrix2cd& rho_b) const;

 private:
  ModelParams params_;
  double dt_;
  double t_mem_;
  SingleSitePropagator prop_;
};

/// Mean-field part plus born_scale times the quadrature Born term.
SublatticeRates cmop_rhs(double t, const SublatticeState& state, const HistoryBuffer& history,
                         const ModelParams& params, const BornQuadrature& quadrature,
                         double born_scale = 1.0);

/// Right-hand side of the exact-memory formulation on the flattened state
/// [rho_A, rho_B, K_A, K_B] (4 + 4 + 16 + 16 complex entries).
class CmopExactGenerator {
 public:
  static constexpr Eigen::Index kStateSize = 80;

  CmopExactGenerator(const ModelParams& params, double born_scale = 1.0);

  void operator()(const StateVector& y, StateVector& dydt) const;

  /// Tr_partner{(sigma^a (x) 1) K} for a = x, y, z.
  static std::array<Eigen::Matrix2cd, 3> partial_traces(const Eigen::Matrix4cd& k);
  /// sum_b J_b ((ds_P^b rho_P) (x) (ds^b rho) - (rho_P ds_P^b) (x) (rho ds^b)); partner left.
  Eigen::Matrix4cd source(const FluctuationRecord& partner, const FluctuationRecord& self) const;

  static StateVector initial_state(const Eigen::Matrix2cd& rho_a, const Eigen::Matrix2cd& rho_b);

 private:
  MeanFieldGenerator mean_field_;
  ModelParams params_;
  double born_scale_;
  Eigen::Matrix<cplx, 16, 16> pair_liouvillian_;
};

/// Throws std::invalid_argument for adaptive stepping, or in quadrature mode
/// when dt does not divide t_mem. Trace drift beyond 1e-6 raises NumericalError.
MethodRun evolve_cmop(const BlochPair& pair, const ModelParams& params,
                      const IntegrationSettings& integration, const CmopSettings& cmop,
                      const AnalysisSettings& analysis, const SampleSink& sink = {});

}  // namespace dhl
