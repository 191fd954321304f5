#pragma once

// Two-sublattice Gutzwiller mean field: each sublattice evolves under the
// single-site Liouvillian plus the classical field sum_a J_a <sigma^a> of the
// other sublattice. The 1/z of the bond couplings cancels against the z
// neighbours, so nothing here depends on z.

#include "dhl/model.hpp"
#include "dhl/run.hpp"

namespace dhl {

struct SublatticeState {
  Eigen::Matrix2cd rho_a = Eigen::Matrix2cd::Identity() / 2.0;
  Eigen::Matrix2cd rho_b = Eigen::Matrix2cd::Identity() / 2.0;
  double t = 0.0;
};

struct SublatticeRates {
  Eigen::Matrix2cd d_a;
  Eigen::Matrix2cd d_b;
};

class MeanFieldGenerator {
 public:
  explicit MeanFieldGenerator(const ModelParams& params);

  /// L_j rho
  Eigen::Matrix2cd local(const Eigen::Matrix2cd& rho) const;
  /// -i sum_a J_a Tr{sigma^a partner} [sigma^a, rho]
  Eigen::Matrix2cd field(const Eigen::Matrix2cd& rho, const Eigen::Matrix2cd& partner) const;

  SublatticeRates operator()(const Eigen::Matrix2cd& rho_a, const Eigen::Matrix2cd& rho_b) const;

  const ModelParams& params() const { return params_; }

 private:
  ModelParams params_;
  Eigen::Matrix4cd local_;
};

SublatticeRates mf_rhs(const SublatticeState& state, const ModelParams& params);

/// Flattened layout: rho_A then rho_B, 16 doubles.
StateVector pack(const SublatticeState& state);
SublatticeState unpack(const StateVector& y, double t = 0.0);

/// Trace drift check shared by the single-site methods.
void check_sublattice_trace(const StateVector& y, double t);

MethodRun evolve_mf(const BlochPair& pair, const ModelParams& params,
                    const IntegrationSettings& integration, const AnalysisSettings& analysis,
                    const SampleSink& sink = {});

}  // namespace dhl
