#pragma once

// Ensembles of trajectories from random initial product states: stationary
// fractions for basin sampling and attractor inventories for phase points.

#include "dhl/cmop.hpp"
#include "dhl/run.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dhl {

enum class Method { MeanField, Cmop, Cmf };

std::string to_string(Method m);
/// "mf", "cmop" or "cmf"; throws std::invalid_argument otherwise.
Method method_from_string(const std::string& s);

/// Everything that fixes a trajectory except its initial state.
struct TrajectorySpec {
  Method method = Method::MeanField;
  ModelParams params;
  std::vector<std::size_t> shape;  // cmf only
  IntegrationSettings integration;
  CmopSettings cmop;
  AnalysisSettings analysis;
};

MethodRun run_trajectory(const TrajectorySpec& spec, const BlochPair& initial,
                         const SampleSink& sink = {});

/// Default pool size: DHL_WORKERS if set and positive, else the hardware thread count.
std::size_t default_workers();

struct SampleOutcome {
  BlochPair initial;
  std::optional<TrajectorySummary> summary;  // empty when the trajectory was aborted
  std::string error;
};

struct BasinResult {
  BasinEstimate estimate;
  std::vector<SampleOutcome> samples;  // in sample order
  std::size_t n_limit_cycle = 0;
  std::optional<double> mean_frequency;  // over limit-cycle samples with a frequency
  std::optional<double> freq_err;        // standard error of that mean
};

/// Sample i starts from random_bloch_pair(derive_stream(seed, i)), so results
/// do not depend on the number of workers. Aborted trajectories are counted in
/// n_excluded and left out of p_stationary.
BasinResult basin_fraction(const TrajectorySpec& spec, std::size_t n_samples, std::uint64_t seed,
                           std::size_t workers = 1,
                           BallSampling sampling = BallSampling::UniformVolume);

/// Stationary end points closer than this (max-norm over both Bloch vectors)
/// are the same attractor.
inline constexpr double kAttractorTolerance = 1e-4;

struct StationaryAttractor {
  BlochPair bloch;
  bool uniform = true;  // |n_A - n_B| < kAttractorTolerance
  std::size_t count = 0;
};

struct PhasePoint {
  std::string label;  // Uniform, AFM, LC, Bistable(...), or UNRESOLVED
  bool resolved = true;
  std::vector<StationaryAttractor> stationary;  // AFM copies related by A <-> B are merged
  std::size_t n_limit_cycle = 0;
  std::size_t n_unresolved = 0;  // still decaying at t_end, or aborted
};

/// Attractor inventory of a mean-field point. Throws std::invalid_argument for
/// other methods.
PhasePoint phase_classify(const TrajectorySpec& spec, std::size_t n_samples, std::uint64_t seed,
                          std::size_t workers = 1);

/// Label from an inventory, exposed for tests.
std::string phase_label(const std::vector<StationaryAttractor>& stationary,
                        std::size_t n_limit_cycle);

}  // namespace dhl
