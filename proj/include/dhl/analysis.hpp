#pragma once

#include "dhl/model.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dhl {

/// Sublattice Bloch vectors at one instant.
struct BlochSample {
  double t = 0.0;
  Vec3 n_a = Vec3::Zero();
  Vec3 n_b = Vec3::Zero();
};

using Trajectory = std::vector<BlochSample>;
using SampleSink = std::function<void(const BlochSample&)>;

enum class Classification { Stationary, LimitCycle };

std::string to_string(Classification c);
Classification classification_from_string(const std::string& s);

struct AnalysisSettings {
  double t_transient = 200.0;
  double eps_osc = 1e-4;
  double retention = 0.5;     // tail/full amplitude ratio a limit cycle must keep
  double min_window = 50.0;   // shortest admissible post-transient window
};

struct ClassifyResult {
  Classification classification = Classification::Stationary;
  double amplitude = 0.0;       // peak-to-peak over the post-transient window
  double tail_amplitude = 0.0;  // peak-to-peak over its last quarter
  /// False for a ring-down: oscillation above eps_osc that is still decaying.
  bool settled = true;
};

/// Throws std::invalid_argument when the post-transient window is shorter
/// than min_window or the inputs are inconsistent.
ClassifyResult classify(std::span<const double> t, std::span<const double> x,
                        const AnalysisSettings& settings);

struct FrequencyEstimate {
  double frequency = 0.0;    // cycles per unit time
  double uncertainty = 0.0;  // standard error of the mean-interval estimate
  std::size_t periods = 0;   // complete periods between upward crossings
  bool reliable = false;     // at least kMinReliablePeriods periods
  double dft_frequency = 0.0;
  bool dft_agrees = false;
};

inline constexpr std::size_t kMinReliablePeriods = 5;

/// Mean interval between upward zero crossings of the mean-subtracted
/// post-transient series, with a Fourier-peak cross-check. Throws
/// std::invalid_argument when fewer than two crossings are found.
FrequencyEstimate estimate_frequency(std::span<const double> t, std::span<const double> x,
                                     double t_transient);

/// Phase of b relative to a at `frequency`, in (-pi, pi]. b = -a gives pi.
double relative_phase(std::span<const double> t, std::span<const double> a,
                      std::span<const double> b, double frequency, double t_transient = 0.0);

/// As relative_phase, but first checks that b oscillates at the frequency of
/// `a_estimate`; throws std::invalid_argument on a mismatch beyond the combined
/// uncertainty (floored at 1e-3 relative).
double relative_phase_checked(std::span<const double> t, std::span<const double> a,
                              std::span<const double> b, const FrequencyEstimate& a_estimate,
                              double t_transient);

struct TrajectorySummary {
  Classification classification = Classification::Stationary;
  double amplitude = 0.0;
  double tail_amplitude = 0.0;
  bool settled = true;
  std::optional<FrequencyEstimate> frequency;
  std::optional<double> relative_phase;
  BlochPair final_bloch;
  double t_end = 0.0;
};

/// Classification and frequency use <sigma^z_A>; the phase compares <sigma^z_B> to it.
TrajectorySummary summarize(const Trajectory& trajectory, const AnalysisSettings& settings);

struct BasinEstimate {
  std::size_t n_samples = 0;  // trajectories that completed
  std::size_t n_stationary = 0;
  std::size_t n_excluded = 0;  // trajectories aborted by numerical failure
  double p_stationary = 0.0;
  double std_err = 0.0;
};

/// p = n_stationary / n, std_err = sqrt(p (1 - p) / n).
BasinEstimate make_basin_estimate(std::size_t n_stationary, std::size_t n_samples,
                                  std::size_t n_excluded = 0);

/// Column views of a trajectory.
std::vector<double> times(const Trajectory& trajectory);
std::vector<double> component(const Trajectory& trajectory, Sublattice sublattice, int axis);

}  // namespace dhl
