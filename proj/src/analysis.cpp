#include "dhl/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace dhl {

std::string to_string(Classification c) {
  return c == Classification::LimitCycle ? "LimitCycle" : "Stationary";
}

Classification classification_from_string(const std::string& s) {
  if (s == "LimitCycle") return Classification::LimitCycle;
  if (s == "Stationary") return Classification::Stationary;
  throw std::invalid_argument("unknown classification '" + s + "'");
}

namespace {

void require_same_length(std::span<const double> t, std::span<const double> x) {
  if (t.size() != x.size()) throw std::invalid_argument("time and value series differ in length");
  if (t.size() < 2) throw std::invalid_argument("series needs at least two samples");
}

std::size_t first_at_or_after(std::span<const double> t, double t0) {
  return static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), t0) - t.begin());
}

double peak_to_peak(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

// FFTW's planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

bool uniformly_sampled(std::span<const double> t) {
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * dt) return false;
  }
  return true;
}

// Linear resampling onto a uniform grid with the median spacing.
std::vector<double> resample_uniform(std::span<const double> t, std::span<const double> x,
                                     double& dt_out) {
  std::vector<double> gaps(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) gaps[i - 1] = t[i] - t[i - 1];
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double dt = gaps[gaps.size() / 2];
  const auto n = static_cast<std::size_t>(std::floor((t.back() - t.front()) / dt)) + 1;
  std::vector<double> out(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = t.front() + static_cast<double>(i) * dt;
    while (j + 2 < t.size() && t[j + 1] < ti) ++j;
    const double w = (ti - t[j]) / (t[j + 1] - t[j]);
    out[i] = (1.0 - w) * x[j] + w * x[j + 1];
  }
  dt_out = dt;
  return out;
}

// Dominant non-zero frequency of a mean-free uniformly sampled series.
double dominant_frequency(const std::vector<double>& x, double dt) {
  const std::size_t padded = 4 * x.size();
  std::vector<double> in(padded, 0.0);
  std::copy(x.begin(), x.end(), in.begin());
  std::vector<std::complex<double>> out(padded / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(padded), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::size_t best = 1;
  double best_mag = -1.0;
  for (std::size_t k = 1; k < out.size(); ++k) {
    const double mag = std::abs(out[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  double offset = 0.0;
  if (best > 1 && best + 1 < out.size()) {
    const double l = std::abs(out[best - 1]), c = best_mag, r = std::abs(out[best + 1]);
    const double denom = l - 2.0 * c + r;
    if (denom != 0.0) offset = 0.5 * (l - r) / denom;
  }
  return (static_cast<double>(best) + offset) / (static_cast<double>(padded) * dt);
}

}  // namespace

ClassifyResult classify(std::span<const double> t, std::span<const double> x,
                        const AnalysisSettings& settings) {
  require_same_length(t, x);
  const std::size_t start = first_at_or_after(t, settings.t_transient);
  const double t_end = t.back();
  if (start >= t.size()) throw std::invalid_argument("series ends before the transient cutoff");
  const double window = t_end - t[start];
  if (window < settings.min_window) {
    throw std::invalid_argument("post-transient window " + std::to_string(window) +
                                " shorter than required " + std::to_string(settings.min_window));
  }
  const std::size_t tail = first_at_or_after(t, t_end - 0.25 * window);

  ClassifyResult r;
  r.amplitude = peak_to_peak(x.subspan(start));
  r.tail_amplitude = peak_to_peak(x.subspan(tail));
  const bool oscillating = r.amplitude >= settings.eps_osc;
  const bool retained = r.tail_amplitude >= settings.retention * r.amplitude;
  r.classification =
      oscillating && retained ? Classification::LimitCycle : Classification::Stationary;
  r.settled = !(oscillating && !retained);
  return r;
}

FrequencyEstimate estimate_frequency(std::span<const double> t, std::span<const double> x,
                                     double t_transient) {
  require_same_length(t, x);
  const std::size_t start = first_at_or_after(t, t_transient);
  if (t.size() - start < 4) throw std::invalid_argument("too few post-transient samples");
  const auto ts = t.subspan(start);
  std::vector<double> xs(x.begin() + static_cast<std::ptrdiff_t>(start), x.end());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  for (double& v : xs) v -= mean;

  const double band = 0.05 * peak_to_peak(xs);  // hysteresis against ripple near zero
  std::vector<double> crossings;
  bool armed = false;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i - 1] < -band) armed = true;
    if (armed && xs[i - 1] < 0.0 && xs[i] >= 0.0) {
      const double w = -xs[i - 1] / (xs[i] - xs[i - 1]);
      crossings.push_back(ts[i - 1] + w * (ts[i] - ts[i - 1]));
      armed = false;
    }
  }
  if (crossings.size() < 2) {
    throw std::invalid_argument("fewer than two upward zero crossings after the transient");
  }

  const std::size_t count = crossings.size() - 1;
  std::vector<double> intervals(count);
  for (std::size_t i = 0; i < count; ++i) intervals[i] = crossings[i + 1] - crossings[i];
  const double mean_interval =
      std::accumulate(intervals.begin(), intervals.end(), 0.0) / static_cast<double>(count);
  double var = 0.0;
  if (count > 1) {
    for (double iv : intervals) var += (iv - mean_interval) * (iv - mean_interval);
    var /= static_cast<double>(count - 1);
  }

  FrequencyEstimate est;
  est.frequency = 1.0 / mean_interval;
  est.uncertainty =
      std::sqrt(var) / (std::sqrt(static_cast<double>(count)) * mean_interval * mean_interval);
  est.periods = count;
  est.reliable = count >= kMinReliablePeriods;

  double dt = 0.0;
  std::vector<double> uniform;
  if (uniformly_sampled(ts)) {
    dt = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    uniform = xs;
  } else {
    uniform = resample_uniform(ts, xs, dt);
  }
  est.dft_frequency = dominant_frequency(uniform, dt);
  const double resolution = 1.0 / (ts.back() - ts.front());
  est.dft_agrees = std::abs(est.dft_frequency - est.frequency) <=
                   std::max(3.0 * est.uncertainty, resolution);
  return est;
}

double relative_phase(std::span<const double> t, std::span<const double> a,
                      std::span<const double> b, double frequency, double t_transient) {
  require_same_length(t, a);
  require_same_length(t, b);
  if (!(frequency > 0.0)) throw std::invalid_argument("relative_phase needs a positive frequency");
  std::size_t start = first_at_or_after(t, t_transient);
  // Keep an integer number of periods, ending at the last sample.
  const double window = t.back() - t[start];
  const double periods = std::floor(window * frequency);
  if (periods >= 1.0) start = first_at_or_after(t, t.back() - periods / frequency);

  const auto n = static_cast<double>(t.size() - start);
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = start; i < t.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;

  std::complex<double> ca{0.0, 0.0}, cb{0.0, 0.0};
  const double omega = 2.0 * std::numbers::pi * frequency;
  for (std::size_t i = start; i < t.size(); ++i) {
    const std::complex<double> phasor = std::polar(1.0, -omega * t[i]);
    ca += (a[i] - mean_a) * phasor;
    cb += (b[i] - mean_b) * phasor;
  }
  double phase = std::arg(cb * std::conj(ca));
  if (phase <= -std::numbers::pi) phase = std::numbers::pi;
  return phase;
}

double relative_phase_checked(std::span<const double> t, std::span<const double> a,
                              std::span<const double> b, const FrequencyEstimate& a_estimate,
                              double t_transient) {
  const FrequencyEstimate b_estimate = estimate_frequency(t, b, t_transient);
  const double combined = std::max(std::hypot(a_estimate.uncertainty, b_estimate.uncertainty),
                                   1e-3 * a_estimate.frequency);
  if (std::abs(a_estimate.frequency - b_estimate.frequency) > combined) {
    throw std::invalid_argument("series oscillate at different frequencies (" +
                                std::to_string(a_estimate.frequency) + " vs " +
                                std::to_string(b_estimate.frequency) + ")");
  }
  return relative_phase(t, a, b, a_estimate.frequency, t_transient);
}

std::vector<double> times(const Trajectory& trajectory) {
  std::vector<double> out(trajectory.size());
  std::transform(trajectory.begin(), trajectory.end(), out.begin(),
                 [](const BlochSample& s) { return s.t; });
  return out;
}

std::vector<double> component(const Trajectory& trajectory, Sublattice sublattice, int axis) {
  std::vector<double> out(trajectory.size());
  std::transform(trajectory.begin(), trajectory.end(), out.begin(), [&](const BlochSample& s) {
    return sublattice == Sublattice::A ? s.n_a[axis] : s.n_b[axis];
  });
  return out;
}

TrajectorySummary summarize(const Trajectory& trajectory, const AnalysisSettings& settings) {
  if (trajectory.empty()) throw std::invalid_argument("empty trajectory");
  const auto t = times(trajectory);
  const auto za = component(trajectory, Sublattice::A, 2);
  const auto zb = component(trajectory, Sublattice::B, 2);

  TrajectorySummary summary;
  const ClassifyResult c = classify(t, za, settings);
  summary.classification = c.classification;
  summary.amplitude = c.amplitude;
  summary.tail_amplitude = c.tail_amplitude;
  summary.settled = c.settled;
  summary.final_bloch = {trajectory.back().n_a, trajectory.back().n_b};
  summary.t_end = trajectory.back().t;

  if (c.classification == Classification::LimitCycle) {
    try {
      summary.frequency = estimate_frequency(t, za, settings.t_transient);
      summary.relative_phase =
          relative_phase_checked(t, za, zb, *summary.frequency, settings.t_transient);
    } catch (const std::invalid_argument&) {
      // Oscillation without a clean crossing pattern, or mismatched sublattices:
      // leave the optional fields empty.
    }
  }
  return summary;
}

BasinEstimate make_basin_estimate(std::size_t n_stationary, std::size_t n_samples,
                                  std::size_t n_excluded) {
  if (n_stationary > n_samples) {
    throw std::invalid_argument("stationary count exceeds sample count");
  }
  BasinEstimate b;
  b.n_samples = n_samples;
  b.n_stationary = n_stationary;
  b.n_excluded = n_excluded;
  if (n_samples > 0) {
    const double n = static_cast<double>(n_samples);
    b.p_stationary = static_cast<double>(n_stationary) / n;
    b.std_err = std::sqrt(b.p_stationary * (1.0 - b.p_stationary) / n);
  }
  return b;
}

}  // namespace dhl
