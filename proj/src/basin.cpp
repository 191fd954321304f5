#include "dhl/basin.hpp"

#include "dhl/clustermf.hpp"
#include "dhl/meanfield.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <thread>

namespace dhl {

std::string to_string(Method m) {
  switch (m) {
    case Method::MeanField: return "mf";
    case Method::Cmop: return "cmop";
    case Method::Cmf: return "cmf";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "mf") return Method::MeanField;
  if (s == "cmop") return Method::Cmop;
  if (s == "cmf") return Method::Cmf;
  throw std::invalid_argument("unknown method '" + s + "' (expected mf, cmop or cmf)");
}

MethodRun run_trajectory(const TrajectorySpec& spec, const BlochPair& initial,
                         const SampleSink& sink) {
  switch (spec.method) {
    case Method::MeanField:
      return evolve_mf(initial, spec.params, spec.integration, spec.analysis, sink);
    case Method::Cmop:
      return evolve_cmop(initial, spec.params, spec.integration, spec.cmop, spec.analysis, sink);
    case Method::Cmf:
      return evolve_cmf(initial, build_geometry(spec.shape), spec.params, spec.integration,
                        spec.analysis, sink);
  }
  throw std::logic_error("run_trajectory: bad method");
}

std::size_t default_workers() {
  if (const char* env = std::getenv("DHL_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace {

/// Runs every sample; fatal (non-numerical) errors are rethrown after the pool drains.
std::vector<SampleOutcome> run_samples(const TrajectorySpec& spec, std::size_t n_samples,
                                       std::uint64_t seed, std::size_t workers,
                                       BallSampling sampling) {
  std::vector<SampleOutcome> out(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    auto rng = derive_stream(seed, i);
    out[i].initial = random_bloch_pair(rng, sampling);
  }
  std::vector<std::exception_ptr> fatal(n_samples);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n_samples; i = next++) {
      try {
        out[i].summary = run_trajectory(spec, out[i].initial).summary;
      } catch (const NumericalError& e) {
        out[i].error = e.what();
      } catch (...) {
        fatal[i] = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n_samples, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : fatal)
    if (e) std::rethrow_exception(e);
  return out;
}

double bloch_distance(const BlochPair& a, const BlochPair& b) {
  return std::max((a.n_a - b.n_a).cwiseAbs().maxCoeff(), (a.n_b - b.n_b).cwiseAbs().maxCoeff());
}

}  // namespace

BasinResult basin_fraction(const TrajectorySpec& spec, std::size_t n_samples, std::uint64_t seed,
                           std::size_t workers, BallSampling sampling) {
  if (n_samples == 0) throw std::invalid_argument("basin_fraction: n_samples must be >= 1");
  BasinResult result;
  result.samples = run_samples(spec, n_samples, seed, workers, sampling);

  std::size_t n_done = 0, n_stationary = 0;
  std::vector<double> freqs;
  for (const auto& s : result.samples) {
    if (!s.summary) continue;
    ++n_done;
    if (s.summary->classification == Classification::Stationary) {
      ++n_stationary;
    } else {
      ++result.n_limit_cycle;
      if (s.summary->frequency) freqs.push_back(s.summary->frequency->frequency);
    }
  }
  result.estimate = make_basin_estimate(n_stationary, n_done, n_samples - n_done);

  if (!freqs.empty()) {
    const double m = static_cast<double>(freqs.size());
    double mean = 0.0;
    for (double f : freqs) mean += f;
    mean /= m;
    result.mean_frequency = mean;
    if (freqs.size() == 1) {
      for (const auto& s : result.samples)
        if (s.summary && s.summary->frequency) result.freq_err = s.summary->frequency->uncertainty;
    } else {
      double ss = 0.0;
      for (double f : freqs) ss += (f - mean) * (f - mean);
      result.freq_err = std::sqrt(ss / (m - 1.0) / m);
    }
  }
  return result;
}

std::string phase_label(const std::vector<StationaryAttractor>& stationary,
                        std::size_t n_limit_cycle) {
  std::vector<const StationaryAttractor*> uniform, afm;
  for (const auto& a : stationary) (a.uniform ? uniform : afm).push_back(&a);
  auto by_z = [](const StationaryAttractor* x, const StationaryAttractor* y) {
    return x->bloch.n_a.z() < y->bloch.n_a.z();
  };
  std::sort(uniform.begin(), uniform.end(), by_z);
  std::sort(afm.begin(), afm.end(), by_z);

  std::vector<std::string> classes;
  auto add = [&classes](const std::string& base, std::size_t count) {
    if (count == 1) classes.push_back(base);
    for (std::size_t k = 1; count > 1 && k <= count; ++k)
      classes.push_back(base + std::to_string(k));
  };
  add("U", uniform.size());
  add("AFM", afm.size());
  if (n_limit_cycle > 0) classes.push_back("LC");

  if (classes.empty()) return "UNRESOLVED";
  if (classes.size() == 1) return classes[0] == "U" ? "Uniform" : classes[0];
  std::string label = "Bistable(";
  for (std::size_t k = 0; k < classes.size(); ++k) label += (k ? "," : "") + classes[k];
  return label + ")";
}

PhasePoint phase_classify(const TrajectorySpec& spec, std::size_t n_samples, std::uint64_t seed,
                          std::size_t workers) {
  if (spec.method != Method::MeanField)
    throw std::invalid_argument("phase_classify: only the mf method is supported");
  if (n_samples == 0) throw std::invalid_argument("phase_classify: n_samples must be >= 1");
  const auto samples = run_samples(spec, n_samples, seed, workers, BallSampling::UniformVolume);

  PhasePoint point;
  for (const auto& s : samples) {
    if (!s.summary || !s.summary->settled) {
      ++point.n_unresolved;
      continue;
    }
    if (s.summary->classification == Classification::LimitCycle) {
      ++point.n_limit_cycle;
      continue;
    }
    const BlochPair& end = s.summary->final_bloch;
    const bool uniform = (end.n_a - end.n_b).cwiseAbs().maxCoeff() < kAttractorTolerance;
    auto same = [&](const StationaryAttractor& a) {
      if (a.uniform != uniform) return false;
      if (bloch_distance(a.bloch, end) < kAttractorTolerance) return true;
      return !uniform && bloch_distance(a.bloch, end.swapped()) < kAttractorTolerance;
    };
    auto it = std::find_if(point.stationary.begin(), point.stationary.end(), same);
    if (it == point.stationary.end()) point.stationary.push_back({end, uniform, 1});
    else ++it->count;
  }
  point.resolved = point.n_unresolved == 0;
  point.label = point.resolved ? phase_label(point.stationary, point.n_limit_cycle) : "UNRESOLVED";
  return point;
}

}  // namespace dhl
