#include "dhl/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

using namespace dhl;

namespace {

constexpr double kPi = std::numbers::pi;

struct Series {
  std::vector<double> t;
  std::vector<double> x;
};

Series sample(double t0, double t1, double dt, const std::function<double(double)>& f) {
  Series s;
  const auto n = static_cast<std::size_t>(std::llround((t1 - t0) / dt));
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    s.t.push_back(t);
    s.x.push_back(f(t));
  }
  return s;
}

AnalysisSettings window_from(double t_transient) {
  AnalysisSettings a;
  a.t_transient = t_transient;
  return a;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("classify examples") {
    const Series flat = sample(0.0, 100.0, 0.01, [](double) { return -0.3; });
    const ClassifyResult c = classify(flat.t, flat.x, window_from(0.0));
    CHECK(c.classification == Classification::Stationary);
    CHECK(c.amplitude == 0.0);
    CHECK(c.settled);

    const Series sine = sample(0.0, 100.0, 0.01, [](double t) { return 0.1 * std::sin(2 * kPi * t / 7.0); });
    const ClassifyResult s = classify(sine.t, sine.x, window_from(0.0));
    CHECK(s.classification == Classification::LimitCycle);
    CHECK(s.amplitude == doctest::Approx(0.2).epsilon(1e-5));

    const Series ring = sample(0.0, 400.0, 0.01, [](double t) { return 0.1 * std::exp(-t / 10.0) * std::sin(t); });
    const ClassifyResult r = classify(ring.t, ring.x, window_from(200.0));
    CHECK(r.classification == Classification::Stationary);
    CHECK(r.amplitude < 1e-4);
  }

  TEST_CASE("slow ring-down is not a limit cycle") {
    const Series slow = sample(0.0, 400.0, 0.01, [](double t) { return std::exp(-t / 100.0) * std::sin(t); });
    const ClassifyResult r = classify(slow.t, slow.x, window_from(200.0));
    CHECK(r.amplitude > 1e-4);
    CHECK(r.tail_amplitude < 0.5 * r.amplitude);
    CHECK(r.classification == Classification::Stationary);
    CHECK_FALSE(r.settled);

    AnalysisSettings lenient = window_from(200.0);
    lenient.retention = 0.1;
    CHECK(classify(slow.t, slow.x, lenient).classification == Classification::LimitCycle);
  }

  TEST_CASE("classification invariants") {
    const Series s = sample(0.0, 300.0, 0.01, [](double t) { return 0.05 * std::cos(0.9 * t) + 0.2; });
    const AnalysisSettings a = window_from(100.0);
    const ClassifyResult first = classify(s.t, s.x, a), second = classify(s.t, s.x, a);
    CHECK(first.classification == second.classification);
    CHECK(first.amplitude == second.amplitude);

    std::vector<double> shifted(s.t);
    for (double& t : shifted) t += 1000.0;
    const ClassifyResult moved = classify(shifted, s.x, window_from(1100.0));
    CHECK(moved.classification == first.classification);
    CHECK(moved.amplitude == first.amplitude);
    CHECK(moved.tail_amplitude == first.tail_amplitude);
  }

  TEST_CASE("classify rejects short windows") {
    const Series s = sample(0.0, 240.0, 0.01, [](double t) { return std::sin(t); });
    CHECK_THROWS_AS(classify(s.t, s.x, window_from(200.0)), std::invalid_argument);
    CHECK_THROWS_AS(classify(s.t, s.x, window_from(300.0)), std::invalid_argument);
    std::vector<double> short_x(s.x.begin(), s.x.end() - 1);
    CHECK_THROWS_AS(classify(s.t, short_x, window_from(0.0)), std::invalid_argument);
  }

  TEST_CASE("frequency of a sinusoid") {
    const Series s = sample(0.0, 300.0, 0.01, [](double t) { return std::sin(2 * kPi * t / 7.0); });
    const FrequencyEstimate f = estimate_frequency(s.t, s.x, 0.0);
    CHECK(std::abs(f.frequency - 1.0 / 7.0) < 1e-4);
    CHECK(f.reliable);
    CHECK(f.periods >= 40);
    CHECK(f.dft_agrees);
    CHECK(std::abs(f.dft_frequency - 1.0 / 7.0) < 1.0 / 300.0);
  }

  TEST_CASE("frequency of an anharmonic series") {
    for (double period : {7.0, 3.3, 12.5}) {
      const double w = 2 * kPi / period;
      const Series s = sample(0.0, 400.0, 0.01, [&](double t) { return std::sin(w * t) + 0.3 * std::sin(2 * w * t); });
      const FrequencyEstimate f = estimate_frequency(s.t, s.x, 50.0);
      CAPTURE(period);
      CHECK(std::abs(f.frequency * period - 1.0) < 1e-3);
      CHECK(f.dft_agrees);
    }
  }

  TEST_CASE("frequency is invariant under amplitude scaling") {
    const Series s = sample(0.0, 200.0, 0.01, [](double t) { return std::sin(1.3 * t) + 0.4 * std::cos(2.6 * t); });
    std::vector<double> big(s.x);
    for (double& v : big) v *= 10.0;
    const FrequencyEstimate a = estimate_frequency(s.t, s.x, 0.0), b = estimate_frequency(s.t, big, 0.0);
    CHECK(std::abs(a.frequency - b.frequency) < 1e-12);
  }

  TEST_CASE("frequency of a non-uniformly sampled series") {
    Series s;
    double t = 0.0;
    for (int i = 0; t < 200.0; ++i) {
      s.t.push_back(t);
      s.x.push_back(std::sin(2 * kPi * t / 5.0));
      t += (i % 2) ? 0.013 : 0.007;
    }
    const FrequencyEstimate f = estimate_frequency(s.t, s.x, 0.0);
    CHECK(std::abs(f.frequency - 0.2) < 1e-4);
    CHECK(f.dft_agrees);
  }

  TEST_CASE("too few periods") {
    const Series three = sample(0.0, 3.5, 0.01, [](double t) { return std::sin(2 * kPi * t); });
    const FrequencyEstimate f = estimate_frequency(three.t, three.x, 0.0);
    CHECK_FALSE(f.reliable);
    const Series none = sample(0.0, 10.0, 0.01, [](double t) { return t; });
    CHECK_THROWS_AS(estimate_frequency(none.t, none.x, 0.0), std::invalid_argument);
  }

  TEST_CASE("relative phase") {
    const Series a = sample(0.0, 100.0, 0.01, [](double t) { return std::sin(2 * kPi * t / 7.0); });
    std::vector<double> neg(a.x);
    for (double& v : neg) v = -v;
    CHECK(relative_phase(a.t, a.x, neg, 1.0 / 7.0) == doctest::Approx(kPi).epsilon(1e-9));
    CHECK(std::abs(relative_phase(a.t, a.x, a.x, 1.0 / 7.0)) < 1e-12);
    const Series lead = sample(0.0, 100.0, 0.01, [](double t) { return std::sin(2 * kPi * t / 7.0 + 1.0); });
    CHECK(relative_phase(a.t, a.x, lead.x, 1.0 / 7.0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_THROWS_AS(relative_phase(a.t, a.x, a.x, 0.0), std::invalid_argument);
  }

  TEST_CASE("checked phase rejects mismatched frequencies") {
    const Series a = sample(0.0, 200.0, 0.01, [](double t) { return std::sin(2 * kPi * t / 7.0); });
    const Series b = sample(0.0, 200.0, 0.01, [](double t) { return std::sin(2 * kPi * t / 5.0); });
    const FrequencyEstimate fa = estimate_frequency(a.t, a.x, 0.0);
    CHECK_THROWS_AS(relative_phase_checked(a.t, a.x, b.x, fa, 0.0), std::invalid_argument);
    std::vector<double> neg(a.x);
    for (double& v : neg) v = -0.5 * v;
    CHECK(relative_phase_checked(a.t, a.x, neg, fa, 0.0) == doctest::Approx(kPi).epsilon(1e-6));
  }

  TEST_CASE("summarize an antiphase trajectory") {
    Trajectory traj;
    for (int i = 0; i <= 60000; ++i) {
      const double t = 0.01 * i;
      const double z = 0.3 * std::sin(2 * kPi * t / 4.0) + 0.1 * std::sin(4 * kPi * t / 4.0);
      traj.push_back({t, Vec3(0.1, 0.2, -0.2 + z), Vec3(0.1, 0.2, -0.2 - z)});
    }
    const TrajectorySummary s = summarize(traj, AnalysisSettings{});
    CHECK(s.classification == Classification::LimitCycle);
    REQUIRE(s.frequency.has_value());
    CHECK(s.frequency->frequency == doctest::Approx(0.25).epsilon(1e-4));
    REQUIRE(s.relative_phase.has_value());
    CHECK(std::abs(*s.relative_phase - kPi) < 1e-6);
    CHECK(s.t_end == doctest::Approx(600.0));
    CHECK(s.final_bloch.n_b == traj.back().n_b);

    Trajectory still(traj.size(), BlochSample{});
    for (std::size_t i = 0; i < still.size(); ++i) still[i].t = traj[i].t;
    const TrajectorySummary q = summarize(still, AnalysisSettings{});
    CHECK(q.classification == Classification::Stationary);
    CHECK_FALSE(q.frequency.has_value());
    CHECK_THROWS_AS(summarize({}, AnalysisSettings{}), std::invalid_argument);
  }

  TEST_CASE("Bernoulli standard error") {
    for (std::size_t n = 1; n <= 50; ++n) {
      for (std::size_t k = 0; k <= n; ++k) {
        const BasinEstimate b = make_basin_estimate(k, n);
        const double p = double(k) / double(n);
        CHECK(b.p_stationary == p);
        CHECK(b.std_err == std::sqrt(p * (1.0 - p) / double(n)));
        CHECK(b.p_stationary >= 0.0);
        CHECK(b.p_stationary <= 1.0);
      }
    }
    CHECK(make_basin_estimate(1, 1).std_err == 0.0);
    CHECK(make_basin_estimate(0, 1).std_err == 0.0);
    CHECK(make_basin_estimate(2, 5, 3).n_excluded == 3);
    CHECK_THROWS_AS(make_basin_estimate(3, 2), std::invalid_argument);
  }

  TEST_CASE("string conversions and column views") {
    CHECK(classification_from_string(to_string(Classification::LimitCycle)) == Classification::LimitCycle);
    CHECK(classification_from_string("Stationary") == Classification::Stationary);
    CHECK_THROWS_AS(classification_from_string("lc"), std::invalid_argument);
    const Trajectory traj{{0.0, Vec3(1, 2, 3), Vec3(4, 5, 6)}, {0.5, Vec3(7, 8, 9), Vec3(-1, -2, -3)}};
    CHECK(times(traj) == std::vector<double>{0.0, 0.5});
    CHECK(component(traj, Sublattice::B, 1) == std::vector<double>{5.0, -2.0});
    CHECK(component(traj, Sublattice::A, 2) == std::vector<double>{3.0, 9.0});
  }
}
