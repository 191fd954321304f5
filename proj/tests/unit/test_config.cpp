#include "dhl/config.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>

using namespace dhl;
using nlohmann::json;

namespace {

json base_cmop() {
  return json::parse(R"({
    "method": "cmop",
    "params": {"preset": "A"},
    "z": 150,
    "initial": {"preset": "R_I"},
    "integration": {"dt": 0.01, "t_end": 1000}
  })");
}

/// Field named by the ConfigError raised for `j`, or "" if it parses.
std::string error_field(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("presets expand") {
    const RunConfig c = config_from_json(base_cmop());
    CHECK(c.spec.method == Method::Cmop);
    CHECK(c.spec.params.J == Vec3(-7.0, 6.0, 2.0));
    CHECK(c.spec.params.omega == 1.0);
    CHECK(c.spec.params.z == 150);
    CHECK(c.initial.resolve().n_a == preset_r1().n_a);
    CHECK(c.initial.preset == "R_I");
    CHECK(c.spec.cmop.memory == MemoryMode::Exact);

    json b = base_cmop();
    b["params"] = {{"preset", "B"}, {"omega", 3.0}};
    b["initial"] = {{"preset", "R_II"}};
    const RunConfig cb = config_from_json(b);
    CHECK(cb.spec.params.J == Vec3(-6.4, 3.0, 6.0));
    CHECK(cb.spec.params.omega == 3.0);  // explicit values override the preset
    CHECK(cb.initial.resolve().n_b == preset_r2().n_b);
  }

  TEST_CASE("explicit parameters and initial vectors") {
    const json j = json::parse(R"({
      "method": "mf",
      "params": {"Jx": 0, "Jy": 0, "Jz": 0, "omega": 1},
      "initial": {"nA": [0, 0, -1], "nB": [0.1, 0.2, 0.3]},
      "integration": {"t_end": 300}
    })");
    const RunConfig c = config_from_json(j);
    CHECK(c.spec.params.J == Vec3::Zero());
    CHECK(c.spec.params.gamma == 1.0);
    CHECK(c.initial.resolve().n_b == Vec3(0.1, 0.2, 0.3));
  }

  TEST_CASE("cmf fixes z and defaults to adaptive stepping") {
    json j = base_cmop();
    j["method"] = "cmf";
    j.erase("z");
    j["geometry"] = {2, 2, 2};
    const RunConfig c = config_from_json(j);
    CHECK(c.spec.params.z == 6);
    CHECK(c.spec.params.dimension == 3);
    CHECK(c.spec.integration.adaptive);
    CHECK(c.spec.shape == std::vector<std::size_t>{2, 2, 2});
    j["z"] = 150;
    CHECK(error_field(j) == "z");
  }

  TEST_CASE("random initial states are seeded") {
    json j = base_cmop();
    j["initial"] = {{"random", {{"seed", 12}}}};
    const RunConfig c = config_from_json(j);
    CHECK(c.initial.kind == InitialState::Kind::Random);
    CHECK(c.initial.resolve().n_a == config_from_json(j).initial.resolve().n_a);
    j["initial"]["random"]["sampling"] = "surface";
    CHECK(config_from_json(j).initial.resolve().n_a.norm() == doctest::Approx(1.0));
    j["initial"]["random"]["seed"] = 18446744073709551615ull;
    CHECK_NOTHROW(config_from_json(j));
  }

  TEST_CASE("field-level errors") {
    json j = base_cmop();
    j.erase("z");
    CHECK(error_field(j) == "z");

    j = base_cmop();
    j["method"] = "exact";
    CHECK(error_field(j) == "method");

    j = base_cmop();
    j["params"]["preset"] = "C";
    CHECK(error_field(j) == "params.preset");

    j = base_cmop();
    j["params"] = {{"Jx", 1}, {"Jy", 1}, {"omega", 1}};
    CHECK(error_field(j) == "params.Jz");

    j = base_cmop();
    j["params"]["gamma"] = 0;
    CHECK(error_field(j) == "params.gamma");

    j = base_cmop();
    j["integration"]["adaptive"] = true;
    CHECK(error_field(j) == "integration.adaptive");

    j = base_cmop();
    j["integration"]["dt"] = -0.1;
    CHECK(error_field(j) == "integration.dt");

    j = base_cmop();
    j["integration"]["memory"] = "none";
    CHECK(error_field(j) == "integration.memory");

    j = base_cmop();
    j["method"] = "mf";
    j["integration"]["t_mem"] = 20;
    CHECK(error_field(j) == "integration");

    j = base_cmop();
    j["initial"] = {{"nA", {0.9, 0.9, 0.0}}, {"nB", {0, 0, 0}}};
    CHECK(error_field(j) == "initial.nA");

    j = base_cmop();
    j["initial"] = {{"preset", "R_I"}, {"random", {{"seed", 1}}}};
    CHECK(error_field(j) == "initial");

    j = base_cmop();
    j["initial"] = {{"random", {{"seed", -1}}}};
    CHECK(error_field(j) == "initial.random.seed");

    j = base_cmop();
    j["analysis"] = {{"t_transient", 990}};
    CHECK(error_field(j) == "analysis.t_transient");

    j = base_cmop();
    j["analysis"] = {{"retention", 1.5}};
    CHECK(error_field(j) == "analysis.retention");

    j = base_cmop();
    j["integration"]["step"] = 0.1;
    CHECK(error_field(j) == "integration.step");

    j = base_cmop();
    j["geometry"] = {2, 2};
    CHECK(error_field(j) == "geometry");

    j = base_cmop();
    j["method"] = "cmf";
    j["geometry"] = {2, 2, 3};
    CHECK(error_field(j) == "geometry");
    j["geometry"] = {2.5};
    CHECK(error_field(j) == "geometry");

    CHECK(error_field(json::array()) == "(root)");
    try {
      config_from_json(json::parse(R"({"method": "mf"})"));
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()) == "config field 'params': required");
    }
  }

  TEST_CASE("echo round trips") {
    for (const char* method : {"mf", "cmop", "cmf"}) {
      json j = base_cmop();
      j["method"] = method;
      if (std::string(method) == "cmf") {
        j.erase("z");
        j["geometry"] = {3, 3};
      }
      if (std::string(method) == "cmop") j["integration"]["memory"] = "quadrature";
      j["output"] = {{"csv", "out.csv"}};
      const json echo = config_to_json(config_from_json(j));
      CHECK(config_to_json(config_from_json(echo)) == echo);
      CHECK(echo["output"]["csv"] == "out.csv");
      CHECK(echo["method"] == method);
    }
    json r = base_cmop();
    r["initial"] = {{"random", {{"seed", 4}, {"sampling", "surface"}}}};
    const json echo = config_to_json(config_from_json(r));
    CHECK(echo["initial"]["random"]["seed"] == 4);
    CHECK(echo["initial"]["random"]["sampling"] == "surface");
  }

  TEST_CASE("overrides") {
    json j = base_cmop();
    apply_override(j, "integration.dt=0.005");
    apply_override(j, "params.preset=B");
    apply_override(j, "analysis.t_transient=100");
    const RunConfig c = config_from_json(j);
    CHECK(c.spec.integration.dt == 0.005);
    CHECK(c.spec.params.J == Vec3(-6.4, 3.0, 6.0));
    CHECK(c.spec.analysis.t_transient == 100.0);
    apply_override(j, "initial={\"nA\":[0,0,1],\"nB\":[0,0,-1]}");
    CHECK(config_from_json(j).initial.resolve().n_a == Vec3(0, 0, 1));
    CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "=3"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "z.inner=3"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "a..b=3"), ConfigError);
  }

  TEST_CASE("files") {
    const std::string path = "dhl_config_test.json";
    {
      std::ofstream out(path);
      out << base_cmop().dump(2);
    }
    CHECK(load_json_file(path) == base_cmop());
    {
      std::ofstream out(path);
      out << "{ broken";
    }
    CHECK_THROWS_AS(load_json_file(path), ConfigError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_json_file("does/not/exist.json"), ConfigError);
  }

  TEST_CASE("summary and estimate serialization") {
    TrajectorySummary s;
    s.classification = Classification::LimitCycle;
    s.amplitude = 0.4;
    s.relative_phase = 3.1;
    FrequencyEstimate f;
    f.frequency = 0.2;
    s.frequency = f;
    const json j = to_json(s);
    CHECK(j["classification"] == "LimitCycle");
    CHECK(j["frequency"]["value"] == 0.2);
    CHECK(j["relative_phase"] == 3.1);
    CHECK(to_json(TrajectorySummary{})["frequency"].is_null());
    const json b = to_json(make_basin_estimate(3, 4, 1));
    CHECK(b["p_stationary"] == 0.75);
    CHECK(b["n_excluded"] == 1);
  }
}
