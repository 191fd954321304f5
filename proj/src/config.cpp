#include "dhl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dhl {

using nlohmann::json;

namespace {

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& known) {
  for (const auto& item : obj.items())
    if (!known.count(item.key()))
      throw ConfigError(join_path(path, item.key()), "unknown field");
}

const json& require_object(const json& parent, const std::string& key, const std::string& path) {
  const std::string field = join_path(path, key);
  if (!parent.contains(key)) throw ConfigError(field, "required");
  if (!parent.at(key).is_object()) throw ConfigError(field, "must be an object");
  return parent.at(key);
}

double read_number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join_path(path, key), "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join_path(path, key), "must be finite");
  return x;
}

double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
  return obj.contains(key) ? read_number(obj, key, path) : fallback;
}

long long read_integer(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join_path(path, key), "must be an integer");
  return v.get<long long>();
}

bool bool_or(const json& obj, const std::string& key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw ConfigError(join_path(path, key), "must be true or false");
  return obj.at(key).get<bool>();
}

std::string read_string(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join_path(path, key), "must be a string");
  return v.get<std::string>();
}

Vec3 read_vec3(const json& obj, const std::string& key, const std::string& path) {
  const std::string field = join_path(path, key);
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3) throw ConfigError(field, "must be an array of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ConfigError(field, "must be an array of 3 numbers");
    out[i] = v[i].get<double>();
  }
  if (!out.allFinite()) throw ConfigError(field, "must be finite");
  if (out.norm() > 1.0 + 1e-12) throw ConfigError(field, "Bloch vector leaves the unit ball");
  return out;
}

void require_positive(double x, const std::string& field) {
  if (!(x > 0.0)) throw ConfigError(field, "must be positive");
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::string sampling_name(BallSampling s) {
  return s == BallSampling::UniformVolume ? "volume" : "surface";
}

ModelParams parse_params(const json& root, Method method, std::size_t cmf_dimension) {
  const json& p = require_object(root, "params", "");
  reject_unknown(p, "params", {"preset", "Jx", "Jy", "Jz", "omega", "gamma"});

  int z = 1;
  if (root.contains("z")) {
    const long long v = read_integer(root, "z", "");
    if (v < 1 || v > 1'000'000'000) throw ConfigError("z", "must be in [1, 1e9]");
    z = static_cast<int>(v);
  } else if (method == Method::Cmop) {
    throw ConfigError("z", "required for method cmop");
  }
  int dimension = 2;
  if (root.contains("dimension")) {
    const long long v = read_integer(root, "dimension", "");
    if (v < 1 || v > 3) throw ConfigError("dimension", "must be 1, 2 or 3");
    dimension = static_cast<int>(v);
  }
  if (method == Method::Cmf) {
    const int expected = 2 * static_cast<int>(cmf_dimension);
    if (root.contains("z") && z != expected)
      throw ConfigError("z", "cluster mean field fixes z = 2d = " + std::to_string(expected));
    if (root.contains("dimension") && dimension != static_cast<int>(cmf_dimension))
      throw ConfigError("dimension", "must match the geometry rank");
    z = expected;
    dimension = static_cast<int>(cmf_dimension);
  }

  ModelParams params;
  bool from_preset = false;
  if (p.contains("preset")) {
    const std::string name = read_string(p, "preset", "params");
    if (name == "A") params = parameter_set_a(z, dimension);
    else if (name == "B") params = parameter_set_b(z, dimension);
    else throw ConfigError("params.preset", "must be \"A\" or \"B\"");
    from_preset = true;
  }
  const char* axes[3] = {"Jx", "Jy", "Jz"};
  for (int a = 0; a < 3; ++a) {
    if (p.contains(axes[a])) params.J[a] = read_number(p, axes[a], "params");
    else if (!from_preset) throw ConfigError(join_path("params", axes[a]), "required without a preset");
  }
  if (p.contains("omega")) params.omega = read_number(p, "omega", "params");
  else if (!from_preset) throw ConfigError("params.omega", "required without a preset");
  params.gamma = number_or(p, "gamma", "params", from_preset ? params.gamma : 1.0);
  require_positive(params.gamma, "params.gamma");
  params.z = z;
  params.dimension = dimension;
  return params;
}

InitialState parse_initial(const json& root) {
  const json& in = require_object(root, "initial", "");
  reject_unknown(in, "initial", {"preset", "nA", "nB", "random"});
  const int forms = int(in.contains("preset")) + int(in.contains("nA") || in.contains("nB")) +
                    int(in.contains("random"));
  if (forms != 1)
    throw ConfigError("initial", "give exactly one of preset, nA/nB or random");

  InitialState init;
  if (in.contains("preset")) {
    init.preset = read_string(in, "preset", "initial");
    if (init.preset == "R_I") init.pair = preset_r1();
    else if (init.preset == "R_II") init.pair = preset_r2();
    else throw ConfigError("initial.preset", "must be \"R_I\" or \"R_II\"");
  } else if (in.contains("random")) {
    const std::string path = "initial.random";
    const json& r = in.at("random");
    if (!r.is_object()) throw ConfigError(path, "must be an object");
    reject_unknown(r, path, {"seed", "sampling"});
    init.kind = InitialState::Kind::Random;
    if (!r.contains("seed")) throw ConfigError(path + ".seed", "required");
    const json& seed = r.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<long long>() < 0))
      throw ConfigError(path + ".seed", "must be a non-negative integer");
    init.seed = seed.get<std::uint64_t>();
    if (r.contains("sampling")) {
      const std::string s = read_string(r, "sampling", path);
      if (s == "volume") init.sampling = BallSampling::UniformVolume;
      else if (s == "surface") init.sampling = BallSampling::UniformSurface;
      else throw ConfigError(path + ".sampling", "must be \"volume\" or \"surface\"");
    }
  } else {
    if (!in.contains("nA")) throw ConfigError("initial.nA", "required with nB");
    if (!in.contains("nB")) throw ConfigError("initial.nB", "required with nA");
    init.pair = {read_vec3(in, "nA", "initial"), read_vec3(in, "nB", "initial")};
  }
  return init;
}

void parse_integration(const json& root, Method method, TrajectorySpec& spec) {
  IntegrationSettings& in = spec.integration;
  CmopSettings& cm = spec.cmop;
  if (method == Method::Cmf) {
    in.adaptive = true;
    in.dt = 0.01;
    in.dt_max = 0.05;
  }
  if (!root.contains("integration")) return;
  const std::string path = "integration";
  const json& j = root.at(path);
  if (!j.is_object()) throw ConfigError(path, "must be an object");
  reject_unknown(j, path, {"dt", "t_end", "sample_stride", "adaptive", "abs_tol", "rel_tol",
                           "dt_max", "memory", "t_mem", "born_scale"});
  in.dt = number_or(j, "dt", path, in.dt);
  require_positive(in.dt, "integration.dt");
  in.t_end = number_or(j, "t_end", path, in.t_end);
  require_positive(in.t_end, "integration.t_end");
  if (j.contains("sample_stride")) {
    const long long s = read_integer(j, "sample_stride", path);
    if (s < 1) throw ConfigError("integration.sample_stride", "must be >= 1");
    in.sample_stride = static_cast<std::size_t>(s);
  }
  in.adaptive = bool_or(j, "adaptive", path, in.adaptive);
  if (in.adaptive && method == Method::Cmop)
    throw ConfigError("integration.adaptive", "cmop integrates with fixed steps only");
  in.abs_tol = number_or(j, "abs_tol", path, in.abs_tol);
  require_positive(in.abs_tol, "integration.abs_tol");
  in.rel_tol = number_or(j, "rel_tol", path, in.rel_tol);
  require_positive(in.rel_tol, "integration.rel_tol");
  in.dt_max = number_or(j, "dt_max", path, in.dt_max);
  require_positive(in.dt_max, "integration.dt_max");

  const bool cmop_only = j.contains("memory") || j.contains("t_mem") || j.contains("born_scale");
  if (cmop_only && method != Method::Cmop)
    throw ConfigError("integration", "memory, t_mem and born_scale apply to method cmop only");
  if (j.contains("memory")) {
    try {
      cm.memory = memory_mode_from_string(read_string(j, "memory", path));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("integration.memory", "must be \"exact\" or \"quadrature\"");
    }
  }
  cm.t_mem = number_or(j, "t_mem", path, cm.t_mem);
  require_positive(cm.t_mem, "integration.t_mem");
  cm.born_scale = number_or(j, "born_scale", path, cm.born_scale);
  if (cm.born_scale < 0.0) throw ConfigError("integration.born_scale", "must be >= 0");
}

void parse_analysis(const json& root, TrajectorySpec& spec) {
  AnalysisSettings& a = spec.analysis;
  if (root.contains("analysis")) {
    const std::string path = "analysis";
    const json& j = root.at(path);
    if (!j.is_object()) throw ConfigError(path, "must be an object");
    reject_unknown(j, path, {"t_transient", "eps_osc", "retention", "min_window"});
    a.t_transient = number_or(j, "t_transient", path, a.t_transient);
    if (a.t_transient < 0.0) throw ConfigError("analysis.t_transient", "must be >= 0");
    a.eps_osc = number_or(j, "eps_osc", path, a.eps_osc);
    require_positive(a.eps_osc, "analysis.eps_osc");
    a.retention = number_or(j, "retention", path, a.retention);
    if (!(a.retention > 0.0 && a.retention <= 1.0))
      throw ConfigError("analysis.retention", "must be in (0, 1]");
    a.min_window = number_or(j, "min_window", path, a.min_window);
    require_positive(a.min_window, "analysis.min_window");
  }
  if (spec.integration.t_end - a.t_transient < a.min_window)
    throw ConfigError("analysis.t_transient",
                      "post-transient window t_end - t_transient is shorter than min_window");
}

}  // namespace

BlochPair InitialState::resolve() const {
  if (kind == Kind::Explicit) return pair;
  auto rng = std::mt19937_64(seed);
  return random_bloch_pair(rng, sampling);
}

RunConfig config_from_json(const json& root) {
  if (!root.is_object()) throw ConfigError("(root)", "must be a JSON object");
  reject_unknown(root, "", {"method", "params", "z", "dimension", "geometry", "initial",
                            "integration", "analysis", "output"});
  RunConfig cfg;
  TrajectorySpec& spec = cfg.spec;
  if (!root.contains("method")) throw ConfigError("method", "required");
  try {
    spec.method = method_from_string(read_string(root, "method", ""));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("method", "must be \"mf\", \"cmop\" or \"cmf\"");
  }

  if (spec.method == Method::Cmf) {
    if (!root.contains("geometry")) throw ConfigError("geometry", "required for method cmf");
    const json& g = root.at("geometry");
    if (!g.is_array() || g.empty() || g.size() > 3)
      throw ConfigError("geometry", "must be an array of 1 to 3 side lengths");
    for (const auto& side : g) {
      if (!side.is_number_integer() || side.get<long long>() < 1)
        throw ConfigError("geometry", "side lengths must be positive integers");
      spec.shape.push_back(side.get<std::size_t>());
    }
    try {
      (void)build_geometry(spec.shape);
    } catch (const std::exception& e) {
      throw ConfigError("geometry", e.what());
    }
  } else if (root.contains("geometry")) {
    throw ConfigError("geometry", "applies to method cmf only");
  }

  spec.params = parse_params(root, spec.method, spec.shape.size());
  cfg.initial = parse_initial(root);
  parse_integration(root, spec.method, spec);
  parse_analysis(root, spec);

  if (root.contains("output")) {
    const json& o = root.at("output");
    if (!o.is_object()) throw ConfigError("output", "must be an object");
    reject_unknown(o, "output", {"csv", "summary"});
    if (o.contains("csv")) cfg.output.csv = read_string(o, "csv", "output");
    if (o.contains("summary")) cfg.output.summary = read_string(o, "summary", "output");
  }
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  const TrajectorySpec& s = cfg.spec;
  json j;
  j["method"] = to_string(s.method);
  j["params"] = {{"Jx", s.params.J.x()}, {"Jy", s.params.J.y()}, {"Jz", s.params.J.z()},
                 {"omega", s.params.omega}, {"gamma", s.params.gamma}};
  j["z"] = s.params.z;
  j["dimension"] = s.params.dimension;
  if (s.method == Method::Cmf) j["geometry"] = s.shape;

  if (cfg.initial.kind == InitialState::Kind::Random) {
    j["initial"] = {{"random", {{"seed", cfg.initial.seed},
                                {"sampling", sampling_name(cfg.initial.sampling)}}}};
  } else if (!cfg.initial.preset.empty()) {
    j["initial"] = {{"preset", cfg.initial.preset}};
  } else {
    j["initial"] = {{"nA", vec_json(cfg.initial.pair.n_a)}, {"nB", vec_json(cfg.initial.pair.n_b)}};
  }

  const IntegrationSettings& in = s.integration;
  json integ = {{"dt", in.dt},           {"t_end", in.t_end},     {"sample_stride", in.sample_stride},
                {"adaptive", in.adaptive}, {"abs_tol", in.abs_tol}, {"rel_tol", in.rel_tol},
                {"dt_max", in.dt_max}};
  if (s.method == Method::Cmop) {
    integ["memory"] = to_string(s.cmop.memory);
    integ["t_mem"] = s.cmop.t_mem;
    integ["born_scale"] = s.cmop.born_scale;
  }
  j["integration"] = integ;
  j["analysis"] = {{"t_transient", s.analysis.t_transient},
                   {"eps_osc", s.analysis.eps_osc},
                   {"retention", s.analysis.retention},
                   {"min_window", s.analysis.min_window}};
  json out = json::object();
  if (!cfg.output.csv.empty()) out["csv"] = cfg.output.csv;
  if (!cfg.output.summary.empty()) out["summary"] = cfg.output.summary;
  j["output"] = out;
  return j;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError(assignment, "override must look like key.path=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component");
    if (!node->is_object()) throw ConfigError(key, "parent is not an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("(file)", "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("(file)", path + ": " + e.what());
  }
}

json to_json(const TrajectorySummary& s) {
  json j;
  j["classification"] = to_string(s.classification);
  j["amplitude"] = s.amplitude;
  j["tail_amplitude"] = s.tail_amplitude;
  j["settled"] = s.settled;
  if (s.frequency) {
    const auto& f = *s.frequency;
    j["frequency"] = {{"value", f.frequency},        {"uncertainty", f.uncertainty},
                      {"periods", f.periods},        {"reliable", f.reliable},
                      {"dft_frequency", f.dft_frequency}, {"dft_agrees", f.dft_agrees}};
  } else {
    j["frequency"] = nullptr;
  }
  j["relative_phase"] = s.relative_phase ? json(*s.relative_phase) : json(nullptr);
  j["final_bloch"] = {{"nA", vec_json(s.final_bloch.n_a)}, {"nB", vec_json(s.final_bloch.n_b)}};
  j["t_end"] = s.t_end;
  return j;
}

json to_json(const BasinEstimate& e) {
  return {{"n_samples", e.n_samples},       {"n_stationary", e.n_stationary},
          {"n_excluded", e.n_excluded},     {"p_stationary", e.p_stationary},
          {"std_err", e.std_err}};
}

}  // namespace dhl
