#include "dhl/commands.hpp"

#include "dhl/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace dhl {

using nlohmann::json;

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

namespace {

void write_row(std::ostream& out, const BlochSample& s) {
  out << format_number(s.t);
  for (const Vec3* n : {&s.n_a, &s.n_b})
    for (int a = 0; a < 3; ++a) out << ',' << format_number((*n)[a]);
  out << '\n';
}

json stats_json(const EvolveStats& s) {
  return {{"steps", s.steps}, {"rejected", s.rejected}, {"rhs_evaluations", s.rhs_evaluations}};
}

std::string optional_number(const std::optional<double>& x) {
  return x ? format_number(*x) : std::string();
}

}  // namespace

int cmd_evolve(const RunConfig& config, std::ostream& csv, std::ostream* summary) {
  const BlochPair initial = config.initial.resolve();
  csv << "t,xA,yA,zA,xB,yB,zB\n";
  json doc;
  doc["version"] = DHL_VERSION;
  doc["config"] = config_to_json(config);
  doc["initial"] = {{"nA", {initial.n_a.x(), initial.n_a.y(), initial.n_a.z()}},
                    {"nB", {initial.n_b.x(), initial.n_b.y(), initial.n_b.z()}}};
  int code = kExitOk;
  try {
    const MethodRun run =
        run_trajectory(config.spec, initial, [&csv](const BlochSample& s) { write_row(csv, s); });
    doc["status"] = "complete";
    doc["summary"] = to_json(run.summary);
    doc["stats"] = stats_json(run.stats);
  } catch (const NumericalError& e) {
    csv << "# truncated at t=" << format_number(e.time()) << ": " << e.what() << '\n';
    doc["status"] = "aborted";
    doc["error"] = e.what();
    doc["abort_time"] = e.time();
    code = kExitNumerical;
  }
  csv.flush();
  if (summary) *summary << doc.dump(2) << '\n';
  return code;
}

int cmd_zsweep(const RunConfig& config, const std::vector<int>& z_values,
               const EnsembleOptions& options, std::ostream& out, std::ostream& log) {
  if (config.spec.method != Method::Cmop)
    throw ConfigError("method", "zsweep requires method cmop");
  if (z_values.empty()) throw ConfigError("z", "the sweep needs at least one z");
  for (int z : z_values)
    if (z < 1) throw ConfigError("z", "coordination numbers must be >= 1");

  out << "z,p_stationary,std_err,mean_frequency,freq_err,n_excluded\n";
  int excluded_total = 0;
  for (int z : z_values) {
    TrajectorySpec spec = config.spec;
    spec.params.z = z;
    const BasinResult r = basin_fraction(spec, options.n_samples,
                                         derive_seed(options.seed, static_cast<std::uint64_t>(z)),
                                         options.workers);
    out << z << ',' << format_number(r.estimate.p_stationary) << ','
        << format_number(r.estimate.std_err) << ',' << optional_number(r.mean_frequency) << ','
        << optional_number(r.freq_err) << ',' << r.estimate.n_excluded << '\n';
    out.flush();
    log << "z=" << z << ": " << r.estimate.n_stationary << "/" << r.estimate.n_samples
        << " stationary, " << r.estimate.n_excluded << " excluded\n";
    excluded_total += static_cast<int>(r.estimate.n_excluded);
  }
  return excluded_total > 0 ? kExitNumerical : kExitOk;
}

int cmd_basin(const RunConfig& config, const EnsembleOptions& options, std::ostream& out) {
  const BasinResult r =
      basin_fraction(config.spec, options.n_samples, options.seed, options.workers);
  json doc;
  doc["version"] = DHL_VERSION;
  doc["config"] = config_to_json(config);
  doc["seed"] = options.seed;
  doc["estimate"] = to_json(r.estimate);
  doc["n_limit_cycle"] = r.n_limit_cycle;
  doc["mean_frequency"] = r.mean_frequency ? json(*r.mean_frequency) : json(nullptr);
  doc["freq_err"] = r.freq_err ? json(*r.freq_err) : json(nullptr);
  json samples = json::array();
  for (const auto& s : r.samples) {
    json item;
    item["nA"] = {s.initial.n_a.x(), s.initial.n_a.y(), s.initial.n_a.z()};
    item["nB"] = {s.initial.n_b.x(), s.initial.n_b.y(), s.initial.n_b.z()};
    if (s.summary) {
      item["classification"] = to_string(s.summary->classification);
      item["amplitude"] = s.summary->amplitude;
      if (s.summary->frequency) item["frequency"] = s.summary->frequency->frequency;
    } else {
      item["classification"] = nullptr;
      item["error"] = s.error;
    }
    samples.push_back(std::move(item));
  }
  doc["samples"] = std::move(samples);
  out << doc.dump(2) << '\n';
  return r.estimate.n_excluded > 0 ? kExitNumerical : kExitOk;
}

std::vector<double> GridAxis::values() const {
  std::vector<double> v(steps);
  for (std::size_t k = 0; k < steps; ++k)
    v[k] = steps == 1 ? min : min + (max - min) * static_cast<double>(k) / static_cast<double>(steps - 1);
  return v;
}

GridAxis parse_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 4) throw ConfigError("axis", "expected name:min:max:steps, got '" + text + "'");
  GridAxis axis;
  axis.name = parts[0];
  if (axis.name != "Jx" && axis.name != "Jy" && axis.name != "Jz" && axis.name != "Omega")
    throw ConfigError("axis", "parameter must be Jx, Jy, Jz or Omega, got '" + axis.name + "'");
  try {
    std::size_t used = 0;
    axis.min = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("min");
    axis.max = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("max");
    const long steps = std::stol(parts[3], &used);
    if (used != parts[3].size() || steps < 1) throw std::invalid_argument("steps");
    axis.steps = static_cast<std::size_t>(steps);
  } catch (const std::exception&) {
    throw ConfigError("axis", "bad numbers in '" + text + "' (steps must be a positive integer)");
  }
  return axis;
}

namespace {

void set_parameter(ModelParams& p, const std::string& name, double value) {
  if (name == "Jx") p.J.x() = value;
  else if (name == "Jy") p.J.y() = value;
  else if (name == "Jz") p.J.z() = value;
  else p.omega = value;
}

}  // namespace

int cmd_phasediagram(const RunConfig& config, const GridAxis& axis1, const GridAxis& axis2,
                     const EnsembleOptions& options, std::ostream& out, std::ostream& log) {
  if (config.spec.method != Method::MeanField)
    throw ConfigError("method", "phasediagram requires method mf");
  if (axis1.name == axis2.name) throw ConfigError("axis", "the two axes must differ");
  out << axis1.name << ',' << axis2.name << ",phase\n";
  std::size_t index = 0, unresolved = 0;
  for (double a : axis1.values()) {
    for (double b : axis2.values()) {
      TrajectorySpec spec = config.spec;
      set_parameter(spec.params, axis1.name, a);
      set_parameter(spec.params, axis2.name, b);
      const PhasePoint p =
          phase_classify(spec, options.n_samples, derive_seed(options.seed, index++), options.workers);
      out << format_number(a) << ',' << format_number(b) << ',' << p.label << '\n';
      out.flush();
      if (!p.resolved) {
        ++unresolved;
        log << axis1.name << '=' << format_number(a) << ' ' << axis2.name << '=' << format_number(b)
            << ": " << p.n_unresolved << " unresolved trajectories\n";
      }
    }
  }
  log << index << " points, " << unresolved << " unresolved\n";
  return kExitOk;
}

int cmd_oracle_check(const PauliTable& table, std::ostream& out) {
  const auto checks = run_oracle_checks(table);
  std::size_t width = 5;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  out << std::left << std::setw(static_cast<int>(width)) << "check" << "  " << std::setw(10)
      << "tolerance" << "  " << std::setw(12) << "residual" << "  result\n";
  int failures = 0;
  for (const auto& c : checks) {
    char tol[32], res[32];
    std::snprintf(tol, sizeof tol, "%.1e", c.tolerance);
    std::snprintf(res, sizeof res, "%.3e", c.residual);
    out << std::setw(static_cast<int>(width)) << c.name << "  " << std::setw(10) << tol << "  "
        << std::setw(12) << res << "  " << (c.passed ? "PASS" : "FAIL") << '\n';
    if (!c.passed) ++failures;
  }
  out << failures << " of " << checks.size() << " checks failed\n";
  return std::min(failures, 125);
}

PauliTable corrupted_pauli_table() {
  PauliTable t = pauli_table();
  t[1] = -t[1];
  return t;
}

}  // namespace dhl
