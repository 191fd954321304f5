#include "dhl/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace {

using nlohmann::json;

struct ConfigFlags {
  std::string file;
  std::vector<std::string> overrides;
  std::string method, params, geometry, initial;
  int z = 0;
  double t_end = 0.0, dt = 0.0;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("-c,--config", f.file, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--set", f.overrides, "Override a config field, e.g. integration.dt=0.005");
  cmd->add_option("--method", f.method, "mf, cmop or cmf");
  cmd->add_option("--params", f.params, "Parameter preset A or B");
  cmd->add_option("--z", f.z, "Coordination number (cmop)");
  cmd->add_option("--geometry", f.geometry, "Cluster shape, e.g. 2,2 (cmf)");
  cmd->add_option("--initial", f.initial, "Initial-state preset R_I or R_II");
  cmd->add_option("--t-end", f.t_end, "Final time");
  cmd->add_option("--dt", f.dt, "Time step (sampling interval when adaptive)");
}

dhl::RunConfig build_config(const ConfigFlags& f, bool ensemble, int sweep_z = 0) {
  json j = f.file.empty() ? json::object() : dhl::load_json_file(f.file);
  if (!f.method.empty()) j["method"] = f.method;
  if (!f.params.empty()) j["params"] = {{"preset", f.params}};
  if (f.z > 0) j["z"] = f.z;
  if (!f.geometry.empty()) {
    json shape = json::array();
    std::stringstream ss(f.geometry);
    for (std::string side; std::getline(ss, side, ',');) {
      try {
        shape.push_back(std::stoul(side));
      } catch (const std::exception&) {
        throw dhl::ConfigError("geometry", "bad side length '" + side + "'");
      }
    }
    j["geometry"] = shape;
  }
  if (!f.initial.empty()) j["initial"] = {{"preset", f.initial}};
  if (f.t_end > 0.0) j["integration"]["t_end"] = f.t_end;
  if (f.dt > 0.0) j["integration"]["dt"] = f.dt;
  for (const auto& o : f.overrides) dhl::apply_override(j, o);
  // The sweep replaces z; any valid value lets the rest of the config validate.
  if (sweep_z > 0 && !j.contains("z")) j["z"] = sweep_z;
  // Ensemble commands draw their own initial states.
  if (ensemble && !j.contains("initial")) j["initial"] = {{"random", {{"seed", 0}}}};
  return dhl::config_from_json(j);
}

struct EnsembleFlags {
  std::size_t samples = 50;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  std::string out;
};

void add_ensemble_flags(CLI::App* cmd, EnsembleFlags& f) {
  cmd->add_option("-n,--samples", f.samples, "Random initial states per point")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Root seed");
  cmd->add_option("--workers", f.workers, "Worker threads (default: DHL_WORKERS or all cores)");
  cmd->add_option("-o,--out", f.out, "Output file (default: stdout)");
}

dhl::EnsembleOptions ensemble_options(const EnsembleFlags& f) {
  return {f.samples, f.seed, f.workers > 0 ? f.workers : dhl::default_workers()};
}

/// Opens `path`, or returns stdout for an empty path or "-".
std::ostream& open_output(const std::string& path, std::unique_ptr<std::ofstream>& holder) {
  if (path.empty() || path == "-") return std::cout;
  holder = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*holder) throw dhl::ConfigError("output", "cannot write " + path);
  return *holder;
}

std::vector<int> parse_z_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw dhl::ConfigError("z", "bad entry '" + item + "' in z list");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven-dissipative Heisenberg lattice: mean-field, projector and cluster dynamics"};
  app.set_version_flag("--version", std::string(DHL_VERSION));
  app.require_subcommand(1);

  ConfigFlags evolve_cfg;
  std::string csv_path, summary_path;
  auto* evolve = app.add_subcommand("evolve", "Integrate one trajectory; CSV time series and JSON summary");
  add_config_flags(evolve, evolve_cfg);
  evolve->add_option("--csv", csv_path, "Time-series CSV (default: output.csv or stdout)");
  evolve->add_option("--summary", summary_path, "Summary JSON (default: output.summary or stderr)");

  ConfigFlags sweep_cfg;
  EnsembleFlags sweep_ens;
  std::string z_list;
  auto* zsweep = app.add_subcommand("zsweep", "Stationary fraction versus coordination number (cmop)");
  add_config_flags(zsweep, sweep_cfg);
  add_ensemble_flags(zsweep, sweep_ens);
  zsweep->add_option("--z-list", z_list, "Comma-separated coordination numbers")->required();

  ConfigFlags basin_cfg;
  EnsembleFlags basin_ens;
  auto* basin = app.add_subcommand("basin", "Stationary fraction over random initial states");
  add_config_flags(basin, basin_cfg);
  add_ensemble_flags(basin, basin_ens);

  ConfigFlags phase_cfg;
  EnsembleFlags phase_ens;
  phase_ens.samples = 10;
  std::string axis1, axis2;
  auto* phase = app.add_subcommand("phasediagram", "Mean-field phase labels on a 2D parameter grid");
  add_config_flags(phase, phase_cfg);
  add_ensemble_flags(phase, phase_ens);
  phase->add_option("--axis1", axis1, "name:min:max:steps (Jx, Jy, Jz, Omega)")->required();
  phase->add_option("--axis2", axis2, "name:min:max:steps, varies fastest")->required();

  bool corrupt = false;
  auto* oracle = app.add_subcommand("oracle-check", "Run the exact-reference consistency checks");
  oracle->add_flag("--corrupt-pauli", corrupt)->group("");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evolve) {
      const dhl::RunConfig cfg = build_config(evolve_cfg, false);
      std::unique_ptr<std::ofstream> csv_file, summary_file;
      std::ostream& csv = open_output(csv_path.empty() ? cfg.output.csv : csv_path, csv_file);
      const std::string sp = summary_path.empty() ? cfg.output.summary : summary_path;
      std::ostream* summary = &std::cerr;
      if (!sp.empty()) summary = &open_output(sp, summary_file);
      return dhl::cmd_evolve(cfg, csv, summary);
    }
    if (*zsweep) {
      const std::vector<int> zs = parse_z_list(z_list);
      const dhl::RunConfig cfg = build_config(sweep_cfg, true, zs.empty() ? 0 : std::max(zs[0], 1));
      std::unique_ptr<std::ofstream> file;
      return dhl::cmd_zsweep(cfg, zs, ensemble_options(sweep_ens),
                             open_output(sweep_ens.out, file), std::cerr);
    }
    if (*basin) {
      const dhl::RunConfig cfg = build_config(basin_cfg, true);
      std::unique_ptr<std::ofstream> file;
      return dhl::cmd_basin(cfg, ensemble_options(basin_ens), open_output(basin_ens.out, file));
    }
    if (*phase) {
      const dhl::RunConfig cfg = build_config(phase_cfg, true);
      std::unique_ptr<std::ofstream> file;
      return dhl::cmd_phasediagram(cfg, dhl::parse_axis(axis1), dhl::parse_axis(axis2),
                                   ensemble_options(phase_ens), open_output(phase_ens.out, file),
                                   std::cerr);
    }
    if (*oracle) {
      return dhl::cmd_oracle_check(corrupt ? dhl::corrupted_pauli_table() : dhl::pauli_table(),
                                   std::cout);
    }
  } catch (const dhl::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dhl::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dhl::kExitFailure;
  }
  return dhl::kExitFailure;
}
