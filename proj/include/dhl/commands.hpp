#pragma once

// Subcommand bodies. They write to caller-supplied streams and return the
// process exit code, so tests can drive them without a shell.

#include "dhl/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dhl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// printf %.15g: 15 significant digits, C locale.
std::string format_number(double x);

/// Time series CSV to `csv` and, when `summary` is non-null, the summary JSON.
/// A numerical abort appends a "# truncated" row and returns kExitNumerical.
int cmd_evolve(const RunConfig& config, std::ostream& csv, std::ostream* summary);

struct EnsembleOptions {
  std::size_t n_samples = 50;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// One row per z: z,p_stationary,std_err,mean_frequency,freq_err,n_excluded.
/// Each z uses the seed derive_seed(options.seed, z).
int cmd_zsweep(const RunConfig& config, const std::vector<int>& z_values,
               const EnsembleOptions& options, std::ostream& out, std::ostream& log);

/// Basin estimate and per-sample outcomes as JSON.
int cmd_basin(const RunConfig& config, const EnsembleOptions& options, std::ostream& out);

struct GridAxis {
  std::string name;  // Jx, Jy, Jz or Omega
  double min = 0.0;
  double max = 0.0;
  std::size_t steps = 1;

  std::vector<double> values() const;
};

/// Parses "name:min:max:steps"; throws ConfigError.
GridAxis parse_axis(const std::string& text);

/// CSV "<axis1>,<axis2>,phase", axis 2 varying fastest. Point k uses derive_seed(seed, k).
int cmd_phasediagram(const RunConfig& config, const GridAxis& axis1, const GridAxis& axis2,
                     const EnsembleOptions& options, std::ostream& out, std::ostream& log);

/// Pass/fail table; returns the number of failures capped at 125.
int cmd_oracle_check(const PauliTable& table, std::ostream& out);

/// Pauli set with the sign of sigma^y flipped, for exercising oracle failures.
PauliTable corrupted_pauli_table();

}  // namespace dhl
