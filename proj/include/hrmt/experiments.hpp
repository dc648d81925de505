#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hrmt/ensemble.hpp"

namespace hrmt {

enum class ExperimentKind {
  Sample,
  Spectrum,
  PoissonTest,
  GapRatioSweep,
  Localization,
  DbmStability,
  RpTest,
  IdentityCheck,
  WegnerMinami,
};

/// Canonical CLI/JSON name (kebab-case) of an experiment.
std::string experiment_name(ExperimentKind kind);
std::optional<ExperimentKind> experiment_from_name(const std::string& name);

/// Fully-resolved experiment description. Every field has a value after
/// parse_experiment_config fills the defaults.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Sample;
  EnsembleConfig ensemble;
  std::uint64_t realizations = 1;
  std::uint64_t master_seed = 1;
  double energy = 0.0;
  unsigned workers = 0;  // 0 = HRMT_WORKERS env, else hardware threads
  std::filesystem::path output_dir = ".";

  // Window around `energy` (localization and correlator statistics).
  // halfwidth <= 0 means "derive from w": halfwidth = N^-(1-w).
  double window_halfwidth = 0.0;
  double window_w = 0.1;

  // PoissonTest: rescaled counting interval [-b, b].
  double count_halfwidth = 2.0;

  // GapRatioSweep.
  std::vector<double> c_values;

  // Localization: hierarchical ball radius (default n/2).
  unsigned ball_radius = 0;

  // DbmStability.
  double c_flow = 0.5;
  std::vector<double> etas;  // default {4/N, 1/N, 1/(4N)}

  // IdentityCheck: random (z, x, y) triples per realization.
  std::uint64_t identity_triples = 10;

  // WegnerMinami: interval widths (default {4/N, 2/N, 1/N}).
  std::vector<double> interval_widths;

  // Spectrum: also save the eigenvector matrix per realization.
  bool save_vectors = false;

  /// Canonical JSON echo of the resolved config (what the manifest records).
  std::string to_json() const;
};

/// Parse + validate a JSON config document. On success `config` is set and
/// `errors` empty; otherwise `errors` lists every failure (not just the
/// first), each naming the offending field.
struct ConfigValidation {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;
};

ConfigValidation parse_experiment_config(const std::string& json_text);

/// Command-line overrides applied after parsing.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::string> experiment;  // subcommand name
};

void apply_overrides(ExperimentConfig& config, const CliOverrides& overrides);

/// Runs the experiment: fans realizations across workers with
/// RngStream(master_seed, k), reduces in index order, writes CSV/JSON
/// outputs plus a checksummed manifest into output_dir. Returns the
/// manifest path. Throws DomainError / SolverError / EstimatorError /
/// IoError; the CLI maps these to exit codes 2/3/2/4.
std::filesystem::path run_experiment(const ExperimentConfig& config);

}  // namespace hrmt
