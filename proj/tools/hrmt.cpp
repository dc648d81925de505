// hrmt — command-line front end for the hierarchical random-matrix
// laboratory. Exit codes: 0 success, 2 invalid input or estimator failure,
// 3 solver failure (message carries the seed), 4 I/O failure.

#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "hrmt/ensemble.hpp"
#include "hrmt/errors.hpp"
#include "hrmt/experiments.hpp"
#include "hrmt/io.hpp"
#include "hrmt/oracle/oracle.hpp"
#include "hrmt/rng.hpp"
#include "hrmt/version.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned workers = 0;
  bool workers_set = false;
  std::string out_dir;
  bool out_set = false;
};

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hrmt::IoError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw hrmt::IoError("cannot read config file " + path);
  return buf.str();
}

hrmt::ExperimentConfig load_config(const CommonOptions& opts,
                                   const std::string& subcommand) {
  const std::string text = read_text_file(opts.config_path);
  hrmt::ConfigValidation validation = hrmt::parse_experiment_config(text);
  if (!validation.config) {
    std::string joined;
    for (const std::string& e : validation.errors) {
      if (!joined.empty()) joined += "; ";
      joined += e;
    }
    throw hrmt::DomainError(joined);
  }
  hrmt::CliOverrides overrides;
  if (opts.seed_set) overrides.seed = opts.seed;
  if (opts.workers_set) overrides.workers = opts.workers;
  if (opts.out_set) overrides.output_dir = opts.out_dir;
  overrides.experiment = subcommand;
  hrmt::ExperimentConfig config = *validation.config;
  hrmt::apply_overrides(config, overrides);
  return config;
}

void add_common_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", opts.seed, "override master seed")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--workers", opts.workers,
                  "worker threads (0 = HRMT_WORKERS env or all cores)")
      ->each([&](const std::string&) { opts.workers_set = true; });
  cmd->add_option("--out", opts.out_dir, "output directory")
      ->each([&](const std::string&) { opts.out_set = true; });
}

void print_oracle(const hrmt::oracle::OracleResult& result) {
  std::printf("oracle: %s\ninputs: %s\nvalues: %s\nmethod: %s\n",
              result.name.c_str(), result.inputs.c_str(),
              result.values.c_str(), result.method.c_str());
}

int run_oracle(const std::string& name, const std::vector<double>& args) {
  using hrmt::format_float;
  auto need = [&](std::size_t count) {
    if (args.size() != count) {
      throw hrmt::DomainError("oracle " + name + ": expected " +
                              std::to_string(count) + " numeric arguments");
    }
  };
  hrmt::oracle::OracleResult result;
  result.name = name;
  if (name == "distance") {
    need(3);
    const auto n = static_cast<unsigned>(args[0]);
    const auto x = static_cast<std::uint64_t>(args[1]);
    const auto y = static_cast<std::uint64_t>(args[2]);
    result.inputs = "n=" + std::to_string(n) + " x=" + std::to_string(x) +
                    " y=" + std::to_string(y);
    result.values =
        std::to_string(hrmt::oracle::partition_distance(n, x, y));
    result.method = "literal partition block lists";
  } else if (name == "eig2") {
    need(3);
    const auto [lo, hi] = hrmt::oracle::eig2(args[0], args[1], args[2]);
    result.inputs = "a=" + format_float(args[0]) +
                    " b=" + format_float(args[1]) +
                    " d=" + format_float(args[2]);
    result.values = format_float(lo) + ", " + format_float(hi);
    result.method = "closed-form 2x2 characteristic polynomial";
  } else if (name == "gap-ratio") {
    need(2);
    const auto law = static_cast<int>(args[0]);
    const auto samples = static_cast<std::uint64_t>(args[1]);
    hrmt::oracle::GapLaw gl;
    if (law == 0) {
      gl = hrmt::oracle::GapLaw::ExponentialGaps;
    } else if (law == 1) {
      gl = hrmt::oracle::GapLaw::GoeSmall;
    } else {
      gl = hrmt::oracle::GapLaw::EquallySpaced;
    }
    result.inputs = "law=" + std::to_string(law) +
                    " samples=" + std::to_string(samples);
    result.values =
        format_float(hrmt::oracle::reference_gap_ratio(gl, samples, 12345));
    result.method = "Monte Carlo over the named reference point process";
  } else if (name == "variance-profile") {
    need(4);
    const auto n = static_cast<unsigned>(args[0]);
    const double c = args[1];
    const bool normalized = args[2] != 0.0;
    const auto profile =
        hrmt::oracle::variance_profile_termwise(n, c, normalized);
    const auto idx = static_cast<std::size_t>(args[3]);
    if (idx >= profile.size()) {
      throw hrmt::DomainError("oracle variance-profile: flat index out of "
                              "range");
    }
    result.inputs = "n=" + std::to_string(n) + " c=" + format_float(c) +
                    " normalized=" + (normalized ? "1" : "0") +
                    " flat_index=" + std::to_string(idx);
    result.values = format_float(profile[idx]);
    result.method = "term-by-term level sum with ceil co-block test";
  } else if (name == "drift-pair-sum") {
    need(5);
    const auto n = static_cast<unsigned>(args[0]);
    const auto seed = static_cast<std::uint64_t>(args[1]);
    const std::complex<double> z(args[2], args[3]);
    const auto x = static_cast<std::uint64_t>(args[4]);
    hrmt::EnsembleConfig ensemble;
    ensemble.model = hrmt::Model::Ultrametric;
    ensemble.n = n;
    ensemble.c = 1.0;
    ensemble.normalized = true;
    hrmt::RngStream rng(seed, 0);
    const hrmt::Hamiltonian h = hrmt::assemble(ensemble, rng);
    const std::complex<double> value =
        hrmt::oracle::drift_pair_sum(h.entries, h.size, z, x, x);
    result.inputs = "n=" + std::to_string(n) +
                    " seed=" + std::to_string(seed) +
                    " z=" + format_float(z.real()) + "+" +
                    format_float(z.imag()) + "i x=y=" + std::to_string(x);
    result.values =
        format_float(value.real()) + " + " + format_float(value.imag()) + "i";
    result.method = "dense pair matrices, Gauss-Jordan resolvent";
  } else if (name == "poisson") {
    need(2);
    const double lambda = args[0];
    const auto count = static_cast<std::uint64_t>(args[1]);
    const auto draws = hrmt::oracle::poisson_counts(lambda, count, 12345);
    double sum = 0.0;
    for (const auto d : draws) sum += static_cast<double>(d);
    result.inputs = "lambda=" + format_float(lambda) +
                    " count=" + std::to_string(count);
    result.values =
        "mean=" + format_float(sum / static_cast<double>(count));
    result.method = "Knuth product-of-uniforms sampler";
  } else {
    throw hrmt::DomainError(
        "oracle: unknown name '" + name +
        "' (expected distance, eig2, gap-ratio, variance-profile, "
        "drift-pair-sum, or poisson)");
  }
  print_oracle(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical random-matrix laboratory"};
  app.set_version_flag("--version", std::string(hrmt::kVersion));
  app.require_subcommand(1);

  // One experiment subcommand per kind, all sharing the option set.
  const char* kExperiments[] = {"sample",        "spectrum",
                                "poisson-test",  "gap-ratio-sweep",
                                "localization",  "dbm-stability",
                                "rp-test",       "identity-check",
                                "wegner-minami"};
  CommonOptions opts;
  std::string chosen;
  for (const char* name : kExperiments) {
    CLI::App* cmd = app.add_subcommand(name, "run the experiment");
    add_common_options(cmd, opts);
    cmd->callback([&chosen, name] { chosen = name; });
  }

  CommonOptions validate_opts;
  CLI::App* validate = app.add_subcommand(
      "validate", "parse a config, fill defaults, report every problem");
  validate->add_option("--config", validate_opts.config_path,
                       "experiment config (JSON)")
      ->required();

  CLI::App* oracle = app.add_subcommand(
      "oracle", "debug access to the brute-force oracles");
  std::string oracle_name;
  std::vector<double> oracle_args;
  oracle->add_option("name", oracle_name, "oracle name")->required();
  oracle->add_option("args", oracle_args, "numeric arguments");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const std::string text = read_text_file(validate_opts.config_path);
      const hrmt::ConfigValidation validation =
          hrmt::parse_experiment_config(text);
      if (validation.config) {
        std::printf("%s\n", validation.config->to_json().c_str());
        return 0;
      }
      for (const std::string& e : validation.errors) {
        std::fprintf(stderr, "error: %s\n", e.c_str());
      }
      return 2;
    }
    if (oracle->parsed()) {
      return run_oracle(oracle_name, oracle_args);
    }
    const hrmt::ExperimentConfig config = load_config(opts, chosen);
    const std::filesystem::path manifest = hrmt::run_experiment(config);
    std::printf("%s\n", manifest.string().c_str());
    return 0;
  } catch (const hrmt::DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const hrmt::EstimatorError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const hrmt::SolverError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const hrmt::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
