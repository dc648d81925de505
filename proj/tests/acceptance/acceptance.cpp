// Release gate for the laboratory: nine end-to-end checks covering the exact
// algebraic identities, ensemble construction, the two spectral-statistics
// regimes, the localization trend, the Rosenzweig-Porter crossover, resolvent
// stability under the matrix flow, Wegner/Minami density bounds, and bytewise
// determinism. Each check prints one [PASS]/[FAIL] line; the process exits
// nonzero if any check fails. All tolerances are pinned here, in code.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "hrmt/dbm.hpp"
#include "hrmt/ensemble.hpp"
#include "hrmt/errors.hpp"
#include "hrmt/experiments.hpp"
#include "hrmt/index_space.hpp"
#include "hrmt/io.hpp"
#include "hrmt/parallel.hpp"
#include "hrmt/rng.hpp"
#include "hrmt/spectral.hpp"
#include "hrmt/stats.hpp"

namespace fs = std::filesystem;
using namespace hrmt;

namespace {

// --- pinned tolerances and operating points -------------------------------
constexpr double kIdentityRelTol = 1e-8;    // drift + Burgers forms
constexpr double kWardRelTol = 1e-10;       // Ward identity at N = 128
constexpr double kKernelRelTol = 1e-10;     // Poisson-kernel functional
constexpr double kRowSumTol = 1e-12;        // normalized variance rows
constexpr double kPsdFloor = -1e-10;        // min eigenvalue of the profile
constexpr double kVarianceSigmas = 4.0;     // MC entry variances, 1e5 draws
constexpr std::uint64_t kVarianceDraws = 100000;
constexpr double kPoissonGapLo = 0.37, kPoissonGapHi = 0.41;
constexpr double kGoeGapLo = 0.52, kGoeGapHi = 0.54;
constexpr double kCountVarMeanTol = 0.15;   // |variance/mean - 1|
constexpr double kOutsideMassAtTop = 0.1;   // localization median at n = 12
constexpr double kStabilityExponentCap = 3.5;
constexpr double kWegnerSlack = 1.1;        // ratio <= C_V * 1.1
constexpr double kMinamiGrowthCap = 2.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

double median_of(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double hi = values[mid];
  if (values.size() % 2 == 0) {
    std::nth_element(values.begin(), values.begin() + mid - 1,
                     values.begin() + mid);
    return 0.5 * (values[mid - 1] + hi);
  }
  return hi;
}

double slope_of(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

EnsembleConfig ultrametric_config(unsigned n, double c,
                                  bool normalized = true) {
  EnsembleConfig cfg;
  cfg.model = Model::Ultrametric;
  cfg.n = n;
  cfg.c = c;
  cfg.normalized = normalized;
  return cfg;
}

// --- 1/9: exact algebraic identities ---------------------------------------
Outcome check_exact_identities() {
  double max_drift = 0.0, max_burgers = 0.0;
  for (const unsigned n : {0u, 3u, 5u}) {  // N = 1, 8, 32
    const EnsembleConfig cfg = ultrametric_config(n, 1.0);
    for (int k = 0; k < 50; ++k) {
      RngStream rng(101, 100 * n + static_cast<std::uint64_t>(k));
      const Hamiltonian h = assemble(cfg, rng);
      const ComplexEnergy z{rng.uniform(-1.0, 1.0), rng.uniform(0.05, 1.0)};
      const std::uint64_t x = rng.below(h.size) + 1;
      const std::uint64_t y = rng.below(h.size) + 1;
      max_drift =
          std::max(max_drift, drift_identity_check(h, z, x, y).relative_error);
      max_burgers =
          std::max(max_burgers, burgers_drift_check(h, z).relative_error);
    }
  }

  double max_ward = 0.0;
  {
    RngStream rng(102, 0);
    const Hamiltonian h = assemble(ultrametric_config(7, 1.0), rng);
    const SpectralData sd = eigendecompose(h);
    for (int k = 0; k < 20; ++k) {
      const ComplexEnergy z{rng.uniform(-1.0, 1.0), rng.uniform(0.01, 1.0)};
      const std::uint64_t x = rng.below(h.size) + 1;
      max_ward = std::max(max_ward, ward_identity_check(sd, x, z));
    }
  }

  double max_kernel = 0.0;
  {
    RngStream rng(103, 0);
    for (const unsigned n : {4u, 6u, 7u}) {
      const Hamiltonian h = assemble(ultrametric_config(n, 1.0), rng);
      const std::vector<double> ev = eigenvalues_only(h).eigenvalues;
      for (int k = 0; k < 20; ++k) {
        const double E = rng.uniform(-1.0, 1.0);
        const double z_re = rng.uniform(-2.0, 2.0);
        const double z_im = rng.uniform(0.1, 2.0);
        const PoissonKernelValue pk =
            poisson_kernel_functional(ev, z_re, z_im, E, h.size);
        const double gap = std::abs(pk.value - pk.resolvent_value) /
                           std::max(1.0, std::abs(pk.value));
        max_kernel = std::max(max_kernel, gap);
      }
    }
  }

  Outcome out;
  out.pass = max_drift <= kIdentityRelTol && max_burgers <= kIdentityRelTol &&
             max_ward <= kWardRelTol && max_kernel <= kKernelRelTol;
  out.detail = fmt("drift %.2e burgers %.2e (tol %.0e), ward %.2e (tol %.0e), "
                   "kernel %.2e (tol %.0e)",
                   max_drift, max_burgers, kIdentityRelTol, max_ward,
                   kWardRelTol, max_kernel, kKernelRelTol);
  return out;
}

// --- 2/9: ensemble construction --------------------------------------------
Outcome check_construction() {
  double worst_row = 0.0;
  double worst_eig = 0.0;
  for (unsigned n = 0; n <= 10; ++n) {
    for (const double c : {1.0, 0.5, -0.5, -1.5}) {
      const std::vector<double> profile = variance_profile(n, c, true);
      const std::uint64_t N = std::uint64_t{1} << n;
      for (std::uint64_t x = 0; x < N; ++x) {
        const double row =
            kahan_sum(profile.data() + x * N, N);
        worst_row = std::max(worst_row, std::abs(row - 1.0));
      }
      if (c == 1.0 || c == -1.5) {
        Hamiltonian p;
        p.size = N;
        p.entries = profile;
        const std::vector<double>& ev = eigenvalues_only(p).eigenvalues;
        worst_eig = std::min(worst_eig, ev.front());
      }
    }
  }

  bool pattern_ok = true;
  {
    const IndexSpace space(4);
    RngStream rng(201, 0);
    for (unsigned r = 0; r <= 4; ++r) {
      const Hamiltonian phi = sample_phi(space, r, rng);
      for (std::uint64_t x = 1; x <= 16 && pattern_ok; ++x) {
        for (std::uint64_t y = 1; y <= 16; ++y) {
          const bool coupled = space.distance(x, y) <= r;
          const double v = phi.at1(x, y);
          if ((coupled && v == 0.0) || (!coupled && v != 0.0)) {
            pattern_ok = false;
            break;
          }
        }
      }
    }
  }

  // Monte Carlo entry variances against the closed-form profile, n = 2.
  double worst_var_sigmas = 0.0;
  {
    const EnsembleConfig cfg = ultrametric_config(2, 1.0);
    const std::vector<double> profile = variance_profile(2, 1.0, true);
    const std::uint64_t pairs[][2] = {{1, 1}, {1, 2}, {1, 3}, {2, 4}};
    double sums[4] = {0, 0, 0, 0};
    for (std::uint64_t k = 0; k < kVarianceDraws; ++k) {
      RngStream rng(202, k);
      const Hamiltonian h = assemble(cfg, rng);
      for (int p = 0; p < 4; ++p) {
        const double v = h.at1(pairs[p][0], pairs[p][1]);
        sums[p] += v * v;
      }
    }
    for (int p = 0; p < 4; ++p) {
      const double want = profile[(pairs[p][0] - 1) * 4 + (pairs[p][1] - 1)];
      const double got = sums[p] / static_cast<double>(kVarianceDraws);
      const double se =
          want * std::sqrt(2.0 / static_cast<double>(kVarianceDraws));
      worst_var_sigmas =
          std::max(worst_var_sigmas, std::abs(got - want) / se);
    }
  }

  Outcome out;
  out.pass = worst_row <= kRowSumTol && worst_eig >= kPsdFloor && pattern_ok &&
             worst_var_sigmas <= kVarianceSigmas;
  out.detail =
      fmt("row-sum gap %.2e (tol %.0e), min profile eig %.2e (floor %.0e), "
          "couplings %s, entry variances %.2f s.e. (cap %.0f)",
          worst_row, kRowSumTol, worst_eig, kPsdFloor,
          pattern_ok ? "patterned exactly" : "PATTERN BROKEN",
          worst_var_sigmas, kVarianceSigmas);
  return out;
}

// --- helpers for the spectral-statistics regimes ---------------------------
struct RegimeStats {
  double mean_gap_ratio = 0.0;
  double variance_over_mean = 0.0;
};

RegimeStats regime_statistics(const EnsembleConfig& cfg,
                              std::uint64_t realizations,
                              std::uint64_t master_seed,
                              double count_halfwidth) {
  struct Rec {
    double ratio = 0.0;
    PointProcessSample rescaled;
  };
  const auto N = static_cast<double>(cfg.size());
  auto records = parallel_realizations<Rec>(
      realizations, master_seed, 0, resolve_workers(0),
      [&](std::uint64_t, RngStream& rng) {
        const Hamiltonian h = assemble(cfg, rng);
        const SpectralData sd = eigenvalues_only(h);
        Rec rec;
        rec.ratio = gap_ratio(sd.eigenvalues, bulk_window(sd.eigenvalues));
        rec.rescaled = rescale_spectrum(sd.eigenvalues, 0.0, N);
        return rec;
      });
  std::vector<double> ratios(records.size());
  std::vector<PointProcessSample> samples(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    ratios[k] = records[k].ratio;
    samples[k] = std::move(records[k].rescaled);
  }
  RegimeStats result;
  result.mean_gap_ratio = summarize(ratios).mean;
  const StatReport counts =
      counting_statistics(samples, -count_halfwidth, count_halfwidth);
  double variance = 0.0;
  for (const auto& [name, value] : counts.extras) {
    if (name == "variance") variance = value;
  }
  result.variance_over_mean =
      counts.estimate > 0.0 ? variance / counts.estimate : 0.0;
  return result;
}

// --- 3/9: Poisson regime at c = 1 -------------------------------------------
Outcome check_poisson_regime() {
  const RegimeStats stats =
      regime_statistics(ultrametric_config(10, 1.0), 1000, 301, 2.0);
  Outcome out;
  const bool gap_ok = stats.mean_gap_ratio >= kPoissonGapLo &&
                      stats.mean_gap_ratio <= kPoissonGapHi;
  const bool count_ok =
      std::abs(stats.variance_over_mean - 1.0) <= kCountVarMeanTol;
  out.pass = gap_ok && count_ok;
  out.detail = fmt("gap ratio %.4f (want [%.2f, %.2f]), count var/mean %.3f "
                   "(want 1 +- %.2f), 1000 realizations",
                   stats.mean_gap_ratio, kPoissonGapLo, kPoissonGapHi,
                   stats.variance_over_mean, kCountVarMeanTol);
  return out;
}

// --- 4/9: GOE regime at c = -1.5 --------------------------------------------
Outcome check_goe_regime() {
  const RegimeStats stats =
      regime_statistics(ultrametric_config(10, -1.5), 400, 401, 2.0);
  Outcome out;
  out.pass = stats.mean_gap_ratio >= kGoeGapLo &&
             stats.mean_gap_ratio <= kGoeGapHi;
  out.detail = fmt("gap ratio %.4f (want [%.2f, %.2f]), 400 realizations",
                   stats.mean_gap_ratio, kGoeGapLo, kGoeGapHi);
  return out;
}

// --- 5/9: localization trend ------------------------------------------------
Outcome check_localization_trend() {
  const unsigned ns[] = {8, 10, 12};
  const std::uint64_t reps[] = {33, 33, 15};
  std::vector<double> medians;
  for (int i = 0; i < 3; ++i) {
    const unsigned n = ns[i];
    const EnsembleConfig cfg = ultrametric_config(n, 1.0);
    const IndexSpace space(n);
    Window window;
    window.center = 0.0;
    window.halfwidth = std::pow(2.0, -0.9 * n);
    const unsigned radius = n / 2;
    auto outs = parallel_realizations<double>(
        reps[i], 501 + static_cast<std::uint64_t>(i), 0, resolve_workers(0),
        [&](std::uint64_t, RngStream& rng) {
          const Hamiltonian h = assemble(cfg, rng);
          const SpectralData sd = eigendecompose(h);
          return localization_mass(sd, space, 1, radius, window).outside_mass;
        });
    medians.push_back(median_of(outs));
  }

  // On the truncated model the outside mass vanishes identically.
  double truncated_outside = -1.0;
  {
    EnsembleConfig cfg;
    cfg.model = Model::Truncated;
    cfg.n = 8;
    cfg.m = 4;
    cfg.c = 1.0;
    cfg.normalized = false;
    RngStream rng(599, 0);
    const Hamiltonian h = assemble(cfg, rng);
    const SpectralData sd = eigendecompose(h);
    Window window;
    window.center = 0.0;
    window.halfwidth = std::pow(2.0, -0.9 * 8);
    truncated_outside =
        localization_mass(sd, IndexSpace(8), 1, 4, window).outside_mass;
  }

  Outcome out;
  const bool decreasing = medians[0] >= medians[1] && medians[1] >= medians[2];
  out.pass = decreasing && medians[2] < kOutsideMassAtTop &&
             truncated_outside == 0.0;
  out.detail = fmt("median outside mass %.4f -> %.4f -> %.4f over n=8,10,12 "
                   "(monotone, < %.1f at n=12), truncated outside %.1e "
                   "(exact 0)",
                   medians[0], medians[1], medians[2], kOutsideMassAtTop,
                   truncated_outside);
  return out;
}

// --- 6/9: Rosenzweig-Porter crossover ---------------------------------------
Outcome check_rosenzweig_porter() {
  const unsigned n = 11;  // N = 2048
  const double N = 2048.0;
  double gaps[2] = {0.0, 0.0};
  const double cs[2] = {0.5, -1.5};
  for (int i = 0; i < 2; ++i) {
    EnsembleConfig cfg;
    cfg.model = Model::RosenzweigPorter;
    cfg.n = n;
    cfg.c = cs[i];
    cfg.normalized = false;
    cfg.t = std::pow(N, -(1.0 + cs[i]));
    // The coupling-to-spacing ratio sqrt(tN)/(2a) decays only like N^-1/4,
    // so at this N a halfwidth-1 potential still hybridizes ~7% of neighbor
    // pairs and drags the gap ratio ~0.04 above its limit. Halfwidth 4
    // pushes the residual mixing below the statistical resolution while the
    // c = -1.5 side stays GOE-dominated (coupling spread 2 sqrt(t) ~ 13
    // against potential spread 4).
    cfg.potential = {PotentialSpec::Kind::Uniform, 4.0};
    auto ratios = parallel_realizations<double>(
        200, 601 + static_cast<std::uint64_t>(i), 0, resolve_workers(0),
        [&](std::uint64_t, RngStream& rng) {
          const Hamiltonian h = assemble(cfg, rng);
          const SpectralData sd = eigenvalues_only(h);
          return gap_ratio(sd.eigenvalues, bulk_window(sd.eigenvalues));
        });
    gaps[i] = summarize(ratios).mean;
  }
  Outcome out;
  const bool poisson_ok = gaps[0] >= kPoissonGapLo && gaps[0] <= kPoissonGapHi;
  const bool goe_ok = gaps[1] >= kGoeGapLo && gaps[1] <= kGoeGapHi;
  out.pass = poisson_ok && goe_ok;
  out.detail = fmt("c=0.5 t=N^-1.5 gap %.4f (want [%.2f, %.2f]); c=-1.5 gap "
                   "%.4f (want [%.2f, %.2f]); N=2048, 200 realizations each",
                   gaps[0], kPoissonGapLo, kPoissonGapHi, gaps[1], kGoeGapLo,
                   kGoeGapHi);
  return out;
}

// --- 7/9: resolvent stability under the flow --------------------------------
Outcome check_flow_stability() {
  const double N = 1024.0;
  const double c_flow = 0.5;
  const std::vector<ComplexEnergy> zs = {
      {0.0, 4.0 / N}, {0.0, 1.0 / N}, {0.0, 1.0 / (4.0 * N)}};

  EnsembleConfig potential_only;
  potential_only.model = Model::RosenzweigPorter;
  potential_only.n = 10;
  potential_only.normalized = false;
  potential_only.t = 0.0;
  potential_only.potential = {PotentialSpec::Kind::Uniform, 1.0};

  EnsembleConfig nearly_full;
  nearly_full.model = Model::Truncated;
  nearly_full.n = 10;
  nearly_full.m = 9;
  nearly_full.c = 1.0;
  nearly_full.normalized = false;

  Outcome out;
  out.pass = true;
  const char* labels[2] = {"potential", "depth-9"};
  const EnsembleConfig* configs[2] = {&potential_only, &nearly_full};
  for (int i = 0; i < 2; ++i) {
    const auto rows = stability_experiment(*configs[i], c_flow, zs, 100,
                                           701 + static_cast<std::uint64_t>(i),
                                           resolve_workers(0));
    // At eta = 1/N the measured gap beats the crude bound by a factor >= N.
    const double factor = rows[1].crude_bound / rows[1].mean_s_gap;
    std::vector<double> log_x, log_y;
    for (const auto& row : rows) {
      log_x.push_back(std::log(1.0 / (N * row.z.eta)));
      log_y.push_back(std::log(row.mean_s_gap));
    }
    const double exponent = slope_of(log_x, log_y);
    const bool ok = factor >= N && exponent <= kStabilityExponentCap;
    out.pass = out.pass && ok;
    out.detail += fmt("%s%s: crude/mean %.0f (>= %.0f), exponent %.2f "
                      "(<= %.1f)",
                      i ? "; " : "", labels[i], factor, N, exponent,
                      kStabilityExponentCap);
  }
  return out;
}

// --- 8/9: Wegner and Minami bounds ------------------------------------------
Outcome check_wegner_minami() {
  const double N = 1024.0;
  EnsembleConfig cfg;
  cfg.model = Model::RosenzweigPorter;
  cfg.n = 10;
  cfg.c = 0.5;
  cfg.normalized = false;
  cfg.t = std::pow(N, -1.5);
  cfg.potential = {PotentialSpec::Kind::Uniform, 1.0};
  const double density_bound = cfg.potential.density_bound();  // C_V = 1/2

  auto spectra = parallel_realizations<std::vector<double>>(
      500, 801, 0, resolve_workers(0), [&](std::uint64_t, RngStream& rng) {
        return eigenvalues_only(assemble(cfg, rng)).eigenvalues;
      });

  Outcome out;
  out.pass = true;
  std::vector<double> minami_ratios;
  for (const double width : {4.0 / N, 2.0 / N, 1.0 / N}) {
    const auto [wegner, minami] =
        wegner_minami_statistics(spectra, -width / 2.0, width / 2.0);
    const bool wegner_ok = wegner.estimate <= density_bound * kWegnerSlack;
    out.pass = out.pass && wegner_ok;
    minami_ratios.push_back(minami.estimate);
    out.detail += fmt("%s|I|=%.0f/N wegner %.3f minami %.3f",
                      out.detail.empty() ? "" : "; ", width * N,
                      wegner.estimate, minami.estimate);
  }
  const double lead = minami_ratios.front();
  for (const double ratio : minami_ratios) {
    if (ratio > kMinamiGrowthCap * lead) out.pass = false;
  }
  out.detail += fmt("; wegner cap %.3f, minami growth cap %.0fx",
                    density_bound * kWegnerSlack, kMinamiGrowthCap);
  return out;
}

// --- 9/9: bytewise determinism ----------------------------------------------
Outcome check_determinism() {
  static int counter = 0;
  const fs::path base =
      fs::temp_directory_path() /
      ("hrmt_acceptance_" + std::to_string(::getpid()));
  const char* documents[] = {
      R"({"experiment": "poisson-test", "ensemble": {"n": 6},
          "realizations": 8, "master_seed": 9})",
      R"({"experiment": "dbm-stability",
          "ensemble": {"model": "rosenzweig_porter", "n": 6, "t": 0,
                       "normalized": false},
          "realizations": 8, "master_seed": 9})",
      R"({"experiment": "gap-ratio-sweep", "ensemble": {"n": 5},
          "realizations": 6, "master_seed": 9})"};

  Outcome out;
  out.pass = true;
  std::size_t files_compared = 0;
  for (const char* doc : documents) {
    const ConfigValidation validation = parse_experiment_config(doc);
    if (!validation.config) {
      out.pass = false;
      out.detail = "internal: determinism config failed to parse";
      return out;
    }
    ExperimentConfig config = *validation.config;
    const fs::path dir1 = base / ("w1_" + std::to_string(counter));
    const fs::path dir8 = base / ("w8_" + std::to_string(counter));
    ++counter;
    fs::create_directories(dir1);
    fs::create_directories(dir8);
    config.workers = 1;
    config.output_dir = dir1;
    run_experiment(config);
    config.workers = 8;
    config.output_dir = dir8;
    run_experiment(config);
    for (const auto& entry : fs::directory_iterator(dir1)) {
      const std::string name = entry.path().filename().string();
      if (name == "manifest.json") continue;  // records the worker count
      std::ifstream a(entry.path(), std::ios::binary);
      std::ifstream b(dir8 / name, std::ios::binary);
      const std::string bytes_a((std::istreambuf_iterator<char>(a)),
                                std::istreambuf_iterator<char>());
      const std::string bytes_b((std::istreambuf_iterator<char>(b)),
                                std::istreambuf_iterator<char>());
      if (!b.good() && bytes_b.empty()) out.pass = false;
      if (bytes_a != bytes_b) out.pass = false;
      ++files_compared;
    }
  }
  fs::remove_all(base);
  out.detail = fmt("%zu output files byte-identical at workers 1 vs 8 across "
                   "poisson-test, dbm-stability, gap-ratio-sweep",
                   files_compared);
  if (!out.pass) out.detail += " -- MISMATCH";
  return out;
}

}  // namespace

int main() {
  struct Check {
    const char* name;
    std::function<Outcome()> run;
  };
  const Check checks[] = {
      {"exact-identities", check_exact_identities},
      {"construction", check_construction},
      {"poisson-regime", check_poisson_regime},
      {"goe-regime", check_goe_regime},
      {"localization-trend", check_localization_trend},
      {"rosenzweig-porter", check_rosenzweig_porter},
      {"flow-stability", check_flow_stability},
      {"wegner-minami", check_wegner_minami},
      {"determinism", check_determinism},
  };

  int failures = 0;
  int index = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const Check& check : checks) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = check.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] %d/9 %s: %s (%.1f s)\n",
                outcome.pass ? "PASS" : "FAIL", index, check.name,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::printf("%d/9 checks passed (%.1f s total)\n", 9 - failures, total);
  return failures == 0 ? 0 : 1;
}
