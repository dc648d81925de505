#include "hrmt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>

#include "json.hpp"

#include "hrmt/dbm.hpp"
#include "hrmt/errors.hpp"
#include "hrmt/io.hpp"
#include "hrmt/parallel.hpp"
#include "hrmt/spectral.hpp"
#include "hrmt/stats.hpp"

namespace hrmt {

namespace {

using nlohmann::json;

constexpr std::pair<ExperimentKind, const char*> kExperimentNames[] = {
    {ExperimentKind::Sample, "sample"},
    {ExperimentKind::Spectrum, "spectrum"},
    {ExperimentKind::PoissonTest, "poisson-test"},
    {ExperimentKind::GapRatioSweep, "gap-ratio-sweep"},
    {ExperimentKind::Localization, "localization"},
    {ExperimentKind::DbmStability, "dbm-stability"},
    {ExperimentKind::RpTest, "rp-test"},
    {ExperimentKind::IdentityCheck, "identity-check"},
    {ExperimentKind::WegnerMinami, "wegner-minami"},
};

std::string zero_pad(std::uint64_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*llu", width,
                static_cast<unsigned long long>(value));
  return buf;
}

/// Collects validation failures; every check appends rather than throws so
/// the caller sees all problems at once.
struct ErrorList {
  std::vector<std::string> messages;
  void add(const std::string& m) { messages.push_back(m); }
  bool ok() const { return messages.empty(); }
};

/// Typed field extraction from a JSON object with unknown-key detection.
class FieldReader {
 public:
  FieldReader(const json& j, std::string scope, ErrorList& errors)
      : j_(j), scope_(std::move(scope)), errors_(errors) {}

  ~FieldReader() {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        errors_.add(scope_ + key + ": unknown field");
      }
    }
  }

  bool has(const char* key) {
    return j_.contains(key);
  }

  template <typename T>
  std::optional<T> get(const char* key) {
    seen_.push_back(key);
    if (!j_.contains(key)) return std::nullopt;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      errors_.add(scope_ + key + ": wrong type");
      return std::nullopt;
    }
  }

  template <typename T>
  T get_or(const char* key, T fallback) {
    auto v = get<T>(key);
    return v ? *v : fallback;
  }

  const json* child(const char* key) {
    seen_.push_back(key);
    if (!j_.contains(key)) return nullptr;
    if (!j_.at(key).is_object()) {
      errors_.add(scope_ + key + ": must be an object");
      return nullptr;
    }
    return &j_.at(key);
  }

 private:
  const json& j_;
  std::string scope_;
  ErrorList& errors_;
  std::vector<std::string> seen_;
};

std::vector<double> default_etas(std::uint64_t N) {
  const double n = static_cast<double>(N);
  return {4.0 / n, 1.0 / n, 1.0 / (4.0 * n)};
}

std::vector<double> default_widths(std::uint64_t N) {
  const double n = static_cast<double>(N);
  return {4.0 / n, 2.0 / n, 1.0 / n};
}

Window window_for(const ExperimentConfig& config) {
  Window w;
  w.center = config.energy;
  w.w_exponent = config.window_w;
  if (config.window_halfwidth > 0.0) {
    w.halfwidth = config.window_halfwidth;
  } else {
    w.halfwidth = std::pow(static_cast<double>(config.ensemble.size()),
                           -(1.0 - config.window_w));
  }
  return w;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw EstimatorError("median: no values");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return (n % 2 == 1) ? values[n / 2]
                      : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

json ensemble_to_json(const EnsembleConfig& e) {
  json j;
  j["model"] = model_name(e.model);
  j["n"] = e.n;
  j["c"] = e.c;
  j["normalized"] = e.normalized;
  if (e.model == Model::Truncated) j["m"] = e.m;
  if (e.model == Model::RosenzweigPorter) {
    j["t"] = e.t;
    j["potential"] = {{"kind", e.potential.name()},
                      {"param", e.potential.param}};
  }
  return j;
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
  for (const auto& [k, name] : kExperimentNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> experiment_from_name(const std::string& name) {
  for (const auto& [k, n] : kExperimentNames) {
    if (name == n) return k;
  }
  return std::nullopt;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = experiment_name(experiment);
  j["ensemble"] = ensemble_to_json(ensemble);
  j["realizations"] = realizations;
  j["master_seed"] = master_seed;
  j["energy"] = energy;
  j["workers"] = workers;
  j["output_dir"] = output_dir.string();
  j["window"] = {{"halfwidth", window_halfwidth}, {"w", window_w}};
  j["count_halfwidth"] = count_halfwidth;
  if (!c_values.empty()) j["c_values"] = c_values;
  j["ball_radius"] = ball_radius;
  j["c_flow"] = c_flow;
  if (!etas.empty()) j["etas"] = etas;
  j["identity_triples"] = identity_triples;
  if (!interval_widths.empty()) j["interval_widths"] = interval_widths;
  j["save_vectors"] = save_vectors;
  return j.dump();
}

ConfigValidation parse_experiment_config(const std::string& json_text) {
  ConfigValidation result;
  ErrorList errors;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    result.errors.push_back(std::string("json: ") + e.what());
    return result;
  }
  if (!doc.is_object()) {
    result.errors.push_back("json: top level must be an object");
    return result;
  }

  ExperimentConfig config;
  {
    FieldReader top(doc, "", errors);

    const auto experiment = top.get<std::string>("experiment");
    if (!experiment) {
      errors.add("experiment: required field is missing");
    } else if (auto kind = experiment_from_name(*experiment)) {
      config.experiment = *kind;
    } else {
      errors.add("experiment: unknown name '" + *experiment + "'");
    }

    bool have_n = false;
    bool have_m = false;
    bool have_t = false;
    if (const json* ens = top.child("ensemble")) {
      FieldReader e(*ens, "ensemble.", errors);
      const auto model = e.get_or<std::string>("model", "ultrametric");
      if (model == "ultrametric") {
        config.ensemble.model = Model::Ultrametric;
      } else if (model == "truncated") {
        config.ensemble.model = Model::Truncated;
      } else if (model == "rosenzweig_porter") {
        config.ensemble.model = Model::RosenzweigPorter;
      } else {
        errors.add("ensemble.model: unknown model '" + model + "'");
      }
      if (const auto n = e.get<unsigned>("n")) {
        config.ensemble.n = *n;
        have_n = true;
      } else {
        errors.add("ensemble.n: required field is missing");
      }
      config.ensemble.c = e.get_or<double>("c", 1.0);
      if (e.has("normalized")) {
        config.ensemble.normalized = e.get_or<bool>("normalized", true);
      } else {
        config.ensemble.normalized =
            config.ensemble.model == Model::Ultrametric;
      }
      if (const auto m = e.get<unsigned>("m")) {
        config.ensemble.m = *m;
        have_m = true;
      }
      if (const auto t = e.get<double>("t")) {
        config.ensemble.t = *t;
        have_t = true;
      }
      if (const json* pot = e.child("potential")) {
        FieldReader p(*pot, "ensemble.potential.", errors);
        const auto kind = p.get_or<std::string>("kind", "uniform");
        if (kind == "uniform") {
          config.ensemble.potential.kind = PotentialSpec::Kind::Uniform;
        } else if (kind == "gaussian") {
          config.ensemble.potential.kind = PotentialSpec::Kind::Gaussian;
        } else {
          errors.add("ensemble.potential.kind: unknown kind '" + kind + "'");
        }
        config.ensemble.potential.param = p.get_or<double>("param", 1.0);
      }
    } else {
      errors.add("ensemble: required field is missing");
    }

    if (config.ensemble.model == Model::Truncated && !have_m) {
      errors.add("ensemble.m: required for the truncated model");
    }
    // When t is not given, the Rosenzweig-Porter tests default to the
    // critical-coupling time t = N^{-(1+c)}.
    if (config.ensemble.model == Model::RosenzweigPorter && !have_t &&
        (config.experiment == ExperimentKind::RpTest ||
         config.experiment == ExperimentKind::WegnerMinami)) {
      config.ensemble.t =
          std::pow(static_cast<double>(config.ensemble.size()),
                   -(1.0 + config.ensemble.c));
    }

    config.realizations = top.get_or<std::uint64_t>("realizations", 1);
    config.master_seed = top.get_or<std::uint64_t>("master_seed", 1);
    config.energy = top.get_or<double>("energy", 0.0);
    // 0 (or absent) resolves to HRMT_WORKERS or the available cores now, so
    // the validated config echoes a concrete worker count.
    config.workers = resolve_workers(top.get_or<unsigned>("workers", 0));
    config.output_dir = top.get_or<std::string>("output_dir", ".");

    if (const json* win = top.child("window")) {
      FieldReader w(*win, "window.", errors);
      config.window_halfwidth = w.get_or<double>("halfwidth", 0.0);
      config.window_w = w.get_or<double>("w", 0.1);
    }
    config.count_halfwidth = top.get_or<double>("count_halfwidth", 2.0);
    config.c_values =
        top.get_or<std::vector<double>>("c_values", std::vector<double>{});
    config.ball_radius =
        top.get_or<unsigned>("ball_radius", have_n ? config.ensemble.n / 2
                                                   : 0);
    config.c_flow = top.get_or<double>("c_flow", 0.5);
    config.etas =
        top.get_or<std::vector<double>>("etas", std::vector<double>{});
    config.identity_triples =
        top.get_or<std::uint64_t>("identity_triples", 10);
    config.interval_widths = top.get_or<std::vector<double>>(
        "interval_widths", std::vector<double>{});
    config.save_vectors = top.get_or<bool>("save_vectors", false);
  }

  // Cross-field validation. Run everything; collect every failure.
  for (const std::string& problem : config.ensemble.validate_all()) {
    errors.add("ensemble." + problem);
  }
  if (config.realizations < 1) {
    errors.add("realizations: must be >= 1");
  }
  const bool needs_two =
      config.experiment == ExperimentKind::PoissonTest ||
      config.experiment == ExperimentKind::GapRatioSweep ||
      config.experiment == ExperimentKind::RpTest ||
      config.experiment == ExperimentKind::DbmStability ||
      config.experiment == ExperimentKind::WegnerMinami;
  if (needs_two && config.realizations < 2) {
    errors.add("realizations: this experiment aggregates and needs >= 2");
  }
  if (config.window_halfwidth < 0.0) {
    errors.add("window.halfwidth: must be >= 0 (0 derives it from w)");
  }
  if (!(config.window_w > 0.0) || !(config.window_w < 1.0)) {
    errors.add("window.w: must lie in (0, 1)");
  }
  if (!(config.count_halfwidth > 0.0)) {
    errors.add("count_halfwidth: must be > 0");
  }
  if (config.ball_radius > config.ensemble.n) {
    errors.add("ball_radius: exceeds the hierarchy depth n");
  }
  if (config.experiment == ExperimentKind::DbmStability &&
      !(config.c_flow > 0.0)) {
    errors.add("c_flow: must be > 0 so that t = N^-(1+c_flow) <= 1/N");
  }
  for (const double eta : config.etas) {
    if (!(eta > 0.0)) errors.add("etas: every value must be > 0");
  }
  for (const double width : config.interval_widths) {
    if (!(width > 0.0)) errors.add("interval_widths: every value must be > 0");
  }
  if (config.experiment == ExperimentKind::IdentityCheck &&
      config.identity_triples < 1) {
    errors.add("identity_triples: must be >= 1");
  }
  if (config.experiment == ExperimentKind::GapRatioSweep &&
      config.c_values.empty()) {
    config.c_values = {-1.5, -0.5, 0.5, 1.5};
  }

  result.errors = errors.messages;
  if (errors.ok()) result.config = config;
  return result;
}

void apply_overrides(ExperimentConfig& config, const CliOverrides& overrides) {
  if (overrides.seed) config.master_seed = *overrides.seed;
  if (overrides.workers) config.workers = *overrides.workers;
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  if (overrides.experiment) {
    const auto kind = experiment_from_name(*overrides.experiment);
    if (!kind) {
      throw DomainError("experiment: unknown name '" + *overrides.experiment +
                        "'");
    }
    if (*kind != config.experiment) {
      throw DomainError("experiment: config says '" +
                        experiment_name(config.experiment) +
                        "' but the command line says '" +
                        *overrides.experiment + "'");
    }
  }
}

namespace {

using PathList = std::vector<std::filesystem::path>;

PathList run_sample(const ExperimentConfig& config, json& summary) {
  struct Record {
    std::string file;
    std::uint64_t stream = 0;
    double frobenius = 0.0;
  };
  auto records = parallel_realizations<Record>(
      config.realizations, config.master_seed, 0, config.workers,
      [&](std::uint64_t k, RngStream& rng) {
        const Hamiltonian h = assemble(config.ensemble, rng);
        Record rec;
        rec.file = "sample_" + zero_pad(k, 4) + ".hmat";
        rec.stream = rng.stream_index();
        double sq = 0.0;
        for (const double v : h.entries) sq += v * v;
        rec.frobenius = std::sqrt(sq);
        write_hmat(config.output_dir / rec.file, h);
        return rec;
      });

  CsvWriter csv({"realization", "stream", "file", "frobenius_norm"});
  PathList outputs;
  double norm_sum = 0.0;
  for (std::uint64_t k = 0; k < records.size(); ++k) {
    csv.row_text({std::to_string(k), std::to_string(records[k].stream),
                  records[k].file, format_float(records[k].frobenius)});
    outputs.push_back(config.output_dir / records[k].file);
    norm_sum += records[k].frobenius;
  }
  const double mean_norm = norm_sum / static_cast<double>(records.size());
  csv.row_text({"summary", "", "", format_float(mean_norm)});
  const auto table = config.output_dir / "samples.csv";
  csv.write(table);
  outputs.push_back(table);
  summary["mean_frobenius_norm"] = mean_norm;
  return outputs;
}

PathList run_spectrum(const ExperimentConfig& config, json& summary) {
  struct Record {
    std::string file;
    std::string vectors_file;
    double lambda_min = 0.0, lambda_max = 0.0;
  };
  auto records = parallel_realizations<Record>(
      config.realizations, config.master_seed, 0, config.workers,
      [&](std::uint64_t k, RngStream& rng) {
        const Hamiltonian h = assemble(config.ensemble, rng);
        const SpectralData sd =
            config.save_vectors ? eigendecompose(h) : eigenvalues_only(h);
        Record rec;
        rec.file = "spectrum_" + zero_pad(k, 4) + ".csv";
        rec.lambda_min = sd.eigenvalues.front();
        rec.lambda_max = sd.eigenvalues.back();
        CsvWriter csv({"index", "eigenvalue"});
        for (std::size_t j = 0; j < sd.eigenvalues.size(); ++j) {
          csv.row_text({std::to_string(j + 1),
                        format_float(sd.eigenvalues[j])});
        }
        csv.write(config.output_dir / rec.file);
        if (config.save_vectors) {
          // Rows of the stored matrix are the eigenvectors, ascending by
          // eigenvalue.
          Hamiltonian vecs;
          vecs.size = sd.size;
          vecs.entries = sd.eigenvectors;
          vecs.config = h.config;
          vecs.master_seed = h.master_seed;
          vecs.stream_index = h.stream_index;
          rec.vectors_file = "vectors_" + zero_pad(k, 4) + ".hmat";
          write_hmat(config.output_dir / rec.vectors_file, vecs);
        }
        return rec;
      });

  CsvWriter csv({"realization", "file", "lambda_min", "lambda_max"});
  PathList outputs;
  double lo = 0.0, hi = 0.0;
  for (std::uint64_t k = 0; k < records.size(); ++k) {
    csv.row_text({std::to_string(k), records[k].file,
                  format_float(records[k].lambda_min),
                  format_float(records[k].lambda_max)});
    outputs.push_back(config.output_dir / records[k].file);
    if (!records[k].vectors_file.empty()) {
      outputs.push_back(config.output_dir / records[k].vectors_file);
    }
    lo += records[k].lambda_min;
    hi += records[k].lambda_max;
  }
  lo /= static_cast<double>(records.size());
  hi /= static_cast<double>(records.size());
  csv.row_text({"summary", "", format_float(lo), format_float(hi)});
  const auto table = config.output_dir / "spectra.csv";
  csv.write(table);
  outputs.push_back(table);
  summary["mean_lambda_min"] = lo;
  summary["mean_lambda_max"] = hi;
  return outputs;
}

PathList run_poisson_test(const ExperimentConfig& config, json& summary) {
  const std::uint64_t N = config.ensemble.size();
  struct Record {
    double count = 0.0;
    double gap_ratio = 0.0;
    double mu_p = 0.0;
    double mu_p_resolvent = 0.0;
    double meso_fraction = 0.0;
  };
  const double meso_halfwidth =
      0.5 / std::sqrt(static_cast<double>(N));  // window width N^{-1/2}
  auto records = parallel_realizations<Record>(
      config.realizations, config.master_seed, 0, config.workers,
      [&](std::uint64_t, RngStream& rng) {
        const Hamiltonian h = assemble(config.ensemble, rng);
        const SpectralData sd = eigenvalues_only(h);
        Record rec;
        const PointProcessSample pts = rescale_spectrum(
            sd.eigenvalues, config.energy, static_cast<double>(N));
        const auto lo = std::lower_bound(pts.points.begin(),
                                         pts.points.end(),
                                         -config.count_halfwidth);
        const auto hi = std::upper_bound(pts.points.begin(),
                                         pts.points.end(),
                                         config.count_halfwidth);
        rec.count = static_cast<double>(hi - lo);
        rec.gap_ratio = gap_ratio(sd.eigenvalues,
                                  bulk_window(sd.eigenvalues));
        const PoissonKernelValue pk = poisson_kernel_functional(
            sd.eigenvalues, 0.0, 1.0, config.energy, N);
        rec.mu_p = pk.value;
        rec.mu_p_resolvent = pk.resolvent_value;
        rec.meso_fraction =
            dos_measure(sd.eigenvalues, config.energy - meso_halfwidth,
                        config.energy + meso_halfwidth)
                .fraction;
        return rec;
      });

  CsvWriter csv({"realization", "count", "gap_ratio", "mu_poisson",
                 "mu_poisson_resolvent"});
  std::vector<double> counts(records.size()), ratios(records.size()),
      meso(records.size());
  std::vector<PointProcessSample> count_samples;  // already counted; PMF next
  for (std::uint64_t k = 0; k < records.size(); ++k) {
    csv.row({static_cast<double>(k), records[k].count, records[k].gap_ratio,
             records[k].mu_p, records[k].mu_p_resolvent});
    counts[k] = records[k].count;
    ratios[k] = records[k].gap_ratio;
    meso[k] = records[k].meso_fraction;
  }
  const MeanStderr count_stats = summarize(counts);
  const MeanStderr ratio_stats = summarize(ratios);
  csv.row_text({"summary", format_float(count_stats.mean),
                format_float(ratio_stats.mean), "", ""});
  const auto table = config.output_dir / "realizations.csv";
  csv.write(table);

  // Empirical PMF of the counts.
  const auto max_count =
      static_cast<std::size_t>(*std::max_element(counts.begin(),
                                                 counts.end()));
  std::vector<double> pmf(max_count + 1, 0.0);
  for (const double c : counts) pmf[static_cast<std::size_t>(c)] += 1.0;
  for (double& p : pmf) p /= static_cast<double>(counts.size());
  CsvWriter pmf_csv({"count", "probability"});
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    pmf_csv.row({static_cast<double>(k), pmf[k]});
  }
  const auto pmf_table = config.output_dir / "counting_pmf.csv";
  pmf_csv.write(pmf_table);

  // Self-consistency: density of states from the mesoscopic window implies
  // the expected count on the rescaled interval.
  const double meso_mean = kahan_sum(meso) / static_cast<double>(meso.size());
  const double nu_estimate = meso_mean / (2.0 * meso_halfwidth);
  summary["count_mean"] = count_stats.mean;
  summary["count_variance"] = count_stats.variance;
  summary["variance_over_mean"] =
      count_stats.mean > 0.0 ? count_stats.variance / count_stats.mean : 0.0;
  summary["gap_ratio_mean"] = ratio_stats.mean;
  summary["gap_ratio_stderr"] = ratio_stats.stderr_;
  summary["poisson_reference_gap_ratio"] = 2.0 * std::log(2.0) - 1.0;
  summary["goe_reference_gap_ratio"] = 0.5307;
  summary["nu_estimate"] = nu_estimate;
  summary["expected_count_from_nu"] =
      nu_estimate * 2.0 * config.count_halfwidth;
  return {table, pmf_table};
}

PathList run_gap_ratio_sweep(const ExperimentConfig& config, json& summary) {
  CsvWriter per({"c", "realization", "gap_ratio"});
  CsvWriter sweep({"c", "mean_r", "stderr"});
  json points = json::array();
  for (std::size_t i = 0; i < config.c_values.size(); ++i) {
    EnsembleConfig ensemble = config.ensemble;
    ensemble.c = config.c_values[i];
    auto ratios = parallel_realizations<double>(
        config.realizations, config.master_seed,
        static_cast<std::uint64_t>(i) * config.realizations, config.workers,
        [&](std::uint64_t, RngStream& rng) {
          const Hamiltonian h = assemble(ensemble, rng);
          const SpectralData sd = eigenvalues_only(h);
          return gap_ratio(sd.eigenvalues, bulk_window(sd.eigenvalues));
        });
    for (std::uint64_t k = 0; k < ratios.size(); ++k) {
      per.row({ensemble.c, static_cast<double>(k), ratios[k]});
    }
    const MeanStderr ms = summarize(ratios);
    per.row_text({format_float(ensemble.c), "summary",
                  format_float(ms.mean)});
    sweep.row({ensemble.c, ms.mean, ms.stderr_});
    points.push_back({{"c", ensemble.c},
                      {"mean_r", ms.mean},
                      {"stderr", ms.stderr_}});
  }
  const auto per_table = config.output_dir / "realizations.csv";
  const auto sweep_table = config.output_dir / "sweep.csv";
  per.write(per_table);
  sweep.write(sweep_table);
  summary["points"] = points;
  summary["poisson_reference_gap_ratio"] = 2.0 * std::log(2.0) - 1.0;
  summary["goe_reference_gap_ratio"] = 0.5307;
  return {per_table, sweep_table};
}

PathList run_localization(const ExperimentConfig& config, json& summary) {
  const IndexSpace space(config.ensemble.n);
  const Window window = window_for(config);
  struct Record {
    double inside = 0.0;
    double outside = 0.0;
  };
  auto records = parallel_realizations<Record>(
      config.realizations, config.master_seed, 0, config.workers,
      [&](std::uint64_t, RngStream& rng) {
        const Hamiltonian h = assemble(config.ensemble, rng);
        const SpectralData sd = eigendecompose(h);
        const CorrelatorReport rep = localization_mass(
            sd, space, 1, config.ball_radius, window);
        return Record{rep.inside_mass, rep.outside_mass};
      });

  CsvWriter csv({"realization", "inside_mass", "outside_mass", "total_mass"});
  std::vector<double> outs(records.size()), ins(records.size());
  for (std::uint64_t k = 0; k < records.size(); ++k) {
    csv.row({static_cast<double>(k), records[k].inside, records[k].outside,
             records[k].inside + records[k].outside});
    ins[k] = records[k].inside;
    outs[k] = records[k].outside;
  }
  const double median_outside = median_of(outs);
  csv.row_text({"summary", format_float(median_of(ins)),
                format_float(median_outside), ""});
  const auto table = config.output_dir / "realizations.csv";
  csv.write(table);
  summary["ball_radius"] = config.ball_radius;
  summary["window_halfwidth"] = window.halfwidth;
  summary["median_outside_mass"] = median_outside;
  summary["median_inside_mass"] = median_of(ins);
  if (records.size() >= 2) {
    summary["mean_outside_mass"] = summarize(outs).mean;
  }
  return {table};
}

PathList run_dbm_stability(const ExperimentConfig& config, json& summary) {
  const std::uint64_t N = config.ensemble.size();
  const std::vector<double> etas =
      config.etas.empty() ? default_etas(N) : config.etas;
  std::vector<ComplexEnergy> zs;
  zs.reserve(etas.size());
  for (const double eta : etas) zs.push_back({config.energy, eta});

  std::vector<std::vector<StabilityGap>> per_realization;
  const std::vector<StabilityRow> rows = stability_experiment(
      config.ensemble, config.c_flow, zs, config.realizations,
      config.master_seed, config.workers, &per_realization);

  CsvWriter per({"realization", "eta", "s_gap", "g_gap"});
  for (std::uint64_t k = 0; k < per_realization.size(); ++k) {
    for (const StabilityGap& gap : per_realization[k]) {
      per.row({static_cast<double>(k), gap.z.eta, gap.s_gap, gap.g_gap});
    }
  }
  per.row_text({"summary", "", format_float(rows.front().mean_s_gap), ""});
  const auto per_table = config.output_dir / "realizations.csv";
  per.write(per_table);

  CsvWriter sweep({"N", "c_flow", "eta", "t", "mean_s_gap", "stderr",
                   "mean_g_gap", "crude_bound", "theorem_shape"});
  std::vector<double> log_inv_neta, log_gap;
  json rows_json = json::array();
  for (const StabilityRow& row : rows) {
    sweep.row({static_cast<double>(N), config.c_flow, row.z.eta, row.t,
               row.mean_s_gap, row.stderr_s_gap, row.mean_g_gap,
               row.crude_bound, row.theorem_shape});
    log_inv_neta.push_back(
        std::log(1.0 / (static_cast<double>(N) * row.z.eta)));
    log_gap.push_back(std::log(row.mean_s_gap));
    rows_json.push_back({{"eta", row.z.eta},
                         {"mean_s_gap", row.mean_s_gap},
                         {"mean_g_gap", row.mean_g_gap},
                         {"crude_bound", row.crude_bound},
                         {"theorem_shape", row.theorem_shape},
                         {"crude_over_mean",
                          row.crude_bound / row.mean_s_gap}});
  }
  const auto sweep_table = config.output_dir / "sweep.csv";
  sweep.write(sweep_table);

  summary["rows"] = rows_json;
  summary["t"] = rows.front().t;
  if (rows.size() >= 2) {
    summary["fitted_exponent"] = ls_slope(log_inv_neta, log_gap);
  }
  return {per_table, sweep_table};
}

PathList run_rp_test(const ExperimentConfig& config, json& summary) {
  auto ratios = parallel_realizations<double>(
      config.realizations, config.master_seed, 0, config.workers,
      [&](std::uint64_t, RngStream& rng) {
        const Hamiltonian h = assemble(config.ensemble, rng);
        const SpectralData sd = eigenvalues_only(h);
        return gap_ratio(sd.eigenvalues, bulk_window(sd.eigenvalues));
      });
  CsvWriter csv({"realization", "gap_ratio"});
  for (std::uint64_t k = 0; k < ratios.size(); ++k) {
    csv.row({static_cast<double>(k), ratios[k]});
  }
  const MeanStderr ms = summarize(ratios);
  csv.row_text({"summary", format_float(ms.mean)});
  const auto table = config.output_dir / "realizations.csv";
  csv.write(table);
  summary["t"] = config.ensemble.t;
  summary["gap_ratio_mean"] = ms.mean;
  summary["gap_ratio_stderr"] = ms.stderr_;
  summary["poisson_reference_gap_ratio"] = 2.0 * std::log(2.0) - 1.0;
  summary["goe_reference_gap_ratio"] = 0.5307;
  return {table};
}

PathList run_identity_check(const ExperimentConfig& config, json& summary) {
  struct Record {
    double drift = 0.0;
    double burgers = 0.0;
    double ward = 0.0;
  };
  constexpr double kDriftTol = 1e-8;
  constexpr double kWardTol = 1e-10;
  auto records = parallel_realizations<Record>(
      config.realizations, config.master_seed, 0, config.workers,
      [&](std::uint64_t, RngStream& rng) {
        const Hamiltonian h = assemble(config.ensemble, rng);
        const SpectralData sd = eigendecompose(h);
        Record rec;
        for (std::uint64_t i = 0; i < config.identity_triples; ++i) {
          const ComplexEnergy z{rng.uniform(-1.0, 1.0),
                                rng.uniform(0.05, 1.0)};
          const std::uint64_t x = rng.below(h.size) + 1;
          const std::uint64_t y = rng.below(h.size) + 1;
          rec.drift = std::max(
              rec.drift, drift_identity_check(h, z, x, y).relative_error);
          rec.ward = std::max(rec.ward, ward_identity_check(sd, x, z));
        }
        const ComplexEnergy z{rng.uniform(-1.0, 1.0),
                              rng.uniform(0.05, 1.0)};
        rec.burgers = burgers_drift_check(h, z).relative_error;
        return rec;
      });

  CsvWriter csv({"realization", "max_drift_rel_err", "burgers_rel_err",
                 "max_ward_rel_err"});
  Record worst;
  for (std::uint64_t k = 0; k < records.size(); ++k) {
    csv.row({static_cast<double>(k), records[k].drift, records[k].burgers,
             records[k].ward});
    worst.drift = std::max(worst.drift, records[k].drift);
    worst.burgers = std::max(worst.burgers, records[k].burgers);
    worst.ward = std::max(worst.ward, records[k].ward);
  }
  csv.row_text({"summary", format_float(worst.drift),
                format_float(worst.burgers), format_float(worst.ward)});
  const auto table = config.output_dir / "realizations.csv";
  csv.write(table);
  summary["max_drift_rel_err"] = worst.drift;
  summary["max_burgers_rel_err"] = worst.burgers;
  summary["max_ward_rel_err"] = worst.ward;
  summary["drift_tolerance"] = kDriftTol;
  summary["ward_tolerance"] = kWardTol;
  if (worst.drift > kDriftTol || worst.burgers > kDriftTol ||
      worst.ward > kWardTol) {
    throw SolverError("exact identity violated beyond tolerance",
                      config.master_seed);
  }
  return {table};
}

PathList run_wegner_minami(const ExperimentConfig& config, json& summary) {
  const std::uint64_t N = config.ensemble.size();
  const std::vector<double> widths = config.interval_widths.empty()
                                         ? default_widths(N)
                                         : config.interval_widths;
  auto spectra = parallel_realizations<std::vector<double>>(
      config.realizations, config.master_seed, 0, config.workers,
      [&](std::uint64_t, RngStream& rng) {
        const Hamiltonian h = assemble(config.ensemble, rng);
        return eigenvalues_only(h).eigenvalues;
      });

  // Per-realization counts per width.
  std::vector<std::string> columns = {"realization"};
  for (std::size_t i = 0; i < widths.size(); ++i) {
    columns.push_back("count_w" + std::to_string(i));
  }
  CsvWriter per(columns);
  for (std::uint64_t k = 0; k < spectra.size(); ++k) {
    std::vector<std::string> cells = {std::to_string(k)};
    for (const double width : widths) {
      const DosCount dc = dos_measure(spectra[k], config.energy - width / 2.0,
                                      config.energy + width / 2.0);
      cells.push_back(std::to_string(dc.count));
    }
    per.row_text(cells);
  }
  {
    std::vector<std::string> cells = {"summary"};
    for (std::size_t i = 0; i < widths.size(); ++i) cells.push_back("");
    per.row_text(cells);
  }
  const auto per_table = config.output_dir / "realizations.csv";
  per.write(per_table);

  CsvWriter sweep({"width", "wegner_ratio", "wegner_stderr", "minami_ratio",
                   "minami_stderr"});
  json rows = json::array();
  for (const double width : widths) {
    const auto [wegner, minami] = wegner_minami_statistics(
        spectra, config.energy - width / 2.0, config.energy + width / 2.0);
    sweep.row({width, wegner.estimate, wegner.stderr_, minami.estimate,
               minami.stderr_});
    rows.push_back({{"width", width},
                    {"wegner_ratio", wegner.estimate},
                    {"wegner_stderr", wegner.stderr_},
                    {"minami_ratio", minami.estimate},
                    {"minami_stderr", minami.stderr_}});
  }
  const auto sweep_table = config.output_dir / "widths.csv";
  sweep.write(sweep_table);
  summary["rows"] = rows;
  summary["density_bound"] = config.ensemble.potential.density_bound();
  return {per_table, sweep_table};
}

}  // namespace

std::filesystem::path run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  pin_blas_single_thread();

  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " +
                  config.output_dir.string() + ": " + ec.message());
  }

  json summary;
  summary["experiment"] = experiment_name(config.experiment);
  PathList outputs;
  std::uint64_t streams_used = config.realizations;
  switch (config.experiment) {
    case ExperimentKind::Sample:
      outputs = run_sample(config, summary);
      break;
    case ExperimentKind::Spectrum:
      outputs = run_spectrum(config, summary);
      break;
    case ExperimentKind::PoissonTest:
      outputs = run_poisson_test(config, summary);
      break;
    case ExperimentKind::GapRatioSweep:
      outputs = run_gap_ratio_sweep(config, summary);
      streams_used = config.realizations * config.c_values.size();
      break;
    case ExperimentKind::Localization:
      outputs = run_localization(config, summary);
      break;
    case ExperimentKind::DbmStability:
      outputs = run_dbm_stability(config, summary);
      break;
    case ExperimentKind::RpTest:
      outputs = run_rp_test(config, summary);
      break;
    case ExperimentKind::IdentityCheck:
      outputs = run_identity_check(config, summary);
      break;
    case ExperimentKind::WegnerMinami:
      outputs = run_wegner_minami(config, summary);
      break;
  }

  const auto summary_path = config.output_dir / "summary.json";
  write_file_atomic(summary_path, summary.dump(2) + "\n");
  outputs.push_back(summary_path);

  RunManifest manifest(experiment_name(config.experiment), config.to_json(),
                       config.master_seed, streams_used, 0,
                       resolve_workers(config.workers));
  for (const auto& path : outputs) manifest.add_output(path);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  manifest.set_wall_ms(static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(elapsed)
          .count()));
  return manifest.write(config.output_dir);
}

}  // namespace hrmt
