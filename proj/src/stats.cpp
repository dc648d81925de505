#include "hrmt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hrmt/errors.hpp"
#include "hrmt/simd/kernels.hpp"

namespace hrmt {

namespace {

/// Iterator range of the sorted eigenvalues lying in [lo, hi].
std::pair<std::vector<double>::const_iterator,
          std::vector<double>::const_iterator>
window_range(const std::vector<double>& eigenvalues, double lo, double hi) {
  return {std::lower_bound(eigenvalues.begin(), eigenvalues.end(), lo),
          std::upper_bound(eigenvalues.begin(), eigenvalues.end(), hi)};
}

}  // namespace

double kahan_sum(const double* values, std::uint64_t n) {
  // Neumaier variant: also compensates when the addend exceeds the running
  // sum, which plain Kahan loses.
  double sum = 0.0, comp = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double v = values[i];
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

double kahan_sum(const std::vector<double>& values) {
  return kahan_sum(values.data(), values.size());
}

MeanStderr summarize(const std::vector<double>& values) {
  const std::uint64_t n = values.size();
  if (n < 2) {
    throw EstimatorError("summarize: needs at least 2 realization values");
  }
  MeanStderr out;
  out.mean = kahan_sum(values) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double d = values[i] - out.mean;
    sq[i] = d * d;
  }
  out.variance = kahan_sum(sq) / static_cast<double>(n - 1);
  out.stderr_ = std::sqrt(out.variance / static_cast<double>(n));
  return out;
}

PointProcessSample rescale_spectrum(const std::vector<double>& eigenvalues,
                                    double E, double scale) {
  if (!(scale > 0.0)) throw DomainError("scale: must be > 0");
  PointProcessSample out;
  out.scale = scale;
  out.center = E;
  out.points.resize(eigenvalues.size());
  for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
    out.points[j] = scale * (eigenvalues[j] - E);
  }
  // scale > 0 preserves the ascending order of the input.
  return out;
}

PointProcessSample rescale_spectrum(const SpectralData& sd, double E,
                                    double scale) {
  return rescale_spectrum(sd.eigenvalues, E, scale);
}

StatReport counting_statistics(const std::vector<PointProcessSample>& samples,
                               double lo, double hi) {
  if (samples.size() < 2) {
    throw EstimatorError("counting_statistics: needs at least 2 samples");
  }
  if (!(lo <= hi)) throw DomainError("interval: requires lo <= hi");
  std::vector<double> counts(samples.size());
  std::uint64_t max_count = 0;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto [a, b] = window_range(samples[r].points, lo, hi);
    const auto k = static_cast<std::uint64_t>(b - a);
    counts[r] = static_cast<double>(k);
    max_count = std::max(max_count, k);
  }
  const MeanStderr ms = summarize(counts);
  StatReport report;
  report.estimator = "counting";
  report.realizations = samples.size();
  report.estimate = ms.mean;
  report.stderr_ = ms.stderr_;
  report.aux.assign(max_count + 1, 0.0);
  for (const double k : counts) {
    report.aux[static_cast<std::size_t>(k)] += 1.0;
  }
  for (double& p : report.aux) p /= static_cast<double>(samples.size());
  report.extras.emplace_back("variance", ms.variance);
  return report;
}

double gap_ratio(const std::vector<double>& eigenvalues, Window window) {
  const auto [a, b] = window_range(eigenvalues, window.lo(), window.hi());
  const auto k = static_cast<std::uint64_t>(b - a);
  if (k < 3) {
    throw EstimatorError("gap_ratio: window holds " + std::to_string(k) +
                         " eigenvalues, needs >= 3");
  }
  std::vector<double> ratios(k - 2);
  for (std::uint64_t i = 0; i + 2 < k; ++i) {
    const double s0 = *(a + i + 1) - *(a + i);
    const double s1 = *(a + i + 2) - *(a + i + 1);
    const double mx = std::max(s0, s1);
    ratios[i] = (mx == 0.0) ? 1.0 : std::min(s0, s1) / mx;
  }
  return kahan_sum(ratios) / static_cast<double>(ratios.size());
}

double gap_ratio(const SpectralData& sd, Window window) {
  return gap_ratio(sd.eigenvalues, window);
}

Window bulk_window(const std::vector<double>& eigenvalues, double fraction) {
  const std::uint64_t N = eigenvalues.size();
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DomainError("fraction: must lie in (0, 1]");
  }
  if (N < 3) {
    throw EstimatorError("bulk_window: needs at least 3 eigenvalues");
  }
  auto lo_idx =
      static_cast<std::uint64_t>(std::floor((0.5 - fraction / 2.0) *
                                            static_cast<double>(N)));
  auto hi_idx =
      static_cast<std::uint64_t>(std::ceil((0.5 + fraction / 2.0) *
                                           static_cast<double>(N))) -
      1;
  hi_idx = std::min(hi_idx, N - 1);
  if (hi_idx < lo_idx + 2) {  // guarantee >= 3 points for tiny N
    lo_idx = 0;
    hi_idx = N - 1;
  }
  Window w;
  const double lo = eigenvalues[lo_idx];
  const double hi = eigenvalues[hi_idx];
  w.center = 0.5 * (lo + hi);
  // Tiny relative pad so the defining endpoints stay inside despite the
  // center/halfwidth round trip.
  w.halfwidth = 0.5 * (hi - lo) * (1.0 + 1e-12);
  return w;
}

PoissonKernelValue poisson_kernel_functional(
    const std::vector<double>& eigenvalues, double z_re, double z_im,
    double E, std::uint64_t N) {
  if (!(z_im > 0.0)) throw DomainError("z: requires Im z > 0");
  if (N == 0) throw DomainError("N: rescaling size must be >= 1");
  const double Nd = static_cast<double>(N);
  PoissonKernelValue out;

  std::vector<double> points(eigenvalues.size());
  for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
    points[j] = Nd * (eigenvalues[j] - E);
  }
  out.value = simd::active().poisson_sum(points.data(), points.size(), z_re,
                                         z_im);

  // P_z(N (lambda - E)) = (1/N) Im 1/(lambda - (E + z/N)), so the kernel sum
  // is (M/N) Im S(E + z/N) for a spectrum of M points (M = N in practice).
  const ComplexEnergy shifted{E + z_re / Nd, z_im / Nd};
  const double M = static_cast<double>(eigenvalues.size());
  out.resolvent_value = stieltjes(eigenvalues, shifted).imag() * (M / Nd);
  return out;
}

std::vector<double> eigenfunction_correlator(const SpectralData& sd,
                                             std::uint64_t x, Window window) {
  if (!sd.has_vectors()) {
    throw DomainError("sd: eigenvectors required for correlators");
  }
  if (x < 1 || x > sd.size) {
    throw DomainError("x: site index outside 1..N");
  }
  const std::uint64_t N = sd.size;
  std::vector<double> q(N, 0.0);
  const auto [a, b] =
      window_range(sd.eigenvalues, window.lo(), window.hi());
  const auto j0 = static_cast<std::uint64_t>(a - sd.eigenvalues.begin());
  const auto j1 = static_cast<std::uint64_t>(b - sd.eigenvalues.begin());
  for (std::uint64_t j = j0; j < j1; ++j) {
    const double ax = std::abs(sd.psi(j, x));
    simd::active().axpy_abs(ax, sd.eigenvectors.data() + j * N, N, q.data());
  }
  return q;
}

CorrelatorReport localization_mass(const SpectralData& sd,
                                   const IndexSpace& space, std::uint64_t x,
                                   unsigned m, Window window) {
  if (space.size() != sd.size) {
    throw DomainError("space: index space size does not match spectrum");
  }
  if (m > space.depth()) {
    throw DomainError("m: ball radius " + std::to_string(m) +
                      " exceeds depth n = " + std::to_string(space.depth()));
  }
  const std::vector<double> q = eigenfunction_correlator(sd, x, window);
  std::vector<double> inside, outside;
  inside.reserve(sd.size);
  outside.reserve(sd.size);
  for (std::uint64_t y = 1; y <= sd.size; ++y) {
    (space.distance(x, y) <= m ? inside : outside).push_back(q[y - 1]);
  }
  CorrelatorReport report;
  report.x = x;
  report.m = m;
  report.window = window;
  report.inside_mass = kahan_sum(inside);
  report.outside_mass = kahan_sum(outside);
  return report;
}

BoundCheck correlator_green_bound_check(const SpectralData& sd,
                                        std::uint64_t x,
                                        const std::vector<std::uint64_t>& Y,
                                        Window window, double eta,
                                        std::uint64_t quadrature_points) {
  if (!(eta > 0.0)) throw DomainError("eta: must be > 0");
  if (!window.w_exponent.has_value()) {
    throw DomainError("window: the exponent w must be recorded");
  }
  if (quadrature_points < 2) {
    throw EstimatorError("quadrature: needs at least 2 nodes");
  }
  const double width = window.hi() - window.lo();
  const double h = width / static_cast<double>(quadrature_points - 1);
  if (h > eta / 4.0) {
    throw EstimatorError(
        "quadrature: grid spacing exceeds eta/4; increase the node count");
  }

  const std::vector<double> q = eigenfunction_correlator(sd, x, window);
  std::vector<double> lhs_terms(Y.size());
  for (std::size_t i = 0; i < Y.size(); ++i) {
    const std::uint64_t y = Y[i];
    if (y < 1 || y > sd.size) throw DomainError("Y: site index outside 1..N");
    lhs_terms[i] = q[y - 1];
  }

  // Composite trapezoid of g(E') = sum_{y in Y} |Im G(x,y;E'+i eta)|.
  const std::uint64_t nq = quadrature_points;
  std::vector<double> row_re(sd.size), row_im(sd.size);
  std::vector<double> node_values(nq);
  for (std::uint64_t k = 0; k < nq; ++k) {
    const double Ek = window.lo() + h * static_cast<double>(k);
    green_row(sd, x, ComplexEnergy{Ek, eta}, row_re.data(), row_im.data());
    std::vector<double> terms(Y.size());
    for (std::size_t i = 0; i < Y.size(); ++i) {
      terms[i] = std::abs(row_im[Y[i] - 1]);
    }
    node_values[k] = kahan_sum(terms);
  }
  std::vector<double> weighted(nq);
  for (std::uint64_t k = 0; k < nq; ++k) {
    const double w = (k == 0 || k + 1 == nq) ? 0.5 : 1.0;
    weighted[k] = w * node_values[k];
  }
  const double integral = h * kahan_sum(weighted);

  const double N = static_cast<double>(sd.size);
  const double tail = std::log(N) / std::pow(N, *window.w_exponent);
  BoundCheck out;
  out.lhs = kahan_sum(lhs_terms);
  out.rhs = (2.0 / std::numbers::pi) * integral + tail;
  out.holds = out.lhs <= out.rhs;
  return out;
}

std::pair<StatReport, StatReport> wegner_minami_statistics(
    const std::vector<std::vector<double>>& spectra, double lo, double hi) {
  if (spectra.size() < 2) {
    throw EstimatorError("wegner_minami: needs at least 2 realizations");
  }
  if (!(lo < hi)) throw DomainError("interval: requires lo < hi");
  const double width = hi - lo;
  std::vector<double> wegner_vals(spectra.size()), minami_vals(spectra.size());
  for (std::size_t r = 0; r < spectra.size(); ++r) {
    const double N = static_cast<double>(spectra[r].size());
    const auto [a, b] = window_range(spectra[r], lo, hi);
    const double nu = static_cast<double>(b - a) / N;
    wegner_vals[r] = nu / width;
    minami_vals[r] = nu * (nu - 1.0 / N) / (width * width);
  }
  const MeanStderr wm = summarize(wegner_vals);
  const MeanStderr mm = summarize(minami_vals);
  StatReport wegner, minami;
  wegner.estimator = "wegner_ratio";
  wegner.realizations = spectra.size();
  wegner.estimate = wm.mean;
  wegner.stderr_ = wm.stderr_;
  minami.estimator = "minami_ratio";
  minami.realizations = spectra.size();
  minami.estimate = mm.mean;
  minami.stderr_ = mm.stderr_;
  return {wegner, minami};
}

StatReport spectral_averaging_statistic(
    const std::vector<const SpectralData*>& realizations, std::uint64_t x,
    double lo, double hi) {
  if (realizations.size() < 2) {
    throw EstimatorError("spectral_averaging: needs at least 2 realizations");
  }
  if (!(lo < hi)) throw DomainError("interval: requires lo < hi");
  Window w;
  w.center = 0.5 * (lo + hi);
  w.halfwidth = 0.5 * (hi - lo);
  std::vector<double> values(realizations.size());
  for (std::size_t r = 0; r < realizations.size(); ++r) {
    const SpectralData& sd = *realizations[r];
    const std::vector<double> q = eigenfunction_correlator(sd, x, w);
    values[r] = kahan_sum(q) /
                (static_cast<double>(sd.size) * (hi - lo));
  }
  const MeanStderr ms = summarize(values);
  StatReport report;
  report.estimator = "spectral_averaging";
  report.realizations = realizations.size();
  report.estimate = ms.mean;
  report.stderr_ = ms.stderr_;
  return report;
}

}  // namespace hrmt
