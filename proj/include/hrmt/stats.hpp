#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hrmt/index_space.hpp"
#include "hrmt/spectral.hpp"

namespace hrmt {

/// Spectral window [center - halfwidth, center + halfwidth]. w_exponent
/// optionally records that halfwidth = N^-(1-w).
struct Window {
  double center = 0.0;
  double halfwidth = 0.0;
  std::optional<double> w_exponent;

  double lo() const { return center - halfwidth; }
  double hi() const { return center + halfwidth; }
  bool contains(double lambda) const {
    return lambda >= lo() && lambda <= hi();
  }
};

/// Eigenvalues recentered at `center` and magnified by `scale`, kept sorted.
struct PointProcessSample {
  std::vector<double> points;
  double scale = 1.0;
  double center = 0.0;
};

/// Aggregated Monte Carlo result: point estimate with standard error over
/// realizations, plus optional auxiliary arrays (histograms, PMFs) and named
/// scalar extras.
struct StatReport {
  std::string estimator;
  std::uint64_t realizations = 0;
  std::uint64_t master_seed = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::vector<double> aux;
  std::vector<std::pair<std::string, double>> extras;
};

/// Eigenfunction-correlator mass split across a hierarchical ball.
struct CorrelatorReport {
  std::uint64_t x = 0;
  unsigned m = 0;
  Window window;
  double inside_mass = 0.0;
  double outside_mass = 0.0;
};

/// Both evaluation routes of the rescaled Poisson-kernel functional; they
/// agree to machine precision as an exact identity.
struct PoissonKernelValue {
  double value = 0.0;            // sum_j P_z(N * (lambda_j - E))
  double resolvent_value = 0.0;  // Im S(E + z/N)
};

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Compensated (Kahan) sum, independent of worker count by construction.
double kahan_sum(const double* values, std::uint64_t n);
double kahan_sum(const std::vector<double>& values);

struct MeanStderr {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double stderr_ = 0.0;
};

/// Mean / unbiased variance / standard error of realization-level values.
/// Throws EstimatorError with fewer than 2 values.
MeanStderr summarize(const std::vector<double>& values);

/// points = sorted { scale * (lambda_j - E) }, scale > 0.
PointProcessSample rescale_spectrum(const std::vector<double>& eigenvalues,
                                    double E, double scale);
PointProcessSample rescale_spectrum(const SpectralData& sd, double E,
                                    double scale);

/// Empirical PMF / mean / variance of #(points in [lo, hi]) across samples.
/// aux holds the PMF (index = count); extras carry "variance".
StatReport counting_statistics(const std::vector<PointProcessSample>& samples,
                               double lo, double hi);

/// Mean consecutive-spacing ratio min(s_i, s_{i+1})/max(s_i, s_{i+1}) over
/// the eigenvalues inside the window. Needs >= 3 of them. Ties (both
/// spacings zero) count as ratio 1.
double gap_ratio(const std::vector<double>& eigenvalues, Window window);
double gap_ratio(const SpectralData& sd, Window window);

/// Window spanning the central `fraction` of the spectrum by index.
Window bulk_window(const std::vector<double>& eigenvalues,
                   double fraction = 0.2);

/// mu_N(P_z) evaluated as the rescaled kernel sum and, independently, as
/// Im S(E + z/N). z is given by its real part and positive imaginary part.
PoissonKernelValue poisson_kernel_functional(
    const std::vector<double>& eigenvalues, double z_re, double z_im,
    double E, std::uint64_t N);

/// Q(x,y;W) = sum_{lambda in W} |psi_lambda(x) psi_lambda(y)| for every y
/// (returned 0-indexed: entry y-1 is Q(x,y;W)).
std::vector<double> eigenfunction_correlator(const SpectralData& sd,
                                             std::uint64_t x, Window window);

/// Splits sum_y Q(x,y;W) into the mass inside the hierarchical ball B_m(x)
/// and the mass outside it.
CorrelatorReport localization_mass(const SpectralData& sd,
                                   const IndexSpace& space, std::uint64_t x,
                                   unsigned m, Window window);

/// Mesoscopic-window bound: lhs = sum_{y in Y} Q(x,y;W) against
/// rhs = (2/pi) sum_{y in Y} integral_W |Im G(x,y;E'+i eta)| dE'
///       + log(N)/N^w.
/// Composite trapezoid on `quadrature_points` uniform nodes; the grid
/// spacing must be <= eta/4 (EstimatorError otherwise). The window must
/// carry its exponent w.
BoundCheck correlator_green_bound_check(const SpectralData& sd,
                                        std::uint64_t x,
                                        const std::vector<std::uint64_t>& Y,
                                        Window window, double eta,
                                        std::uint64_t quadrature_points);

/// Wegner ratio E nu(I)/|I| and Minami ratio E[nu(I)(nu(I)-1/N)]/|I|^2 over
/// per-realization spectra, nu = eigenvalue count in I divided by N.
std::pair<StatReport, StatReport> wegner_minami_statistics(
    const std::vector<std::vector<double>>& spectra, double lo, double hi);

/// E sum_y |mu_xy|(I) / (N |I|): per realization the total correlator mass
/// of window I at site x, normalized by N|I|.
StatReport spectral_averaging_statistic(
    const std::vector<const SpectralData*>& realizations, std::uint64_t x,
    double lo, double hi);

}  // namespace hrmt
