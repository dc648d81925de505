#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "hrmt/ensemble.hpp"
#include "hrmt/spectral.hpp"
#include "hrmt/stats.hpp"

namespace hrmt {

enum class FlowMode { OneShot, Path };

/// Additive Gaussian matrix flow H_t = H_0 + sqrt(t) * W started from an
/// arbitrary symmetric matrix (potential-plus-coupling in the applications).
struct FlowConfig {
  Hamiltonian initial;
  double t_final = 0.0;
  unsigned steps = 1;  // Path mode only
  FlowMode mode = FlowMode::OneShot;

  void validate() const;
};

struct FlowTrajectory {
  std::vector<double> times;          // strictly increasing, starts at 0
  std::vector<Hamiltonian> matrices;  // one snapshot per time
};

/// One realization's resolvent stability record at a point z.
struct StabilityGap {
  ComplexEnergy z;
  double t = 0.0;
  double s_gap = 0.0;        // |S_t(z) - S_0(z)|
  double g_gap = 0.0;        // (1/N) sum_y |G_t(x,y;z) - G_0(x,y;z)|, x = 1
  double crude_bound = 0.0;  // sqrt(t)/eta^2
};

/// Aggregated stability results at one z across realizations.
struct StabilityRow {
  ComplexEnergy z;
  double t = 0.0;
  std::uint64_t realizations = 0;
  double mean_s_gap = 0.0;
  double stderr_s_gap = 0.0;
  double mean_g_gap = 0.0;
  double crude_bound = 0.0;
  double theorem_shape = 0.0;  // N^{-c/2} (1 + 1/(N eta) + 1/(N eta)^3)
};

/// Two evaluations of an exact algebraic identity.
struct IdentityCheckResult {
  std::complex<double> lhs;
  std::complex<double> rhs;
  double relative_error = 0.0;
};

struct QvEstimate {
  /// Discretized integral_0^t Im S_s(z) ds / (N^2 eta^3).
  double dominator = 0.0;
  /// Realized |S_t - S_0 - integral of the drift|^2 along the same grid.
  double realized = 0.0;
  std::uint64_t steps = 0;
};

/// Samples the flow. OneShot: endpoint H_0 + sqrt(t) W with W symmetric
/// Gaussian of entry variance (1 + delta_xy)/N — exact in distribution.
/// Path: Euler increments H_{k+1} = H_k + sqrt(dt) W_k, exact in
/// distribution at every grid time. t_final = 0 returns {H_0} alone.
FlowTrajectory evolve(const FlowConfig& config, RngStream& rng);

/// Exact resolvent-drift identity at (x, y):
///   (1/N) sum_{u<=v} <delta_y, R P_uv R P_uv R delta_x>
///     == S(z) <delta_y, R^2 delta_x> + (1/N) <delta_y, R^3 delta_x>
/// with P_uv = (e_u e_v^T + e_v e_u^T)/sqrt(1 + delta_uv).
IdentityCheckResult drift_identity_check(const Hamiltonian& h,
                                         ComplexEnergy z, std::uint64_t x,
                                         std::uint64_t y);

/// Trace form of the same identity: the diagonal average of the drift
/// equals S dS/dz + (1/2N) d2S/dz2 (complex Burgers drift).
IdentityCheckResult burgers_drift_check(const Hamiltonian& h,
                                        ComplexEnergy z);

/// |sum_u |G(x,u;z)|^2 - Im G(x,x;z)/eta| relative to Im G(x,x;z)/eta.
double ward_identity_check(const SpectralData& sd, std::uint64_t x,
                           ComplexEnergy z);

/// The proven stability-bound shape N^{-c/2}(1 + 1/(N eta) + 1/(N eta)^3).
double theorem_shape(std::uint64_t N, double c_flow, double eta);

/// One realization of the stability experiment: sample H_0 from `config`,
/// flow it for t = N^{-(1+c_flow)}, and record gaps at every z. Both
/// endpoints share one eigendecomposition each.
std::vector<StabilityGap> stability_realization(
    const EnsembleConfig& config, double c_flow,
    const std::vector<ComplexEnergy>& zs, RngStream& rng);

/// Monte Carlo aggregate of stability_realization over `realizations`
/// streams (master_seed, 0..realizations-1), one StabilityRow per z.
/// Also returns the per-realization gaps for CSV output when requested.
std::vector<StabilityRow> stability_experiment(
    const EnsembleConfig& config, double c_flow,
    const std::vector<ComplexEnergy>& zs, std::uint64_t realizations,
    std::uint64_t master_seed, unsigned workers,
    std::vector<std::vector<StabilityGap>>* per_realization = nullptr);

/// Quadratic-variation dominator and realized martingale increment of a
/// Path-mode trajectory at z. Needs >= 8 steps unless the trajectory is a
/// single time point (then both are exactly 0).
QvEstimate martingale_qv_estimate(const FlowTrajectory& trajectory,
                                  ComplexEnergy z);

}  // namespace hrmt
