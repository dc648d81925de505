#include "hrmt/dbm.hpp"

#include <cmath>
#include <utility>

#include "hrmt/errors.hpp"
#include "hrmt/parallel.hpp"
#include "hrmt/simd/kernels.hpp"

namespace hrmt {

namespace {

/// Compensated accumulator for complex sums with large cancellations.
struct KahanComplex {
  double re = 0.0, re_c = 0.0;
  double im = 0.0, im_c = 0.0;

  void add(std::complex<double> v) {
    double y = v.real() - re_c;
    double t = re + y;
    re_c = (t - re) - y;
    re = t;
    y = v.imag() - im_c;
    t = im + y;
    im_c = (t - im) - y;
    im = t;
  }
  std::complex<double> value() const { return {re, im}; }
};

/// Adds scale * W into a symmetric buffer, W Gaussian with entry variance
/// (1 + delta_xy)/N. Fixed draw order: upper triangle, row-major, diagonal
/// included; each entry drawn once and mirrored.
void add_flow_increment(std::vector<double>& entries, std::uint64_t N,
                        double scale, RngStream& rng) {
  const double sd_off = std::sqrt(1.0 / static_cast<double>(N));
  const double sd_diag = std::sqrt(2.0 / static_cast<double>(N));
  for (std::uint64_t i = 0; i < N; ++i) {
    for (std::uint64_t j = i; j < N; ++j) {
      const double v = scale * ((i == j) ? sd_diag : sd_off) * rng.gaussian();
      entries[i * N + j] += v;
      if (i != j) entries[j * N + i] += v;
    }
  }
}

/// Resolvent matrix as split real/imaginary row-major buffers.
struct ResolventView {
  const std::vector<double>& re;
  const std::vector<double>& im;
  std::uint64_t N;

  std::complex<double> at(std::uint64_t u, std::uint64_t v) const {
    return {re[u * N + v], im[u * N + v]};
  }
};

/// (1/N) sum_{u<=v} <delta_y, R P_uv R P_uv R delta_x> with 0-based x0, y0.
/// Expanding both P_uv = (e_u e_v^T + e_v e_u^T)/sqrt(1+delta_uv) gives, per
/// pair, [b_u (R_uv a_v + R_vv a_u) + b_v (R_uu a_v + R_uv a_u)]/(1+delta)
/// where a = R delta_x and b = R delta_y.
std::complex<double> drift_lhs(const ResolventView& r, std::uint64_t x0,
                               std::uint64_t y0) {
  const std::uint64_t N = r.N;
  std::vector<std::complex<double>> a(N), b(N), diag(N);
  for (std::uint64_t u = 0; u < N; ++u) {
    a[u] = r.at(u, x0);
    b[u] = r.at(u, y0);
    diag[u] = r.at(u, u);
  }
  KahanComplex sum;
  for (std::uint64_t u = 0; u < N; ++u) {
    for (std::uint64_t v = u; v < N; ++v) {
      const std::complex<double> ruv = r.at(u, v);
      std::complex<double> term =
          b[u] * (ruv * a[v] + diag[v] * a[u]) +
          b[v] * (diag[u] * a[v] + ruv * a[u]);
      if (u == v) term *= 0.5;
      sum.add(term);
    }
  }
  return sum.value() / static_cast<double>(N);
}

double relative_gap(std::complex<double> lhs, std::complex<double> rhs) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale;
}

}  // namespace

void FlowConfig::validate() const {
  if (initial.size == 0 ||
      initial.entries.size() != initial.size * initial.size) {
    throw DomainError("initial: matrix buffer does not match its size");
  }
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw DomainError("t_final: must be finite and >= 0");
  }
  if (mode == FlowMode::Path && steps < 1) {
    throw DomainError("steps: Path mode needs at least 1 step");
  }
}

FlowTrajectory evolve(const FlowConfig& config, RngStream& rng) {
  config.validate();
  FlowTrajectory traj;
  if (config.t_final == 0.0) {
    traj.times = {0.0};
    traj.matrices = {config.initial};
    return traj;
  }
  const std::uint64_t N = config.initial.size;
  if (config.mode == FlowMode::OneShot) {
    traj.times = {0.0, config.t_final};
    traj.matrices.reserve(2);
    traj.matrices.push_back(config.initial);
    Hamiltonian end = config.initial;
    end.master_seed = rng.master_seed();
    end.stream_index = rng.stream_index();
    add_flow_increment(end.entries, N, std::sqrt(config.t_final), rng);
    traj.matrices.push_back(std::move(end));
    return traj;
  }
  const double dt =
      config.t_final / static_cast<double>(config.steps);
  const double root_dt = std::sqrt(dt);
  traj.times.resize(config.steps + 1);
  traj.matrices.reserve(config.steps + 1);
  traj.matrices.push_back(config.initial);
  for (unsigned k = 0; k < config.steps; ++k) {
    Hamiltonian next = traj.matrices.back();
    next.master_seed = rng.master_seed();
    next.stream_index = rng.stream_index();
    add_flow_increment(next.entries, N, root_dt, rng);
    traj.matrices.push_back(std::move(next));
  }
  for (unsigned k = 0; k <= config.steps; ++k) {
    traj.times[k] = config.t_final * static_cast<double>(k) /
                    static_cast<double>(config.steps);
  }
  return traj;
}

IdentityCheckResult drift_identity_check(const Hamiltonian& h,
                                         ComplexEnergy z, std::uint64_t x,
                                         std::uint64_t y) {
  const SpectralData sd = eigendecompose(h);
  if (x < 1 || x > sd.size || y < 1 || y > sd.size) {
    throw DomainError("x/y: site index outside 1..N");
  }
  std::vector<double> rre, rim;
  green_matrix(sd, z, rre, rim);
  const ResolventView view{rre, rim, sd.size};

  IdentityCheckResult out;
  out.lhs = drift_lhs(view, x - 1, y - 1);
  const std::complex<double> S = stieltjes(sd, z);
  const std::complex<double> r2 = green_power_entry(sd, x, y, z, 2);
  const std::complex<double> r3 = green_power_entry(sd, x, y, z, 3);
  out.rhs = S * r2 + r3 / static_cast<double>(sd.size);
  out.relative_error = relative_gap(out.lhs, out.rhs);
  return out;
}

IdentityCheckResult burgers_drift_check(const Hamiltonian& h,
                                        ComplexEnergy z) {
  const SpectralData sd = eigendecompose(h);
  std::vector<double> rre, rim;
  green_matrix(sd, z, rre, rim);
  const ResolventView view{rre, rim, sd.size};

  KahanComplex avg;
  for (std::uint64_t x0 = 0; x0 < sd.size; ++x0) {
    avg.add(drift_lhs(view, x0, x0));
  }
  IdentityCheckResult out;
  out.lhs = avg.value() / static_cast<double>(sd.size);
  const std::complex<double> S = stieltjes(sd, z);
  const std::complex<double> p2 = stieltjes_power(sd.eigenvalues, z, 2);
  const std::complex<double> p3 = stieltjes_power(sd.eigenvalues, z, 3);
  // S dS/dz + (1/2N) d2S/dz2 with dS/dz = p2 and d2S/dz2 = 2 p3.
  out.rhs = S * p2 + p3 / static_cast<double>(sd.size);
  out.relative_error = relative_gap(out.lhs, out.rhs);
  return out;
}

double ward_identity_check(const SpectralData& sd, std::uint64_t x,
                           ComplexEnergy z) {
  std::vector<double> row_re(sd.size), row_im(sd.size);
  green_row(sd, x, z, row_re.data(), row_im.data());
  const double lhs =
      simd::active().norm2sq_complex(row_re.data(), row_im.data(), sd.size);
  const double rhs = row_im[x - 1] / z.eta;
  return std::abs(lhs - rhs) / std::abs(rhs);
}

double theorem_shape(std::uint64_t N, double c_flow, double eta) {
  const double Nd = static_cast<double>(N);
  const double inv = 1.0 / (Nd * eta);
  return std::pow(Nd, -c_flow / 2.0) * (1.0 + inv + inv * inv * inv);
}

std::vector<StabilityGap> stability_realization(
    const EnsembleConfig& config, double c_flow,
    const std::vector<ComplexEnergy>& zs, RngStream& rng) {
  if (!(c_flow > 0.0) || !std::isfinite(c_flow)) {
    throw DomainError("c_flow: must be finite and > 0 so that t <= 1/N");
  }
  const Hamiltonian h0 = assemble(config, rng);
  const auto N = h0.size;
  const double t =
      std::pow(static_cast<double>(N), -(1.0 + c_flow));

  Hamiltonian ht = h0;
  add_flow_increment(ht.entries, N, std::sqrt(t), rng);

  const SpectralData sd0 = eigendecompose(h0);
  const SpectralData sdt = eigendecompose(ht);

  std::vector<double> row0_re(N), row0_im(N), rowt_re(N), rowt_im(N);
  std::vector<StabilityGap> gaps;
  gaps.reserve(zs.size());
  for (const ComplexEnergy z : zs) {
    StabilityGap gap;
    gap.z = z;
    gap.t = t;
    gap.s_gap = std::abs(stieltjes(sdt, z) - stieltjes(sd0, z));
    green_row(sd0, 1, z, row0_re.data(), row0_im.data());
    green_row(sdt, 1, z, rowt_re.data(), rowt_im.data());
    gap.g_gap = simd::active().diff_norm1_complex(
                    rowt_re.data(), rowt_im.data(), row0_re.data(),
                    row0_im.data(), N) /
                static_cast<double>(N);
    gap.crude_bound = std::sqrt(t) / (z.eta * z.eta);
    gaps.push_back(gap);
  }
  return gaps;
}

std::vector<StabilityRow> stability_experiment(
    const EnsembleConfig& config, double c_flow,
    const std::vector<ComplexEnergy>& zs, std::uint64_t realizations,
    std::uint64_t master_seed, unsigned workers,
    std::vector<std::vector<StabilityGap>>* per_realization) {
  if (realizations < 2) {
    throw EstimatorError("stability_experiment: needs >= 2 realizations");
  }
  auto all = parallel_realizations<std::vector<StabilityGap>>(
      realizations, master_seed, 0, workers,
      [&](std::uint64_t, RngStream& rng) {
        return stability_realization(config, c_flow, zs, rng);
      });

  std::vector<StabilityRow> rows;
  rows.reserve(zs.size());
  for (std::size_t zi = 0; zi < zs.size(); ++zi) {
    std::vector<double> s_gaps(all.size()), g_gaps(all.size());
    for (std::size_t k = 0; k < all.size(); ++k) {
      s_gaps[k] = all[k][zi].s_gap;
      g_gaps[k] = all[k][zi].g_gap;
    }
    const MeanStderr s = summarize(s_gaps);
    const MeanStderr g = summarize(g_gaps);
    StabilityRow row;
    row.z = zs[zi];
    row.t = all.front()[zi].t;
    row.realizations = realizations;
    row.mean_s_gap = s.mean;
    row.stderr_s_gap = s.stderr_;
    row.mean_g_gap = g.mean;
    row.crude_bound = all.front()[zi].crude_bound;
    row.theorem_shape = theorem_shape(config.size(), c_flow, zs[zi].eta);
    rows.push_back(row);
  }
  if (per_realization) *per_realization = std::move(all);
  return rows;
}

QvEstimate martingale_qv_estimate(const FlowTrajectory& trajectory,
                                  ComplexEnergy z) {
  if (!(z.eta > 0.0)) throw DomainError("eta: must be > 0");
  QvEstimate out;
  if (trajectory.times.size() <= 1) return out;  // constant trajectory
  const std::uint64_t steps = trajectory.times.size() - 1;
  if (steps < 8) {
    throw EstimatorError("martingale_qv_estimate: needs >= 8 steps");
  }
  out.steps = steps;
  const double N = static_cast<double>(trajectory.matrices.front().size);

  std::vector<std::complex<double>> s_vals(steps + 1), drift(steps + 1);
  std::vector<double> im_s(steps + 1);
  for (std::uint64_t k = 0; k <= steps; ++k) {
    const std::vector<double> lambda =
        eigenvalues_only(trajectory.matrices[k]).eigenvalues;
    const std::complex<double> S = stieltjes(lambda, z);
    const std::complex<double> p2 = stieltjes_power(lambda, z, 2);
    const std::complex<double> p3 = stieltjes_power(lambda, z, 3);
    s_vals[k] = S;
    drift[k] = S * p2 + p3 / N;
    im_s[k] = S.imag();
  }

  std::complex<double> drift_integral = 0.0;
  double im_integral = 0.0;
  for (std::uint64_t k = 0; k < steps; ++k) {
    const double h = trajectory.times[k + 1] - trajectory.times[k];
    drift_integral += 0.5 * h * (drift[k] + drift[k + 1]);
    im_integral += 0.5 * h * (im_s[k] + im_s[k + 1]);
  }

  out.dominator = im_integral / (N * N * z.eta * z.eta * z.eta);
  out.realized = std::norm(s_vals[steps] - s_vals[0] - drift_integral);
  return out;
}

}  // namespace hrmt
