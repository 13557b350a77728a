#include "stepbunch/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <random>
#include <thread>

#include "stepbunch/error.hpp"

namespace stepbunch {

namespace {

template <typename F>
void run_rows(std::size_t n, int threads, F&& f) {
  const std::size_t nt = std::min<std::size_t>(std::max(threads, 1), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < nt; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += nt) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double relative_l2(const GridProfile& a, const GridProfile& b) {
  double d = 0.0, n = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    d += (a[j] - b[j]) * (a[j] - b[j]);
    n += a[j] * a[j];
  }
  return std::sqrt(d / n);
}

GridProfile perturbed_uniform(std::size_t N, double A) {
  std::vector<double> r(N);
  for (std::size_t j = 0; j < N; ++j) r[j] = A * (1.0 + 0.01 * std::cos(2.0 * std::numbers::pi * grid_x(N, j)));
  return GridProfile(std::move(r), A);
}

}  // namespace

MinimizeOptions experiment_minimize_defaults() {
  MinimizeOptions o;
  o.rearrange_every = 50;
  o.parity_polish = true;
  return o;
}

double symmetry_defect(const GridProfile& p) {
  // Reflect about the cell center or cell edge closest to the circular mean.
  const std::size_t N = p.size();
  double cs = 0.0, sn = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(N);
    cs += p[j] * std::cos(th);
    sn += p[j] * std::sin(th);
  }
  const double c = std::atan2(sn, cs) / (2.0 * std::numbers::pi) * static_cast<double>(N);
  const long twice = std::lround(2.0 * c);
  const long n = static_cast<long>(N);
  double d = 0.0, nn = 0.0;
  for (long j = 0; j < n; ++j) {
    const double r = p[((twice - j) % n + n) % n];
    d += (p[j] - r) * (p[j] - r);
    nn += p[j] * p[j];
  }
  return std::sqrt(d / nn);
}

double rearrangement_defect(const GridProfile& p) {
  // Integer centering can leave an edge-centered bunch one cell off the
  // alignment used by the rearrangement.
  const auto c = center_profile(p);
  const auto r = rearrange_decreasing(c);
  double best = relative_l2(c, r);
  for (long s : {-1L, 1L}) best = std::min(best, relative_l2(shift_profile(c, s), r));
  return best;
}

ScalingReport scaling_sweep(const ModelParams& base, const std::vector<double>& eps_list, std::size_t N,
                            const ScalingOptions& opts) {
  validate(base);
  opts.minimize.validate();
  if (base.m != 0.0 && !opts.allow_nonzero_m) throw ConfigurationError("scaling: the sweep is defined for m = 0");
  if (eps_list.size() < 2) throw ConfigurationError("scaling: need at least two epsilon values");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double e = eps_list[i];
    if (!(e > 0.0) || (i > 0 && !(e < eps_list[i - 1])))
      throw ConfigurationError("scaling: eps_list must be positive and decreasing");
    const double rho0 = std::pow(e, -1.0 / base.n);
    if (rho0 < base.A) throw ConfigurationError("scaling: requires eps^(-1/n) >= A");
    if (rho0 > static_cast<double>(N) / 8.0)
      throw ResolutionError("scaling: bunch height eps^(-1/n) exceeds N/8; increase N");
  }

  const KernelTable K = build_kernel_table(base.m, N);
  const double offset = 0.5 * base.A * base.A * K.l1_norm;

  ScalingReport rep;
  rep.rows.resize(eps_list.size());
  run_rows(eps_list.size(), opts.threads, [&](std::size_t i) {
    ModelParams p = base;
    p.epsilon = eps_list[i];
    const auto ra = minimize_energy(ansatz_profile(p, N), K, p, opts.minimize);
    const auto ru = minimize_energy(perturbed_uniform(N, p.A), K, p, opts.minimize);
    const bool a_wins = ra.energy.total <= ru.energy.total;
    const auto& best = a_wins ? ra : ru;
    ScalingRow& row = rep.rows[i];
    row.epsilon = p.epsilon;
    row.E_ansatz = ra.energy.total + offset;
    row.E_uniform = ru.energy.total + offset;
    row.E_min = best.energy.total + offset;
    row.R0 = best.support_radius;
    row.iterations = best.iterations;
    row.winner = a_wins ? "ansatz" : "uniform";
    row.converged = best.converged;
  });

  // Least squares E = slope * log(1/eps) + intercept.
  const double n = static_cast<double>(rep.rows.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& r : rep.rows) {
    const double x = -std::log(r.epsilon);
    sx += x;
    sy += r.E_min;
    sxx += x * x;
    sxy += x * r.E_min;
  }
  rep.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  rep.fitted_intercept = (sy - rep.fitted_slope * sx) / n;
  double ss = 0.0, lo = 1e300, hi = -1e300;
  for (const auto& r : rep.rows) {
    const double x = -std::log(r.epsilon);
    const double e = r.E_min - (rep.fitted_slope * x + rep.fitted_intercept);
    ss += e * e;
    const double shifted = r.E_min + base.A * base.A / base.n * x;
    lo = std::min(lo, shifted);
    hi = std::max(hi, shifted);
  }
  rep.residual = std::sqrt(ss / n);
  rep.band = hi - lo;
  return rep;
}

EvidenceReport bunching_evidence(const ModelParams& params, std::size_t N, const EvidenceOptions& opts) {
  validate(params);
  opts.minimize.validate();
  if (opts.inits < 1) throw ConfigurationError("evidence: inits must be >= 1");
  const KernelTable K = build_kernel_table(params.m, N);

  EvidenceReport rep;
  rep.runs.resize(opts.inits);
  run_rows(rep.runs.size(), opts.threads, [&](std::size_t i) {
    EvidenceRun& run = rep.runs[i];
    run.seed = opts.seed + i;
    std::mt19937_64 rng(run.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> r(N);
    double mean = 0.0;
    for (auto& v : r) mean += (v = u(rng));
    mean /= static_cast<double>(N);
    for (auto& v : r) v *= params.A / mean;
    const auto res = minimize_energy(project_feasible(r, params.A), K, params, opts.minimize);
    run.energy = res.energy.total;
    run.symmetry_defect = symmetry_defect(res.profile);
    run.rearrangement_defect = rearrangement_defect(res.profile);
    run.el_residual = res.el_residual;
    const auto conv = convolve_spectral(K, res.profile.rho());
    run.conv_sup = 0.0;
    for (double c : conv) run.conv_sup = std::max(run.conv_sup, std::abs(c));
    run.R0 = res.support_radius;
    run.iterations = res.iterations;
    run.converged = res.converged;
  });

  double lo = 1e300, hi = -1e300;
  for (const auto& r : rep.runs) {
    if (!r.converged) continue;
    lo = std::min(lo, r.energy);
    hi = std::max(hi, r.energy);
    rep.max_symmetry_defect = std::max(rep.max_symmetry_defect, r.symmetry_defect);
    rep.max_rearrangement_defect = std::max(rep.max_rearrangement_defect, r.rearrangement_defect);
    rep.max_relative_el_residual = std::max(rep.max_relative_el_residual, r.el_residual / r.conv_sup);
  }
  rep.energy_spread = hi >= lo ? hi - lo : 0.0;
  return rep;
}

}  // namespace stepbunch
