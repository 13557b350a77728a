#include "stepbunch/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>

#include "stepbunch/error.hpp"
#include "stepbunch/fft.hpp"

namespace stepbunch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct State {
  std::vector<double> rho, conv, g;
  double E = 0.0;
};

// Phi(b + delta) - Phi(b) without cancellation for small delta / b.
double phi_difference(double b, double delta, const ModelParams& p) {
  const double a = b + delta;
  if (b <= 0.0 || a <= 0.0) return phi(a, p) - phi(b, p);
  const double t = std::log1p(delta / b);
  const double dip = p.gamma / (p.n * (p.n + 1.0)) * std::pow(b, p.n + 1.0) * std::expm1((p.n + 1.0) * t);
  if (p.m == 0.0) return delta * std::log(a) + b * t + dip;
  return std::pow(b, p.m + 1.0) * std::expm1((p.m + 1.0) * t) / (p.m * (p.m + 1.0)) + dip;
}

// Energy and gradient (w.r.t. rho in the mean inner product) without the
// bookkeeping of total_energy.
class Objective {
 public:
  Objective(const KernelTable& K, const ModelParams& params, double rho_floor)
      : K_(K), params_(params), eps_(params.eps_pow()), floor_(rho_floor) {}

  State evaluate(std::vector<double> rho) const {
    State s;
    s.rho = std::move(rho);
    s.conv = convolve_spectral(K_, s.rho);
    const std::size_t n = s.rho.size();
    double nl = 0.0, loc = 0.0;
    s.g.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      nl += s.rho[j] * s.conv[j];
      loc += phi(s.rho[j], params_);
      s.g[j] = -s.conv[j] + eps_ * clamped_phi_prime(s.rho[j]);
    }
    s.E = (-0.5 * nl + eps_ * loc) / static_cast<double>(n);
    return s;
  }

  double energy(std::span<const double> rho) const {
    return evaluate(std::vector<double>(rho.begin(), rho.end())).E;
  }

  // E(next) - E(cur), accurate relative to the size of the change. Both
  // states have mean A, so `shift` * (mass change) vanishes exactly and is
  // subtracted to cancel the rounding of the mass against the multiplier.
  double difference(const State& cur, const State& next, double shift) const {
    const std::size_t n = cur.rho.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double delta = next.rho[j] - cur.rho[j];
      if (delta == 0.0) continue;
      sum += -0.5 * delta * (cur.conv[j] + next.conv[j]) + eps_ * phi_difference(cur.rho[j], delta, params_) -
             shift * delta;
    }
    return sum / static_cast<double>(n);
  }

  // Inverse of 1 + eps^(1-m) Phi''(rho): the local part of the Hessian
  // diagonal, with the nonlocal part taken as O(1).
  void scaling(std::span<const double> rho, std::vector<double>& d) const {
    d.resize(rho.size());
    for (std::size_t j = 0; j < rho.size(); ++j)
      d[j] = 1.0 / (1.0 + eps_ * phi_second(std::max(rho[j], std::max(floor_, 1e-300)), params_));
  }

 private:
  double clamped_phi_prime(double r) const {
    const double x = std::max(r, floor_);
    if (x > 0.0) return phi_prime(x, params_);
    if (params_.m > 0.0) return 0.0;
    return -std::numeric_limits<double>::infinity();
  }

  const KernelTable& K_;
  const ModelParams& params_;
  double eps_;
  double floor_;
};

// Mean gradient over the support: the multiplier of the mass constraint.
double support_multiplier(const State& s) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < s.rho.size(); ++j)
    if (s.rho[j] > 0.0) sum += s.g[j], ++count;
  return count ? sum / static_cast<double>(count) : 0.0;
}

double rms_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

std::vector<double> step_from(std::span<const double> rho, std::span<const double> g, double alpha) {
  std::vector<double> v(rho.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = rho[j] - alpha * g[j];
  return v;
}

// Projection onto {rho >= 0, mean = A} in the metric sum (rho - v)^2 / d:
// rho_j = max(v_j - lambda d_j, 0), lambda from the breakpoints v_j / d_j.
std::vector<double> project_scaled(std::span<const double> v, std::span<const double> d, double A) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] * d[b] > v[b] * d[a]; });
  const double mass = A * static_cast<double>(n);
  double sv = 0.0, sd = 0.0, lambda = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = order[i];
    sv += v[j];
    sd += d[j];
    lambda = (sv - mass) / sd;
    if (i + 1 == n) break;
    const std::size_t nx = order[i + 1];
    if (v[nx] <= lambda * d[nx]) break;
  }
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = std::max(v[j] - lambda * d[j], 0.0);
  return out;
}

}  // namespace

void MinimizeOptions::validate() const {
  if (max_iters < 0) throw ConfigurationError("minimize: max_iters must be >= 0");
  if (!(grad_tol > 0.0)) throw ConfigurationError("minimize: grad_tol must be > 0");
  if (!(step_init > 0.0)) throw ConfigurationError("minimize: step_init must be > 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ConfigurationError("minimize: armijo_c must lie in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw ConfigurationError("minimize: backtrack_factor must lie in (0, 1)");
  if (rearrange_every < 0) throw ConfigurationError("minimize: rearrange_every must be >= 0");
  if (!(rho_floor >= 0.0)) throw ConfigurationError("minimize: rho_floor must be >= 0");
}

GridProfile project_feasible(std::span<const double> v, double A) {
  if (!(A > 0.0) || !std::isfinite(A)) throw DomainError("project_feasible: A must be positive");
  const std::size_t n = v.size();
  if (n == 0) throw ConfigurationError("project_feasible: empty input");
  bool nonneg = true;
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError("project_feasible: non-finite entry");
    nonneg = nonneg && x >= 0.0;
  }
  std::vector<double> in(v.begin(), v.end());
  // Already feasible up to rounding: the projection is the identity.
  if (nonneg && std::abs(mean(in) - A) <= 1e-13 * std::max(1.0, A)) return GridProfile(std::move(in), A);

  std::vector<double> u(in);
  std::sort(u.begin(), u.end(), std::greater<>());
  const double mass = A * static_cast<double>(n);
  double cum = 0.0, lambda = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cum += u[k];
    const double cand = (cum - mass) / static_cast<double>(k + 1);
    if (k + 1 == n || u[k + 1] <= cand) {
      lambda = cand;
      break;
    }
  }
  for (double& x : in) x = std::max(x - lambda, 0.0);
  // Remove the last rounding in the mean from the positive entries.
  const double err = mean(in) - A;
  if (err != 0.0) {
    std::size_t pos = 0;
    for (double x : in) pos += x > 0.0;
    const double shift = err * static_cast<double>(n) / static_cast<double>(pos);
    for (double& x : in)
      if (x > 0.0) x = std::max(x - shift, 0.0);
  }
  return GridProfile(std::move(in), A);
}

GridProfile ansatz_profile(const ModelParams& params, std::size_t N) {
  validate(params);
  if (!is_power_of_two(N)) throw ConfigurationError("ansatz: N must be a power of two");
  const double rho0 = std::pow(params.epsilon, -1.0 / params.n);
  if (rho0 < params.A) throw InfeasibleError("ansatz invalid: eps^(-1/n) < A");
  const double w = params.A / (2.0 * rho0);
  const double h = 1.0 / static_cast<double>(N);
  std::vector<double> rho(N, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    const double x = grid_x(N, j);
    const double overlap = std::max(0.0, std::min(x + 0.5 * h, w) - std::max(x - 0.5 * h, -w));
    rho[j] = rho0 * overlap / h;
  }
  return project_feasible(rho, params.A);
}

double detect_support(const GridProfile& p, double threshold_frac) {
  const double peak = *std::max_element(p.rho().begin(), p.rho().end());
  const double thr = threshold_frac * peak;
  double r = 0.0;
  bool any_below = false;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] > thr)
      r = std::max(r, std::abs(p.x(j)));
    else
      any_below = true;
  }
  if (!any_below) return 0.5;
  return std::min(0.5, r + 0.5 / static_cast<double>(p.size()));
}

namespace {

MinimizeResult minimize_core(const GridProfile& init, const KernelTable& K, const ModelParams& params,
                             const MinimizeOptions& opts) {
  validate(params);
  init.require_feasible("minimize_energy");
  if (init.size() != K.N) throw ConfigurationError("minimize: profile and kernel sizes differ");
  const double A = init.mean_slope();
  const Objective obj(K, params, opts.rho_floor);

  State cur = obj.evaluate(std::vector<double>(init.rho().begin(), init.rho().end()));
  if (!std::isfinite(cur.E)) throw NonFiniteEnergyError("minimize: non-finite initial energy", cur.rho);

  MinimizeResult res{init, {}, 0, false, 0.0, 0.5, 0.0, {cur.E}};
  double alpha = opts.step_init;
  std::vector<double> d, v(cur.rho.size());
  const std::size_t n = cur.rho.size();
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const auto pg_point = project_feasible(step_from(cur.rho, cur.g, 1.0), A);
    res.pg_norm = rms_diff(cur.rho, pg_point.rho());
    if (res.pg_norm <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    obj.scaling(cur.rho, d);
    const double shift = support_multiplier(cur);
    State next;
    double dE = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 200; ++bt) {
      for (std::size_t j = 0; j < n; ++j) v[j] = cur.rho[j] - alpha * d[j] * cur.g[j];
      next = obj.evaluate(project_scaled(v, d, A));
      if (!std::isfinite(next.E)) {
        std::ostringstream os;
        os << "minimize: non-finite energy at iteration " << it;
        throw NonFiniteEnergyError(os.str(), next.rho);
      }
      double slope_dir = 0.0;
      for (std::size_t j = 0; j < n; ++j) slope_dir += (cur.g[j] - shift) * (next.rho[j] - cur.rho[j]);
      slope_dir /= static_cast<double>(n);
      dE = obj.difference(cur, next, shift);
      if (dE <= opts.armijo_c * slope_dir) {
        accepted = true;
        break;
      }
      alpha *= opts.backtrack_factor;
    }
    if (!accepted || !(dE <= 0.0)) break;  // no descent left at machine precision

    // Barzilai-Borwein step in the scaled metric.
    double ss = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double s = next.rho[j] - cur.rho[j];
      ss += s * s / d[j];
      sy += s * (next.g[j] - cur.g[j]);
    }
    alpha = (sy > 0.0) ? std::clamp(ss / sy, 1e-10, 1e10) : opts.step_init;
    const double E_prev = res.energy_trace.back();
    cur = std::move(next);
    res.energy_trace.push_back(E_prev + dE);

    if (opts.rearrange_every > 0 && (it + 1) % opts.rearrange_every == 0) {
      auto star = center_profile(rearrange_decreasing(GridProfile(cur.rho, A)));
      State cand = obj.evaluate(std::vector<double>(star.rho().begin(), star.rho().end()));
      const double dS = obj.difference(cur, cand, support_multiplier(cur));
      if (dS < 0.0) {
        cur = std::move(cand);
        res.energy_trace.push_back(res.energy_trace.back() + dS);
        alpha = opts.step_init;
      }
    }
  }
  std::vector<double> rho = std::move(cur.rho);
  res.iterations = it;
  res.profile = GridProfile(rho, A);
  res.energy = total_energy(res.profile, K, params);
  res.support_radius = detect_support(center_profile(res.profile));
  const double peak = *std::max_element(rho.begin(), rho.end());
  std::unique_ptr<bool[]> mask(new bool[rho.size()]);
  for (std::size_t j = 0; j < rho.size(); ++j) mask[j] = rho[j] > 1e-6 * peak;
  res.el_residual = el_residual(res.profile, K, params, std::span<const bool>(mask.get(), rho.size()));
  return res;
}

}  // namespace

MinimizeResult minimize_energy(const GridProfile& init, const KernelTable& K, const ModelParams& params,
                               const MinimizeOptions& opts) {
  opts.validate();
  MinimizeResult res = minimize_core(init, K, params, opts);
  if (!opts.parity_polish) return res;

  // Restart from the half-cell average, which swaps cell- and edge-centered
  // bunches; keep whichever local minimum is lower.
  const std::size_t N = res.profile.size();
  std::vector<double> q(N);
  for (std::size_t j = 0; j < N; ++j) q[j] = 0.5 * (res.profile[j] + res.profile[(j + 1) % N]);
  MinimizeResult alt = minimize_core(project_feasible(q, res.profile.mean_slope()), K, params, opts);
  if (alt.converged && alt.energy.total < res.energy.total) {
    alt.iterations += res.iterations;
    res.energy_trace.push_back(alt.energy.total);
    alt.energy_trace = std::move(res.energy_trace);
    return alt;
  }
  return res;
}

double linear_growth_rate(const ModelParams& params, long k) {
  const double q = kTwoPi * static_cast<double>(k);
  const double kappa = params.eps_pow() * phi_second(params.A, params);
  return q * q * (2.0 * s_constant(params.m) * std::pow(std::abs(static_cast<double>(k)), params.m + 1.0) - kappa * q * q);
}

GridProfile evolve_continuum(const GridProfile& init, const KernelTable& K, const ModelParams& params, double T,
                             double dt, const EvolveOptions& opts) {
  validate(params);
  if (!(dt > 0.0) || !(T >= 0.0)) throw ConfigurationError("evolve: need dt > 0 and T >= 0");
  if (init.size() != K.N) throw ConfigurationError("evolve: profile and kernel sizes differ");
  for (double r : init.rho())
    if (!(r > 0.0)) throw DomainError("evolve: initial density must be strictly positive");
  const std::size_t n = init.size();
  const double A = init.mean_slope();
  const double eps = params.eps_pow();
  const double phi2_mean = phi_second(A, params);
  const Objective obj(K, params, 0.0);

  std::vector<double> q4(n / 2 + 1, 0.0), khat(n / 2 + 1, 0.0);
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double q = kTwoPi * static_cast<double>(k);
    q4[k] = q * q * q * q;
    khat[k] = (k == n / 2) ? 0.5 * K.multipliers[k] : K.multipliers[k];
  }

  std::vector<double> rho(init.rho().begin(), init.rho().end());
  double E = obj.energy(rho);
  double t = 0.0, h = dt;
  std::vector<double> nl(n);
  std::vector<cplx> next(n / 2 + 1);
  while (T - t > 1e-12 * T) {
    double step = std::min(h, T - t);
    // Stabilization: the largest local curvature, never below the one at
    // rho = A, so the linearization about the flat state is exact.
    double phi2 = phi2_mean;
    for (double r : rho) phi2 = std::max(phi2, phi_second(r, params));
    const auto c = rfft(rho);
    for (std::size_t j = 0; j < n; ++j) nl[j] = phi_prime(rho[j], params) - phi2 * rho[j];
    const auto cn = rfft(nl);
    bool done = false;
    for (int halving = 0; halving <= opts.max_halvings; ++halving) {
      next[0] = A;
      for (std::size_t k = 1; k <= n / 2; ++k) {
        const double L = q4[k] * (khat[k] - eps * phi2);
        const double z = L * step;
        const double phi1 = (std::abs(z) < 1e-12) ? step : std::expm1(z) / L;
        next[k] = std::exp(z) * c[k] - phi1 * eps * q4[k] * cn[k];
      }
      auto cand = irfft(next, n);
      const double shift = A - mean(cand);
      bool positive = true;
      for (double& r : cand) {
        r += shift;
        positive = positive && r > 0.0 && std::isfinite(r);
      }
      if (positive) {
        const double E_new = obj.energy(cand);
        if (E_new <= E + opts.energy_tol * std::abs(E)) {
          rho.swap(cand);
          E = E_new;
          t = (step == T - t) ? T : t + step;
          done = true;
          break;
        }
      }
      if (halving == opts.max_halvings) {
        if (!positive) {
          std::ostringstream os;
          os << "evolve: step density reached zero near t = " << t;
          throw DegenerateSlopeError(os.str(), t);
        }
        throw NumericalError("evolve: energy increase persists after step halving");
      }
      step *= 0.5;
    }
    if (!done) break;
    h = std::min(dt, 2.0 * step);
    if (opts.observer) opts.observer(t, GridProfile(rho, A));
  }
  return GridProfile(std::move(rho), A);
}

}  // namespace stepbunch
