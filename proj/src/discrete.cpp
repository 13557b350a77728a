#include "stepbunch/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include <boost/numeric/odeint.hpp>

#include "stepbunch/error.hpp"

namespace stepbunch {

namespace {

constexpr int kMaxHeadImages = 8;

struct Crossing {};

// Paired lattice sum sum_{k != 0} sign(k) |x_{i+k} - x_i|^(-t), t = s + 1 > 0,
// on an increasing period x[0] < ... < x[Ns-1] < x[0] + L.
SigmaEvaluation paired_sum(const double* x, std::size_t Ns, double L, std::size_t i, double t, double tol) {
  struct Pair {
    double d, e;
  };
  std::vector<Pair> pairs;
  pairs.reserve(Ns - 1);
  for (std::size_t r = 1; r < Ns; ++r) {
    const std::size_t jf = i + r, jb = i + Ns - r;
    const double d = jf < Ns ? x[jf] - x[i] : x[jf - Ns] + L - x[i];
    const double e = jb >= Ns ? x[i] - x[jb - Ns] : x[i] - (x[jb] - L);
    if (!(d > 0.0) || !(e > 0.0)) throw DomainError("discrete_sigma: positions are not strictly increasing");
    pairs.push_back({d, e});
  }

  // Mean-value bound of sum_{q >= Q} |f(d + qL) - f(e + qL)|, f(y) = y^-t.
  auto bound = [&](int Q) {
    double b = 0.0;
    for (const auto& p : pairs) {
      const double lo = std::min(p.d, p.e) + Q * L, diff = std::abs(p.d - p.e);
      b += t * diff * std::pow(lo, -t - 1.0) + diff * std::pow(lo, -t) / L;
    }
    return b;
  };

  int Q = 0;
  double tail = bound(0);
  while (tail >= tol && Q < kMaxHeadImages) {
    Q = Q == 0 ? 1 : 2 * Q;
    tail = bound(Q);
  }

  double head = 0.0, rest = 0.0;
  for (const auto& p : pairs) {
    for (int q = 0; q < Q; ++q) head += std::pow(p.d + q * L, -t) - std::pow(p.e + q * L, -t);
    if (p.d != p.e) rest += hurwitz_difference(t, p.d / L + Q, p.e / L + Q);
  }
  SigmaEvaluation out;
  out.value = head + std::pow(L, -t) * rest;
  out.tail_bound = tail;
  out.images = Q;
  return out;
}

void check_order(const std::vector<double>& x, double L) {
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if (!(x[i + 1] > x[i])) throw Crossing{};
  if (!(x.front() + L > x.back())) throw Crossing{};
}

template <typename F>
void parallel_for(std::size_t n, int threads, F&& f) {
  const std::size_t nt = std::min<std::size_t>(std::max(threads, 1), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < nt; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += nt) f(i);
    });
  for (auto& th : pool) th.join();
}

double mu_raw(const double* x, std::size_t Ns, double L, std::size_t i, const PhysicalParams& p, double tol) {
  const double mono = paired_sum(x, Ns, L, i, p.m + 1.0, tol / p.alpha1).value;
  const double dip = paired_sum(x, Ns, L, i, p.n + 1.0, tol / p.alpha2).value;
  return p.alpha1 * mono - p.alpha2 * dip;
}

}  // namespace

StepConfiguration::StepConfiguration(double L, std::vector<double> positions, double lattice_a)
    : L_(L), x_(std::move(positions)), a_(lattice_a) {
  if (!(L_ > 0.0) || !std::isfinite(L_)) throw DomainError("step configuration: L must be positive");
  if (!(a_ > 0.0) || !std::isfinite(a_)) throw DomainError("step configuration: a must be positive");
  if (x_.size() < 2) throw DomainError("step configuration: need at least two steps per period");
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!(x_[i] >= 0.0 && x_[i] < L_)) throw DomainError("step configuration: positions must lie in [0, L)");
    if (i > 0 && !(x_[i] > x_[i - 1])) throw DomainError("step configuration: positions must be strictly increasing");
  }
}

double StepConfiguration::min_spacing() const {
  double m = x_.front() + L_ - x_.back();
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) m = std::min(m, x_[i + 1] - x_[i]);
  return m;
}

StepConfiguration uniform_train(std::size_t Ns, double L, double a) {
  if (Ns < 2) throw DomainError("uniform_train: Ns must be >= 2");
  std::vector<double> x(Ns);
  for (std::size_t i = 0; i < Ns; ++i) x[i] = L * static_cast<double>(i) / static_cast<double>(Ns);
  return StepConfiguration(L, std::move(x), a);
}

SigmaEvaluation discrete_sigma_detail(const StepConfiguration& c, std::size_t i, double s, double tol) {
  if (!(s > -1.0)) throw DomainError("discrete_sigma: the lattice sum diverges for s <= -1");
  if (!(tol > 0.0)) throw DomainError("discrete_sigma: tol must be positive");
  if (i >= c.size()) throw DomainError("discrete_sigma: index out of range");
  const double a = c.lattice_a();
  auto r = paired_sum(c.positions().data(), c.size(), c.period(), i, s + 1.0, tol / a);
  r.value *= a;
  r.tail_bound *= a;
  return r;
}

double discrete_sigma(const StepConfiguration& c, std::size_t i, double s, double tol) {
  return discrete_sigma_detail(c, i, s, tol).value;
}

double atomistic_mu(const StepConfiguration& c, const PhysicalParams& p, std::size_t i, double tol) {
  validate(p);
  return discrete_sigma(c, i, p.m, tol) - p.alpha2 / p.alpha1 * discrete_sigma(c, i, p.n, tol);
}

double unnormalized_mu(const StepConfiguration& c, const PhysicalParams& p, std::size_t i, double tol) {
  validate(p);
  if (!(tol > 0.0)) throw DomainError("unnormalized_mu: tol must be positive");
  if (i >= c.size()) throw DomainError("unnormalized_mu: index out of range");
  return mu_raw(c.positions().data(), c.size(), c.period(), i, p, tol);
}

std::vector<double> step_velocity(const std::vector<double>& x, double L, double, const PhysicalParams& p,
                                  double tol, int threads) {
  const std::size_t Ns = x.size();
  check_order(x, L);
  std::vector<double> mu(Ns);
  // Drive with dE/dx_i = -mu_i so that the flow dissipates the pair energy.
  parallel_for(Ns, threads, [&](std::size_t i) { mu[i] = -mu_raw(x.data(), Ns, L, i, p, tol); });
  std::vector<double> J(Ns);
  for (std::size_t i = 0; i < Ns; ++i) {
    const std::size_t k = (i + 1) % Ns;
    const double gap = k == 0 ? x[0] + L - x[i] : x[k] - x[i];
    J[i] = (mu[k] - mu[i]) / gap;
  }
  std::vector<double> v(Ns);
  for (std::size_t i = 0; i < Ns; ++i) v[i] = J[i] - J[(i + Ns - 1) % Ns];
  return v;
}

void DynamicsOptions::validate() const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigurationError("dynamics: t_end must be positive");
  if (!(dt_init > 0.0)) throw ConfigurationError("dynamics: dt_init must be positive");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigurationError("dynamics: rel_tol must be in (0, 1)");
  if (!(min_spacing_stop >= 0.0)) throw ConfigurationError("dynamics: min_spacing_stop must be >= 0");
  if (snapshot_every < 1) throw ConfigurationError("dynamics: snapshot_every must be >= 1");
  if (!(sigma_tol > 0.0)) throw ConfigurationError("dynamics: sigma_tol must be positive");
}

Trajectory step_dynamics(const StepConfiguration& c, const PhysicalParams& p, const DynamicsOptions& opts) {
  namespace ode = boost::numeric::odeint;
  validate(p);
  opts.validate();
  using State = std::vector<double>;

  const double L = c.period(), a = c.lattice_a();
  const std::size_t Ns = c.size();
  auto rhs = [&](const State& x, State& dxdt, double) {
    dxdt = step_velocity(x, L, a, p, opts.sigma_tol, opts.threads);
    for (double v : dxdt)
      if (!std::isfinite(v)) throw Crossing{};
  };
  auto stepper = ode::make_controlled<ode::runge_kutta_dopri5<State>>(opts.rel_tol * L / Ns, opts.rel_tol);

  auto spacing = [&](const State& x) {
    double m = x.front() + L - x.back();
    for (std::size_t i = 0; i + 1 < Ns; ++i) m = std::min(m, x[i + 1] - x[i]);
    return m;
  };

  Trajectory tr;
  State x = c.positions();
  double t = 0.0, dt = std::min(opts.dt_init, opts.t_end);
  tr.times.push_back(t);
  tr.positions.push_back(x);
  if (opts.min_spacing_stop > 0.0 && spacing(x) <= opts.min_spacing_stop) {
    tr.stopped_early = true;
    return tr;
  }

  const double dt_floor = 1e-14 * opts.t_end;
  while (opts.t_end - t > 1e-14 * opts.t_end) {
    const bool last = dt >= opts.t_end - t;
    if (last) dt = opts.t_end - t;
    const State backup = x;
    const double t0 = t;
    bool ok = false;
    try {
      ok = stepper.try_step(rhs, x, t, dt) == ode::success;
      if (ok && !(spacing(x) > 0.0)) throw Crossing{};
    } catch (const Crossing&) {
      x = backup;
      t = t0;
      dt *= 0.5;
      ok = false;
    }
    if (!ok) {
      ++tr.rejected_steps;
      if (dt < dt_floor) throw TopologyError("step_dynamics: steps crossed at t = " + std::to_string(t), t);
      continue;
    }
    if (last) t = opts.t_end;
    ++tr.accepted_steps;
    const bool stop = opts.min_spacing_stop > 0.0 && spacing(x) <= opts.min_spacing_stop;
    const bool done = !(opts.t_end - t > 1e-14 * opts.t_end);
    if (tr.accepted_steps % opts.snapshot_every == 0 || stop || done) {
      tr.times.push_back(t);
      tr.positions.push_back(x);
    }
    if (stop) {
      tr.stopped_early = true;
      break;
    }
  }
  return tr;
}

}  // namespace stepbunch
