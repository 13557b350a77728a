#include "stepbunch/energy.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "stepbunch/error.hpp"
#include "stepbunch/fft.hpp"

namespace stepbunch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_size(const GridProfile& p, const KernelTable& K) {
  if (p.size() != K.N) throw ConfigurationError("profile and kernel table sizes differ");
}

// Composite Gauss-Legendre nodes on [0, 1/2], panels halving toward 0.
struct Nodes {
  std::vector<double> x, w;
};

Nodes graded_nodes(int panels) {
  using GL = boost::math::quadrature::gauss<double, 20>;
  const auto& ab = GL::abscissa();
  const auto& wt = GL::weights();
  Nodes n;
  auto add_panel = [&](double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < ab.size(); ++i) {
      n.x.push_back(mid + half * ab[i]);
      n.w.push_back(half * wt[i]);
      n.x.push_back(mid - half * ab[i]);
      n.w.push_back(half * wt[i]);
    }
  };
  double hi = 0.5;
  for (int p = 0; p < panels; ++p) {
    add_panel(0.5 * hi, hi);
    hi *= 0.5;
  }
  add_panel(0.0, hi);
  return n;
}

}  // namespace

double phi(double xi, const ModelParams& params) {
  if (!std::isfinite(xi)) throw DomainError("phi: non-finite argument");
  if (xi < 0.0) throw InfeasibleError("phi: negative step density");
  if (xi == 0.0) return 0.0;
  const double m = params.m, n = params.n;
  const double dipole = params.gamma / (n * (n + 1.0)) * std::pow(xi, n + 1.0);
  if (m == 0.0) return xi * std::log(xi) + dipole;
  return std::pow(xi, m + 1.0) / (m * (m + 1.0)) + dipole;
}

double phi_prime(double xi, const ModelParams& params) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("phi_prime: requires xi > 0");
  const double m = params.m, n = params.n;
  const double dipole = params.gamma / n * std::pow(xi, n);
  if (m == 0.0) return std::log(xi) + 1.0 + dipole;
  return std::pow(xi, m) / m + dipole;
}

double phi_second(double xi, const ModelParams& params) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("phi_second: requires xi > 0");
  return std::pow(xi, params.m - 1.0) + params.gamma * std::pow(xi, params.n - 1.0);
}

double local_energy(const GridProfile& p, const ModelParams& params) {
  p.require_feasible("local_energy");
  // Summing in sorted order makes the value a function of the multiset only.
  std::vector<double> vals;
  vals.reserve(p.size());
  for (double r : p.rho()) vals.push_back(phi(r, params));
  std::sort(vals.begin(), vals.end());
  double sum = 0.0;
  for (double v : vals) sum += v;
  return params.eps_pow() * sum / static_cast<double>(p.size());
}

double nonlocal_energy_fourier(const SpectralProfile& s, const ModelParams& params) {
  const double sm = s_constant(params.m);
  const long half = static_cast<long>(s.N / 2);
  double sum = 0.0;
  for (long k = half; k >= 1; --k)
    sum += 2.0 * std::pow(static_cast<double>(k), params.m + 1.0) * std::norm(s.coefficient(k));
  return sm * sum;
}

double nonlocal_energy_kernel(const GridProfile& p, const KernelTable& K) {
  require_size(p, K);
  const auto c = rfft(p.rho());
  const std::size_t half = K.N / 2;
  double sum = 0.25 * K.multipliers[half] * std::norm(c[half]);
  for (std::size_t k = half - 1; k >= 1; --k) sum += K.multipliers[k] * std::norm(c[k]);
  const double A = p.mean_slope();
  return 0.5 * K.multipliers[0] * A * A + sum;
}

double null_lagrangian(const GridProfile& p, const KernelTable& K) {
  require_size(p, K);
  p.require_feasible("null_lagrangian");
  const auto conv = convolve_spectral(K, p.rho());
  double sum = 0.0;
  for (double v : conv) sum += v;
  return 0.5 * p.mean_slope() * sum / static_cast<double>(p.size());
}

EnergyBreakdown total_energy(const GridProfile& p, const KernelTable& K, const ModelParams& params) {
  require_size(p, K);
  EnergyBreakdown e;
  e.local = local_energy(p, params);
  e.null_lagrangian = null_lagrangian(p, K);
  e.nonlocal_tilde = nonlocal_energy_fourier(to_spectral(p), params);
  e.total = -nonlocal_energy_kernel(p, K) + e.local;
  return e;
}

std::vector<double> chemical_potential(const GridProfile& p, const KernelTable& K, const ModelParams& params) {
  require_size(p, K);
  const std::size_t n = p.size();
  auto g = convolve_spectral(K, p.rho());
  const double eps = params.eps_pow();
  for (std::size_t j = 0; j < n; ++j) {
    if (!(p[j] > 0.0)) throw DomainError("chemical_potential: requires rho > 0 everywhere");
    g[j] -= eps * phi_prime(p[j], params);
  }
  return spectral_derivative(g);
}

std::vector<double> nonlocal_potential_fourier(const SpectralProfile& s, double m) {
  const double sm = s_constant(m);
  const std::size_t n = s.N;
  std::vector<cplx> rho_hat(n / 2 + 1, 0.0);
  for (std::size_t k = 1; k < n / 2; ++k)
    rho_hat[k] = -2.0 * sm * std::pow(static_cast<double>(k), m + 1.0) * s.h[k];
  return density_from_spectrum(rho_hat, n);
}

std::vector<double> nonlocal_apply_fractional(const GridProfile& p, double m) {
  if (!(m > -1.0 && m < 1.0)) throw DomainError("nonlocal_apply_fractional: m must lie in (-1, 1)");
  const std::size_t n = p.size();
  const auto f = height_from_density(p);
  const auto c = rfft(f);
  std::vector<cplx> c2(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) c2[k] = -std::pow(kTwoPi * static_cast<double>(k), 2) * c[k];
  c2[n / 2] = 0.0;
  const auto f2 = irfft(c2, n);

  const Nodes nodes = graded_nodes(14);
  std::vector<double> acc(n, 0.0);
  std::vector<cplx> cs(c.size());
  for (std::size_t q = 0; q < nodes.x.size(); ++q) {
    const double w = nodes.x[q];
    // f(x + w) + f(x - w) on the grid.
    for (std::size_t k = 0; k < c.size(); ++k) cs[k] = 2.0 * std::cos(kTwoPi * static_cast<double>(k) * w) * c[k];
    cs[n / 2] = 0.0;
    const auto s = irfft(cs, n);
    const double core_w = nodes.w[q] * std::pow(w, -m - 2.0);
    const double image_w = nodes.w[q] * (hurwitz_zeta(m + 2.0, 1.0 + w) + hurwitz_zeta(m + 2.0, 1.0 - w));
    for (std::size_t j = 0; j < n; ++j)
      acc[j] += core_w * (2.0 * f[j] - s[j] + f2[j] * w * w) - image_w * s[j];
  }
  std::vector<double> out(n);
  const double taylor = std::pow(0.5, 1.0 - m) / (1.0 - m);
  const double far = 2.0 * std::pow(0.5, -m - 1.0);
  for (std::size_t j = 0; j < n; ++j) out[j] = (m + 1.0) * (acc[j] - f2[j] * taylor) + far * f[j];
  return out;
}

double el_residual(const GridProfile& p, const KernelTable& K, const ModelParams& params,
                   std::span<const bool> support_mask) {
  require_size(p, K);
  if (support_mask.size() != p.size()) throw ConfigurationError("el_residual: mask size mismatch");
  const auto conv = convolve_spectral(K, p.rho());
  const double eps = params.eps_pow();
  std::vector<double> r;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!support_mask[j]) continue;
    if (!(p[j] > 0.0)) throw DomainError("el_residual: rho must be positive on the support");
    r.push_back(-conv[j] + eps * phi_prime(p[j], params));
  }
  if (r.empty()) throw DomainError("el_residual: empty support");
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(r.size());
  double sup = 0.0;
  for (double v : r) sup = std::max(sup, std::abs(v - mean));
  return sup;
}

std::pair<double, double> interpolation_bound_check(const GridProfile& p, const KernelTable& K,
                                                    const ModelParams& params, std::size_t n_cut) {
  require_size(p, K);
  if (params.m != 0.0 || K.m != 0.0) throw DomainError("interpolation bound: requires m = 0");
  if (n_cut == 0) throw ConfigurationError("interpolation bound: N_cut must be positive");
  const double lhs = nonlocal_energy_fourier(to_spectral(p), params);
  double l2 = 0.0;
  for (double r : p.rho()) l2 += r * r;
  l2 /= static_cast<double>(p.size());
  const double A = p.mean_slope();
  const double nc = static_cast<double>(n_cut);
  return {lhs, 2.0 / nc * l2 + 3.0 * A * A + A * A * std::log(nc)};
}

}  // namespace stepbunch
