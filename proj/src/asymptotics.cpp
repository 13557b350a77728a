#include "stepbunch/asymptotics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stepbunch/discrete.hpp"
#include "stepbunch/fft.hpp"

namespace stepbunch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Internal step for the monopole integral; the corrected sum is O(a^4).
constexpr int kMonopoleSteps = 4096;

}  // namespace

void TestSurface::validate() const {
  if (!(A > 0.0) || !std::isfinite(A)) throw DomainError("test surface: A must be positive");
  if (harmonic < 1) throw DomainError("test surface: harmonic must be >= 1");
  if (!std::isfinite(delta) || !(p0() > 0.0)) throw DomainError("test surface: requires |delta| < 1/A");
}

double TestSurface::derivative(double h, int r) const {
  const double w = kTwoPi * harmonic;
  switch (r) {
    case 0: return h / A + delta * std::sin(w * h) / w;
    case 1: return 1.0 / A + delta * std::cos(w * h);
    case 2: return -delta * w * std::sin(w * h);
    case 3: return -delta * w * w * std::cos(w * h);
    case 4: return delta * w * w * w * std::sin(w * h);
    default: throw DomainError("test surface: derivative order must be 0..4");
  }
}

double TestSurface::x(double h) const { return derivative(h, 0); }
double TestSurface::x_h(double h) const { return derivative(h, 1); }
double TestSurface::x_hh(double h) const { return derivative(h, 2); }

double TestSurface::invert(double xv) const {
  double h = A * xv;
  for (int it = 0; it < 100; ++it) {
    const double step = (x(h) - xv) / x_h(h);
    h -= step;
    if (!std::isfinite(h)) break;
    if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(h))) return h;
  }
  throw SurfaceInversionError("test surface: Newton inversion did not converge at x = " + std::to_string(xv));
}

std::vector<QuadratureRow> quadrature_convergence(double m, int p, const std::vector<double>& a_list,
                                                  bool leading_correction) {
#ifdef STEPBUNCH_HAS_FLOAT128
  using Real = rm::quad;
  const Real exact = tgammaq(Real(1) - Real(m));
#else
  using Real = long double;
  const Real exact = std::tgamma(1.0L - m);
#endif
  SingularIntegrand<Real> f;
  f.g = [](Real h) { return rm::exp(-h); };
  for (int r = 0; r < 2 * p; ++r) f.derivatives.push_back(r % 2 == 0 ? Real(1) : Real(-1));
  f.decay_rate = 1;
  std::vector<QuadratureRow> rows;
  for (double a : a_list) {
    QuadratureRow row;
    row.a = a;
    row.error = static_cast<double>(rm::abs(euler_maclaurin_singular<Real>(f, Real(m), Real(a), p, leading_correction) - exact));
    if (!rows.empty() && row.error > 0.0 && rows.back().error > 0.0)
      row.observed_order = std::log(rows.back().error / row.error) / std::log(rows.back().a / a);
    rows.push_back(row);
  }
  return rows;
}

std::array<double, 2> monopole_g_even_derivatives(const TestSurface& ts, double xi, double s) {
  // (x(xi+h) - x(xi))/h = c1 (1 + b1 h + b2 h^2 + b3 h^3 + ...)
  const double c1 = ts.derivative(xi, 1);
  const double b1 = ts.derivative(xi, 2) / 2.0 / c1;
  const double b2 = ts.derivative(xi, 3) / 6.0 / c1;
  const double b3 = ts.derivative(xi, 4) / 24.0 / c1;
  const double al = -s - 1.0;
  const double scale = std::pow(c1, al);
  const double k1 = al * b1;
  const double k3 = al * b3 + al * (al - 1.0) * b1 * b2 + al * (al - 1.0) * (al - 2.0) / 6.0 * b1 * b1 * b1;
  // g(h) = sum_r 2 c'_{2r+1} h^(2r)
  return {2.0 * scale * k1, 4.0 * scale * k3};
}

double monopole_integral(const TestSurface& ts, double xi, double s) {
  ts.validate();
  if (!(s > -1.0 && s < 1.0)) throw DomainError("monopole_integral: requires -1 < s < 1");
  const auto d = monopole_g_even_derivatives(ts, xi, s);
  SingularIntegrand<double> f;
  f.derivatives = {d[0], 0.0, d[1], 0.0};
  f.trapezoid = [&](double a) {
    const auto M = static_cast<std::size_t>(std::lround(1.0 / a));
    const double x0 = ts.x(xi);
    std::vector<double> pos(M);
    for (std::size_t j = 0; j < M; ++j) pos[j] = ts.x(xi + static_cast<double>(j) * a) - x0;
    return discrete_sigma(StepConfiguration(ts.period_x(), std::move(pos), a), 0, s, 1e-14);
  };
  return euler_maclaurin_singular<double>(f, s, 1.0 / kMonopoleSteps, 2);
}

double sigma_asymptotic_prediction(const TestSurface& ts, double xi, double s, double a) {
  ts.validate();
  if (s == 1.0) throw DomainError("sigma_asymptotic_prediction: s = 1 is not supported");
  if (!(s > -1.0)) throw DomainError("sigma_asymptotic_prediction: requires s > -1");
  if (!(a > 0.0)) throw DomainError("sigma_asymptotic_prediction: a must be positive");
  const double correction =
      -(s + 1.0) * zeta(s) * std::pow(a, 1.0 - s) * ts.x_hh(xi) * std::pow(ts.x_h(xi), -s - 2.0);
  if (s > 1.0) return correction;
  return monopole_integral(ts, xi, s) + correction;
}

ContinuumMu continuum_mu_parts(const TestSurface& ts, const ModelParams& params, double x, std::size_t grid) {
  ts.validate();
  validate(params);
  if (std::abs(params.A - ts.A) > 1e-12 * ts.A)
    throw ConfigurationError("continuum_mu_on_surface: model slope differs from the surface slope");
  if (!is_power_of_two(grid) || grid < 16) throw ConfigurationError("continuum_mu_on_surface: bad grid size");

  const double P = ts.period_x();
  std::vector<double> rho(grid);
  double h = ts.invert(x);
  const double h_at_x = h;
  for (std::size_t j = 0; j < grid; ++j) {
    if (j > 0) h = ts.invert(x + P * static_cast<double>(j) / static_cast<double>(grid));
    rho[j] = 1.0 / ts.x_h(h);
  }
  const auto c = rfft(rho);
  const double I = s_constant(params.m) / std::pow(kTwoPi, params.m + 1.0);
  double acc = 0.0;
  for (std::size_t k = grid / 2 - 1; k >= 1; --k) acc += std::pow(kTwoPi * k / P, params.m) * c[k].imag();

  ContinuumMu out;
  out.nonlocal = -4.0 * I * acc;
  const double xh = ts.x_h(h_at_x);
  const double r = 1.0 / xh;
  const double r_x = -ts.x_hh(h_at_x) / (xh * xh * xh);
  out.local = -params.eps_pow() * (std::pow(r, params.m - 1.0) + params.gamma * std::pow(r, params.n - 1.0)) * r_x;
  out.total = out.nonlocal + out.local;
  return out;
}

double continuum_mu_on_surface(const TestSurface& ts, const ModelParams& params, double x) {
  return continuum_mu_parts(ts, params, x).total;
}

std::vector<ConsistencyRow> consistency_experiment(const TestSurface& ts, const PhysicalParams& p_phys,
                                                   const std::vector<double>& a_list, double xi) {
  ts.validate();
  validate(p_phys);
  if (a_list.empty()) throw ConfigurationError("consistency: empty a_list");
  const double gamma0 = derive_model_params(p_phys, ts.A).gamma;
  const double zm = std::abs(zeta(p_phys.m)), zn = zeta(p_phys.n);

  std::vector<ConsistencyRow> rows;
  for (std::size_t k = 0; k < a_list.size(); ++k) {
    const double a = a_list[k];
    if (!(a > 0.0) || (k > 0 && !(a < a_list[k - 1])))
      throw ConfigurationError("consistency: a_list must be positive and decreasing");
    const long M = std::lround(1.0 / a);
    if (M < 2 || std::abs(M * a - 1.0) > 1e-12) throw ConfigurationError("consistency: 1/a must be an integer >= 2");
    const long i = ((std::lround(xi / a) % M) + M) % M;

    PhysicalParams pa = p_phys;
    pa.lattice_a = a;
    pa.alpha2 = p_phys.alpha1 * gamma0 * std::pow(a, p_phys.n - p_phys.m) * (p_phys.m + 1.0) * zm / ((p_phys.n + 1.0) * zn);
    const ModelParams model = derive_model_params(pa, ts.A);

    const double x0 = ts.x(0.0);
    std::vector<double> pos(M);
    for (long j = 0; j < M; ++j) pos[j] = ts.x(j * a) - x0;
    StepConfiguration cfg(ts.period_x(), std::move(pos), a);

    ConsistencyRow row;
    row.a = a;
    row.epsilon = model.epsilon;
    row.gamma = model.gamma;
    row.mu_atomistic = atomistic_mu(cfg, pa, static_cast<std::size_t>(i), 1e-14);
    row.mu_continuum = continuum_mu_on_surface(ts, model, ts.x(i * a));
    row.ratio = (row.mu_atomistic - row.mu_continuum) / model.eps_pow();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace stepbunch
