#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "stepbunch/error.hpp"
#include "stepbunch/real_math.hpp"
#include "stepbunch/special.hpp"

namespace stepbunch {

// x(h) = h/A + delta * sin(2 pi k h)/(2 pi k), k = harmonic. Strictly
// increasing when |delta| < 1/A.
struct TestSurface {
  double A = 1.0;
  double delta = 0.0;
  int harmonic = 1;

  void validate() const;
  double x(double h) const;
  double x_h(double h) const;
  double x_hh(double h) const;
  // r-th derivative of x, r = 0..4.
  double derivative(double h, int r) const;
  double p0() const { return 1.0 / A - std::abs(delta); }
  double period_x() const { return 1.0 / A; }
  // Solves x(h) = x by Newton's method to 1e-14.
  double invert(double x) const;
};

// G(h) = h^-m g(h) on (0, inf).
template <typename Real>
struct SingularIntegrand {
  std::function<Real(Real)> g;
  std::vector<Real> derivatives;  // g^(r)(0), r = 0, 1, ...
  // |g(h)| <= C exp(-decay_rate h); required unless `trapezoid` is given.
  Real decay_rate = 0;
  // Optional closed form for a sum_{j>=1} G(j a), e.g. a periodic image sum.
  std::function<Real(Real)> trapezoid;
};

namespace detail {

template <typename Real>
Real zeta_real(Real s) {
  if constexpr (std::is_same_v<Real, double>) {
    return zeta(s);
  } else {
    return zeta_euler_maclaurin<Real>(s, 40);
  }
}

template <typename Real>
Real trapezoid_sum(const SingularIntegrand<Real>& f, Real m, Real a) {
  if (f.trapezoid) return f.trapezoid(a);
  if (!(f.decay_rate > Real(0)))
    throw ConfigurationError("euler_maclaurin_singular: integrand needs a decay certificate");
  const Real tol = rm::sum_tolerance<Real>();
  const Real geom = -rm::expm1(-f.decay_rate * a);  // 1 - exp(-lambda a)
  const Real monotone_from = (rm::abs(m) + Real(1)) / f.decay_rate;
  Real sum = 0, comp = 0, prev = 0;
  for (long j = 1;; ++j) {
    const Real h = Real(j) * a;
    const Real term = a * rm::pow(h, -m) * f.g(h);
    // Neumaier summation
    const Real t = sum + term;
    comp += rm::abs(sum) >= rm::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    if (h > monotone_from && rm::abs(term) <= rm::abs(prev) &&
        Real(2) * rm::abs(term) / geom <= tol * rm::abs(sum + comp))
      break;
    prev = term;
    if (j > 200000000L) throw ConfigurationError("euler_maclaurin_singular: sum did not converge");
  }
  return sum + comp;
}

}  // namespace detail

// Corrected trapezoid rule for int_0^inf h^-m g(h) dh:
//   a sum_{j>=1} G(j a) - sum_{r=0}^{2p-1} zeta(m-r)/r! g^(r)(0) a^(r-m+1).
// With leading_correction = false the r = 0 term is dropped.
template <typename Real>
Real euler_maclaurin_singular(const SingularIntegrand<Real>& f, Real m, Real a, int p,
                              bool leading_correction = true) {
  if (!(m < Real(1))) throw DomainError("euler_maclaurin_singular: requires m < 1");
  if (!(a > Real(0))) throw DomainError("euler_maclaurin_singular: step must be positive");
  if (p < 1) throw DomainError("euler_maclaurin_singular: p must be >= 1");
  if (f.derivatives.size() < static_cast<std::size_t>(2 * p))
    throw ConfigurationError("euler_maclaurin_singular: need derivatives g^(r)(0) for r <= 2p-1");
  Real out = detail::trapezoid_sum(f, m, a);
  Real fact = 1;
  for (int r = 0; r < 2 * p; ++r) {
    if (r > 0) fact *= Real(r);
    if (r == 0 && !leading_correction) continue;
    const Real d = f.derivatives[r];
    if (d == Real(0)) continue;
    out -= detail::zeta_real<Real>(m - Real(r)) / fact * d * rm::pow(a, Real(r) - m + Real(1));
  }
  return out;
}

struct QuadratureRow {
  double a = 0.0;
  double error = 0.0;
  double observed_order = 0.0;  // log2(e(2a)/e(a)); 0 on the first row
};

// Convergence table for g(h) = exp(-h), whose integral is Gamma(1-m). Uses
// quad precision when available.
std::vector<QuadratureRow> quadrature_convergence(double m, int p, const std::vector<double>& a_list,
                                                  bool leading_correction = true);

// int_0^inf G_s(h; xi) dh for -1 < s < 1, with
// G_s(h; xi) = (x(xi+h) - x(xi))^(-s-1) - (x(xi) - x(xi-h))^(-s-1).
double monopole_integral(const TestSurface& ts, double xi, double s);

// g(0) and g''(0) for g(h) = h^s G_s(h; xi), from the Taylor coefficients of x.
std::array<double, 2> monopole_g_even_derivatives(const TestSurface& ts, double xi, double s);

// Asymptotic sigma_i^(s) at xi = i a: for -1 < s < 1,
//   int G_s - (s+1) zeta(s) a^(1-s) x_hh x_h^(-s-2);
// for s > 1, the leading -(s+1) zeta(s) a^(1-s) x_hh x_h^(-s-2).
double sigma_asymptotic_prediction(const TestSurface& ts, double xi, double s, double a);

struct ContinuumMu {
  double nonlocal = 0.0;  // -P.V. int (x-y) h_x(y)/|x-y|^(m+2) dy
  double local = 0.0;     // -eps^(1-m) (h_x^(m-1) + gamma h_x^(n-1)) h_xx
  double total = 0.0;
};

// Continuum chemical potential at position x for the density h_x of the
// surface; the nonlocal part is evaluated spectrally on `grid` points.
ContinuumMu continuum_mu_parts(const TestSurface& ts, const ModelParams& params, double x, std::size_t grid = 512);
double continuum_mu_on_surface(const TestSurface& ts, const ModelParams& params, double x);

struct ConsistencyRow {
  double a = 0.0;
  double mu_atomistic = 0.0;
  double mu_continuum = 0.0;
  double ratio = 0.0;  // (mu_a - mu)/eps^(1-m)
  double epsilon = 0.0;
  double gamma = 0.0;
};

// For each a (1/a integral), samples x_i = x(i a) and compares mu^a at the
// step nearest xi with the continuum potential there. alpha2 is rescaled
// with a so that gamma keeps the value implied by p_phys.
std::vector<ConsistencyRow> consistency_experiment(const TestSurface& ts, const PhysicalParams& p_phys,
                                                   const std::vector<double>& a_list, double xi = 0.25);

}  // namespace stepbunch
