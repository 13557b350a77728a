#include "stepbunch/kernel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "stepbunch/error.hpp"
#include "stepbunch/fft.hpp"
#include "stepbunch/special.hpp"

namespace stepbunch {

namespace {

void check_exponent(double m) {
  if (!(m > -1.0 && m < 1.0)) throw DomainError("kernel: exponent m must lie in (-1, 1)");
}

// K_m at |z| in (0, 1/2], no argument checks.
double kernel_abs(double m, double z) {
  if (m == 0.0) return -std::log(std::sin(std::numbers::pi * z));
  return (hurwitz_difference(m, z, 0.5) + hurwitz_difference(m, 1.0 - z, 0.5)) / m;
}

double kernel_at_origin(double m) { return 2.0 / m * zeta(m) * (2.0 - std::pow(2.0, m)); }

// Periodic extension, any real z.
double kernel_periodic(double m, double z) {
  z -= std::round(z);
  return kernel_abs(m, std::abs(z));
}

}  // namespace

double KernelTable::multiplier(long k) const {
  const std::size_t a = static_cast<std::size_t>(k < 0 ? -k : k);
  if (a >= multipliers.size()) throw DomainError("kernel table: wavenumber out of range");
  return multipliers[a];
}

double kernel_value(double m, double z) {
  check_exponent(m);
  if (!std::isfinite(z) || std::abs(z) > 0.5) throw DomainError("kernel_value: z must lie in [-1/2, 1/2]");
  if (z == 0.0) {
    if (m >= 0.0) throw SingularityError("kernel_value: K_m(0) is infinite for m >= 0");
    return kernel_at_origin(m);
  }
  return kernel_abs(m, std::abs(z));
}

double kernel_derivative(double m, double z) {
  check_exponent(m);
  if (!std::isfinite(z) || std::abs(z) > 0.5) throw DomainError("kernel_derivative: z must lie in (-1/2, 1/2)");
  if (z == 0.0) throw SingularityError("kernel_derivative: singular at z = 0");
  const double a = std::abs(z);
  double d;
  if (m == 0.0)
    d = -std::numbers::pi / std::tan(std::numbers::pi * a);
  else
    d = -hurwitz_difference(m + 1.0, a, 1.0 - a);
  return z > 0.0 ? d : -d;
}

double kernel_multiplier(double m, long k) {
  check_exponent(m);
  const double s = s_constant(m);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  if (k == 0) return s * eta(1.0 - m) / pi2;
  return s * std::pow(std::abs(static_cast<double>(k)), m - 1.0) / (2.0 * pi2);
}

KernelTable build_kernel_table(double m, std::size_t N) {
  check_exponent(m);
  if (!is_power_of_two(N) || N < 16) throw ConfigurationError("kernel table: N must be a power of two >= 16");
  KernelTable t;
  t.m = m;
  t.N = N;
  t.multipliers.resize(N / 2 + 1);
  for (std::size_t k = 0; k <= N / 2; ++k) t.multipliers[k] = kernel_multiplier(m, static_cast<long>(k));
  t.l1_norm = t.multipliers[0];

  const double h = 1.0 / static_cast<double>(N);
  const double half = 0.5 * h;
  t.real_samples.assign(N, 0.0);
  // Singular cell around z = 0: the endpoint singularity |z|^-m (or log)
  // is handled by the double-exponential rule.
  boost::math::quadrature::tanh_sinh<double> ts;
  const double c0 = ts.integrate([m](double z) { return kernel_abs(m, z); }, 0.0, half, 1e-14);
  t.real_samples[N / 2] = 2.0 * c0 / h;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (std::size_t d = 1; d <= N / 2; ++d) {
    const double zc = static_cast<double>(d) * h;
    const double v = GK::integrate([m](double z) { return kernel_periodic(m, z); }, zc - half, zc + half, 6, 1e-11);
    t.real_samples[N / 2 + d - (d == N / 2 ? N : 0)] = v / h;
    if (d < N / 2) t.real_samples[N / 2 - d] = v / h;
  }
  return t;
}

std::vector<double> convolve_spectral(const KernelTable& table, std::span<const double> f) {
  if (f.size() != table.N) throw ConfigurationError("convolve: size mismatch with kernel table");
  auto c = rfft(f);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= table.multipliers[k];
  c[table.N / 2] *= 0.5;
  return irfft(c, table.N);
}

std::vector<double> convolve_cells(const KernelTable& table, std::span<const double> f) {
  const std::size_t n = table.N;
  if (f.size() != n) throw ConfigurationError("convolve: size mismatch with kernel table");
  // Reorder samples by offset d = i - j (mod N) and use the DFT product.
  std::vector<double> w(n);
  for (std::size_t d = 0; d < n; ++d) w[d] = table.real_samples[(d + n / 2) % n];
  auto cw = rfft(w);
  auto cf = rfft(f);
  for (std::size_t k = 0; k < cf.size(); ++k) cf[k] *= cw[k];
  return irfft(cf, n);
}

}  // namespace stepbunch
