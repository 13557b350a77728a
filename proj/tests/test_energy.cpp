#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "stepbunch/energy.hpp"
#include "stepbunch/error.hpp"
#include "stepbunch/fft.hpp"

using namespace stepbunch;
using std::numbers::pi;

namespace {

ModelParams params_for(double m, double n = 2.0, double eps = 0.05, double gamma = 1.0, double A = 1.0) {
  ModelParams p;
  p.m = m;
  p.n = n;
  p.epsilon = eps;
  p.gamma = gamma;
  p.A = A;
  return p;
}

// Strictly positive smooth density with modes up to kmax.
GridProfile smooth_profile(std::size_t n, double A, int kmax, std::mt19937_64& rng, double amp = 0.4) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(kmax + 1), b(kmax + 1);
  double total = 0.0;
  for (int k = 1; k <= kmax; ++k) a[k] = u(rng), b[k] = u(rng), total += std::abs(a[k]) + std::abs(b[k]);
  std::vector<double> r(n, A);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid_x(n, j);
    for (int k = 1; k <= kmax; ++k) r[j] += amp * A / total * (a[k] * std::cos(2 * pi * k * x) + b[k] * std::sin(2 * pi * k * x));
  }
  return GridProfile(std::move(r), A);
}

// Nonnegative, rough: random bumps plus zeros.
GridProfile rough_profile(std::size_t n, double A, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> r(n);
  double sum = 0.0;
  for (auto& v : r) {
    v = u(rng) < 0.3 ? 0.0 : u(rng) * u(rng);
    sum += v;
  }
  for (auto& v : r) v *= A * n / sum;
  return GridProfile::from_samples(std::move(r));
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("phi and its derivatives") {
  auto p = params_for(0.0, 2.0, 0.1, 3.0);
  CHECK(phi(1.0, p) == doctest::Approx(3.0 / 6.0).epsilon(1e-15));
  for (double m : {-0.5, 0.0, 0.5}) CHECK(phi(0.0, params_for(m)) == 0.0);
  CHECK_THROWS_AS(phi(-1e-3, p), InfeasibleError);
  CHECK_THROWS_AS(phi_prime(0.0, p), DomainError);
  CHECK_THROWS_AS(phi_second(-1.0, p), DomainError);

  for (double m : {-0.5, 0.0, 0.5}) {
    auto q = params_for(m, 2.5, 0.1, 1.7);
    const double x = 1.3;
    auto err = [&](double d) {
      return std::abs((phi(x + d, q) - phi(x - d, q)) / (2 * d) - phi_prime(x, q));
    };
    CHECK(std::log2(err(1e-2) / err(5e-3)) == doctest::Approx(2.0).epsilon(0.02));
    const double fd2 = (phi_prime(x + 1e-5, q) - phi_prime(x - 1e-5, q)) / 2e-5;
    CHECK(fd2 == doctest::Approx(phi_second(x, q)).epsilon(1e-8));
  }
}

TEST_CASE("local energy") {
  auto p = params_for(0.0, 2.0, 0.2, 1.5);
  CHECK(local_energy(GridProfile::uniform(64, 1.0), p) == doctest::Approx(0.2 * 1.5 / 6.0).epsilon(1e-14));
  auto q = params_for(0.5, 3.0, 0.3, 2.0, 0.8);
  CHECK(local_energy(GridProfile::uniform(64, 0.8), q) == doctest::Approx(q.eps_pow() * phi(0.8, q)).epsilon(1e-14));
  std::mt19937_64 rng(4);
  auto r = rough_profile(128, 1.0, rng);
  CHECK(local_energy(rearrange_decreasing(r), p) == local_energy(r, p));
  std::vector<double> bad(16, 1.0);
  bad[3] = -0.5;
  bad[4] = 2.5;
  CHECK_THROWS_AS(local_energy(GridProfile(bad, 1.0), p), InfeasibleError);
}

TEST_CASE("nonlocal energy, Fourier form") {
  const std::size_t n = 64;
  auto p = params_for(0.0);
  CHECK(nonlocal_energy_fourier(to_spectral(GridProfile::uniform(n, 1.0)), p) == 0.0);
  const double c = 0.3;
  std::vector<double> r(n), r2(n), r3(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid_x(n, j);
    r[j] = 1.0 - 2 * pi * c * std::sin(2 * pi * x);  // h = c cos(2 pi x)
    r2[j] = 1.0 + 0.2 * std::cos(2 * pi * 5 * x);
    r3[j] = r[j] + r2[j] - 1.0;
  }
  const double e1 = nonlocal_energy_fourier(to_spectral(GridProfile(r, 1.0)), p);
  CHECK(e1 == doctest::Approx(pi * pi * c * c / 2).epsilon(1e-13));
  for (double m : {-0.5, 0.0, 0.5}) {
    auto q = params_for(m);
    const double a = nonlocal_energy_fourier(to_spectral(GridProfile(r, 1.0)), q);
    const double b = nonlocal_energy_fourier(to_spectral(GridProfile(r2, 1.0)), q);
    const double ab = nonlocal_energy_fourier(to_spectral(GridProfile(r3, 1.0)), q);
    CHECK(ab == doctest::Approx(a + b).epsilon(1e-13));
  }
}

TEST_CASE("nonlocal energy, kernel form and null Lagrangian") {
  const std::size_t n = 256;
  std::mt19937_64 rng(12);
  for (double m : {-0.5, 0.0, 0.5}) {
    auto K = build_kernel_table(m, n);
    auto q = params_for(m);
    const double A = 1.3;
    const double w0 = 0.5 * A * A * K.l1_norm;
    CHECK(nonlocal_energy_kernel(GridProfile::uniform(n, A), K) == doctest::Approx(w0).epsilon(1e-14));
    CHECK(null_lagrangian(GridProfile::uniform(n, A), K) == doctest::Approx(w0).epsilon(1e-14));
    for (int t = 0; t < 100; ++t) {
      auto p = (t % 2) ? rough_profile(n, A, rng) : smooth_profile(n, A, 12, rng);
      const double I = nonlocal_energy_kernel(p, K);
      const double It = nonlocal_energy_fourier(to_spectral(p), q);
      CHECK(std::abs(I - It - w0) <= 1e-10 * std::max(1.0, I));
      CHECK(std::abs(null_lagrangian(p, K) - w0) <= 1e-10);
    }
  }
  auto K0 = build_kernel_table(0.0, n);
  CHECK(null_lagrangian(GridProfile::uniform(n, 1.0), K0) == doctest::Approx(std::log(2.0) / 2).epsilon(1e-14));
  std::vector<double> r(n);
  for (std::size_t j = 0; j < n; ++j) r[j] = 1.5 + std::cos(2 * pi * grid_x(n, j));
  CHECK(nonlocal_energy_kernel(GridProfile(r, 1.5), K0) ==
        doctest::Approx(0.5 * 1.5 * 1.5 * std::log(2.0) + 0.25 * K0.multiplier(1)).epsilon(1e-14));
  std::vector<double> neg(n, 1.0);
  neg[0] = -1.0;
  neg[1] = 3.0;
  CHECK_THROWS_AS(null_lagrangian(GridProfile(neg, 1.0), K0), InfeasibleError);
}

TEST_CASE("total energy") {
  const std::size_t n = 256;
  std::mt19937_64 rng(99);
  for (double m : {-0.5, 0.0, 0.5}) {
    auto K = build_kernel_table(m, n);
    auto q = params_for(m, 2.0, 0.02, 1.0, 1.0);
    auto flat = total_energy(GridProfile::uniform(n, 1.0), K, q);
    CHECK(flat.total == doctest::Approx(-0.5 * K.l1_norm + q.eps_pow() * phi(1.0, q)).epsilon(1e-13));
    CHECK(std::abs(flat.nonlocal_tilde) < 1e-14);
    for (int t = 0; t < 100; ++t) {
      auto p = (t % 2) ? rough_profile(n, 1.0, rng) : smooth_profile(n, 1.0, 10, rng, 0.9);
      auto e = total_energy(p, K, q);
      CHECK(std::abs(e.total - (-(e.nonlocal_tilde + e.null_lagrangian) + e.local)) <= 1e-12 * std::max(1.0, std::abs(e.total)));
      if (t < 10) {
        auto s = total_energy(shift_profile(p, 37), K, q);
        CHECK(std::abs(s.total - e.total) <= 1e-13 * std::max(1.0, std::abs(e.total)));
      }
      auto star = total_energy(center_profile(rearrange_decreasing(p)), K, q);
      CHECK(star.total <= e.total + 1e-12);
    }
  }
}

TEST_CASE("chemical potential") {
  const std::size_t n = 128;
  auto K0 = build_kernel_table(0.0, n);
  auto q = params_for(0.0, 2.0, 0.1, 1.0, 1.0);
  CHECK(max_abs(chemical_potential(GridProfile::uniform(n, 1.0), K0, q)) < 1e-13);

  const double c = 0.3;
  std::vector<double> r(n);
  for (std::size_t j = 0; j < n; ++j) r[j] = 1.0 + c * std::cos(2 * pi * grid_x(n, j));
  auto tiny = params_for(0.0, 2.0, 1e-300);
  auto mu = chemical_potential(GridProfile(r, 1.0), K0, tiny);
  for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(mu[j] + pi * c * std::sin(2 * pi * grid_x(n, j))) < 1e-13);

  std::mt19937_64 rng(5);
  for (double m : {-0.5, 0.0, 0.5}) {
    auto K = build_kernel_table(m, n);
    auto t = params_for(m, 2.0, 1e-300);
    auto p = smooth_profile(n, 1.0, 20, rng);
    auto a = chemical_potential(p, K, t);
    auto b = nonlocal_potential_fourier(to_spectral(p), m);
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(a[j] - b[j]));
    CHECK(err <= 1e-8 * max_abs(b));
  }
  std::vector<double> z(n, 1.0);
  z[5] = 0.0;
  z[6] = 2.0;
  CHECK_THROWS_AS(chemical_potential(GridProfile(z, 1.0), K0, q), DomainError);
}

TEST_CASE("chemical potential is the gradient of the energy") {
  const std::size_t n = 128;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double ms[] = {-0.5, 0.0, 0.5};
  for (int t = 0; t < 20; ++t) {
    const double m = ms[t % 3];
    auto K = build_kernel_table(m, n);
    auto q = params_for(m, 2.0 + 0.5 * (t % 2), 0.05, 2.0, 1.0);
    auto p = smooth_profile(n, 1.0, 10, rng, 0.8);
    auto mu = chemical_potential(p, K, q);
    for (int d = 0; d < 10; ++d) {
      std::vector<double> phi_dir(n, 0.0);
      for (int k = 1; k <= 6; ++k) {
        const double a = u(rng), b = u(rng);
        for (std::size_t j = 0; j < n; ++j)
          phi_dir[j] += (a * std::cos(2 * pi * k * grid_x(n, j)) + b * std::sin(2 * pi * k * grid_x(n, j))) / k;
      }
      auto psi = spectral_antiderivative(phi_dir);
      double pairing = 0.0;
      for (std::size_t j = 0; j < n; ++j) pairing += mu[j] * psi[j];
      pairing /= n;
      const double step = 1e-4;
      auto shifted = [&](double s) {
        std::vector<double> r(p.rho().begin(), p.rho().end());
        for (std::size_t j = 0; j < n; ++j) r[j] += s * phi_dir[j];
        return total_energy(GridProfile(std::move(r), 1.0), K, q).total;
      };
      const double fd = (shifted(step) - shifted(-step)) / (2 * step);
      INFO("t = " << t << " d = " << d);
      CHECK(std::abs(pairing - fd) <= 1e-6 * std::abs(fd));
    }
  }
}

TEST_CASE("fractional form agrees with the spectral operator") {
  const std::size_t n = 128;
  CHECK(max_abs(nonlocal_apply_fractional(GridProfile::uniform(n, 1.0), 0.3)) < 1e-12);
  std::mt19937_64 rng(3);
  for (double m : {-0.5, 0.0, 0.5}) {
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = 1.0 + 0.3 * std::cos(2 * pi * 2 * grid_x(n, j));
    for (const auto& p : {GridProfile(r, 1.0), smooth_profile(n, 1.0, 16, rng)}) {
      auto frac = nonlocal_apply_fractional(p, m);
      auto spec = nonlocal_potential_fourier(to_spectral(p), m);
      double err = 0.0;
      for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(frac[j] + spec[j]));
      INFO("m = " << m << " err = " << err);
      CHECK(err <= 1e-4 * max_abs(spec));
    }
  }
}

TEST_CASE("Euler-Lagrange residual") {
  const std::size_t n = 64;
  auto K = build_kernel_table(0.0, n);
  auto q = params_for(0.0);
  bool mask[64];
  std::fill(mask, mask + 64, true);
  CHECK(el_residual(GridProfile::uniform(n, 1.0), K, q, std::span<const bool>(mask, n)) < 1e-14);
  bool none[64] = {};
  CHECK_THROWS_AS(el_residual(GridProfile::uniform(n, 1.0), K, q, std::span<const bool>(none, n)), DomainError);
}

TEST_CASE("interpolation bound") {
  const std::size_t n = 256;
  auto K = build_kernel_table(0.0, n);
  auto q = params_for(0.0);
  auto [l0, r0] = interpolation_bound_check(GridProfile::uniform(n, 1.0), K, q, 4);
  CHECK(l0 == 0.0);
  CHECK(l0 <= r0);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    auto p = smooth_profile(n, 1.0, 24, rng, 0.95);
    auto [l, r] = interpolation_bound_check(p, K, q, 16);
    CHECK(l <= r);
  }
  CHECK_THROWS_AS(interpolation_bound_check(GridProfile::uniform(n, 1.0), K, params_for(0.5), 4), DomainError);
}
