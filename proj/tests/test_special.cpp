#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "stepbunch/special.hpp"

using namespace stepbunch;
using std::numbers::pi;

namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// Plain eta partial sums with repeated averaging (independent of the
// production Borwein weights).
double eta_averaged(double s) {
  constexpr int kTerms = 40;
  std::vector<double> partial(kTerms);
  double acc = 0.0;
  for (int k = 1; k <= kTerms; ++k) {
    acc += ((k % 2) ? 1.0 : -1.0) * std::pow(k, -s);
    partial[k - 1] = acc;
  }
  for (int level = 0; level < kTerms - 1; ++level)
    for (int i = 0; i + 1 < kTerms - level; ++i) partial[i] = 0.5 * (partial[i] + partial[i + 1]);
  return partial[0];
}

double s_constant_quadrature(double m) {
  boost::math::quadrature::ooura_fourier_sin<double> integrator(1e-13);
  auto f = [m](double z) { return std::pow(z, -m - 1.0); };
  return std::pow(2.0 * pi, m + 1.0) * integrator.integrate(f, 1.0).first;
}

}  // namespace

TEST_CASE("zeta special values") {
  CHECK(rel_err(zeta(2.0), pi * pi / 6.0) < 1e-14);
  CHECK(zeta(0.0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(rel_err(zeta(-1.0), -1.0 / 12.0) < 1e-13);
  CHECK(rel_err(zeta(4.0), std::pow(pi, 4) / 90.0) < 1e-14);
  CHECK(zeta(-2.0) == 0.0);
  CHECK_THROWS_AS(zeta(1.0), SingularityError);
  CHECK_THROWS_AS(zeta(std::nan("")), DomainError);
}

TEST_CASE("zeta against averaged eta series for s > 1") {
  for (double s : {1.1, 1.5, 2.5, 3.7, 8.0, 20.0, 29.5})
    CHECK(rel_err(zeta(s), eta_averaged(s) / (1.0 - std::pow(2.0, 1.0 - s))) < 1e-12);
}

TEST_CASE("zeta agrees with Euler-Maclaurin partial sums on [-10, 10]") {
  for (int i = 0; i < 50; ++i) {
    double s = -10.0 + 20.0 * (i + 0.5) / 50.0;
    if (std::abs(s - 1.0) < 1e-9) continue;
#ifdef STEPBUNCH_HAS_FLOAT128
    const double want = static_cast<double>(zeta_euler_maclaurin<rm::quad>(rm::quad(s), 40));
#else
    const double want = zeta_euler_maclaurin<long double>(s, 40);
#endif
    INFO("s = " << s);
    CHECK(std::abs(zeta(s) - want) <= 1e-10 * std::max(1.0, std::abs(want)));
  }
}

#ifdef STEPBUNCH_HAS_FLOAT128
namespace {
// Quad-precision oracle: EM sums directly for s > -8, reflection with the
// libquadmath gamma below that (the direct partial sums cancel too much).
double zeta_quad_oracle(double s) {
  using rm::quad;
  if (s > -8.0) return static_cast<double>(zeta_euler_maclaurin<quad>(quad(s), 60));
  const quad qs = s;
  const quad pi_q = rm::pi<quad>();
  const quad z1 = zeta_euler_maclaurin<quad>(quad(1) - qs, 60);
  return static_cast<double>(powq(quad(2), qs) * powq(pi_q, qs - quad(1)) * sinq(pi_q * qs / quad(2)) *
                             tgammaq(quad(1) - qs) * z1);
}
}  // namespace

TEST_CASE("zeta relative accuracy on [-30, 30]") {
  for (double s = -29.75; s <= 30.0; s += 0.5) {
    INFO("s = " << s);
    const double want = zeta_quad_oracle(s);
    CHECK(std::abs(zeta(s) - want) < 1e-12 * std::abs(want));
  }
}
#endif

TEST_CASE("eta") {
  CHECK(rel_err(eta(1.0), std::log(2.0)) < 1e-15);
  CHECK(rel_err(eta(0.0), 0.5) < 1e-15);
  CHECK(rel_err(eta(2.0), pi * pi / 12.0) < 1e-14);
  CHECK(rel_err(eta(1.0 + 1e-9), std::log(2.0)) < 1e-8);
}

TEST_CASE("lanczos gamma") {
  CHECK(rel_err(lanczos_gamma(5.0), 24.0) < 1e-13);
  CHECK(rel_err(lanczos_gamma(0.5), std::sqrt(pi)) < 1e-13);
  for (double x : {-2.5, -0.3, 0.1, 1.7, 12.3, 30.5})
    CHECK(std::abs(lanczos_gamma(x) / std::tgamma(x) - 1.0) < 1e-13);
}

TEST_CASE("s_constant") {
  CHECK(rel_err(s_constant(0.0), pi * pi) < 1e-15);
  CHECK(rel_err(s_constant(-0.5), pi) < 1e-13);
  for (double m : {-0.9, -0.5, 0.0, 0.5, 0.9}) CHECK(s_constant(m) > 0.0);
  CHECK(std::abs(s_constant(1e-6) - pi * pi) <= 1e-4);
  CHECK(std::abs(s_constant(-1e-6) - pi * pi) <= 1e-4);
  CHECK_THROWS_AS(s_constant(1.0), DomainError);
}

TEST_CASE("s_constant matches oscillatory quadrature") {
  for (double m : {-0.9, -0.7, -0.5, -0.2, 0.2, 0.5, 0.7}) {
    INFO("m = " << m);
    CHECK(std::abs(s_constant(m) - s_constant_quadrature(m)) < 1e-8 * s_constant(m));
  }
}

TEST_CASE("derive_model_params") {
  PhysicalParams p{1.0, 1.0, 0.01, 0.0, 2.0};
  auto mp = derive_model_params(p, 1.0);
  CHECK(rel_err(mp.epsilon, 0.005) < 1e-13);
  CHECK(rel_err(mp.gamma, pi * pi * 1e4) < 1e-13);
  p.lattice_a = 1.0;
  mp = derive_model_params(p, 1.0);
  CHECK(rel_err(mp.epsilon, 0.5) < 1e-13);
  CHECK(rel_err(mp.gamma, pi * pi) < 1e-13);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> um(-0.95, 0.95), un(1.05, 4.0), ua(0.01, 2.0);
  for (int i = 0; i < 40; ++i) {
    PhysicalParams q{ua(rng), ua(rng), ua(rng), um(rng), un(rng)};
    auto r = derive_model_params(q, 0.7);
    CHECK(r.epsilon > 0.0);
    CHECK(r.gamma > 0.0);
    const double lhs = r.gamma * r.eps_pow();
    const double rhs = q.alpha2 * std::pow(q.lattice_a, q.m) / (q.alpha1 * std::pow(q.lattice_a, q.n)) *
                       (q.n + 1.0) * zeta(q.n) * std::pow(q.lattice_a, 1.0 - q.m);
    CHECK(rel_err(lhs, rhs) < 1e-12);
  }
  CHECK_THROWS_AS(derive_model_params(PhysicalParams{1, 1, 1, 1.0, 2.0}, 1.0), ValidationError);
  CHECK_THROWS_AS(derive_model_params(p, 0.0), ValidationError);
}

TEST_CASE("equilibrium spacing") {
  CHECK(rel_err(equilibrium_spacing(PhysicalParams{1.0, 4.0, 1.0, 0.0, 2.0}), 2.0) < 1e-15);
  CHECK(rel_err(equilibrium_spacing(PhysicalParams{2.0, 2.0, 1.0, 0.3, 3.1}), 1.0) < 1e-15);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> um(-0.95, 0.95), un(1.05, 4.0), ua(0.1, 3.0);
  for (int i = 0; i < 50; ++i) {
    PhysicalParams q{ua(rng), ua(rng), 1.0, um(rng), un(rng)};
    const double le = equilibrium_spacing(q);
    const double scale = q.alpha1 * std::pow(le, -q.m - 1.0);
    CHECK(std::abs(potential_derivative(q, le)) <= 1e-12 * scale);
  }
}

TEST_CASE("hurwitz helpers") {
  CHECK(rel_err(hurwitz_zeta(2.0, 1.0), pi * pi / 6.0) < 1e-14);
  CHECK(rel_err(hurwitz_zeta(3.0, 0.5), 7.0 * zeta(3.0)) < 1e-13);
  // sum_k [1/(k+1/2) - 1/(k+1)] = 2 log 2 at s = 1.
  CHECK(rel_err(hurwitz_difference(1.0, 0.5, 1.0), 2.0 * std::log(2.0)) < 1e-13);
  // zeta(s, a) - zeta(s, a+1) = a^-s, continued to s < 1.
  for (double s : {-0.7, 0.0, 0.4, 1.0, 2.5})
    CHECK(rel_err(hurwitz_difference(s, 0.3, 1.3), std::pow(0.3, -s)) < 1e-13);
}
