#pragma once

#include <array>
#include <cstdint>
#include <type_traits>

#include "stepbunch/error.hpp"
#include "stepbunch/real_math.hpp"

namespace stepbunch {

// Lennard-Jones (m, n) step-step interaction in physical units.
struct PhysicalParams {
  double alpha1 = 1.0;     // monopole strength
  double alpha2 = 1.0;     // dipole strength
  double lattice_a = 1.0;  // step height / lattice constant
  double m = 0.0;
  double n = 2.0;
};

// Dimensionless continuum parameters. `epsilon` is the regularization
// length; energies use epsilon^(1-m).
struct ModelParams {
  double m = 0.0;
  double n = 2.0;
  double epsilon = 1e-3;
  double gamma = 1.0;
  double A = 1.0;

  double eps_pow() const;  // epsilon^(1-m)
};

void validate(const PhysicalParams& p);
void validate(const ModelParams& p);

// Riemann zeta on the real axis. Eta series with Borwein/Euler acceleration
// for s > 0, functional equation for s <= 0.
double zeta(double s);

// Dirichlet eta, eta(1) = log 2.
double eta(double s);

// Gamma via the Lanczos approximation (g = 7, 9 terms) and reflection.
double lanczos_gamma(double x);

// S_m = (2 pi)^(m+1) * int_0^inf z^(-m-1) sin z dz, for -1 < m < 1.
double s_constant(double m);

ModelParams derive_model_params(const PhysicalParams& p, double A);

// l_e = (alpha2/alpha1)^(1/(n-m)), the root of V'.
double equilibrium_spacing(const PhysicalParams& p);

// V'(x) = alpha1 x^(-m-1) - alpha2 x^(-n-1) for x > 0.
double potential_derivative(const PhysicalParams& p, double x);

// Hurwitz difference sum_{k>=0} [(k+a)^-s - (k+b)^-s], analytically
// continued in s (finite at s = 1). Requires a, b > 0, or a = 0 with s < 0.
double hurwitz_difference(double s, double a, double b);

// Hurwitz zeta sum_{k>=0} (k+a)^-s for s > 1, a > 0.
double hurwitz_zeta(double s, double a);

namespace detail {

struct Bernoulli {
  std::int64_t num;
  std::int64_t den;
};

// B_2, B_4, ..., B_34.
inline constexpr std::array<Bernoulli, 17> kBernoulliEven{{
    {1, 6},
    {-1, 30},
    {1, 42},
    {-1, 30},
    {5, 66},
    {-691, 2730},
    {7, 6},
    {-3617, 510},
    {43867, 798},
    {-174611, 330},
    {854513, 138},
    {-236364091, 2730},
    {8553103, 6},
    {-23749461029, 870},
    {8615841276005, 14322},
    {-7709321041217, 510},
    {2577687858367, 6},
}};

}  // namespace detail

// Second, independent zeta path: Euler-Maclaurin corrected partial sums.
// Valid for every s != 1; run it in extended precision for s << 0 where the
// partial sums cancel heavily.
template <typename Real>
Real zeta_euler_maclaurin(Real s, int terms = 30) {
  if (s == Real(1)) throw SingularityError("zeta: pole at s = 1");
  Real sum = 0;
  for (int k = terms - 1; k >= 1; --k) sum += rm::pow(Real(k), -s);
  const Real N = terms;
  sum += rm::pow(N, Real(1) - s) / (s - Real(1));
  sum += rm::pow(N, -s) / Real(2);
  // B_2j/(2j)! * s (s+1) ... (s+2j-2) * N^(-s-2j+1)
  Real rising = s;  // (s)_{2j-1}
  Real fact = 2;    // (2j)!
  Real npow = rm::pow(N, -s - Real(1));
  for (std::size_t j = 1; j <= detail::kBernoulliEven.size(); ++j) {
    const auto& b = detail::kBernoulliEven[j - 1];
    sum += Real(b.num) / Real(b.den) / fact * rising * npow;
    const Real t = Real(2 * j);
    rising *= (s + t - Real(1)) * (s + t);
    fact *= (t + Real(1)) * (t + Real(2));
    npow /= N * N;
  }
  return sum;
}

}  // namespace stepbunch
