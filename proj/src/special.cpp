#include "stepbunch/special.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace stepbunch {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    std::ostringstream os;
    os << what << ": non-finite argument";
    throw DomainError(os.str());
  }
}

// sin(pi * x) with exact argument reduction, so that large |x| and the
// integers stay accurate.
double sin_pi(double x) {
  double r = std::fmod(x, 2.0);  // (-2, 2)
  if (r > 1.0) r -= 2.0;
  if (r < -1.0) r += 2.0;
  if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
  if (r > 0.5) r = 1.0 - r;
  if (r < -0.5) r = -1.0 - r;
  return std::sin(kPi * r);
}

// Alternating series for eta(s), s > 0, with Borwein's weights.
double eta_borwein(double s) {
  constexpr int n = 32;
  std::array<double, n + 1> d{};
  double term = 1.0;  // n (n+i-1)! 4^i / ((n-i)! (2i)!) at i = 0
  double acc = term;
  d[0] = acc;
  for (int i = 1; i <= n; ++i) {
    term *= 4.0 * (n + i - 1) * (n - i + 1) / ((2.0 * i) * (2.0 * i - 1.0));
    acc += term;
    d[i] = acc;
  }
  double sum = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    sum += sign * (d[k] - d[n]) * std::pow(k + 1.0, -s);
  }
  return -sum / d[n];
}

constexpr std::array<double, 9> kLanczos{
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

}  // namespace

double ModelParams::eps_pow() const { return std::pow(epsilon, 1.0 - m); }

void validate(const PhysicalParams& p) {
  if (!(p.m > -1.0 && p.m < 1.0 && p.n > 1.0))
    throw DomainError("exponents must satisfy -1 < m < 1 < n");
  if (!(p.alpha1 > 0.0 && p.alpha2 > 0.0 && p.lattice_a > 0.0))
    throw DomainError("alpha1, alpha2 and lattice_a must be positive");
}

void validate(const ModelParams& p) {
  if (!(p.m > -1.0 && p.m < 1.0 && p.n > 1.0))
    throw DomainError("exponents must satisfy -1 < m < 1 < n");
  if (!(p.epsilon > 0.0 && p.gamma > 0.0 && p.A > 0.0))
    throw DomainError("epsilon, gamma and A must be positive");
  if (!std::isfinite(p.epsilon) || !std::isfinite(p.gamma) || !std::isfinite(p.A))
    throw DomainError("model parameters must be finite");
}

double lanczos_gamma(double x) {
  require_finite(x, "gamma");
  if (x <= 0.0 && x == std::floor(x))
    throw SingularityError("gamma: pole at non-positive integer");
  if (x < 0.5) return kPi / (sin_pi(x) * lanczos_gamma(1.0 - x));
  const double z = x - 1.0;
  double a = kLanczos[0];
  const double t = z + 7.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z + i);
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

double zeta(double s) {
  require_finite(s, "zeta");
  if (s == 1.0) throw SingularityError("zeta: pole at s = 1");
  if (s > 0.0) {
    // 1 - 2^(1-s), relative accuracy kept near s = 1.
    const double denom = -std::expm1((1.0 - s) * std::numbers::ln2);
    return eta_borwein(s) / denom;
  }
  if (s == 0.0) return -0.5;
  const double half = 0.5 * s;
  if (half == std::floor(half)) return 0.0;  // trivial zeros
  return std::pow(2.0, s) * std::pow(kPi, s - 1.0) * sin_pi(half) *
         lanczos_gamma(1.0 - s) * zeta(1.0 - s);
}

double eta(double s) {
  require_finite(s, "eta");
  if (s == 1.0) return std::numbers::ln2;
  if (s > 0.0) return eta_borwein(s);
  return -std::expm1((1.0 - s) * std::numbers::ln2) * zeta(s);
}

double s_constant(double m) {
  require_finite(m, "s_constant");
  if (!(m > -1.0 && m < 1.0)) throw DomainError("s_constant: requires -1 < m < 1");
  // Gamma(-m) sin(-pi m/2) = Gamma(1-m) sin(pi m/2)/m, regular at m = 0.
  const double x = 0.5 * kPi * m;
  double sinc_half;  // sin(pi m/2)/m
  if (std::abs(m) < 1e-4) {
    sinc_half = 0.5 * kPi * (1.0 - x * x / 6.0 + x * x * x * x / 120.0);
  } else {
    sinc_half = std::sin(x) / m;
  }
  return std::pow(2.0 * kPi, m + 1.0) * lanczos_gamma(1.0 - m) * sinc_half;
}

ModelParams derive_model_params(const PhysicalParams& p, double A) {
  validate(p);
  if (!(A > 0.0)) throw DomainError("mean slope A must be positive");
  const double zm = std::abs(zeta(p.m));
  const double zn = zeta(p.n);
  ModelParams out;
  out.m = p.m;
  out.n = p.n;
  out.A = A;
  // epsilon^(1-m) = (m+1)|zeta(m)| a^(1-m)
  out.epsilon = std::pow((p.m + 1.0) * zm, 1.0 / (1.0 - p.m)) * p.lattice_a;
  out.gamma = p.alpha2 * std::pow(p.lattice_a, p.m) /
              (p.alpha1 * std::pow(p.lattice_a, p.n)) * (p.n + 1.0) * zn /
              ((p.m + 1.0) * zm);
  return out;
}

double equilibrium_spacing(const PhysicalParams& p) {
  validate(p);
  return std::pow(p.alpha2 / p.alpha1, 1.0 / (p.n - p.m));
}

double potential_derivative(const PhysicalParams& p, double x) {
  return p.alpha1 * std::pow(x, -p.m - 1.0) - p.alpha2 * std::pow(x, -p.n - 1.0);
}

namespace {

constexpr int kHurwitzDirect = 24;
constexpr int kHurwitzBernoulli = 12;

// Euler-Maclaurin tail sum_{k>=N} f(k+x) for f(y) = y^-s, without the
// integral term: (1/2) f(X) + sum_j B_2j/(2j)! (s)_{2j-1} X^(-s-2j+1).
double em_tail_without_integral(double s, double X) {
  double sum = 0.5 * std::pow(X, -s);
  double rising = s;
  double fact = 2.0;
  double xp = std::pow(X, -s - 1.0);
  for (int j = 1; j <= kHurwitzBernoulli; ++j) {
    const auto& b = detail::kBernoulliEven[j - 1];
    sum += static_cast<double>(b.num) / static_cast<double>(b.den) / fact * rising * xp;
    const double t = 2.0 * j;
    rising *= (s + t - 1.0) * (s + t);
    fact *= (t + 1.0) * (t + 2.0);
    xp /= X * X;
  }
  return sum;
}

double power_or_zero(double base, double s) {
  if (base == 0.0) return 0.0;  // only reached with s < 0
  return std::pow(base, -s);
}

}  // namespace

double hurwitz_difference(double s, double a, double b) {
  if (a == b) return 0.0;
  if (!(a >= 0.0 && b >= 0.0) || ((a == 0.0 || b == 0.0) && s >= 0.0))
    throw DomainError("hurwitz_difference: offsets must be positive");
  double sum = 0.0;
  for (int k = kHurwitzDirect - 1; k >= 0; --k)
    sum += power_or_zero(k + a, s) - power_or_zero(k + b, s);
  const double X = kHurwitzDirect + a;
  const double Y = kHurwitzDirect + b;
  // [X^(1-s) - Y^(1-s)]/(s-1), continuous through s = 1.
  const double t = 1.0 - s;
  const double L = std::log(X / Y);
  const double integral =
      (t == 0.0) ? -L : std::pow(Y, t) * std::expm1(t * L) / (-t);
  sum += integral;
  sum += em_tail_without_integral(s, X) - em_tail_without_integral(s, Y);
  return sum;
}

double hurwitz_zeta(double s, double a) {
  if (!(s > 1.0) || !(a > 0.0)) throw DomainError("hurwitz_zeta: requires s > 1, a > 0");
  double sum = 0.0;
  for (int k = kHurwitzDirect - 1; k >= 0; --k) sum += std::pow(k + a, -s);
  const double X = kHurwitzDirect + a;
  sum += std::pow(X, 1.0 - s) / (s - 1.0);
  sum += em_tail_without_integral(s, X);
  return sum;
}

}  // namespace stepbunch
