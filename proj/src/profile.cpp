#include "stepbunch/profile.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "stepbunch/error.hpp"

namespace stepbunch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mean_of(std::span<const double> v) {
  // Neumaier summation keeps the mean check meaningful for large N.
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += (std::abs(sum) >= std::abs(x)) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(v.size());
}

}  // namespace

double grid_x(std::size_t n, std::size_t j) {
  return -0.5 + static_cast<double>(j) / static_cast<double>(n);
}

GridProfile::GridProfile(std::vector<double> rho, double A) : rho_(std::move(rho)), A_(A) {
  if (!is_power_of_two(rho_.size()) || rho_.size() < 2)
    throw ConfigurationError("grid size must be a power of two >= 2");
  for (double r : rho_)
    if (!std::isfinite(r)) throw DomainError("profile contains non-finite values");
  const double mean = mean_of(rho_);
  if (std::abs(mean - A_) > 1e-12 * std::max(1.0, std::abs(A_))) {
    std::ostringstream os;
    os.precision(17);
    os << "profile mean " << mean << " does not match slope A = " << A_;
    throw DomainError(os.str());
  }
}

GridProfile GridProfile::from_samples(std::vector<double> rho) {
  if (rho.empty()) throw ConfigurationError("empty profile");
  const double A = mean_of(rho);
  return GridProfile(std::move(rho), A);
}

GridProfile GridProfile::uniform(std::size_t n, double A) {
  return GridProfile(std::vector<double>(n, A), A);
}

double GridProfile::x(std::size_t j) const { return grid_x(size(), j); }

bool GridProfile::is_feasible() const {
  return std::all_of(rho_.begin(), rho_.end(), [](double r) { return r >= 0.0; });
}

void GridProfile::require_feasible(const char* who) const {
  if (!is_feasible()) throw InfeasibleError(std::string(who) + ": negative step density");
}

cplx SpectralProfile::coefficient(long k) const {
  const long half = static_cast<long>(N / 2);
  if (k > half || k < -half) return {0.0, 0.0};
  if (k >= 0) return h[static_cast<std::size_t>(k)];
  return std::conj(h[static_cast<std::size_t>(-k)]);
}

std::vector<cplx> density_spectrum(std::span<const double> rho) {
  auto c = rfft(rho);
  for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
  return c;
}

std::vector<double> density_from_spectrum(std::span<const cplx> rho_hat, std::size_t n) {
  std::vector<cplx> c(rho_hat.begin(), rho_hat.end());
  for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
  return irfft(c, n);
}

std::vector<double> spectral_derivative(std::span<const double> f) {
  const std::size_t n = f.size();
  auto c = rfft(f);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= cplx(0.0, kTwoPi * static_cast<double>(k));
  c[n / 2] = 0.0;
  return irfft(c, n);
}

std::vector<double> spectral_antiderivative(std::span<const double> f) {
  const std::size_t n = f.size();
  auto c = rfft(f);
  c[0] = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) c[k] /= cplx(0.0, kTwoPi * static_cast<double>(k));
  c[n / 2] = 0.0;
  return irfft(c, n);
}

std::vector<double> height_from_density(const GridProfile& p) {
  std::vector<double> dev(p.rho().begin(), p.rho().end());
  for (double& r : dev) r -= p.mean_slope();
  return spectral_antiderivative(dev);
}

SpectralProfile to_spectral(const GridProfile& p) {
  const std::size_t n = p.size();
  const auto rho_hat = density_spectrum(p.rho());
  SpectralProfile s;
  s.N = n;
  s.A = p.mean_slope();
  s.h.assign(n / 2 + 1, cplx(0.0, 0.0));
  for (std::size_t k = 1; k < n / 2; ++k)
    s.h[k] = rho_hat[k] / cplx(0.0, kTwoPi * static_cast<double>(k));
  s.h[n / 2] = rho_hat[n / 2] / cplx(0.0, kTwoPi * static_cast<double>(n));
  return s;
}

GridProfile from_spectral(const SpectralProfile& s) {
  if (s.h.size() != s.N / 2 + 1 || !is_power_of_two(s.N))
    throw ConfigurationError("spectral profile: coefficient count does not match N");
  const std::size_t n = s.N;
  std::vector<cplx> rho_hat(n / 2 + 1);
  rho_hat[0] = s.A;
  for (std::size_t k = 1; k < n / 2; ++k)
    rho_hat[k] = s.h[k] * cplx(0.0, kTwoPi * static_cast<double>(k));
  rho_hat[n / 2] = s.h[n / 2] * cplx(0.0, kTwoPi * static_cast<double>(n));
  rho_hat[n / 2].imag(0.0);
  auto rho = density_from_spectrum(rho_hat, n);
  // The inverse transform reproduces the mean only to rounding; pin it.
  const double shift = s.A - mean_of(rho);
  for (double& r : rho) r += shift;
  return GridProfile(std::move(rho), s.A);
}

GridProfile rearrange_decreasing(const GridProfile& p) {
  const std::size_t n = p.size();
  std::vector<double> values(p.rho().begin(), p.rho().end());
  std::sort(values.begin(), values.end(), std::greater<>());
  std::vector<double> out(n);
  const std::size_t center = n / 2;
  std::size_t next = 0;
  out[center] = values[next++];
  for (std::size_t d = 1; d < center; ++d) {
    out[center + d] = values[next++];
    out[center - d] = values[next++];
  }
  out[0] = values[next++];  // x = -1/2
  return GridProfile(std::move(out), p.mean_slope());
}

GridProfile shift_profile(const GridProfile& p, long s) {
  const long n = static_cast<long>(p.size());
  std::vector<double> out(p.size());
  for (long j = 0; j < n; ++j) {
    const long src = ((j + s) % n + n) % n;
    out[static_cast<std::size_t>(j)] = p[static_cast<std::size_t>(src)];
  }
  return GridProfile(std::move(out), p.mean_slope());
}

GridProfile reflect_profile(const GridProfile& p) {
  const std::size_t n = p.size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = p[(n - j) % n];
  return GridProfile(std::move(out), p.mean_slope());
}

GridProfile center_profile(const GridProfile& p) {
  const std::size_t n = p.size();
  double c = 0.0, s = 0.0, total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double phase = kTwoPi * p.x(j);
    c += p[j] * std::cos(phase);
    s += p[j] * std::sin(phase);
    total += std::abs(p[j]);
  }
  if (std::hypot(c, s) <= 1e-12 * total) return p;
  const double theta = std::atan2(s, c);
  const long shift = std::lround(theta / kTwoPi * static_cast<double>(n));
  return shift_profile(p, shift);
}

void write_profile_csv(std::ostream& os, const GridProfile& p) {
  os << "x,rho\n";
  char buf[64];
  for (std::size_t j = 0; j < p.size(); ++j) {
    const int a = std::snprintf(buf, sizeof buf, "%.17g,", p.x(j));
    os.write(buf, a);
    const int b = std::snprintf(buf, sizeof buf, "%.17g\n", p[j]);
    os.write(buf, b);
  }
}

std::string profile_to_csv(const GridProfile& p) {
  std::ostringstream os;
  write_profile_csv(os, p);
  return os.str();
}

GridProfile read_profile_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigurationError("profile CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,rho") throw ConfigurationError("profile CSV: expected header 'x,rho'");
  std::vector<double> xs, rho;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ConfigurationError("profile CSV: missing comma on line " + std::to_string(lineno));
    double xv = 0.0, rv = 0.0;
    const char* first = line.data();
    const char* mid = first + comma;
    const char* last = first + line.size();
    auto r1 = std::from_chars(first, mid, xv);
    auto r2 = std::from_chars(mid + 1, last, rv);
    if (r1.ec != std::errc() || r1.ptr != mid || r2.ec != std::errc() || r2.ptr != last)
      throw ConfigurationError("profile CSV: malformed number on line " + std::to_string(lineno));
    xs.push_back(xv);
    rho.push_back(rv);
  }
  const std::size_t n = rho.size();
  if (!is_power_of_two(n) || n < 2)
    throw ConfigurationError("profile CSV: row count must be a power of two");
  for (std::size_t j = 0; j < n; ++j)
    if (std::abs(xs[j] - grid_x(n, j)) > 1e-9)
      throw ConfigurationError("profile CSV: x column is not the uniform grid from -0.5");
  return GridProfile::from_samples(std::move(rho));
}

GridProfile read_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open profile file " + path.string());
  return read_profile_csv(in);
}

}  // namespace stepbunch
