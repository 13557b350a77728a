#pragma once

#include <complex>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stepbunch/fft.hpp"

namespace stepbunch {

// Step density rho = h_x sampled at x_j = -1/2 + j/N on the unit period.
// The mean-slope constraint mean(rho) = A is checked at construction;
// nonnegativity is not (perturbation directions are GridProfiles too), use
// is_feasible() / require_feasible().
class GridProfile {
 public:
  GridProfile(std::vector<double> rho, double A);

  // A := mean(rho).
  static GridProfile from_samples(std::vector<double> rho);
  static GridProfile uniform(std::size_t n, double A);

  std::size_t size() const { return rho_.size(); }
  double mean_slope() const { return A_; }
  std::span<const double> rho() const { return rho_; }
  double operator[](std::size_t j) const { return rho_[j]; }
  double x(std::size_t j) const;

  bool is_feasible() const;
  void require_feasible(const char* who) const;

 private:
  std::vector<double> rho_;
  double A_;
};

double grid_x(std::size_t n, std::size_t j);

// Fourier coefficients h_k of the height deviation, k = 0..N/2 (negative k by
// conjugate symmetry). h_0 = 0. The Nyquist sample is split evenly between
// k = +N/2 and k = -N/2; `h[N/2]` stores the +N/2 half.
struct SpectralProfile {
  std::size_t N = 0;
  double A = 0.0;
  std::vector<cplx> h;

  cplx coefficient(long k) const;
};

// Physical Fourier coefficients rho_hat_k = int rho e^{-2 pi i k x}, k = 0..N/2,
// using the grid phase of x_j = -1/2 + j/N.
std::vector<cplx> density_spectrum(std::span<const double> rho);
std::vector<double> density_from_spectrum(std::span<const cplx> rho_hat, std::size_t n);

// Spectral derivative d/dx of periodic grid samples (Nyquist mode dropped).
std::vector<double> spectral_derivative(std::span<const double> f);

// Zero-mean spectral antiderivative of samples with zero mean.
std::vector<double> spectral_antiderivative(std::span<const double> f);

std::vector<double> height_from_density(const GridProfile& p);

SpectralProfile to_spectral(const GridProfile& p);
GridProfile from_spectral(const SpectralProfile& s);

// Symmetric decreasing rearrangement on the grid: values sorted descending
// and placed by |x_j| ascending, ties going to x >= 0 first.
GridProfile rearrange_decreasing(const GridProfile& p);

// Circular shift rho'_j = rho_{j+s}.
GridProfile shift_profile(const GridProfile& p, long s);

// x -> -x about the grid point x = 0 (index N/2).
GridProfile reflect_profile(const GridProfile& p);

// Circularly shifts so that the circular mean of rho sits at x = 0.
GridProfile center_profile(const GridProfile& p);

// CSV with header "x,rho", one row per grid point, 17 significant digits.
void write_profile_csv(std::ostream& os, const GridProfile& p);
std::string profile_to_csv(const GridProfile& p);
GridProfile read_profile_csv(std::istream& is);
GridProfile read_profile_csv(const std::filesystem::path& path);

}  // namespace stepbunch
