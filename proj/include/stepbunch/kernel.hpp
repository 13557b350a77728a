#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stepbunch {

// Periodic kernel K_m of the nonlocal energy, tabulated on an N-point grid.
struct KernelTable {
  double m = 0.0;
  std::size_t N = 0;
  // Cell averages N * int K over [x_j - 1/2N, x_j + 1/2N], x_j = -1/2 + j/N.
  std::vector<double> real_samples;
  // K_hat(k), k = 0..N/2.
  std::vector<double> multipliers;
  double l1_norm = 0.0;

  double multiplier(long k) const;
};

// K_m(z) on [-1/2, 1/2]. K_m(+-1/2) = 0; z = 0 is singular for m >= 0.
double kernel_value(double m, double z);

// K'_m(z) on (-1/2, 1/2) \ {0}.
double kernel_derivative(double m, double z);

// Closed-form Fourier coefficient of K_m.
double kernel_multiplier(double m, long k);

KernelTable build_kernel_table(double m, std::size_t N);

// (K * f)(x_j) by the multiplier form; the Nyquist mode is split evenly
// between +-N/2, so it carries half of K_hat(N/2).
std::vector<double> convolve_spectral(const KernelTable& table, std::span<const double> f);

// Circular convolution (1/N) sum_i real_samples[i - j + N/2] f_i, i.e. f
// treated as piecewise constant on the cells.
std::vector<double> convolve_cells(const KernelTable& table, std::span<const double> f);

}  // namespace stepbunch
