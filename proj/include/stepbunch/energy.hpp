#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "stepbunch/kernel.hpp"
#include "stepbunch/profile.hpp"
#include "stepbunch/special.hpp"

namespace stepbunch {

struct EnergyBreakdown {
  double nonlocal_tilde = 0.0;   // I~_m, the S_m |k|^(m+1) |h_k|^2 sum
  double null_lagrangian = 0.0;  // W = (A/2) ||rho * K||_1
  double local = 0.0;            // eps^(1-m) * mean Phi(rho)
  double total = 0.0;            // -(1/2)<rho, K*rho> + local
};

// Local density Phi_{m,n}. Negative arguments are infeasible and throw
// InfeasibleError rather than returning +inf.
double phi(double xi, const ModelParams& params);
// Phi' and Phi'' for xi > 0; DomainError otherwise.
double phi_prime(double xi, const ModelParams& params);
double phi_second(double xi, const ModelParams& params);

double local_energy(const GridProfile& p, const ModelParams& params);

double nonlocal_energy_fourier(const SpectralProfile& s, const ModelParams& params);

// (1/2)<rho, K*rho> in multiplier space.
double nonlocal_energy_kernel(const GridProfile& p, const KernelTable& K);

double null_lagrangian(const GridProfile& p, const KernelTable& K);

EnergyBreakdown total_energy(const GridProfile& p, const KernelTable& K, const ModelParams& params);

// mu = (K*rho)' - eps^(1-m) (Phi'(rho))', spectral derivatives.
std::vector<double> chemical_potential(const GridProfile& p, const KernelTable& K, const ModelParams& params);

// Nonlocal part of mu from the height coefficients, -2 S_m |k|^(m+1) h_k.
std::vector<double> nonlocal_potential_fourier(const SpectralProfile& s, double m);

// (m+1) PV int_R (f(x) - f(y)) / |x-y|^(m+2) dy with f the height deviation,
// by singularity-subtracted quadrature on one period plus image sums.
std::vector<double> nonlocal_apply_fractional(const GridProfile& p, double m);

// Sup-norm over the support of -K*rho + eps^(1-m) Phi'(rho) + lambda, with
// lambda chosen to center it.
double el_residual(const GridProfile& p, const KernelTable& K, const ModelParams& params,
                   std::span<const bool> support_mask);

// (I~_0[h], 2/N_cut ||rho||^2 + 3 A^2 + A^2 log N_cut); m = 0 only.
std::pair<double, double> interpolation_bound_check(const GridProfile& p, const KernelTable& K,
                                                    const ModelParams& params, std::size_t n_cut);

}  // namespace stepbunch
