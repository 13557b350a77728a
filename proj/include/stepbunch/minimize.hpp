#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "stepbunch/energy.hpp"

namespace stepbunch {

struct MinimizeOptions {
  int max_iters = 20000;
  double grad_tol = 1e-8;
  double step_init = 1.0;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int rearrange_every = 0;  // 0 = off
  double rho_floor = 1e-10;
  std::uint64_t seed = 0;
  // Re-minimize from the half-cell shifted average and keep the lower result.
  bool parity_polish = false;

  void validate() const;
};

struct MinimizeResult {
  GridProfile profile;
  EnergyBreakdown energy;
  int iterations = 0;
  bool converged = false;
  double el_residual = 0.0;
  double support_radius = 0.5;  // R0
  double pg_norm = 0.0;
  std::vector<double> energy_trace;  // accepted iterates, starting with init
};

// Euclidean projection onto {rho >= 0, mean = A}.
GridProfile project_feasible(std::span<const double> v, double A);

// Block profile of height rho0 = eps^(-1/n) centered at 0, boundary cells
// weighted by overlap so that the mean is A.
GridProfile ansatz_profile(const ModelParams& params, std::size_t N);

MinimizeResult minimize_energy(const GridProfile& init, const KernelTable& K, const ModelParams& params,
                               const MinimizeOptions& opts = {});

// R0 = max |x_j| over cells with rho_j > threshold_frac * max rho, plus half
// a cell, capped at 1/2.
double detect_support(const GridProfile& p, double threshold_frac = 1e-6);

struct EvolveOptions {
  double energy_tol = 1e-8;  // relative energy increase allowed per step
  int max_halvings = 20;
  // Called after every accepted step with (time, profile).
  std::function<void(double, const GridProfile&)> observer;
};

// h_t = mu_xx by a first-order exponential time differencing scheme in the
// density, with the linearization about rho = A integrated exactly.
GridProfile evolve_continuum(const GridProfile& init, const KernelTable& K, const ModelParams& params, double T,
                             double dt, const EvolveOptions& opts = {});

// Linear growth rate of mode k about rho = A for the height equation.
double linear_growth_rate(const ModelParams& params, long k);

}  // namespace stepbunch
