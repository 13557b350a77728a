#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stepbunch/minimize.hpp"

namespace stepbunch {

// Rearrangement every 50 iterations and the parity polish.
MinimizeOptions experiment_minimize_defaults();

struct ScalingRow {
  double epsilon = 0.0;
  double E_min = 0.0;  // total energy + A^2 ||K||_1 / 2, so E[uniform] = local part
  double R0 = 0.0;
  int iterations = 0;
  std::string winner;  // "ansatz" or "uniform"
  double E_ansatz = 0.0;
  double E_uniform = 0.0;
  bool converged = false;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;  // decreasing epsilon
  double fitted_slope = 0.0;     // least squares of E_min against log(1/eps)
  double fitted_intercept = 0.0;
  double residual = 0.0;         // RMS of the fit
  double band = 0.0;             // max - min of E_min + (A^2/n) |log eps|
};

struct ScalingOptions {
  MinimizeOptions minimize = experiment_minimize_defaults();
  bool allow_nonzero_m = false;  // exploratory; nothing is asserted for m != 0
  int threads = 1;
};

ScalingReport scaling_sweep(const ModelParams& base, const std::vector<double>& eps_list, std::size_t N,
                            const ScalingOptions& opts = {});

struct EvidenceRun {
  std::uint64_t seed = 0;
  double energy = 0.0;
  double symmetry_defect = 0.0;
  double rearrangement_defect = 0.0;
  double el_residual = 0.0;
  double conv_sup = 0.0;  // ||K * rho||_sup
  double R0 = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct EvidenceReport {
  std::vector<EvidenceRun> runs;
  double energy_spread = 0.0;  // max - min over converged runs
  double max_symmetry_defect = 0.0;
  double max_rearrangement_defect = 0.0;
  double max_relative_el_residual = 0.0;  // el_residual / conv_sup
};

struct EvidenceOptions {
  MinimizeOptions minimize = experiment_minimize_defaults();
  int inits = 5;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Minimizes from seeded random feasible profiles and collects symmetry and
// unimodality diagnostics.
EvidenceReport bunching_evidence(const ModelParams& params, std::size_t N, const EvidenceOptions& opts = {});

// ||rho - reflect(rho)||_2 / ||rho||_2 and ||rho - rho*||_2 / ||rho||_2 after centering.
double symmetry_defect(const GridProfile& p);
double rearrangement_defect(const GridProfile& p);

}  // namespace stepbunch
