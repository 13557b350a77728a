#pragma once

#include <cstddef>
#include <vector>

#include "stepbunch/special.hpp"

namespace stepbunch {

// One period of a periodic step train: x_{i+Ns} = x_i + L.
class StepConfiguration {
 public:
  StepConfiguration(double L, std::vector<double> positions, double lattice_a);

  double period() const { return L_; }
  std::size_t size() const { return x_.size(); }
  double lattice_a() const { return a_; }
  const std::vector<double>& positions() const { return x_; }
  double operator[](std::size_t i) const { return x_[i]; }
  double slope() const { return static_cast<double>(x_.size()) * a_ / L_; }
  double min_spacing() const;

 private:
  double L_;
  std::vector<double> x_;
  double a_;
};

StepConfiguration uniform_train(std::size_t Ns, double L, double a);

struct SigmaEvaluation {
  double value = 0.0;
  // Bound on the paired remainder beyond the explicitly summed images. The
  // remainder itself is added through the Hurwitz difference.
  double tail_bound = 0.0;
  int images = 0;
};

// sigma_i^(s) = a sum_{j != i} (x_j - x_i)/|x_j - x_i|^(s+2), j and 2i-j paired.
SigmaEvaluation discrete_sigma_detail(const StepConfiguration& c, std::size_t i, double s, double tol);
double discrete_sigma(const StepConfiguration& c, std::size_t i, double s, double tol = 1e-12);

// mu^a = sigma^(m) - (alpha2/alpha1) sigma^(n).
double atomistic_mu(const StepConfiguration& c, const PhysicalParams& p, std::size_t i, double tol = 1e-12);

// alpha1 sum_k [d_+^(-m-1) - d_-^(-m-1)] - alpha2 sum_k [d_+^(-n-1) - d_-^(-n-1)],
// which equals (alpha1/a) mu^a.
double unnormalized_mu(const StepConfiguration& c, const PhysicalParams& p, std::size_t i, double tol = 1e-12);

struct DynamicsOptions {
  double t_end = 1.0;
  double dt_init = 1e-4;
  double rel_tol = 1e-8;
  double min_spacing_stop = 0.0;  // 0 = never; CLI default 1e-3 l_e
  int snapshot_every = 1;         // accepted steps between snapshots
  double sigma_tol = 1e-12;
  int threads = 1;

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> positions;  // unwrapped, one row per snapshot
  bool stopped_early = false;
  int accepted_steps = 0;
  int rejected_steps = 0;
};

// dx_i/dt = J_i - J_{i-1}, J_i = (g_{i+1} - g_i)/(x_{i+1} - x_i), unit mobility,
// g_i = dE/dx_i = -unnormalized_mu. Dormand-Prince 5(4), adaptive.
Trajectory step_dynamics(const StepConfiguration& c, const PhysicalParams& p, const DynamicsOptions& opts);

// Right-hand side on unwrapped positions (period L, step height a).
std::vector<double> step_velocity(const std::vector<double>& x, double L, double a, const PhysicalParams& p,
                                  double tol = 1e-12, int threads = 1);

}  // namespace stepbunch
