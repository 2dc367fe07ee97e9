#pragma once

#include <vector>

#include "ngnf/common.hpp"
#include "ngnf/flow.hpp"
#include "ngnf/sde.hpp"

namespace ngnf {

struct GalerkinConfig {
  int n_samples = 2000;   // N
  double mu_std = 0.75;   // std of the x0-sampling Gaussian
  double ridge = -1.0;    // Tikhonov parameter; negative -> scale-aware auto
  uint64_t seed = 0;

  void validate() const;
};

struct SamplePair {
  VectorXd x;
  VectorXd x0;
};

/// x0_i ~ N(0, mu_std^2 I); x_i ~ P(.|theta, tau, x0_i) drawn by pushing a
/// source sample through the inverse flow. Sample i uses its own derived
/// RNG stream, so the set is reproducible independent of evaluation order.
std::vector<SamplePair> sample_pairs(const ParamVector& theta, double tau,
                                     const GalerkinConfig& gcfg,
                                     const SdeModel& model, uint64_t seed);

struct GalerkinSystem {
  MatrixXd jac;  // N x M, rows grad_theta P
  VectorXd rhs;  // N
};

GalerkinSystem assemble(const ParamVector& theta, double tau,
                        const std::vector<SamplePair>& pairs,
                        const SdeModel& model);

/// Minimizer of ||J eta - f||^2 + ridge ||eta||^2. For ridge = 0 the
/// minimum-norm least-squares solution is returned (rank-revealing COD);
/// negative ridge selects the default 1e-6 * trace(J^T J) / M.
VectorXd solve_theta_dot(const GalerkinSystem& system, double ridge);

/// (1/N) ||J eta - f||^2, the sampled cost functional.
double residual_norm(const GalerkinSystem& system, const VectorXd& eta);

double residual_norm(const ParamVector& theta, const VectorXd& eta, double tau,
                     const std::vector<SamplePair>& pairs,
                     const SdeModel& model);

struct GalerkinStats {
  double residual = 0.0;  // at the returned eta
  double eta_norm = 0.0;
};

/// Full stage evaluation: fresh samples, assembly and solve.
VectorXd galerkin_velocity(const ParamVector& theta, double tau,
                           const GalerkinConfig& gcfg, const SdeModel& model,
                           uint64_t stage_seed, GalerkinStats* stats = nullptr);

}  // namespace ngnf
