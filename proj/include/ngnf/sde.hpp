#pragma once

#include <functional>
#include <string>

#include "ngnf/common.hpp"
#include "ngnf/flow.hpp"

namespace ngnf {

/// Diffusion SDE dX = b(t,X) dt + sqrt(Sigma(t,X)) dW on [t0, T].
struct SdeModel {
  std::string name;
  int dim = 2;
  double t0 = 0.0;  // SDE start time s
  bool constant_diffusion = false;
  std::function<VectorXd(double, const VectorXd&)> drift;
  std::function<MatrixXd(double, const VectorXd&)> sqrt_diffusion;
  std::function<MatrixXd(double, const VectorXd&)> diffusion;
  // analytic divergence of the drift; empty -> finite-difference fallback
  std::function<double(double, const VectorXd&)> drift_div;

  double divergence_of_drift(double t, const VectorXd& x) const;
};

/// Pure Brownian motion: b = 0, Sigma = I.
SdeModel make_brownian(int dim = 2);

/// Rotated Benes SDE: b = R tanh(R^T x), sqrt(Sigma) = R, Sigma = I.
SdeModel make_benes_rotated(double angle = M_PI / 3.0);

/// Registry lookup ("benes_rot", "brownian").
SdeModel model_by_name(const std::string& name, int dim = 2);

/// Density of the flow ansatz together with its exact spatial derivatives.
struct DensityEval {
  double value;
  VectorXd grad_x;
  MatrixXd hess_x;
  VectorXd y;       // flow output n_theta(x | x0)
  double log_det;
};

/// P(x | theta, tau, x0) = p_Z(n_theta(x|x0) | tau, x0) * |det grad n_theta|,
/// with gradient and Hessian in x from a second-order dual sweep.
DensityEval flow_density(const ParamVector& theta, double tau,
                         const VectorXd& x0, const VectorXd& x,
                         const SdeModel& model);

/// Value-only fast path (any dimension).
double flow_density_value(const ParamVector& theta, double tau,
                          const VectorXd& x0, const VectorXd& x,
                          const SdeModel& model);

/// Adjoint generator applied to an already-evaluated density:
/// div[-b P + 1/2 div(Sigma P)]. Constant-diffusion models use the expanded
/// form without Sigma derivatives; otherwise those enter by central
/// finite differences.
double apply_adjoint(const SdeModel& model, double t, const VectorXd& x,
                     const DensityEval& de);

/// Same operator, always through the full double-divergence expansion with
/// finite-difference Sigma derivatives (the generic path).
double apply_adjoint_divergence_form(const SdeModel& model, double t,
                                     const VectorXd& x, const DensityEval& de);

double adjoint_generator(const SdeModel& model, double t,
                         const ParamVector& theta, double tau,
                         const VectorXd& x0, const VectorXd& x);

/// Euler-Maruyama reference path over a strictly increasing time grid
/// starting at the SDE start time. One row per grid node.
MatrixXd em_path_sample(const SdeModel& model, const VectorXd& x0,
                        const VectorXd& t_grid, Rng& rng);

}  // namespace ngnf
