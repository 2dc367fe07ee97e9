#pragma once

#include <vector>

#include "ngnf/common.hpp"
#include "ngnf/dual.hpp"
#include "ngnf/sde.hpp"

namespace ngnf {

/// Gaussian law of one Euler-Maruyama step of length tau from x0:
/// N(x0 + b(s,x0) tau, Sigma(s,x0) tau). Concentrates at x0 as tau -> 0.
struct SourceGaussian {
  double tau;
  VectorXd x0;
  VectorXd drift0;      // b(s, x0)
  VectorXd mean;        // x0 + drift0 * tau
  MatrixXd cov;         // Sigma(s, x0) * tau
  MatrixXd chol0;       // lower Cholesky factor of Sigma(s, x0)
  double log_norm;      // log normalization constant of the density
};

SourceGaussian make_source(const SdeModel& model, double tau,
                           const VectorXd& x0);

double source_density(const SdeModel& model, double tau, const VectorXd& x0,
                      const VectorXd& z);

/// Exact partial derivative of the source density with respect to tau
/// at fixed z (mean and covariance are both linear in tau).
double source_dt(const SdeModel& model, double tau, const VectorXd& x0,
                 const VectorXd& z);

VectorXd source_sample(const SdeModel& model, double tau, const VectorXd& x0,
                       Rng& rng);

VectorXd source_sample(const SourceGaussian& src, Rng& rng);

double source_density_at(const SourceGaussian& src, const VectorXd& z);
double source_dt_at(const SourceGaussian& src, const VectorXd& z);

/// grad_z log p_Z(z | tau, x0) = -Sigma0^{-1} (z - mean) / tau.
VectorXd source_grad_log(const SourceGaussian& src, const VectorXd& z);

/// Density evaluation templated on the scalar type of z, for dual-number
/// sweeps through the change-of-variables composite.
template <class S>
S source_density_generic(const SourceGaussian& src, const S* z) {
  using std::exp;
  const int d = static_cast<int>(src.mean.size());
  // w = L0^{-1} (z - mean) / sqrt(tau), quadratic form by forward solve
  std::vector<S> w(d);
  const double inv_sqrt_tau = 1.0 / std::sqrt(src.tau);
  for (int i = 0; i < d; ++i) {
    S acc = (z[i] - src.mean[i]) * inv_sqrt_tau;
    for (int j = 0; j < i; ++j) acc = acc - src.chol0(i, j) * w[j];
    w[i] = acc * (1.0 / src.chol0(i, i));
  }
  S q(0.0);
  for (int i = 0; i < d; ++i) q = q + w[i] * w[i];
  return exp(src.log_norm - 0.5 * q);
}

}  // namespace ngnf
