#include "ngnf/source.hpp"

#include <cmath>

namespace ngnf {

SourceGaussian make_source(const SdeModel& model, double tau,
                           const VectorXd& x0) {
  if (!(tau > 0.0))
    throw DegenerateTimeError(
        "source: tau must be positive (the Dirac limit is not evaluable)");
  SourceGaussian src;
  src.tau = tau;
  src.x0 = x0;
  src.drift0 = model.drift(model.t0, x0);
  src.mean = x0 + src.drift0 * tau;
  const MatrixXd sigma0 = model.diffusion(model.t0, x0);
  src.cov = sigma0 * tau;
  Eigen::LLT<MatrixXd> llt(sigma0);
  if (llt.info() != Eigen::Success)
    throw NumericError("source: diffusion matrix is not positive definite");
  src.chol0 = llt.matrixL();
  const int d = static_cast<int>(x0.size());
  double log_det_sigma0 = 0.0;
  for (int i = 0; i < d; ++i) log_det_sigma0 += std::log(src.chol0(i, i));
  log_det_sigma0 *= 2.0;
  src.log_norm = -0.5 * d * std::log(2.0 * M_PI * tau) - 0.5 * log_det_sigma0;
  return src;
}

double source_density_at(const SourceGaussian& src, const VectorXd& z) {
  return source_density_generic(src, z.data());
}

double source_density(const SdeModel& model, double tau, const VectorXd& x0,
                      const VectorXd& z) {
  return source_density_at(make_source(model, tau, x0), z);
}

VectorXd source_grad_log(const SourceGaussian& src, const VectorXd& z) {
  const VectorXd u = z - src.mean;
  // Sigma0^{-1} u via the stored Cholesky factor
  const VectorXd v = src.chol0.transpose().triangularView<Eigen::Upper>().solve(
      src.chol0.triangularView<Eigen::Lower>().solve(u));
  return -v / src.tau;
}

double source_dt_at(const SourceGaussian& src, const VectorXd& z) {
  const int d = static_cast<int>(z.size());
  const VectorXd u = z - src.mean;
  const VectorXd v = src.chol0.transpose().triangularView<Eigen::Upper>().solve(
      src.chol0.triangularView<Eigen::Lower>().solve(u));
  const double p = source_density_at(src, z);
  const double dlogp = -0.5 * d / src.tau + src.drift0.dot(v) / src.tau +
                       0.5 * u.dot(v) / (src.tau * src.tau);
  return p * dlogp;
}

double source_dt(const SdeModel& model, double tau, const VectorXd& x0,
                 const VectorXd& z) {
  return source_dt_at(make_source(model, tau, x0), z);
}

VectorXd source_sample(const SourceGaussian& src, Rng& rng) {
  const int d = static_cast<int>(src.mean.size());
  return src.mean +
         std::sqrt(src.tau) * (src.chol0 * rng.gaussian_vector(d));
}

VectorXd source_sample(const SdeModel& model, double tau, const VectorXd& x0,
                       Rng& rng) {
  return source_sample(make_source(model, tau, x0), rng);
}

}  // namespace ngnf
