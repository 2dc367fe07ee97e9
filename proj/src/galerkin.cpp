#include "ngnf/galerkin.hpp"

#include <cmath>
#include <string>

#include "ngnf/source.hpp"

namespace ngnf {

void GalerkinConfig::validate() const {
  if (n_samples < 0) throw ConfigError("galerkin: n_samples must be >= 0");
  if (!(mu_std > 0.0)) throw ConfigError("galerkin: mu_std must be positive");
}

std::vector<SamplePair> sample_pairs(const ParamVector& theta, double tau,
                                     const GalerkinConfig& gcfg,
                                     const SdeModel& model, uint64_t seed) {
  gcfg.validate();
  const int d = model.dim;
  std::vector<SamplePair> pairs(gcfg.n_samples);
  for (int i = 0; i < gcfg.n_samples; ++i) {
    Rng rng(mix_seed(seed, 0x70616972ULL, static_cast<uint64_t>(i)));
    SamplePair& p = pairs[i];
    p.x0 = gcfg.mu_std * rng.gaussian_vector(d);
    const VectorXd z = source_sample(model, tau, p.x0, rng);
    p.x = inverse(theta, z, p.x0);
  }
  return pairs;
}

GalerkinSystem assemble(const ParamVector& theta, double tau,
                        const std::vector<SamplePair>& pairs,
                        const SdeModel& model) {
  const int n = static_cast<int>(pairs.size());
  const int m = theta.layout.total;
  const double t = model.t0 + tau;
  GalerkinSystem sys{MatrixXd(n, m), VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    const SamplePair& p = pairs[i];
    const SourceGaussian src = make_source(model, tau, p.x0);
    const DensityEval de = flow_density(theta, tau, p.x0, p.x, model);
    const FlowThetaDerivs td = grad_theta(theta, p.x, p.x0);
    // grad_theta P = P * (grad_z log p_Z . dy/dtheta + dlogdet/dtheta)
    const VectorXd glz = source_grad_log(src, de.y);
    sys.jac.row(i) =
        de.value * (glz.transpose() * td.dy_dtheta +
                    td.dlogdet_dtheta.transpose());
    sys.rhs[i] = apply_adjoint(model, t, p.x, de) -
                 std::exp(de.log_det) * source_dt_at(src, de.y);
    if (!sys.jac.row(i).allFinite() || !std::isfinite(sys.rhs[i]))
      throw NumericError("galerkin assemble: non-finite entry at sample " +
                         std::to_string(i));
  }
  return sys;
}

VectorXd solve_theta_dot(const GalerkinSystem& system, double ridge) {
  const int m = static_cast<int>(system.jac.cols());
  const int n = static_cast<int>(system.jac.rows());
  if (n == 0) return VectorXd::Zero(m);
  if (ridge < 0.0)
    ridge = 1e-6 * system.jac.squaredNorm() / static_cast<double>(m);
  if (ridge == 0.0) {
    // rank-revealing, minimum-norm least squares
    return system.jac.completeOrthogonalDecomposition().solve(system.rhs);
  }
  MatrixXd normal = system.jac.transpose() * system.jac;
  normal.diagonal().array() += ridge;
  return Eigen::LLT<MatrixXd>(normal).solve(system.jac.transpose() *
                                            system.rhs);
}

double residual_norm(const GalerkinSystem& system, const VectorXd& eta) {
  const int n = static_cast<int>(system.jac.rows());
  if (n == 0) return 0.0;
  return (system.jac * eta - system.rhs).squaredNorm() /
         static_cast<double>(n);
}

double residual_norm(const ParamVector& theta, const VectorXd& eta, double tau,
                     const std::vector<SamplePair>& pairs,
                     const SdeModel& model) {
  return residual_norm(assemble(theta, tau, pairs, model), eta);
}

VectorXd galerkin_velocity(const ParamVector& theta, double tau,
                           const GalerkinConfig& gcfg, const SdeModel& model,
                           uint64_t stage_seed, GalerkinStats* stats) {
  const auto pairs = sample_pairs(theta, tau, gcfg, model, stage_seed);
  const GalerkinSystem sys = assemble(theta, tau, pairs, model);
  VectorXd eta = solve_theta_dot(sys, gcfg.ridge);
  if (stats) {
    stats->residual = residual_norm(sys, eta);
    stats->eta_norm = eta.norm();
  }
  return eta;
}

}  // namespace ngnf
