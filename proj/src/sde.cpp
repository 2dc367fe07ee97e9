#include "ngnf/sde.hpp"

#include <cmath>

#include "ngnf/source.hpp"

namespace ngnf {

double SdeModel::divergence_of_drift(double t, const VectorXd& x) const {
  if (drift_div) return drift_div(t, x);
  const double h = 1e-6;
  double div = 0.0;
  VectorXd xp = x, xm = x;
  for (int i = 0; i < dim; ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    div += (drift(t, xp)[i] - drift(t, xm)[i]) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return div;
}

SdeModel make_brownian(int dim) {
  SdeModel m;
  m.name = "brownian";
  m.dim = dim;
  m.constant_diffusion = true;
  m.drift = [dim](double, const VectorXd&) { return VectorXd::Zero(dim).eval(); };
  m.sqrt_diffusion = [dim](double, const VectorXd&) {
    return MatrixXd::Identity(dim, dim).eval();
  };
  m.diffusion = m.sqrt_diffusion;
  m.drift_div = [](double, const VectorXd&) { return 0.0; };
  return m;
}

SdeModel make_benes_rotated(double angle) {
  SdeModel m;
  m.name = "benes_rot";
  m.dim = 2;
  m.constant_diffusion = true;
  MatrixXd rot(2, 2);
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  m.drift = [rot](double, const VectorXd& x) {
    const VectorXd u = rot.transpose() * x;
    VectorXd t(u.size());
    for (int i = 0; i < u.size(); ++i) t[i] = std::tanh(u[i]);
    return (rot * t).eval();
  };
  m.sqrt_diffusion = [rot](double, const VectorXd&) { return rot; };
  m.diffusion = [](double, const VectorXd&) {
    return MatrixXd::Identity(2, 2).eval();  // R R^T = I
  };
  // div(R tanh(R^T x)) = sum_i sech^2((R^T x)_i)
  m.drift_div = [rot](double, const VectorXd& x) {
    const VectorXd u = rot.transpose() * x;
    double div = 0.0;
    for (int i = 0; i < u.size(); ++i) {
      const double c = std::cosh(u[i]);
      div += 1.0 / (c * c);
    }
    return div;
  };
  return m;
}

SdeModel model_by_name(const std::string& name, int dim) {
  if (name == "brownian") return make_brownian(dim);
  if (name == "benes_rot") return make_benes_rotated();
  throw ConfigError("unknown SDE model '" + name + "'");
}

namespace {

template <int N>
DensityEval flow_density_dual(const ParamVector& theta, double tau,
                              const VectorXd& x0, const VectorXd& x,
                              const SdeModel& model) {
  const SourceGaussian src = make_source(model, tau, x0);
  const int d = theta.layout.cfg.d;
  std::vector<Dual2<N>> y(d);
  for (int i = 0; i < d; ++i) y[i] = Dual2<N>::variable(x[i], i);
  Dual2<N> log_det;
  detail::forward_impl(theta, x0.data(), y.data(), log_det);
  const Dual2<N> p = source_density_generic(src, y.data()) * exp(log_det);

  DensityEval de;
  de.value = p.v;
  de.grad_x = VectorXd(d);
  de.hess_x = MatrixXd(d, d);
  for (int i = 0; i < d; ++i) {
    de.grad_x[i] = p.g[i];
    for (int j = 0; j < d; ++j) de.hess_x(i, j) = p.hess(i, j);
  }
  de.y = VectorXd(d);
  for (int i = 0; i < d; ++i) de.y[i] = y[i].v;
  de.log_det = log_det.v;
  return de;
}

}  // namespace

DensityEval flow_density(const ParamVector& theta, double tau,
                         const VectorXd& x0, const VectorXd& x,
                         const SdeModel& model) {
  switch (theta.layout.cfg.d) {
    case 2:
      return flow_density_dual<2>(theta, tau, x0, x, model);
    case 3:
      return flow_density_dual<3>(theta, tau, x0, x, model);
    default:
      throw NumericError(
          "flow_density: spatial derivatives implemented for d in {2, 3}");
  }
}

double flow_density_value(const ParamVector& theta, double tau,
                          const VectorXd& x0, const VectorXd& x,
                          const SdeModel& model) {
  const SourceGaussian src = make_source(model, tau, x0);
  const FlowEval fe = forward(theta, x, x0);
  return source_density_at(src, fe.y) * std::exp(fe.log_det);
}

namespace {

double drift_terms(const SdeModel& model, double t, const VectorXd& x,
                   const DensityEval& de) {
  return -model.divergence_of_drift(t, x) * de.value -
         model.drift(t, x).dot(de.grad_x);
}

}  // namespace

double apply_adjoint_divergence_form(const SdeModel& model, double t,
                                     const VectorXd& x,
                                     const DensityEval& de) {
  const int d = model.dim;
  const double h = 1e-5;
  const MatrixXd sig = model.diffusion(t, x);
  // first and second finite-difference derivatives of Sigma
  std::vector<MatrixXd> dsig(d);
  VectorXd xp = x, xm = x;
  for (int i = 0; i < d; ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    dsig[i] = (model.diffusion(t, xp) - model.diffusion(t, xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  double diff = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double d2s;
      if (i == j) {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        d2s = (model.diffusion(t, xp)(i, j) - 2.0 * sig(i, j) +
               model.diffusion(t, xm)(i, j)) /
              (h * h);
        xp[i] = x[i];
        xm[i] = x[i];
      } else {
        VectorXd a = x, b = x, c = x, e = x;
        a[i] += h; a[j] += h;
        b[i] += h; b[j] -= h;
        c[i] -= h; c[j] += h;
        e[i] -= h; e[j] -= h;
        d2s = (model.diffusion(t, a)(i, j) - model.diffusion(t, b)(i, j) -
               model.diffusion(t, c)(i, j) + model.diffusion(t, e)(i, j)) /
              (4.0 * h * h);
      }
      diff += d2s * de.value + dsig[i](i, j) * de.grad_x[j] +
              dsig[j](i, j) * de.grad_x[i] + sig(i, j) * de.hess_x(i, j);
    }
  }
  return drift_terms(model, t, x, de) + 0.5 * diff;
}

double apply_adjoint(const SdeModel& model, double t, const VectorXd& x,
                     const DensityEval& de) {
  if (!model.constant_diffusion)
    return apply_adjoint_divergence_form(model, t, x, de);
  const MatrixXd sig = model.diffusion(t, x);
  const double diff = (sig.array() * de.hess_x.array()).sum();
  return drift_terms(model, t, x, de) + 0.5 * diff;
}

double adjoint_generator(const SdeModel& model, double t,
                         const ParamVector& theta, double tau,
                         const VectorXd& x0, const VectorXd& x) {
  return apply_adjoint(model, t, x, flow_density(theta, tau, x0, x, model));
}

MatrixXd em_path_sample(const SdeModel& model, const VectorXd& x0,
                        const VectorXd& t_grid, Rng& rng) {
  const int n = static_cast<int>(t_grid.size());
  const int d = model.dim;
  MatrixXd path(n, d);
  path.row(0) = x0.transpose();
  VectorXd cur = x0;
  for (int k = 0; k + 1 < n; ++k) {
    const double t = t_grid[k];
    const double dt = t_grid[k + 1] - t_grid[k];
    if (!(dt > 0.0))
      throw NumericError("em_path_sample: time grid must be increasing");
    cur = cur + model.drift(t, cur) * dt +
          std::sqrt(dt) * (model.sqrt_diffusion(t, cur) * rng.gaussian_vector(d));
    path.row(k + 1) = cur.transpose();
  }
  return path;
}

}  // namespace ngnf
