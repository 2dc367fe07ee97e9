#include "ngnf/evaluator.hpp"

#include "ngnf/source.hpp"

namespace ngnf {

ParamVector Surrogate::theta(double t) const {
  return ParamVector{layout, theta_at(ckpt, t - cfg.s)};
}

Surrogate make_surrogate(Checkpoint ckpt) {
  Surrogate sur;
  sur.cfg = RunConfig::from_kv(ckpt.meta);
  check_flow_config(ckpt, sur.cfg.flow);
  sur.layout = make_layout(sur.cfg.flow);
  if (ckpt.thetas.cols() != sur.layout.total)
    throw ConfigError("checkpoint parameter width does not match its config");
  sur.model = model_by_name(sur.cfg.model, sur.cfg.flow.d);
  sur.model.t0 = sur.cfg.s;
  sur.ckpt = std::move(ckpt);
  return sur;
}

Surrogate load_surrogate(const std::string& path) {
  return make_surrogate(load_checkpoint(path));
}

double density(const Surrogate& sur, const VectorXd& x, double t,
               const VectorXd& x0) {
  const ParamVector th = sur.theta(t);  // range check happens here
  return flow_density_value(th, t - sur.s(), x0, x, sur.model);
}

std::vector<VectorXd> sample(const Surrogate& sur, double t,
                             const VectorXd& x0, int n, Rng& rng) {
  const ParamVector th = sur.theta(t);
  const SourceGaussian src = make_source(sur.model, t - sur.s(), x0);
  std::vector<VectorXd> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = inverse(th, source_sample(src, rng), x0);
  return out;
}

VectorXd green_convolve(const Surrogate& sur,
                        const std::function<VectorXd(Rng&)>& p0_sampler,
                        double t, const std::vector<VectorXd>& x_set, int n_mc,
                        Rng& rng) {
  const ParamVector th = sur.theta(t);
  const double tau = t - sur.s();
  VectorXd acc = VectorXd::Zero(static_cast<int>(x_set.size()));
  for (int j = 0; j < n_mc; ++j) {
    const VectorXd x0 = p0_sampler(rng);
    const SourceGaussian src = make_source(sur.model, tau, x0);
    for (size_t i = 0; i < x_set.size(); ++i) {
      const FlowEval fe = forward(th, x_set[i], x0);
      acc[static_cast<int>(i)] +=
          source_density_at(src, fe.y) * std::exp(fe.log_det);
    }
  }
  return acc / static_cast<double>(n_mc);
}

}  // namespace ngnf
