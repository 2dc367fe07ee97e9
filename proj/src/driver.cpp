#include "ngnf/driver.hpp"

#include <iostream>
#include <ostream>

#include "ngnf/galerkin.hpp"

namespace ngnf {

Checkpoint run_training(const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  SdeModel model = model_by_name(cfg.model, cfg.flow.d);
  model.t0 = cfg.s;

  const ParamVector theta0 = identity_init(cfg.flow, cfg.seed);
  if (cfg.galerkin.n_samples < theta0.layout.total)
    std::cerr << "warning: n_samples (" << cfg.galerkin.n_samples
              << ") is below the parameter count (" << theta0.layout.total
              << "); the Galerkin system is underdetermined\n";

  const ParamLayout layout = theta0.layout;
  GalerkinStats last_stats;
  const VelocityField field = [&](const VectorXd& values, double tau,
                                  uint64_t stage_seed) {
    const ParamVector theta{layout, values};
    return galerkin_velocity(theta, tau, cfg.galerkin, model, stage_seed,
                             &last_stats);
  };

  if (log) *log << "tau,step_size,residual_norm,eta_norm\n";
  const StepObserver observer = [&](double tau, double h, const VectorXd&) {
    // under FSAL the latest stage evaluation sits at (theta(tau), tau)
    if (log)
      *log << format_double17(tau) << ',' << format_double17(h) << ','
           << format_double17(last_stats.residual) << ','
           << format_double17(last_stats.eta_norm) << '\n';
  };

  Checkpoint ckpt =
      integrate(theta0.values, field, cfg.resolved_integ(), cfg.seed, observer);
  ckpt.meta = cfg.to_kv();
  ckpt.meta["format.version"] = "1";
  return ckpt;
}

}  // namespace ngnf
