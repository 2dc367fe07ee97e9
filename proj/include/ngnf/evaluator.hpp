#pragma once

#include <functional>
#include <vector>

#include "ngnf/config.hpp"
#include "ngnf/integrator.hpp"
#include "ngnf/sde.hpp"

namespace ngnf {

/// Online surrogate: a trained checkpoint plus the model and flow it was
/// trained with. Immutable after construction.
struct Surrogate {
  Checkpoint ckpt;
  RunConfig cfg;
  ParamLayout layout;
  SdeModel model;

  double s() const { return cfg.s; }
  double horizon_end() const { return cfg.T; }
  double eps() const { return ckpt.times[0]; }

  /// Flow parameters at absolute time t (range-checked).
  ParamVector theta(double t) const;
};

Surrogate make_surrogate(Checkpoint ckpt);
Surrogate load_surrogate(const std::string& path);

/// TPDF value P(x | t, x0) for any initial point, trained or not.
double density(const Surrogate& sur, const VectorXd& x, double t,
               const VectorXd& x0);

/// n samples of X(t) | X(s) = x0 via the inverse flow.
std::vector<VectorXd> sample(const Surrogate& sur, double t,
                             const VectorXd& x0, int n, Rng& rng);

/// Monte Carlo Green's-function convolution: average of density(x, t, X0)
/// over X0 ~ p0.
VectorXd green_convolve(const Surrogate& sur,
                        const std::function<VectorXd(Rng&)>& p0_sampler,
                        double t, const std::vector<VectorXd>& x_set, int n_mc,
                        Rng& rng);

}  // namespace ngnf
