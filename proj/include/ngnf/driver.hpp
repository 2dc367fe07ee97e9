#pragma once

#include <iosfwd>

#include "ngnf/config.hpp"
#include "ngnf/integrator.hpp"

namespace ngnf {

/// Offline training: identity initialization, Neural Galerkin velocity
/// field, adaptive integration over [eps, T - s]. The optional log stream
/// receives one CSV row per accepted step
/// (tau, step size, residual norm, |theta_dot|).
Checkpoint run_training(const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace ngnf
