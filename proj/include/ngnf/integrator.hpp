#pragma once

#include <functional>
#include <map>
#include <string>

#include "ngnf/common.hpp"
#include "ngnf/flow.hpp"

namespace ngnf {

struct IntegratorConfig {
  double t_start = 0.0;  // epsilon > 0
  double t_end = 0.0;    // T - s
  double rtol = 1e-3;
  double atol = 1e-6;
  double h_init = 1e-3;
  double h_min = 1e-10;
  double h_max = 0.05;
  int checkpoint_stride = 1;

  void validate() const;
};

/// Parameter trajectory {tau_k, theta(tau_k)} plus the configuration
/// document it was produced from.
struct Checkpoint {
  std::map<std::string, std::string> meta;  // flat key/value document
  VectorXd times;                           // K, strictly increasing
  MatrixXd thetas;                          // K x M
};

/// Velocity field theta_dot = f(theta, tau); the stage seed makes a Monte
/// Carlo field deterministic per evaluation.
using VelocityField =
    std::function<VectorXd(const VectorXd&, double, uint64_t)>;

/// Called once per accepted step with (tau, step size, theta).
using StepObserver = std::function<void(double, double, const VectorXd&)>;

/// Adaptive Bogacki-Shampine 3(2) integration from t_start to t_end.
/// Steps are accepted when the embedded error estimate passes the
/// per-component tolerance atol + rtol * |theta_i| in RMS norm.
Checkpoint integrate(const VectorXd& theta0, const VelocityField& vel_field,
                     const IntegratorConfig& icfg, uint64_t seed = 0,
                     const StepObserver& observer = nullptr);

/// Piecewise-linear interpolation of the stored trajectory; exact at nodes.
VectorXd theta_at(const Checkpoint& ckpt, double tau);

/// Binary checkpoint file: magic "NGNF", u32 version, length-prefixed
/// canonical text header, K*M little-endian doubles row-major, u64 checksum.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Throws ConfigError when the checkpoint was trained with a different
/// flow architecture.
void check_flow_config(const Checkpoint& ckpt, const FlowConfig& cfg);

}  // namespace ngnf
