#pragma once

#include <vector>

#include "ngnf/common.hpp"
#include "ngnf/evaluator.hpp"

namespace ngnf {

Eigen::Matrix2d rotation_matrix(double angle);

/// Closed-form Benes transition density for the identity rotation:
/// rho_I = e^{-tau}/(2 pi tau) cosh(x1)cosh(x2)/(cosh(x01)cosh(x02))
///         exp(-|x - x0|^2 / (2 tau)).
double benes_exact_identity(const Eigen::Vector2d& x, double tau,
                            const Eigen::Vector2d& x0);

/// rho_R(x | tau, x0) = rho_I(R^T x | tau, R^T x0).
double benes_exact_rotated(const Eigen::Vector2d& x, double tau,
                           const Eigen::Vector2d& x0,
                           const Eigen::Matrix2d& rot);

/// Rectangular tensor grid with trapezoid quadrature weights.
struct GridSpec {
  double x_min = -6.0, x_max = 6.0;
  double y_min = -6.0, y_max = 6.0;
  int nx = 121, ny = 121;

  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dy() const { return (y_max - y_min) / (ny - 1); }
  double x(int i) const { return x_min + i * dx(); }
  double y(int j) const { return y_min + j * dy(); }
  double weight(int i, int j) const {
    const double wi = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
    const double wj = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
    return wi * wj * dx() * dy();
  }
  std::vector<VectorXd> nodes() const;
};

/// ||P - rho_R||_{L2(grid)} / ||rho_R||_{L2(grid)} against the exact
/// rotated Benes solution, rot taken from the surrogate's model.
double relative_l2_error(const Surrogate& sur, double tau, const VectorXd& x0,
                         const GridSpec& grid);

/// Same metric between two arbitrary grids of values.
double relative_l2(const VectorXd& approx, const VectorXd& exact,
                   const std::vector<double>& weights);

/// Gaussian mixture initial law p0.
struct MixtureInit {
  std::vector<double> weights;
  std::vector<VectorXd> means;
  std::vector<MatrixXd> covs;

  /// 1/4 N([1,1], 0.1^2 I) + 3/4 N([-0.75,-0.75], 0.5^2 I).
  static MixtureInit reference_default();
  static MixtureInit from_kv(const KvDoc& doc, int dim);

  void validate() const;
  double density(const VectorXd& x) const;
  VectorXd sample(Rng& rng) const;
};

/// Monte Carlo convolution of the surrogate kernel with p0 at time
/// tau after the SDE start.
VectorXd convolve_initial(const Surrogate& sur, const MixtureInit& p0,
                          double tau, const std::vector<VectorXd>& x_eval,
                          int n_mc, uint64_t seed);

/// Same estimator with an arbitrary kernel, used with the exact solution
/// as the reference.
VectorXd convolve_kernel(
    const std::function<double(const VectorXd&, const VectorXd&)>& kernel,
    const MixtureInit& p0, const std::vector<VectorXd>& x_eval, int n_mc,
    uint64_t seed);

}  // namespace ngnf
