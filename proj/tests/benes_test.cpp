#include "ngnf/benes.hpp"

#include <doctest.h>

#include "ngnf/source.hpp"
#include "oracles.hpp"

using namespace ngnf;

TEST_CASE("exact density value and symmetries") {
  const Eigen::Vector2d zero(0.0, 0.0);
  // at x = x0 = 0, tau = 1: e^{-1} / (2 pi)
  CHECK(benes_exact_identity(zero, 1.0, zero) ==
        doctest::Approx(std::exp(-1.0) / (2.0 * M_PI)).epsilon(1e-14));

  // even in each coordinate when started at the origin
  const Eigen::Vector2d x(0.7, -1.3);
  const double v = benes_exact_identity(x, 0.8, zero);
  CHECK(benes_exact_identity(Eigen::Vector2d(-0.7, -1.3), 0.8, zero) ==
        doctest::Approx(v).epsilon(1e-14));
  CHECK(benes_exact_identity(Eigen::Vector2d(0.7, 1.3), 0.8, zero) ==
        doctest::Approx(v).epsilon(1e-14));
  // coordinate exchange symmetry
  CHECK(benes_exact_identity(Eigen::Vector2d(-1.3, 0.7), 0.8, zero) ==
        doctest::Approx(v).epsilon(1e-14));
  CHECK(v > 0.0);
}

TEST_CASE("exact density integrates to one") {
  Rng rng(3);
  const Eigen::Vector2d x0(0.4, -0.2);
  for (const double tau : {0.25, 1.0, 2.0}) {
    GridSpec grid;
    const double half = 6.0 * std::sqrt(tau) + tau + 2.0;
    grid.x_min = x0[0] - half;
    grid.x_max = x0[0] + half;
    grid.y_min = x0[1] - half;
    grid.y_max = x0[1] + half;
    grid.nx = grid.ny = 201;
    double mass = 0.0;
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j)
        mass += grid.weight(i, j) *
                benes_exact_identity(Eigen::Vector2d(grid.x(i), grid.y(j)),
                                     tau, x0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("rotation identities") {
  const Eigen::Matrix2d R = rotation_matrix(M_PI / 3.0);
  CHECK(R(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(R(1, 0) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-15));
  CHECK((R * R.transpose() - Eigen::Matrix2d::Identity()).norm() < 1e-15);
  CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-15));

  Rng rng(5);
  for (int k = 0; k < 10; ++k) {
    const Eigen::Vector2d x = rng.gaussian_vector(2);
    const Eigen::Vector2d x0 = rng.gaussian_vector(2);
    const double tau = 0.2 + rng.uniform();
    // rotated density at rotated arguments equals the identity density
    CHECK(benes_exact_rotated(R * x, tau, R * x0, R) ==
          doctest::Approx(benes_exact_identity(x, tau, x0)).epsilon(1e-13));
    // identity rotation reduces to the identity-frame formula
    CHECK(benes_exact_rotated(x, tau, x0, Eigen::Matrix2d::Identity()) ==
          doctest::Approx(benes_exact_identity(x, tau, x0)).epsilon(1e-14));
  }
}

TEST_CASE("exact density satisfies the Fokker-Planck equation") {
  // d/dtau rho = L* rho with b(x) = tanh applied per coordinate, Sigma = I:
  // L* rho = -div(b rho) + 1/2 Laplacian(rho). Checked by finite
  // differences of the closed form in the identity frame.
  const Eigen::Vector2d x0(0.3, -0.5);
  Rng rng(7);
  for (int k = 0; k < 10; ++k) {
    const Eigen::Vector2d x = x0 + rng.gaussian_vector(2);
    const double tau = 0.4 + rng.uniform();

    const auto rho = [&](const VectorXd& p) {
      return benes_exact_identity(p, tau, x0);
    };
    const double dt = oracles::fd_derivative(
        [&](double t) { return benes_exact_identity(x, t, x0); }, tau, 1e-5);
    const VectorXd g = oracles::fd_gradient(rho, x);
    const MatrixXd h = oracles::fd_hessian(rho, x);
    const double val = rho(x);
    const Eigen::Vector2d b = x.array().tanh();
    const double div_b = 2.0 - b.squaredNorm();  // sum of sech^2
    const double lstar = -div_b * val - b.dot(g) + 0.5 * h.trace();
    CHECK(std::abs(dt - lstar) < 1e-4 * std::max(1.0, std::abs(lstar)));
  }
}

TEST_CASE("grid nodes and relative_l2") {
  GridSpec grid;
  grid.x_min = -1.0;
  grid.x_max = 1.0;
  grid.y_min = 0.0;
  grid.y_max = 2.0;
  grid.nx = 3;
  grid.ny = 5;
  const auto nodes = grid.nodes();
  REQUIRE(nodes.size() == 15);
  CHECK(nodes.front()[0] == -1.0);
  CHECK(nodes.front()[1] == 0.0);
  CHECK(nodes.back()[0] == 1.0);
  CHECK(nodes.back()[1] == 2.0);

  std::vector<double> w;
  VectorXd exact(15), approx(15);
  int idx = 0;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      w.push_back(grid.weight(i, j));
      exact[idx] = 1.0 + i + j;
      approx[idx] = exact[idx];
      ++idx;
    }
  }
  CHECK(relative_l2(approx, exact, w) == 0.0);
  approx *= 1.1;  // uniform 10% inflation -> exactly 0.1 relative error
  CHECK(relative_l2(approx, exact, w) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("mixture initial law: normalization, density, sampling") {
  const MixtureInit p0 = MixtureInit::reference_default();
  CHECK_NOTHROW(p0.validate());
  REQUIRE(p0.weights.size() == 2);
  CHECK(p0.weights[0] == doctest::Approx(0.25));
  CHECK(p0.weights[1] == doctest::Approx(0.75));
  CHECK((p0.means[0] - Eigen::Vector2d(1.0, 1.0)).norm() == 0.0);
  CHECK((p0.means[1] - Eigen::Vector2d(-0.75, -0.75)).norm() == 0.0);

  // density value at the first mean: dominated by the tight component
  const double d1 = 0.25 / (2.0 * M_PI * 0.01);
  CHECK(p0.density(Eigen::Vector2d(1.0, 1.0)) > 0.99 * d1);

  // quadrature mass
  GridSpec grid;
  grid.x_min = grid.y_min = -5.0;
  grid.x_max = grid.y_max = 5.0;
  grid.nx = grid.ny = 201;
  double mass = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j)
      mass += grid.weight(i, j) *
              p0.density(Eigen::Vector2d(grid.x(i), grid.y(j)));
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

  // sampling: component frequencies and overall mean
  Rng rng(11);
  int near_first = 0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const VectorXd s = p0.sample(rng);
    mean += s;
    if ((s - p0.means[0]).norm() < 0.5) ++near_first;
  }
  mean /= n;
  const Eigen::Vector2d expect =
      0.25 * Eigen::Vector2d(1.0, 1.0) + 0.75 * Eigen::Vector2d(-0.75, -0.75);
  CHECK((mean - expect).lpNorm<Eigen::Infinity>() < 0.02);
  CHECK(double(near_first) / n == doctest::Approx(0.25).epsilon(0.05));

  MixtureInit bad = p0;
  bad.weights[0] = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("convolve_kernel reproduces a pure-shift convolution") {
  // kernel(x | x0) = delta-like Gaussian centered at x0 with tiny width:
  // the convolution approaches p0 itself.
  const MixtureInit p0 = MixtureInit::reference_default();
  const double sig2 = 1e-8;
  const auto kernel = [&](const VectorXd& x, const VectorXd& x0) {
    return std::exp(-(x - x0).squaredNorm() / (2.0 * sig2)) /
           (2.0 * M_PI * sig2);
  };
  // with a point kernel MC averaging is hopeless; instead use a moderate
  // Gaussian kernel and compare against the exact Gaussian convolution.
  const double s2 = 0.25;
  const auto gkernel = [&](const VectorXd& x, const VectorXd& x0) {
    return std::exp(-(x - x0).squaredNorm() / (2.0 * s2)) / (2.0 * M_PI * s2);
  };
  (void)kernel;

  std::vector<VectorXd> pts;
  pts.push_back(Eigen::Vector2d(0.0, 0.0));
  pts.push_back(Eigen::Vector2d(-0.75, -0.75));
  pts.push_back(Eigen::Vector2d(1.0, 1.0));
  const VectorXd est = convolve_kernel(gkernel, p0, pts, 200000, 5);

  // exact: sum_c w_c N(x; mu_c, (sig_c^2 + s2) I)
  for (size_t i = 0; i < pts.size(); ++i) {
    double exact = 0.0;
    for (size_t c = 0; c < p0.weights.size(); ++c) {
      const double v = p0.covs[c](0, 0) + s2;
      exact += p0.weights[c] *
               std::exp(-(pts[i] - p0.means[c]).squaredNorm() / (2.0 * v)) /
               (2.0 * M_PI * v);
    }
    CHECK(est[int(i)] == doctest::Approx(exact).epsilon(0.02));
  }

  // deterministic in the seed
  const VectorXd est2 = convolve_kernel(gkernel, p0, pts, 1000, 5);
  const VectorXd est3 = convolve_kernel(gkernel, p0, pts, 1000, 5);
  CHECK((est2 - est3).norm() == 0.0);
}
