#include "ngnf/benes.hpp"

#include <cmath>
#include <sstream>

namespace ngnf {

Eigen::Matrix2d rotation_matrix(double angle) {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

double benes_exact_identity(const Eigen::Vector2d& x, double tau,
                            const Eigen::Vector2d& x0) {
  if (!(tau > 0.0))
    throw DegenerateTimeError("benes_exact: tau must be positive");
  const double quad = (x - x0).squaredNorm() / (2.0 * tau);
  // cosh ratio in log space so large |x| does not overflow
  const double log_cosh_ratio =
      std::log(std::cosh(x[0])) + std::log(std::cosh(x[1])) -
      std::log(std::cosh(x0[0])) - std::log(std::cosh(x0[1]));
  return std::exp(-tau + log_cosh_ratio - quad) / (2.0 * M_PI * tau);
}

double benes_exact_rotated(const Eigen::Vector2d& x, double tau,
                           const Eigen::Vector2d& x0,
                           const Eigen::Matrix2d& rot) {
  return benes_exact_identity(rot.transpose() * x, tau, rot.transpose() * x0);
}

std::vector<VectorXd> GridSpec::nodes() const {
  std::vector<VectorXd> out;
  out.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      VectorXd p(2);
      p << x(i), y(j);
      out.push_back(p);
    }
  return out;
}

double relative_l2(const VectorXd& approx, const VectorXd& exact,
                   const std::vector<double>& weights) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < approx.size(); ++i) {
    const double d = approx[i] - exact[i];
    num += weights[i] * d * d;
    den += weights[i] * exact[i] * exact[i];
  }
  return std::sqrt(num / den);
}

double relative_l2_error(const Surrogate& sur, double tau, const VectorXd& x0,
                         const GridSpec& grid) {
  if (sur.model.name != "benes_rot")
    throw ConfigError("relative_l2_error: exact solution known only for the "
                      "rotated Benes model");
  const Eigen::Matrix2d rot =
      sur.model.sqrt_diffusion(sur.s(), VectorXd::Zero(2));
  const ParamVector th = sur.theta(sur.s() + tau);

  const int n = grid.nx * grid.ny;
  VectorXd approx(n), exact(n);
  std::vector<double> w(n);
  int k = 0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i, ++k) {
      Eigen::Vector2d p(grid.x(i), grid.y(j));
      approx[k] = flow_density_value(th, tau, x0, p, sur.model);
      exact[k] = benes_exact_rotated(p, tau, x0, rot);
      w[k] = grid.weight(i, j);
    }
  return relative_l2(approx, exact, w);
}

MixtureInit MixtureInit::reference_default() {
  MixtureInit mix;
  mix.weights = {0.25, 0.75};
  mix.means = {Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(-0.75, -0.75)};
  mix.covs = {0.1 * 0.1 * Eigen::Matrix2d::Identity(),
              0.5 * 0.5 * Eigen::Matrix2d::Identity()};
  return mix;
}

MixtureInit MixtureInit::from_kv(const KvDoc& doc, int dim) {
  const auto get = [&](const std::string& key) -> std::string {
    const auto it = doc.find(key);
    if (it == doc.end())
      throw ConfigError("mixture config missing key '" + key + "'");
    return it->second;
  };
  const auto parse_csv = [](const std::string& text) {
    std::vector<double> vals;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) vals.push_back(std::stod(tok));
    return vals;
  };
  MixtureInit mix;
  const int k = std::stoi(get("mixture.components"));
  for (int c = 0; c < k; ++c) {
    const std::string pre = "mixture." + std::to_string(c) + ".";
    mix.weights.push_back(std::stod(get(pre + "weight")));
    const auto mean = parse_csv(get(pre + "mean"));
    const auto cov = parse_csv(get(pre + "cov"));
    if (static_cast<int>(mean.size()) != dim ||
        static_cast<int>(cov.size()) != dim * dim)
      throw ConfigError("mixture component " + std::to_string(c) +
                        ": wrong mean/cov size");
    mix.means.push_back(Eigen::Map<const VectorXd>(mean.data(), dim));
    mix.covs.push_back(
        Eigen::Map<const MatrixXd>(cov.data(), dim, dim).transpose());
  }
  mix.validate();
  return mix;
}

void MixtureInit::validate() const {
  if (weights.empty() || weights.size() != means.size() ||
      weights.size() != covs.size())
    throw ConfigError("mixture: inconsistent component lists");
  double total = 0.0;
  for (size_t c = 0; c < weights.size(); ++c) {
    if (!(weights[c] > 0.0)) throw ConfigError("mixture: weights must be positive");
    total += weights[c];
    if (Eigen::LLT<MatrixXd>(covs[c]).info() != Eigen::Success)
      throw ConfigError("mixture: covariance not positive definite");
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ConfigError("mixture: weights must sum to 1");
}

double MixtureInit::density(const VectorXd& x) const {
  const int d = static_cast<int>(x.size());
  double p = 0.0;
  for (size_t c = 0; c < weights.size(); ++c) {
    const Eigen::LLT<MatrixXd> llt(covs[c]);
    const MatrixXd l = llt.matrixL();
    const VectorXd w = l.triangularView<Eigen::Lower>().solve(x - means[c]);
    double log_det = 0.0;
    for (int i = 0; i < d; ++i) log_det += std::log(l(i, i));
    p += weights[c] * std::exp(-0.5 * w.squaredNorm() -
                               0.5 * d * std::log(2.0 * M_PI) - log_det);
  }
  return p;
}

VectorXd MixtureInit::sample(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  size_t c = 0;
  for (; c + 1 < weights.size(); ++c) {
    acc += weights[c];
    if (u < acc) break;
  }
  const Eigen::LLT<MatrixXd> llt(covs[c]);
  const MatrixXd l = llt.matrixL();
  const int d = static_cast<int>(means[c].size());
  return means[c] + l * rng.gaussian_vector(d);
}

namespace {
constexpr uint64_t kConvolveSalt = 0x636f6e76ULL;
}

VectorXd convolve_initial(const Surrogate& sur, const MixtureInit& p0,
                          double tau, const std::vector<VectorXd>& x_eval,
                          int n_mc, uint64_t seed) {
  Rng rng(mix_seed(seed, kConvolveSalt));
  return green_convolve(
      sur, [&p0](Rng& r) { return p0.sample(r); }, sur.s() + tau, x_eval, n_mc,
      rng);
}

VectorXd convolve_kernel(
    const std::function<double(const VectorXd&, const VectorXd&)>& kernel,
    const MixtureInit& p0, const std::vector<VectorXd>& x_eval, int n_mc,
    uint64_t seed) {
  Rng rng(mix_seed(seed, kConvolveSalt));
  VectorXd acc = VectorXd::Zero(static_cast<int>(x_eval.size()));
  for (int j = 0; j < n_mc; ++j) {
    const VectorXd x0 = p0.sample(rng);
    for (size_t i = 0; i < x_eval.size(); ++i)
      acc[static_cast<int>(i)] += kernel(x_eval[i], x0);
  }
  return acc / static_cast<double>(n_mc);
}

}  // namespace ngnf
