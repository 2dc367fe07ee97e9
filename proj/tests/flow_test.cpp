#include "ngnf/flow.hpp"

#include <doctest.h>

#include "oracles.hpp"

using namespace ngnf;

namespace {

FlowConfig small_config() {
  FlowConfig cfg;
  cfg.d = 2;
  cfg.L = 4;
  cfg.m = 1;
  cfg.beta = 0.9;
  cfg.hidden = 3;
  return cfg;
}

ParamVector random_theta(const FlowConfig& cfg, uint64_t seed,
                         double scale = 0.5) {
  ParamVector theta = identity_init(cfg, seed);
  Rng rng(mix_seed(seed, 99));
  for (int i = 0; i < theta.values.size(); ++i)
    theta.values[i] += rng.uniform(-scale, scale);
  return theta;
}

double fd_jacobian_det(const ParamVector& theta, const VectorXd& x,
                       const VectorXd& x0) {
  const auto f = [&](const VectorXd& p) { return forward(theta, p, x0).y; };
  return oracles::fd_jacobian(f, x).determinant();
}

}  // namespace

TEST_CASE("param_count is deterministic and rejects invalid configs") {
  FlowConfig cfg;
  cfg.d = 2;
  cfg.L = 2;
  cfg.m = 1;
  cfg.hidden = 1;
  const int m1 = param_count(cfg);
  CHECK(m1 == param_count(cfg));
  CHECK(m1 > 0);

  const ParamLayout lay = make_layout(cfg);
  CHECK(lay.total == cfg.L * lay.layer_size);
  // slices are disjoint and cover [0, M)
  CHECK(lay.layer(1).base == 0);
  CHECK(lay.layer(2).base == lay.layer_size);
  CHECK(lay.layer(2).xi + lay.out == lay.total);

  FlowConfig ref;  // the reference architecture must instantiate
  ref.d = 2;
  ref.L = 10;
  ref.m = 1;
  ref.hidden = 4;
  CHECK(param_count(ref) > 0);

  FlowConfig bigger = cfg;
  bigger.hidden = 2;
  CHECK(param_count(bigger) > m1);

  FlowConfig bad = cfg;
  bad.L = 3;
  CHECK_THROWS_AS(param_count(bad), ConfigError);
  bad = cfg;
  bad.m = 2;
  CHECK_THROWS_AS(param_count(bad), ConfigError);
  bad = cfg;
  bad.beta = 1.0;
  CHECK_THROWS_AS(param_count(bad), ConfigError);
}

TEST_CASE("scale_shift matches a hand-evaluated GRU for hidden=1") {
  FlowConfig cfg;
  cfg.d = 2;
  cfg.L = 2;
  cfg.m = 1;
  cfg.hidden = 1;
  ParamVector theta = identity_init(cfg, 3);
  Rng rng(17);
  for (int i = 0; i < theta.values.size(); ++i)
    theta.values[i] = rng.uniform(-1.0, 1.0);

  const VectorXd c = rng.gaussian_vector(3);
  const auto [s, t] = scale_shift(theta, 1, c);

  // independent evaluation of the one-step GRU + head, layer 1 s-network
  const auto* p = theta.values.data();
  const auto hand = [&](const double* net) {
    const double az = net[0] * c[0] + net[1] * c[1] + net[2] * c[2] + net[9];
    const double ar = net[3] * c[0] + net[4] * c[1] + net[5] * c[2] + net[10];
    const double an = net[6] * c[0] + net[7] * c[1] + net[8] * c[2] + net[11];
    const double z = 1.0 / (1.0 + std::exp(-az));
    const double r = 1.0 / (1.0 + std::exp(-ar));
    const double n = std::tanh(an + r * net[12]);
    return net[13] * (1.0 - z) * n + net[14];
  };
  CHECK(s[0] == doctest::Approx(hand(p)).epsilon(1e-14));
  CHECK(t[0] == doctest::Approx(hand(p + 15)).epsilon(1e-14));

  // two distinct conditioners give distinct outputs
  const VectorXd c2 = rng.gaussian_vector(3);
  const auto [s2, t2] = scale_shift(theta, 1, c2);
  CHECK(s[0] != s2[0]);
  CHECK(t[0] != t2[0]);
}

TEST_CASE("scale_shift is zero at identity init and with zeroed heads") {
  const FlowConfig cfg = small_config();
  const ParamVector theta0 = identity_init(cfg, 5);
  Rng rng(5);
  for (int l = 1; l <= cfg.L; ++l) {
    const VectorXd c = rng.gaussian_vector(3);
    const auto [s, t] = scale_shift(theta0, l, c);
    CHECK(s.norm() == 0.0);
    CHECK(t.norm() == 0.0);
  }

  ParamVector theta = random_theta(cfg, 7);
  const ParamLayout& lay = theta.layout;
  const int head_len = lay.off_head_b() - lay.off_head_w() + lay.out;
  for (int l = 1; l <= cfg.L; ++l) {
    theta.values.segment(lay.layer(l).s_head, head_len).setZero();
    theta.values.segment(lay.layer(l).t_head, head_len).setZero();
  }
  const VectorXd c = rng.gaussian_vector(3);
  const auto [s, t] = scale_shift(theta, 2, c);
  CHECK(s.norm() == 0.0);
  CHECK(t.norm() == 0.0);
}

TEST_CASE("couple_forward: identity, crafted layer, determinant bounds") {
  const FlowConfig cfg = small_config();
  const ParamVector theta0 = identity_init(cfg, 1);
  Rng rng(8);
  const VectorXd x = rng.gaussian_vector(2), x0 = rng.gaussian_vector(2);

  const CoupleResult id = couple_forward(theta0, 1, x, x0);
  CHECK((id.x_next - x).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(id.log_det_factor == 0.0);

  // zero parameters except a saturating t head bias: s = 0, tanh(t) ~ 1
  ParamVector crafted = theta0;
  crafted.values.setZero();
  crafted.values[crafted.layout.layer(1).t_net +
                 crafted.layout.off_head_b()] = 30.0;
  Eigen::Vector2d xp(0.3, -1.2);
  const CoupleResult cr = couple_forward(crafted, 1, xp, x0);
  CHECK(cr.x_next[0] == doctest::Approx(0.3));
  CHECK(cr.x_next[1] == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(cr.log_det_factor == doctest::Approx(0.0));

  // inverse of the crafted affine step
  const VectorXd back = inverse(
      [&] {
        // single-layer flow with the same crafted parameters
        FlowConfig one = cfg;
        one.L = 2;
        ParamVector th = identity_init(one, 0);
        th.values.setZero();
        th.values[th.layout.layer(1).t_net + th.layout.off_head_b()] = 30.0;
        return th;
      }(),
      Eigen::Vector2d(0.3, -0.2), x0);
  CHECK(back[0] == doctest::Approx(0.3));
  CHECK(back[1] == doctest::Approx(-1.2).epsilon(1e-12));

  // log-det factor stays inside ((d-m) log(1-beta), (d-m) log(1+beta))
  for (int k = 0; k < 50; ++k) {
    const ParamVector theta = random_theta(cfg, 100 + k, 2.0);
    const CoupleResult r =
        couple_forward(theta, 1 + k % cfg.L, rng.gaussian_vector(2),
                       rng.gaussian_vector(2));
    CHECK(r.log_det_factor > std::log(1.0 - cfg.beta));
    CHECK(r.log_det_factor < std::log(1.0 + cfg.beta));
  }
}

TEST_CASE("forward: identity property and log-det vs FD Jacobian") {
  const FlowConfig cfg = small_config();
  const ParamVector theta0 = identity_init(cfg, 42);
  Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    const VectorXd x = 3.0 * rng.gaussian_vector(2);
    const VectorXd x0 = rng.gaussian_vector(2);
    const FlowEval fe = forward(theta0, x, x0);
    CHECK((fe.y - x).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(fe.log_det == 0.0);
  }

  for (int k = 0; k < 30; ++k) {
    const ParamVector theta = random_theta(cfg, 200 + k);
    const VectorXd x = rng.gaussian_vector(2), x0 = rng.gaussian_vector(2);
    const FlowEval fe = forward(theta, x, x0);
    const double det_fd = fd_jacobian_det(theta, x, x0);
    CHECK(oracles::rel_err(std::exp(fe.log_det), std::abs(det_fd)) < 1e-5);
    // global determinant bounds
    CHECK(fe.log_det > cfg.L * (cfg.d - cfg.m) * std::log(1.0 - cfg.beta));
    CHECK(fe.log_det < cfg.L * (cfg.d - cfg.m) * std::log(1.0 + cfg.beta));
  }

  // d = 3 configuration as well
  FlowConfig cfg3 = cfg;
  cfg3.d = 3;
  cfg3.m = 1;
  for (int k = 0; k < 10; ++k) {
    const ParamVector theta = random_theta(cfg3, 300 + k);
    const VectorXd x = rng.gaussian_vector(3), x0 = rng.gaussian_vector(3);
    const FlowEval fe = forward(theta, x, x0);
    const auto f = [&](const VectorXd& p) { return forward(theta, p, x0).y; };
    const double det_fd = oracles::fd_jacobian(f, x).determinant();
    CHECK(oracles::rel_err(std::exp(fe.log_det), std::abs(det_fd)) < 1e-5);
  }

  CHECK_THROWS_AS(
      forward(theta0, Eigen::Vector2d(std::nan(""), 0.0), VectorXd::Zero(2)),
      NumericError);
}

TEST_CASE("inverse is the exact inverse of forward") {
  const FlowConfig cfg = small_config();
  Rng rng(13);
  for (int k = 0; k < 1000; ++k) {
    const ParamVector theta = random_theta(cfg, 400 + k % 37);
    const VectorXd x = 2.0 * rng.gaussian_vector(2);
    const VectorXd x0 = rng.gaussian_vector(2);
    const VectorXd back = inverse(theta, forward(theta, x, x0).y, x0);
    CHECK((back - x).lpNorm<Eigen::Infinity>() < 1e-9);
  }

  // bijectivity on a finite set: distinct inputs stay distinct
  const ParamVector theta = random_theta(cfg, 77);
  const VectorXd x0 = rng.gaussian_vector(2);
  std::vector<VectorXd> images;
  for (int k = 0; k < 100; ++k)
    images.push_back(forward(theta, rng.gaussian_vector(2), x0).y);
  for (size_t a = 0; a < images.size(); ++a)
    for (size_t b = a + 1; b < images.size(); ++b)
      CHECK((images[a] - images[b]).norm() > 0.0);
}

TEST_CASE("identity_init determinism and seed independence of the identity") {
  const FlowConfig cfg = small_config();
  const ParamVector a = identity_init(cfg, 7);
  const ParamVector b = identity_init(cfg, 7);
  CHECK((a.values - b.values).norm() == 0.0);

  const ParamVector c = identity_init(cfg, 8);
  CHECK((a.values - c.values).norm() > 0.0);
  Rng rng(21);
  const VectorXd x = rng.gaussian_vector(2), x0 = rng.gaussian_vector(2);
  const FlowEval fa = forward(a, x, x0), fc = forward(c, x, x0);
  CHECK((fa.y - x).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((fc.y - x).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(fa.log_det == 0.0);
  CHECK(fc.log_det == 0.0);
}

TEST_CASE("triangular structure of a single coupling layer") {
  FlowConfig cfg;
  cfg.d = 3;
  cfg.L = 2;
  cfg.m = 2;
  cfg.hidden = 2;
  const ParamVector theta = random_theta(cfg, 55);
  Rng rng(14);
  const VectorXd x0 = rng.gaussian_vector(3);
  const VectorXd x = rng.gaussian_vector(3);

  // odd layer: idle block x_{1:m} is copied verbatim
  const CoupleResult r = couple_forward(theta, 1, x, x0);
  CHECK(r.x_next[0] == x[0]);
  CHECK(r.x_next[1] == x[1]);

  // changing the active block never touches the idle output
  VectorXd x2 = x;
  x2[2] += 0.8;
  const CoupleResult r2 = couple_forward(theta, 1, x2, x0);
  CHECK(r2.x_next[0] == x[0]);
  CHECK(r2.x_next[1] == x[1]);

  // changing the idle block does change the active output
  VectorXd x3 = x;
  x3[0] += 0.8;
  const CoupleResult r3 = couple_forward(theta, 1, x3, x0);
  CHECK(r3.x_next[2] != r.x_next[2]);

  // FD Jacobian of the layer is lower triangular
  const auto f = [&](const VectorXd& p) {
    return couple_forward(theta, 1, p, x0).x_next;
  };
  const Eigen::MatrixXd jac = oracles::fd_jacobian(f, x);
  CHECK(std::abs(jac(0, 2)) < 1e-9);
  CHECK(std::abs(jac(1, 2)) < 1e-9);
  CHECK(std::abs(jac(0, 1)) < 1e-9);
}

TEST_CASE("grad_theta matches finite differences") {
  const FlowConfig cfg = small_config();
  Rng rng(31);
  for (int k = 0; k < 20; ++k) {
    const ParamVector theta = random_theta(cfg, 500 + k);
    const VectorXd x = rng.gaussian_vector(2), x0 = rng.gaussian_vector(2);
    const FlowThetaDerivs td = grad_theta(theta, x, x0);

    // consistency with plain forward
    const FlowEval fe = forward(theta, x, x0);
    CHECK((td.y - fe.y).norm() == 0.0);
    CHECK(td.log_det == fe.log_det);

    // directional derivative against the FD oracle
    VectorXd v = VectorXd::Zero(theta.layout.total);
    for (int i = 0; i < v.size(); ++i) v[i] = rng.gaussian();
    v.normalize();
    const double h = 1e-5;
    ParamVector tp = theta, tm = theta;
    tp.values += h * v;
    tm.values -= h * v;
    const FlowEval fp = forward(tp, x, x0), fm = forward(tm, x, x0);
    const VectorXd dy_fd = (fp.y - fm.y) / (2.0 * h);
    const double dld_fd = (fp.log_det - fm.log_det) / (2.0 * h);
    CHECK(oracles::rel_err(VectorXd(td.dy_dtheta * v), dy_fd) < 1e-4);
    CHECK(std::abs(td.dlogdet_dtheta.dot(v) - dld_fd) <
          1e-4 * std::max(1.0, std::abs(dld_fd)));
  }
}

TEST_CASE("log-det has no xi dependence and later layers do not act earlier") {
  const FlowConfig cfg = small_config();
  const ParamVector theta0 = identity_init(cfg, 61);
  Rng rng(41);
  const VectorXd x = rng.gaussian_vector(2), x0 = rng.gaussian_vector(2);
  const FlowThetaDerivs td = grad_theta(theta0, x, x0);
  for (int l = 1; l <= cfg.L; ++l) {
    const int xi = theta0.layout.layer(l).xi;
    for (int i = 0; i < theta0.layout.out; ++i)
      CHECK(td.dlogdet_dtheta[xi + i] == 0.0);
  }

  // perturbing layer 3 parameters leaves the layer-1..2 composition alone
  ParamVector theta = random_theta(cfg, 62);
  VectorXd mid = couple_forward(theta, 2,
                                couple_forward(theta, 1, x, x0).x_next, x0)
                     .x_next;
  ParamVector theta2 = theta;
  const auto sl = theta2.layout.layer(3);
  for (int i = 0; i < theta2.layout.layer_size; ++i)
    theta2.values[sl.base + i] += 0.3;
  VectorXd mid2 = couple_forward(theta2, 2,
                                 couple_forward(theta2, 1, x, x0).x_next, x0)
                      .x_next;
  CHECK((mid - mid2).norm() == 0.0);
}
