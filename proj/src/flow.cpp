#include "ngnf/flow.hpp"

#include <cmath>

namespace ngnf {

void FlowConfig::validate() const {
  if (d < 2) throw ConfigError("flow: spatial dimension d must be >= 2");
  if (L < 2 || L % 2 != 0)
    throw ConfigError("flow: layer count L must be even and >= 2");
  if (m < 1 || m >= d) throw ConfigError("flow: split index m must satisfy 1 <= m < d");
  if (!(beta > 0.0 && beta < 1.0))
    throw ConfigError("flow: beta must lie in (0, 1)");
  if (hidden < 1) throw ConfigError("flow: hidden size must be positive");
}

LayerSlices ParamLayout::layer(int l) const {
  LayerSlices s;
  s.base = (l - 1) * layer_size;
  s.s_net = s.base;
  s.t_net = s.base + net_size;
  s.s_head = s.s_net + off_head_w();
  s.t_head = s.t_net + off_head_w();
  s.xi = s.base + 2 * net_size;
  return s;
}

ParamLayout make_layout(const FlowConfig& cfg) {
  cfg.validate();
  ParamLayout lay;
  lay.cfg = cfg;
  lay.in = cfg.m + cfg.d;
  lay.out = cfg.d - cfg.m;
  lay.net_size = 3 * cfg.hidden * lay.in + 3 * cfg.hidden + cfg.hidden +
                 lay.out * cfg.hidden + lay.out;
  lay.layer_size = 2 * lay.net_size + lay.out;
  lay.total = cfg.L * lay.layer_size;
  return lay;
}

int param_count(const FlowConfig& cfg) { return make_layout(cfg).total; }

ParamVector identity_init(const FlowConfig& cfg, uint64_t seed) {
  ParamVector theta{make_layout(cfg), VectorXd::Zero(param_count(cfg))};
  const ParamLayout& lay = theta.layout;
  Rng rng(mix_seed(seed, 0x666c6f77ULL));  // independent init stream
  const double scale = 0.1 / std::sqrt(static_cast<double>(cfg.hidden));
  const int gru_size = lay.off_head_w();  // W, b, bhn precede the head
  for (int l = 1; l <= cfg.L; ++l) {
    const LayerSlices sl = lay.layer(l);
    for (int net : {sl.s_net, sl.t_net})
      for (int k = 0; k < gru_size; ++k)
        theta.values[net + k] = rng.uniform(-scale, scale);
    // heads and xi stay zero: the flow is exactly the identity
  }
  return theta;
}

std::pair<VectorXd, VectorXd> scale_shift(const ParamVector& theta, int layer,
                                          const VectorXd& c) {
  const ParamLayout& lay = theta.layout;
  if (layer < 1 || layer > lay.cfg.L)
    throw ConfigError("scale_shift: layer index out of range");
  if (c.size() != lay.in)
    throw ConfigError("scale_shift: conditioning vector has wrong length");
  const LayerSlices sl = lay.layer(layer);
  VectorXd s(lay.out), t(lay.out);
  detail::net_eval(theta.values.data() + sl.s_net, lay.in, lay.cfg.hidden,
                   lay.out, c.data(), s.data());
  detail::net_eval(theta.values.data() + sl.t_net, lay.in, lay.cfg.hidden,
                   lay.out, c.data(), t.data());
  return {s, t};
}

CoupleResult couple_forward(const ParamVector& theta, int layer,
                            const VectorXd& x_prev, const VectorXd& x0) {
  const ParamLayout& lay = theta.layout;
  if (layer < 1 || layer > lay.cfg.L)
    throw ConfigError("couple_forward: layer index out of range");
  VectorXd x = x_prev;
  double log_det = 0.0;
  const bool flip = (layer % 2 == 0);
  if (flip) detail::reverse_coords(x.data(), lay.cfg.d);
  detail::couple_first_m_idle(lay, theta.values.data() + lay.layer(layer).base,
                              x0.data(), x.data(), log_det);
  if (flip) detail::reverse_coords(x.data(), lay.cfg.d);
  return {x, log_det};
}

FlowEval forward(const ParamVector& theta, const VectorXd& x,
                 const VectorXd& x0) {
  if (!x.allFinite() || !x0.allFinite())
    throw NumericError("flow forward: non-finite input coordinates");
  VectorXd y = x;
  double log_det = 0.0;
  detail::forward_impl(theta, x0.data(), y.data(), log_det);
  return {y, log_det};
}

VectorXd inverse(const ParamVector& theta, const VectorXd& z,
                 const VectorXd& x0) {
  const ParamLayout& lay = theta.layout;
  const int d = lay.cfg.d;
  const int m = lay.cfg.m;
  VectorXd x = z;
  VectorXd c(lay.in), s(lay.out), t(lay.out);
  for (int l = lay.cfg.L; l >= 1; --l) {
    const bool flip = (l % 2 == 0);
    if (flip) detail::reverse_coords(x.data(), d);
    const double* lp = theta.values.data() + lay.layer(l).base;
    c.head(m) = x.head(m);  // idle block is copied by the forward map
    c.tail(d) = x0;
    detail::net_eval(lp, lay.in, lay.cfg.hidden, lay.out, c.data(), s.data());
    detail::net_eval(lp + lay.net_size, lay.in, lay.cfg.hidden, lay.out,
                     c.data(), t.data());
    const double* xi = lp + 2 * lay.net_size;
    for (int i = 0; i < lay.out; ++i) {
      const double scale = 1.0 + lay.cfg.beta * std::tanh(s[i]);
      x[m + i] = (x[m + i] - std::exp(xi[i]) * std::tanh(t[i])) / scale;
    }
    if (flip) detail::reverse_coords(x.data(), d);
  }
  return x;
}

namespace {

/// Value and derivatives of one s/t network with respect to the
/// conditioning vector and its own parameters.
struct NetDerivs {
  VectorXd out;   // out
  MatrixXd d_c;   // out x in
  MatrixXd d_p;   // out x net_size
};

NetDerivs net_derivs(const ParamLayout& lay, const double* p,
                     const VectorXd& c) {
  const int in = lay.in;
  const int h = lay.cfg.hidden;
  const int out = lay.out;
  const double* wz = p;
  const double* wr = p + h * in;
  const double* wn = p + 2 * h * in;
  const double* b = p + 3 * h * in;
  const double* bhn = b + 3 * h;
  const double* hw = bhn + h;
  const double* hb = hw + out * h;

  VectorXd z(h), r(h), n(h), hs(h), dh_az(h), dh_ar(h), dh_an(h), dh_bhn(h);
  for (int i = 0; i < h; ++i) {
    double az = b[i], ar = b[h + i], an = b[2 * h + i];
    for (int j = 0; j < in; ++j) {
      az += wz[i * in + j] * c[j];
      ar += wr[i * in + j] * c[j];
      an += wn[i * in + j] * c[j];
    }
    z[i] = sigmoid(az);
    r[i] = sigmoid(ar);
    n[i] = std::tanh(an + r[i] * bhn[i]);
    hs[i] = (1.0 - z[i]) * n[i];
    const double dn = 1.0 - n[i] * n[i];
    dh_az[i] = -z[i] * (1.0 - z[i]) * n[i];
    dh_ar[i] = (1.0 - z[i]) * dn * bhn[i] * r[i] * (1.0 - r[i]);
    dh_an[i] = (1.0 - z[i]) * dn;
    dh_bhn[i] = (1.0 - z[i]) * dn * r[i];
  }

  NetDerivs nd;
  nd.out = VectorXd(out);
  nd.d_c = MatrixXd::Zero(out, in);
  nd.d_p = MatrixXd::Zero(out, lay.net_size);
  const int off_b = lay.off_b();
  const int off_bhn = lay.off_bhn();
  const int off_hw = lay.off_head_w();
  const int off_hb = lay.off_head_b();
  for (int k = 0; k < out; ++k) {
    double acc = hb[k];
    for (int i = 0; i < h; ++i) {
      const double w = hw[k * h + i];
      acc += w * hs[i];
      for (int j = 0; j < in; ++j) {
        nd.d_c(k, j) += w * (dh_az[i] * wz[i * in + j] +
                             dh_ar[i] * wr[i * in + j] +
                             dh_an[i] * wn[i * in + j]);
        nd.d_p(k, i * in + j) = w * dh_az[i] * c[j];
        nd.d_p(k, h * in + i * in + j) = w * dh_ar[i] * c[j];
        nd.d_p(k, 2 * h * in + i * in + j) = w * dh_an[i] * c[j];
      }
      nd.d_p(k, off_b + i) = w * dh_az[i];
      nd.d_p(k, off_b + h + i) = w * dh_ar[i];
      nd.d_p(k, off_b + 2 * h + i) = w * dh_an[i];
      nd.d_p(k, off_bhn + i) = w * dh_bhn[i];
      nd.d_p(k, off_hw + k * h + i) = hs[i];
    }
    nd.d_p(k, off_hb + k) = 1.0;
    nd.out[k] = acc;
  }
  return nd;
}

}  // namespace

FlowThetaDerivs grad_theta(const ParamVector& theta, const VectorXd& x,
                           const VectorXd& x0) {
  const ParamLayout& lay = theta.layout;
  const int d = lay.cfg.d;
  const int m = lay.cfg.m;
  const int out = lay.out;
  const int M = lay.total;
  const double beta = lay.cfg.beta;

  VectorXd cur = x;
  MatrixXd D = MatrixXd::Zero(d, M);   // d cur / d theta
  VectorXd g = VectorXd::Zero(M);      // d log_det / d theta
  double log_det = 0.0;
  VectorXd c(lay.in);

  for (int l = 1; l <= lay.cfg.L; ++l) {
    const bool flip = (l % 2 == 0);
    if (flip) {
      cur.reverseInPlace();
      D = D.colwise().reverse().eval();
    }
    const LayerSlices sl = lay.layer(l);
    const double* lp = theta.values.data() + sl.base;
    c.head(m) = cur.head(m);
    c.tail(d) = x0;
    const NetDerivs s = net_derivs(lay, lp, c);
    const NetDerivs t = net_derivs(lay, lp + lay.net_size, c);
    const double* xi = lp + 2 * lay.net_size;

    for (int i = 0; i < out; ++i) {
      const double ts = std::tanh(s.out[i]);
      const double tt = std::tanh(t.out[i]);
      const double sc = 1.0 + beta * ts;
      const double e = std::exp(xi[i]);
      const double u = cur[m + i];
      const double ds = beta * (1.0 - ts * ts);  // d scale / d s_raw
      const double dt = 1.0 - tt * tt;

      Eigen::RowVectorXd row = sc * D.row(m + i);
      for (int j = 0; j < m; ++j)
        row += (u * ds * s.d_c(i, j) + e * dt * t.d_c(i, j)) * D.row(j);
      row.segment(sl.s_net, lay.net_size) += u * ds * s.d_p.row(i);
      row.segment(sl.t_net, lay.net_size) += e * dt * t.d_p.row(i);
      row[sl.xi + i] += e * tt;

      const double w = ds / sc;  // d log(scale) / d s_raw
      for (int j = 0; j < m; ++j)
        g += (w * s.d_c(i, j)) * D.row(j).transpose();
      g.segment(sl.s_net, lay.net_size) += w * s.d_p.row(i).transpose();

      cur[m + i] = u * sc + e * tt;
      D.row(m + i) = row;
      log_det += std::log(sc);
    }
    if (flip) {
      cur.reverseInPlace();
      D = D.colwise().reverse().eval();
    }
  }
  return {cur, log_det, D, g};
}

}  // namespace ngnf
