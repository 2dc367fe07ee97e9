#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "ngnf/common.hpp"
#include "ngnf/dual.hpp"

namespace ngnf {

/// Structural hyperparameters of the conditional Real-NVP flow.
struct FlowConfig {
  int d = 2;          // spatial dimension
  int L = 10;         // number of coupling layers, even
  int m = 1;          // split index, 1 <= m < d
  double beta = 0.9;  // scale bound, 0 < beta < 1
  int hidden = 4;     // GRU hidden size

  void validate() const;
};

/// Offsets of the trainable slices of one coupling layer inside the flat
/// parameter vector. Each of the s- and t-networks is a one-step GRU cell
/// (zero initial state) followed by a linear head:
///   W   : 3h x (m+d) stacked gate matrices [z; r; n]
///   b   : 3h gate biases
///   bhn : h  candidate-state bias entering through the reset gate
///   head: (d-m) x h weights plus (d-m) biases
/// Parameters acting on the zero initial hidden state are omitted from the
/// layout; they cannot influence a one-step evaluation.
struct LayerSlices {
  int base;    // start of this layer's block
  int s_net;   // s-network GRU + head, net_size entries
  int t_net;   // t-network GRU + head, net_size entries
  int s_head;  // start of the s head (weights then bias)
  int t_head;
  int xi;      // per-layer shift modulation, d-m entries
};

struct ParamLayout {
  FlowConfig cfg;
  int in;          // conditioning length m + d
  int out;         // active block length d - m
  int net_size;    // parameters per s/t network
  int layer_size;  // 2 * net_size + out
  int total;       // M

  // offsets within one network block
  int off_w() const { return 0; }
  int off_b() const { return 3 * cfg.hidden * in; }
  int off_bhn() const { return off_b() + 3 * cfg.hidden; }
  int off_head_w() const { return off_bhn() + cfg.hidden; }
  int off_head_b() const { return off_head_w() + out * cfg.hidden; }

  LayerSlices layer(int l) const;  // l in [1, L]
};

/// Deterministic layout for a given config; validates the config.
ParamLayout make_layout(const FlowConfig& cfg);

/// Total parameter count M.
int param_count(const FlowConfig& cfg);

struct ParamVector {
  ParamLayout layout;
  VectorXd values;
};

struct FlowEval {
  VectorXd y;      // n_theta(x | x0)
  double log_det;  // log |det of the spatial Jacobian|
};

struct CoupleResult {
  VectorXd x_next;
  double log_det_factor;
};

/// Sparse initialization: all head weights/biases and xi are zero, GRU
/// internals are small seeded uniform values. The resulting flow is the
/// identity map with zero log-determinant.
ParamVector identity_init(const FlowConfig& cfg, uint64_t seed);

/// Raw s- and t-network outputs for layer l (before the tanh of the
/// coupling transform), given the conditioning vector c = (idle block, x0).
std::pair<VectorXd, VectorXd> scale_shift(const ParamVector& theta, int layer,
                                          const VectorXd& c);

/// One coupling layer, including the coordinate-reversal convention for
/// even layers.
CoupleResult couple_forward(const ParamVector& theta, int layer,
                            const VectorXd& x_prev, const VectorXd& x0);

FlowEval forward(const ParamVector& theta, const VectorXd& x,
                 const VectorXd& x0);

/// Analytic inverse of forward; exact to round-off.
VectorXd inverse(const ParamVector& theta, const VectorXd& z,
                 const VectorXd& x0);

struct FlowThetaDerivs {
  VectorXd y;
  double log_det;
  MatrixXd dy_dtheta;        // d x M
  VectorXd dlogdet_dtheta;   // M
};

/// Exact parameter derivatives of the flow output and log-determinant,
/// accumulated layer by layer in forward order.
FlowThetaDerivs grad_theta(const ParamVector& theta, const VectorXd& x,
                           const VectorXd& x0);

// ---------------------------------------------------------------------------
// Templated core, shared between the plain double path and the Dual2 path
// used for spatial derivatives. Parameters are always doubles; only the
// state coordinates carry the scalar type.
// ---------------------------------------------------------------------------

namespace detail {

/// One-step GRU (zero initial state) followed by a linear head.
template <class S>
void net_eval(const double* p, int in, int hidden, int out, const S* c,
              S* y) {
  using std::exp;
  using std::tanh;
  const double* wz = p;
  const double* wr = p + hidden * in;
  const double* wn = p + 2 * hidden * in;
  const double* b = p + 3 * hidden * in;
  const double* bhn = b + 3 * hidden;
  const double* hw = bhn + hidden;
  const double* hb = hw + out * hidden;

  std::vector<S> hs(hidden);
  for (int i = 0; i < hidden; ++i) {
    S az(b[i]);
    S ar(b[hidden + i]);
    S an(b[2 * hidden + i]);
    for (int j = 0; j < in; ++j) {
      az = az + wz[i * in + j] * c[j];
      ar = ar + wr[i * in + j] * c[j];
      an = an + wn[i * in + j] * c[j];
    }
    const S z = sigmoid(az);
    const S r = sigmoid(ar);
    const S n = tanh(an + r * bhn[i]);
    hs[i] = (1.0 - z) * n;
  }
  for (int k = 0; k < out; ++k) {
    S acc(hb[k]);
    for (int i = 0; i < hidden; ++i) acc = acc + hw[k * hidden + i] * hs[i];
    y[k] = acc;
  }
}

/// In-place coupling step with the first m coordinates idle. `x0` is the
/// constant conditioner. Adds the layer's log-determinant contribution.
template <class S>
void couple_first_m_idle(const ParamLayout& lay, const double* layer_params,
                         const double* x0, S* x, S& log_det) {
  using std::exp;
  using std::log;
  using std::tanh;
  const int d = lay.cfg.d;
  const int m = lay.cfg.m;
  const int out = lay.out;
  const double beta = lay.cfg.beta;

  std::vector<S> c(lay.in);
  for (int j = 0; j < m; ++j) c[j] = x[j];
  for (int j = 0; j < d; ++j) c[m + j] = S(x0[j]);

  std::vector<S> s_raw(out), t_raw(out);
  net_eval(layer_params, lay.in, lay.cfg.hidden, out, c.data(), s_raw.data());
  net_eval(layer_params + lay.net_size, lay.in, lay.cfg.hidden, out, c.data(),
           t_raw.data());
  const double* xi = layer_params + 2 * lay.net_size;

  for (int i = 0; i < out; ++i) {
    const S scale = 1.0 + beta * tanh(s_raw[i]);
    x[m + i] = x[m + i] * scale + std::exp(xi[i]) * tanh(t_raw[i]);
    log_det = log_det + log(scale);
  }
}

template <class S>
void reverse_coords(S* x, int d) {
  for (int i = 0, j = d - 1; i < j; ++i, --j) std::swap(x[i], x[j]);
}

/// Full flow, templated on the state scalar. `x` is transformed in place.
template <class S>
void forward_impl(const ParamVector& theta, const double* x0, S* x,
                  S& log_det) {
  const ParamLayout& lay = theta.layout;
  log_det = S(0.0);
  for (int l = 1; l <= lay.cfg.L; ++l) {
    const bool flip = (l % 2 == 0);
    if (flip) reverse_coords(x, lay.cfg.d);
    couple_first_m_idle(lay, theta.values.data() + lay.layer(l).base, x0, x,
                        log_det);
    if (flip) reverse_coords(x, lay.cfg.d);
  }
}

}  // namespace detail

}  // namespace ngnf
