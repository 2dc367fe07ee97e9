// Command-line front end: offline training, density grids, error curves,
// sampling and Green's-function convolution for the Neural Galerkin
// normalizing-flow TPDF surrogate.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ngnf/benes.hpp"
#include "ngnf/driver.hpp"
#include "ngnf/evaluator.hpp"
#include "ngnf/galerkin.hpp"
#include "ngnf/source.hpp"

namespace {

using namespace ngnf;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> vals;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) vals.push_back(std::stod(tok));
  return vals;
}

VectorXd parse_point(const std::string& text, int dim) {
  const auto vals = parse_list(text);
  if (static_cast<int>(vals.size()) != dim)
    throw ConfigError("expected " + std::to_string(dim) +
                      " comma-separated coordinates, got '" + text + "'");
  return Eigen::Map<const VectorXd>(vals.data(), dim);
}

GridSpec parse_grid(const std::string& box, int n) {
  const auto vals = parse_list(box);
  if (vals.size() != 4)
    throw ConfigError("expected --box xmin,xmax,ymin,ymax");
  GridSpec g;
  g.x_min = vals[0];
  g.x_max = vals[1];
  g.y_min = vals[2];
  g.y_max = vals[3];
  g.nx = g.ny = n;
  if (n < 2 || g.x_min >= g.x_max || g.y_min >= g.y_max)
    throw ConfigError("degenerate grid specification");
  return g;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file '" + path + "'");
  return out;
}

void cmd_train(const std::string& config_path, const std::string& out_path,
               const std::string& log_path) {
  const RunConfig cfg = RunConfig::from_file(config_path);
  std::ofstream log;
  if (!log_path.empty()) log = open_output(log_path);
  const Checkpoint ckpt =
      run_training(cfg, log_path.empty() ? nullptr : &log);
  save_checkpoint(ckpt, out_path);
  std::cout << "checkpoint with " << ckpt.times.size() << " snapshots -> "
            << out_path << "\n";
}

void cmd_grid(const std::string& ckpt_path, const std::string& x0_text,
              double t, const std::string& box, int n, bool with_exact,
              const std::string& out_path) {
  const Surrogate sur = load_surrogate(ckpt_path);
  const VectorXd x0 = parse_point(x0_text, sur.model.dim);
  const GridSpec grid = parse_grid(box, n);
  const ParamVector th = sur.theta(t);
  const double tau = t - sur.s();
  Eigen::Matrix2d rot;
  if (with_exact) {
    if (sur.model.name != "benes_rot")
      throw ConfigError("--exact requires the benes_rot model");
    rot = sur.model.sqrt_diffusion(sur.s(), VectorXd::Zero(2));
  }
  auto out = open_output(out_path);
  out << "x1,x2,density" << (with_exact ? ",exact" : "") << "\n";
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      Eigen::Vector2d p(grid.x(i), grid.y(j));
      out << format_double17(p[0]) << ',' << format_double17(p[1]) << ','
          << format_double17(flow_density_value(th, tau, x0, p, sur.model));
      if (with_exact)
        out << ',' << format_double17(benes_exact_rotated(p, tau, x0, rot));
      out << '\n';
    }
}

void cmd_error(const std::string& ckpt_path, const std::string& x0_text,
               const std::string& t_list, const std::string& box, int n,
               bool self_test, const std::string& out_path) {
  const Surrogate sur = load_surrogate(ckpt_path);
  const VectorXd x0 = parse_point(x0_text, sur.model.dim);
  const GridSpec grid = parse_grid(box, n);
  const Eigen::Matrix2d rot =
      sur.model.sqrt_diffusion(sur.s(), VectorXd::Zero(2));
  auto out = open_output(out_path);
  out << "t,rel_l2\n";
  for (const double t : parse_list(t_list)) {
    double err;
    if (self_test) {
      err = 0.0;  // exact vs exact; kept as an end-to-end wiring check
      const int total = grid.nx * grid.ny;
      VectorXd exact(total);
      std::vector<double> w(total);
      int k = 0;
      for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i, ++k) {
          exact[k] = benes_exact_rotated({grid.x(i), grid.y(j)}, t - sur.s(),
                                         x0, rot);
          w[k] = grid.weight(i, j);
        }
      err = relative_l2(exact, exact, w);
    } else {
      err = relative_l2_error(sur, t - sur.s(), x0, grid);
    }
    out << format_double17(t) << ',' << format_double17(err) << '\n';
  }
}

void cmd_sample(const std::string& ckpt_path, const std::string& x0_text,
                double t, int n, uint64_t seed, const std::string& out_path) {
  const Surrogate sur = load_surrogate(ckpt_path);
  const VectorXd x0 = parse_point(x0_text, sur.model.dim);
  Rng rng(mix_seed(seed, 0x73616d70ULL));
  const auto points = sample(sur, t, x0, n, rng);
  auto out = open_output(out_path);
  out << "x1,x2\n";
  for (const auto& p : points) {
    for (int i = 0; i < p.size(); ++i)
      out << (i ? "," : "") << format_double17(p[i]);
    out << '\n';
  }
}

void cmd_convolve(const std::string& ckpt_path, double t,
                  const std::string& mixture_path, int n_mc,
                  const std::string& box, int n, bool exact_kernel,
                  uint64_t seed, const std::string& out_path) {
  const Surrogate sur = load_surrogate(ckpt_path);
  const MixtureInit mix =
      mixture_path.empty()
          ? MixtureInit::reference_default()
          : MixtureInit::from_kv(load_kv_file(mixture_path), sur.model.dim);
  const GridSpec grid = parse_grid(box, n);
  const auto nodes = grid.nodes();
  const double tau = t - sur.s();
  const VectorXd flow_vals = convolve_initial(sur, mix, tau, nodes, n_mc, seed);
  VectorXd exact_vals;
  if (exact_kernel) {
    if (sur.model.name != "benes_rot")
      throw ConfigError("--exact-kernel requires the benes_rot model");
    const Eigen::Matrix2d rot =
        sur.model.sqrt_diffusion(sur.s(), VectorXd::Zero(2));
    exact_vals = convolve_kernel(
        [&](const VectorXd& x, const VectorXd& x0) {
          return benes_exact_rotated(x, tau, x0, rot);
        },
        mix, nodes, n_mc, seed);
  }
  auto out = open_output(out_path);
  out << "x1,x2,density" << (exact_kernel ? ",exact" : "") << "\n";
  for (size_t k = 0; k < nodes.size(); ++k) {
    out << format_double17(nodes[k][0]) << ',' << format_double17(nodes[k][1])
        << ',' << format_double17(flow_vals[static_cast<int>(k)]);
    if (exact_kernel)
      out << ',' << format_double17(exact_vals[static_cast<int>(k)]);
    out << '\n';
  }
}

int cmd_selftest() {
  int failures = 0;
  const auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
  };

  FlowConfig fc;
  fc.d = 2;
  fc.L = 4;
  fc.m = 1;
  fc.hidden = 3;
  const ParamVector theta0 = identity_init(fc, 11);

  // identity initialization
  {
    Rng rng(1);
    bool ok = true;
    for (int k = 0; k < 20; ++k) {
      const VectorXd x = rng.gaussian_vector(2), x0 = rng.gaussian_vector(2);
      const FlowEval fe = forward(theta0, x, x0);
      ok = ok && (fe.y - x).lpNorm<Eigen::Infinity>() == 0.0 && fe.log_det == 0.0;
    }
    check("identity initialization acts as the identity", ok);
  }

  // inverse o forward roundtrip on perturbed parameters
  {
    ParamVector theta = theta0;
    Rng rng(2);
    for (int i = 0; i < theta.values.size(); ++i)
      theta.values[i] += rng.uniform(-0.5, 0.5);
    bool ok = true;
    for (int k = 0; k < 100; ++k) {
      const VectorXd x = rng.gaussian_vector(2), x0 = rng.gaussian_vector(2);
      const VectorXd back = inverse(theta, forward(theta, x, x0).y, x0);
      ok = ok && (back - x).lpNorm<Eigen::Infinity>() < 1e-9;
    }
    check("inverse-forward roundtrip below 1e-9", ok);
  }

  // heat-kernel identity: Galerkin rhs vanishes for Brownian motion
  {
    const SdeModel model = make_brownian(2);
    GalerkinConfig gc;
    gc.n_samples = 50;
    const auto pairs = sample_pairs(theta0, 0.5, gc, model, 3);
    const GalerkinSystem sys = assemble(theta0, 0.5, pairs, model);
    check("Brownian heat-kernel rhs at noise level",
          sys.rhs.lpNorm<Eigen::Infinity>() < 1e-8);
  }

  // Benes closed form integrates to one
  {
    GridSpec g;
    g.x_min = g.y_min = -10.0;
    g.x_max = g.y_max = 10.0;
    g.nx = g.ny = 201;
    double mass = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        mass += g.weight(i, j) *
                benes_exact_identity({g.x(i), g.y(j)}, 1.0,
                                     Eigen::Vector2d::Zero());
    check("Benes exact density has unit mass", std::abs(mass - 1.0) < 1e-3);
  }

  std::cout << (failures == 0 ? "selftest OK" : "selftest FAILED") << "\n";
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural Galerkin normalizing-flow TPDF surrogate"};
  app.require_subcommand(1);

  std::string config_path, ckpt_path, out_path, log_path, x0_text = "0,0";
  std::string box = "-6,6,-6,6", t_list = "0.5,1,2,3", mixture_path;
  double t = 3.0;
  int n = 121, n_samples = 1000, n_mc = 1750;
  uint64_t seed = 0;
  bool with_exact = false, self_test = false, exact_kernel = false;

  auto* train = app.add_subcommand("train", "offline training run");
  train->add_option("config", config_path, "run config file")->required();
  train->add_option("-o,--out", out_path, "checkpoint output path")->required();
  train->add_option("--log", log_path, "per-step CSV training log");

  auto* grid = app.add_subcommand("grid", "density values on a grid");
  grid->add_option("--ckpt", ckpt_path)->required();
  grid->add_option("--x0", x0_text, "initial point, comma separated");
  grid->add_option("--t", t, "evaluation time");
  grid->add_option("--box", box, "xmin,xmax,ymin,ymax");
  grid->add_option("--n", n, "nodes per axis");
  grid->add_flag("--exact", with_exact, "add the exact Benes column");
  grid->add_option("-o,--out", out_path)->required();

  auto* error = app.add_subcommand("error", "relative L2 error over time");
  error->add_option("--ckpt", ckpt_path)->required();
  error->add_option("--x0", x0_text);
  error->add_option("--t", t_list, "comma-separated evaluation times");
  error->add_option("--box", box);
  error->add_option("--n", n);
  error->add_flag("--self-test", self_test, "compare the exact solution "
                  "against itself (all-zero errors)");
  error->add_option("-o,--out", out_path)->required();

  auto* samp = app.add_subcommand("sample", "draw samples from the TPDF");
  samp->add_option("--ckpt", ckpt_path)->required();
  samp->add_option("--x0", x0_text);
  samp->add_option("--t", t);
  samp->add_option("--n", n_samples, "number of samples");
  samp->add_option("--seed", seed);
  samp->add_option("-o,--out", out_path)->required();

  auto* conv = app.add_subcommand("convolve", "Green's-function convolution "
                                  "with a mixture initial law");
  conv->add_option("--ckpt", ckpt_path)->required();
  conv->add_option("--t", t);
  conv->add_option("--mixture", mixture_path, "mixture config (default: "
                   "the built-in two-component mixture)");
  conv->add_option("--n-mc", n_mc, "Monte Carlo samples from the mixture");
  conv->add_option("--box", box);
  conv->add_option("--n", n);
  conv->add_flag("--exact-kernel", exact_kernel,
                 "add a column convolved with the exact Benes kernel");
  conv->add_option("--seed", seed);
  conv->add_option("-o,--out", out_path)->required();

  auto* self = app.add_subcommand("selftest", "run quick oracle checks");

  try {
    app.parse(argc, argv);
    if (train->parsed()) cmd_train(config_path, out_path, log_path);
    else if (grid->parsed())
      cmd_grid(ckpt_path, x0_text, t, box, n, with_exact, out_path);
    else if (error->parsed())
      cmd_error(ckpt_path, x0_text, t_list, box, n, self_test, out_path);
    else if (samp->parsed())
      cmd_sample(ckpt_path, x0_text, t, n_samples, seed, out_path);
    else if (conv->parsed())
      cmd_convolve(ckpt_path, t, mixture_path, n_mc, box, n, exact_kernel,
                   seed, out_path);
    else if (self->parsed())
      return cmd_selftest();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ngnf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ngnf::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
