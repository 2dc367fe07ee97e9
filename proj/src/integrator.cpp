#include "ngnf/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace ngnf {

void IntegratorConfig::validate() const {
  if (!(t_start > 0.0) || !(t_end > t_start))
    throw ConfigError("integrator: need 0 < t_start < t_end");
  if (!(rtol > 0.0) || !(atol > 0.0))
    throw ConfigError("integrator: tolerances must be positive");
  if (!(h_min > 0.0) || !(h_min <= h_init) || !(h_init <= h_max))
    throw ConfigError("integrator: need 0 < h_min <= h_init <= h_max");
  if (checkpoint_stride < 1)
    throw ConfigError("integrator: checkpoint_stride must be >= 1");
}

Checkpoint integrate(const VectorXd& theta0, const VelocityField& vel_field,
                     const IntegratorConfig& icfg, uint64_t seed,
                     const StepObserver& observer) {
  icfg.validate();
  const int m = static_cast<int>(theta0.size());

  std::vector<double> times{icfg.t_start};
  std::vector<VectorXd> snaps{theta0};

  double tau = icfg.t_start;
  VectorXd theta = theta0;
  double h = icfg.h_init;
  uint64_t attempt = 0;
  int accepted = 0;

  VectorXd k1 = vel_field(theta, tau, mix_seed(seed, attempt, 0));
  const double end_tol = 1e-12 * (icfg.t_end - icfg.t_start);

  while (tau < icfg.t_end - end_tol) {
    ++attempt;
    h = std::min({h, icfg.h_max, icfg.t_end - tau});
    const VectorXd k2 = vel_field(theta + (0.5 * h) * k1, tau + 0.5 * h,
                                  mix_seed(seed, attempt, 1));
    const VectorXd k3 = vel_field(theta + (0.75 * h) * k2, tau + 0.75 * h,
                                  mix_seed(seed, attempt, 2));
    const VectorXd theta_new =
        theta + h * ((2.0 / 9.0) * k1 + (1.0 / 3.0) * k2 + (4.0 / 9.0) * k3);
    const VectorXd k4 =
        vel_field(theta_new, tau + h, mix_seed(seed, attempt, 3));
    const VectorXd err = h * ((-5.0 / 72.0) * k1 + (1.0 / 12.0) * k2 +
                              (1.0 / 9.0) * k3 - (1.0 / 8.0) * k4);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const double scale =
          icfg.atol +
          icfg.rtol * std::max(std::abs(theta[i]), std::abs(theta_new[i]));
      const double e = err[i] / scale;
      acc += e * e;
    }
    const double err_norm = std::sqrt(acc / std::max(m, 1));

    // overflowing stages yield a non-finite estimate: hard rejection
    const bool finite = std::isfinite(err_norm) && theta_new.allFinite();
    const bool accept = finite && err_norm <= 1.0;
    if (accept) {
      tau += h;
      theta = theta_new;
      k1 = k4;  // FSAL
      ++accepted;
      if (accepted % icfg.checkpoint_stride == 0 ||
          tau >= icfg.t_end - end_tol) {
        times.push_back(tau);
        snaps.push_back(theta);
      }
      if (observer) observer(tau, h, theta);
    }
    const double factor =
        !finite ? 0.2
        : err_norm > 0.0
            ? std::clamp(0.9 * std::pow(err_norm, -1.0 / 3.0), 0.2, 5.0)
            : 5.0;
    h *= factor;
    if (accept) h = std::max(h, icfg.h_min);
    if (h < icfg.h_min) {
      std::ostringstream oss;
      oss << "integration failure: step size " << h << " underflowed at tau="
          << tau << " (error estimate " << err_norm << ")";
      throw NumericError(oss.str());
    }
  }

  Checkpoint ckpt;
  const int k = static_cast<int>(times.size());
  ckpt.times = VectorXd(k);
  ckpt.thetas = MatrixXd(k, m);
  for (int i = 0; i < k; ++i) {
    ckpt.times[i] = times[i];
    ckpt.thetas.row(i) = snaps[i].transpose();
  }
  return ckpt;
}

VectorXd theta_at(const Checkpoint& ckpt, double tau) {
  const int k = static_cast<int>(ckpt.times.size());
  if (k == 0) throw NumericError("theta_at: empty checkpoint");
  const double lo = ckpt.times[0];
  const double hi = ckpt.times[k - 1];
  const double tol = 1e-9 * std::max(1.0, hi - lo);
  if (tau < lo - tol || tau > hi + tol)
    throw NumericError("theta_at: tau outside the trained range");
  tau = std::clamp(tau, lo, hi);
  int i = 1;
  while (i < k - 1 && ckpt.times[i] < tau) ++i;
  if (k == 1) return ckpt.thetas.row(0);
  const double t0 = ckpt.times[i - 1], t1 = ckpt.times[i];
  const double w = (t1 > t0) ? (tau - t0) / (t1 - t0) : 0.0;
  return (1.0 - w) * ckpt.thetas.row(i - 1).transpose() +
         w * ckpt.thetas.row(i).transpose();
}

namespace {

constexpr uint32_t kFormatVersion = 1;
const char kMagic[4] = {'N', 'G', 'N', 'F'};

uint64_t fnv1a(const unsigned char* data, size_t n, uint64_t h) {
  for (size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const int k = static_cast<int>(ckpt.times.size());
  const int m = static_cast<int>(ckpt.thetas.cols());

  std::map<std::string, std::string> doc = ckpt.meta;
  doc["ckpt.rows"] = std::to_string(k);
  doc["ckpt.cols"] = std::to_string(m);
  std::string times_csv;
  for (int i = 0; i < k; ++i) {
    if (i) times_csv += ',';
    times_csv += format_double(ckpt.times[i]);
  }
  doc["ckpt.times"] = times_csv;

  std::string header;
  for (const auto& [key, value] : doc) header += key + " = " + value + "\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kMagic, 4);
  const uint32_t version = kFormatVersion;
  out.write(reinterpret_cast<const char*>(&version), 4);
  const uint64_t header_len = header.size();
  out.write(reinterpret_cast<const char*>(&header_len), 8);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::vector<double> payload(static_cast<size_t>(k) * m);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < m; ++j) payload[static_cast<size_t>(i) * m + j] = ckpt.thetas(i, j);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));

  uint64_t sum = fnv1a(reinterpret_cast<const unsigned char*>(header.data()),
                       header.size(), 0xcbf29ce484222325ULL);
  sum = fnv1a(reinterpret_cast<const unsigned char*>(payload.data()),
              payload.size() * sizeof(double), sum);
  out.write(reinterpret_cast<const char*>(&sum), 8);
  if (!out) throw IoError("write failure on '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("'" + path + "' is not a checkpoint file (bad magic)");
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (!in || version != kFormatVersion)
    throw IoError("checkpoint format version mismatch in '" + path + "'");
  uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), 8);
  if (!in || header_len > (1ULL << 30))
    throw IoError("truncated or corrupt checkpoint header in '" + path + "'");
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw IoError("truncated checkpoint header in '" + path + "'");

  Checkpoint ckpt;
  std::istringstream hs(header);
  std::string line;
  while (std::getline(hs, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    ckpt.meta[line.substr(0, eq)] = line.substr(eq + 3);
  }
  const auto require = [&](const std::string& key) -> std::string {
    const auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end())
      throw IoError("checkpoint header missing key '" + key + "'");
    return it->second;
  };
  const int k = std::stoi(require("ckpt.rows"));
  const int m = std::stoi(require("ckpt.cols"));
  const std::string times_csv = require("ckpt.times");
  ckpt.meta.erase("ckpt.rows");
  ckpt.meta.erase("ckpt.cols");
  ckpt.meta.erase("ckpt.times");

  ckpt.times = VectorXd(k);
  {
    std::istringstream ts(times_csv);
    std::string tok;
    for (int i = 0; i < k; ++i) {
      if (!std::getline(ts, tok, ','))
        throw IoError("checkpoint time grid shorter than declared");
      ckpt.times[i] = std::stod(tok);
    }
  }

  std::vector<double> payload(static_cast<size_t>(k) * m);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(double)));
  uint64_t stored_sum = 0;
  in.read(reinterpret_cast<char*>(&stored_sum), 8);
  if (!in) throw IoError("truncated checkpoint payload in '" + path + "'");

  uint64_t sum = fnv1a(reinterpret_cast<const unsigned char*>(header.data()),
                       header.size(), 0xcbf29ce484222325ULL);
  sum = fnv1a(reinterpret_cast<const unsigned char*>(payload.data()),
              payload.size() * sizeof(double), sum);
  if (sum != stored_sum)
    throw IoError("checkpoint checksum mismatch in '" + path + "'");

  ckpt.thetas = MatrixXd(k, m);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < m; ++j) ckpt.thetas(i, j) = payload[static_cast<size_t>(i) * m + j];
  return ckpt;
}

void check_flow_config(const Checkpoint& ckpt, const FlowConfig& cfg) {
  const auto get = [&](const std::string& key) -> std::string {
    const auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end())
      throw ConfigError("checkpoint lacks flow config key '" + key + "'");
    return it->second;
  };
  const bool ok = std::stoi(get("flow.d")) == cfg.d &&
                  std::stoi(get("flow.layers")) == cfg.L &&
                  std::stoi(get("flow.m")) == cfg.m &&
                  std::stod(get("flow.beta")) == cfg.beta &&
                  std::stoi(get("flow.hidden")) == cfg.hidden;
  if (!ok)
    throw ConfigError(
        "checkpoint flow configuration does not match the requested one");
}

}  // namespace ngnf
