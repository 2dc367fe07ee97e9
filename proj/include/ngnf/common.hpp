#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ngnf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Invalid configuration (bad hyperparameters, malformed config file).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric failure (degenerate time, out-of-range query, non-finite values,
/// step-size underflow).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Evaluation at tau <= 0, where the transition density is a Dirac mass.
struct DegenerateTimeError : NumericError {
  using NumericError::NumericError;
};

/// I/O failure (unreadable file, checksum mismatch, version mismatch).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic seed derivation for sub-streams (per sample, per RK stage).
inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c = 0) {
  return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

/// Seeded RNG with a self-contained Gaussian generator, so that sample
/// streams are reproducible bit-for-bit across runs.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  double uniform() {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cached spare).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  VectorXd gaussian_vector(int n) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ngnf
