#pragma once

#include <map>
#include <string>

#include "ngnf/flow.hpp"
#include "ngnf/galerkin.hpp"
#include "ngnf/integrator.hpp"

namespace ngnf {

using KvDoc = std::map<std::string, std::string>;

/// Flat key/value document: one `key = value` per line, '#' comments.
KvDoc parse_kv_text(const std::string& text);
KvDoc load_kv_file(const std::string& path);
std::string serialize_kv(const KvDoc& doc);

std::string format_double17(double v);

/// Everything a training run needs, bundled from one config document.
struct RunConfig {
  std::string model = "benes_rot";
  FlowConfig flow;
  GalerkinConfig galerkin;
  double s = 0.0;
  double T = 3.0;
  IntegratorConfig integ;  // t_start <= 0 means the 1e-3 * (T - s) default
  uint64_t seed = 0;

  static RunConfig from_kv(const KvDoc& doc);
  static RunConfig from_file(const std::string& path);
  KvDoc to_kv() const;

  /// Start time epsilon, resolving the default.
  double t_start() const;
  /// Fully-resolved integrator config (t_start, t_end filled in).
  IntegratorConfig resolved_integ() const;
  void validate() const;
};

}  // namespace ngnf
