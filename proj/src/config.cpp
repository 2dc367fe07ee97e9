#include "ngnf/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ngnf {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

KvDoc parse_kv_text(const std::string& text) {
  KvDoc doc;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    doc[key] = value;
  }
  return doc;
}

KvDoc load_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kv_text(buf.str());
}

std::string serialize_kv(const KvDoc& doc) {
  std::string out;
  for (const auto& [key, value] : doc) out += key + " = " + value + "\n";
  return out;
}

std::string format_double17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

struct KvReader {
  const KvDoc& doc;

  std::string str(const std::string& key, const std::string& dflt) const {
    const auto it = doc.find(key);
    return it == doc.end() ? dflt : it->second;
  }
  double num(const std::string& key, double dflt) const {
    const auto it = doc.find(key);
    if (it == doc.end()) return dflt;
    try {
      size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': not a number: '" +
                        it->second + "'");
    }
  }
  int integer(const std::string& key, int dflt) const {
    const double v = num(key, dflt);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ConfigError("config key '" + key + "': expected an integer");
    return i;
  }
};

}  // namespace

RunConfig RunConfig::from_kv(const KvDoc& doc) {
  const KvReader r{doc};
  RunConfig c;
  c.model = r.str("model", c.model);
  c.flow.d = r.integer("flow.d", c.flow.d);
  c.flow.L = r.integer("flow.layers", c.flow.L);
  c.flow.m = r.integer("flow.m", c.flow.m);
  c.flow.beta = r.num("flow.beta", c.flow.beta);
  c.flow.hidden = r.integer("flow.hidden", c.flow.hidden);
  c.galerkin.n_samples = r.integer("galerkin.n_samples", c.galerkin.n_samples);
  c.galerkin.mu_std = r.num("galerkin.mu_std", c.galerkin.mu_std);
  const std::string ridge = r.str("galerkin.ridge", "auto");
  c.galerkin.ridge = (ridge == "auto") ? -1.0 : KvReader{doc}.num("galerkin.ridge", -1.0);
  c.s = r.num("time.s", c.s);
  c.T = r.num("time.T", c.T);
  c.integ.t_start = r.num("integ.t_start", 0.0);
  c.integ.rtol = r.num("integ.rtol", c.integ.rtol);
  c.integ.atol = r.num("integ.atol", c.integ.atol);
  c.integ.h_init = r.num("integ.h_init", c.integ.h_init);
  c.integ.h_min = r.num("integ.h_min", c.integ.h_min);
  c.integ.h_max = r.num("integ.h_max", c.integ.h_max);
  c.integ.checkpoint_stride =
      r.integer("integ.checkpoint_stride", c.integ.checkpoint_stride);
  const double seed = r.num("seed", 0.0);
  if (seed < 0) throw ConfigError("config key 'seed': must be nonnegative");
  c.seed = static_cast<uint64_t>(seed);
  c.galerkin.seed = c.seed;
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  return from_kv(load_kv_file(path));
}

KvDoc RunConfig::to_kv() const {
  KvDoc doc;
  doc["model"] = model;
  doc["flow.d"] = std::to_string(flow.d);
  doc["flow.layers"] = std::to_string(flow.L);
  doc["flow.m"] = std::to_string(flow.m);
  doc["flow.beta"] = format_double17(flow.beta);
  doc["flow.hidden"] = std::to_string(flow.hidden);
  doc["galerkin.n_samples"] = std::to_string(galerkin.n_samples);
  doc["galerkin.mu_std"] = format_double17(galerkin.mu_std);
  doc["galerkin.ridge"] =
      galerkin.ridge < 0.0 ? "auto" : format_double17(galerkin.ridge);
  doc["time.s"] = format_double17(s);
  doc["time.T"] = format_double17(T);
  doc["integ.t_start"] = format_double17(t_start());
  doc["integ.rtol"] = format_double17(integ.rtol);
  doc["integ.atol"] = format_double17(integ.atol);
  doc["integ.h_init"] = format_double17(integ.h_init);
  doc["integ.h_min"] = format_double17(integ.h_min);
  doc["integ.h_max"] = format_double17(integ.h_max);
  doc["integ.checkpoint_stride"] = std::to_string(integ.checkpoint_stride);
  doc["seed"] = std::to_string(seed);
  return doc;
}

double RunConfig::t_start() const {
  return integ.t_start > 0.0 ? integ.t_start : 1e-3 * (T - s);
}

IntegratorConfig RunConfig::resolved_integ() const {
  IntegratorConfig ic = integ;
  ic.t_start = t_start();
  ic.t_end = T - s;
  return ic;
}

void RunConfig::validate() const {
  flow.validate();
  galerkin.validate();
  if (!(T > s) || s < 0.0)
    throw ConfigError("config: time horizon must satisfy T > s >= 0");
  resolved_integ().validate();
  model_by_name(model, flow.d);  // rejects unknown model names
}

}  // namespace ngnf
