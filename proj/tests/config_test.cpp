#include "ngnf/config.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>

using namespace ngnf;

TEST_CASE("key/value parsing") {
  const KvDoc doc = parse_kv_text(
      "# leading comment\n"
      "model = benes_rot\n"
      "  flow.d=2   # trailing comment\n"
      "\n"
      "time.T = 3.0\n"
      "name = several words here\n");
  CHECK(doc.at("model") == "benes_rot");
  CHECK(doc.at("flow.d") == "2");
  CHECK(doc.at("time.T") == "3.0");
  CHECK(doc.at("name") == "several words here");
  CHECK(doc.size() == 4);

  CHECK_THROWS_AS(parse_kv_text("just words\n"), ConfigError);
  CHECK_THROWS_AS(parse_kv_text("= no key\n"), ConfigError);

  // duplicate keys: the last assignment wins
  CHECK(parse_kv_text("a = 1\na = 2\n").at("a") == "2");
}

TEST_CASE("serialization round trip preserves the document") {
  KvDoc doc;
  doc["b.key"] = "auto";
  doc["a.key"] = "0.10000000000000001";
  const std::string text = serialize_kv(doc);
  CHECK(text == "a.key = 0.10000000000000001\nb.key = auto\n");
  const KvDoc back = parse_kv_text(text);
  CHECK(back == doc);
}

TEST_CASE("format_double17 round trips doubles exactly") {
  for (const double v : {0.1, 1.0 / 3.0, 1e-300, 3.0, -2.718281828459045}) {
    CHECK(std::stod(format_double17(v)) == v);
  }
}

TEST_CASE("defaults of an empty document") {
  const RunConfig cfg = RunConfig::from_kv(KvDoc{});
  CHECK(cfg.model == "benes_rot");
  CHECK(cfg.flow.d == 2);
  CHECK(cfg.flow.L == 10);
  CHECK(cfg.flow.m == 1);
  CHECK(cfg.flow.beta == 0.9);
  CHECK(cfg.flow.hidden == 4);
  CHECK(cfg.galerkin.n_samples == 2000);
  CHECK(cfg.galerkin.mu_std == 0.75);
  CHECK(cfg.galerkin.ridge == -1.0);  // auto
  CHECK(cfg.s == 0.0);
  CHECK(cfg.T == 3.0);
  CHECK(cfg.t_start() == doctest::Approx(3e-3));
  CHECK(cfg.integ.h_max == 0.05);
  CHECK(cfg.seed == 0);

  const IntegratorConfig ic = cfg.resolved_integ();
  CHECK(ic.t_start == doctest::Approx(3e-3));
  CHECK(ic.t_end == 3.0);
  CHECK_NOTHROW(ic.validate());
}

TEST_CASE("explicit keys override defaults and are round tripped") {
  KvDoc doc;
  doc["model"] = "brownian";
  doc["flow.layers"] = "4";
  doc["flow.hidden"] = "2";
  doc["galerkin.n_samples"] = "500";
  doc["galerkin.ridge"] = "1e-8";
  doc["time.T"] = "1.5";
  doc["integ.rtol"] = "1e-4";
  doc["seed"] = "7";
  const RunConfig cfg = RunConfig::from_kv(doc);
  CHECK(cfg.model == "brownian");
  CHECK(cfg.flow.L == 4);
  CHECK(cfg.flow.hidden == 2);
  CHECK(cfg.galerkin.n_samples == 500);
  CHECK(cfg.galerkin.ridge == 1e-8);
  CHECK(cfg.galerkin.seed == 7);
  CHECK(cfg.T == 1.5);
  CHECK(cfg.integ.rtol == 1e-4);
  CHECK(cfg.seed == 7);
  CHECK(cfg.t_start() == doctest::Approx(1.5e-3));

  const RunConfig back = RunConfig::from_kv(cfg.to_kv());
  CHECK(back.model == cfg.model);
  CHECK(back.flow.L == cfg.flow.L);
  CHECK(back.flow.beta == cfg.flow.beta);
  CHECK(back.galerkin.ridge == cfg.galerkin.ridge);
  CHECK(back.T == cfg.T);
  CHECK(back.t_start() == cfg.t_start());
  CHECK(back.seed == cfg.seed);

  // "auto" ridge keyword
  doc["galerkin.ridge"] = "auto";
  CHECK(RunConfig::from_kv(doc).galerkin.ridge == -1.0);
}

TEST_CASE("invalid configurations are rejected") {
  KvDoc doc;
  doc["flow.layers"] = "3";  // odd layer count
  CHECK_THROWS_AS(RunConfig::from_kv(doc), ConfigError);

  doc.clear();
  doc["flow.d"] = "two";
  CHECK_THROWS_AS(RunConfig::from_kv(doc), ConfigError);

  doc.clear();
  doc["flow.d"] = "2.5";
  CHECK_THROWS_AS(RunConfig::from_kv(doc), ConfigError);

  doc.clear();
  doc["model"] = "unknown_model";
  CHECK_THROWS_AS(RunConfig::from_kv(doc), ConfigError);

  doc.clear();
  doc["time.T"] = "0";  // T <= s
  CHECK_THROWS_AS(RunConfig::from_kv(doc), ConfigError);

  doc.clear();
  doc["seed"] = "-1";
  CHECK_THROWS_AS(RunConfig::from_kv(doc), ConfigError);

  doc.clear();
  doc["galerkin.mu_std"] = "0";
  CHECK_THROWS_AS(RunConfig::from_kv(doc), ConfigError);
}

TEST_CASE("file loading") {
  const std::string path = "ngnf_test_config.cfg";
  {
    std::ofstream out(path);
    out << "model = benes_rot\nflow.layers = 4\nflow.hidden = 2\nseed = 3\n";
  }
  const RunConfig cfg = RunConfig::from_file(path);
  CHECK(cfg.flow.L == 4);
  CHECK(cfg.seed == 3);
  std::remove(path.c_str());

  CHECK_THROWS_AS(RunConfig::from_file("missing_file.cfg"), IoError);
}
