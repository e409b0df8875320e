#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "sdafc/errors.hpp"
#include "sdafc/harness.hpp"

using namespace sdafc;

namespace {

ExperimentConfig gmm_toy_config() {
  ExperimentConfig cfg;
  cfg.dataset.kind = "toy2";
  cfg.sda.synthesizer = SynthesizerKind::Gmm;
  cfg.k = 2;
  cfg.m = 2;
  return cfg;
}

RunRecord record(const std::string& ds, const std::string& method, double p,
                 double nmi_v, double kappa_v, std::uint64_t seed = 1,
                 double rate = 0.0) {
  RunRecord r;
  r.dataset = ds;
  r.method = method;
  r.p = p;
  r.rate = rate;
  r.seed = seed;
  r.k = 2;
  r.m = 2;
  r.nmi = nmi_v;
  r.kappa = kappa_v;
  r.uploads = 2;
  r.broadcasts = 1;
  return r;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config json round-trip with overrides and defaults") {
  const std::string text = R"({
    "dataset": {"kind": "toy4"},
    "methods": ["k-fed", "oracle"],
    "p": [0, 0.5],
    "rates": [0],
    "seeds": [1, 2, 3],
    "k": 4, "m": 4,
    "gan": {"epochs": 17},
    "synthesizer": "gmm"
  })";
  const auto cfg = config_from_json(text);
  CHECK(cfg.dataset.kind == "toy4");
  CHECK(cfg.methods == std::vector<std::string>{"k-fed", "oracle"});
  CHECK(cfg.p_grid == std::vector<double>{0, 0.5});
  CHECK(cfg.seeds.size() == 3);
  CHECK(cfg.k == 4);
  CHECK(cfg.fuzzy_degree == 1.1);  // default
  CHECK(cfg.sda.gan.epochs == 17);
  CHECK(cfg.sda.synthesizer == SynthesizerKind::Gmm);

  const auto back = config_from_json(config_to_json(cfg));
  CHECK(back.methods == cfg.methods);
  CHECK(back.sda.gan.epochs == 17);
}

TEST_CASE("config validation rejects bad values") {
  CHECK_THROWS_AS(config_from_json("not json"), ParseError);
  CHECK_THROWS_AS(config_from_json(R"({"methods": []})"), DomainError);
  CHECK_THROWS_AS(config_from_json(R"({"methods": ["nope"]})"), DomainError);
  CHECK_THROWS_AS(config_from_json(R"({"p": [1.5]})"), DomainError);
  CHECK_THROWS_AS(config_from_json(R"({"rates": [-0.1]})"), DomainError);
  CHECK_THROWS_AS(config_from_json(R"({"k": 0})"), DomainError);
  CHECK_THROWS_AS(config_from_json(R"({"synthesizer": "vae"})"), DomainError);
}

TEST_CASE("unknown dataset kind is rejected") {
  DatasetSpec spec;
  spec.kind = "imagenet";
  CHECK_THROWS_AS(make_dataset(spec, 1), DomainError);
}

TEST_CASE("grid size is the product of the axes") {
  auto cfg = gmm_toy_config();
  cfg.methods = {"km-central"};
  cfg.p_grid = {0.0};
  cfg.rates = {0.0};
  cfg.seeds = {1, 2, 3};
  const auto rows = run_grid(cfg);
  CHECK(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.ok());
    CHECK(r.nmi == doctest::Approx(1.0));
  }
}

TEST_CASE("rerunning a grid reproduces the metric columns") {
  auto cfg = gmm_toy_config();
  cfg.methods = {"sda-fc-km", "k-fed"};
  cfg.p_grid = {0.0, 1.0};
  cfg.rates = {0.0};
  cfg.seeds = {1, 2};
  const auto a = run_grid(cfg);
  const auto b = run_grid(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].nmi == b[i].nmi);
    CHECK(a[i].kappa == b[i].kappa);
    CHECK(a[i].method == b[i].method);
  }
}

TEST_CASE("run_cell is deterministic including parallel clients") {
  auto cfg = gmm_toy_config();
  const auto ds = make_dataset(cfg.dataset, 5);
  const auto a = run_cell(cfg, ds, "sda-fc-km", 0.5, 0.0, 5);
  cfg.sda.parallel_clients = 4;
  const auto b = run_cell(cfg, ds, "sda-fc-km", 0.5, 0.0, 5);
  CHECK(a.ok());
  CHECK(a.nmi == b.nmi);
  CHECK(a.kappa == b.kappa);
}

TEST_CASE("failed runs become error rows and the grid continues") {
  auto cfg = gmm_toy_config();
  cfg.m = 401;  // more clients than rows
  cfg.methods = {"k-fed", "km-central"};
  cfg.seeds = {1};
  const auto rows = run_grid(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(!rows[0].ok());
  CHECK(rows[1].ok());  // centralized ignores the partition
}

TEST_CASE("results csv round-trips and rejects malformed input") {
  std::vector<RunRecord> rows{record("toy2", "k-fed", 0.5, 0.8, 0.7),
                              record("toy2", "sda-fc-km", 0.5, 0.9, 0.85)};
  rows[0].error = "";
  const std::string path = "/tmp/sdafc_test_results.csv";
  write_results_csv(rows, path);
  const auto back = read_results_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].method == "k-fed");
  CHECK(back[0].nmi == 0.8);
  CHECK(back[1].kappa == 0.85);
  CHECK(back[1].seed == 1);

  std::ofstream bad("/tmp/sdafc_test_bad.csv");
  bad << kResultsCsvHeader << "\n1,2,3\n";
  bad.close();
  CHECK_THROWS_WITH_AS(read_results_csv("/tmp/sdafc_test_bad.csv"),
                       doctest::Contains(":2"), ParseError);
  std::ofstream empty("/tmp/sdafc_test_empty.csv");
  empty.close();
  CHECK_THROWS_AS(read_results_csv("/tmp/sdafc_test_empty.csv"), ParseError);
}

TEST_CASE("summarize counts cells won against the family rival") {
  std::vector<RunRecord> rows;
  // 5 p-cells; A (sda-fc-km) beats B (k-fed) in 3 of them.
  const std::vector<double> ps{0.0, 0.25, 0.5, 0.75, 1.0};
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const bool a_wins = i < 3;
    rows.push_back(record("d", "sda-fc-km", ps[i], a_wins ? 0.9 : 0.5,
                          a_wins ? 0.9 : 0.5));
    rows.push_back(record("d", "k-fed", ps[i], a_wins ? 0.5 : 0.9,
                          a_wins ? 0.5 : 0.9));
  }
  const auto text = summarize(rows);
  CHECK(text.find("sda-fc-km=3") != std::string::npos);
  CHECK(text.find("k-fed=2") != std::string::npos);
}

TEST_CASE("summarize handles a single row") {
  const auto text = summarize({record("d", "oracle", 0.0, 1.0, 1.0)});
  CHECK(text.find("oracle") != std::string::npos);
  CHECK_THROWS_AS(summarize({}), EmptyInputError);
}

TEST_CASE("failure curve aggregates per rate") {
  std::vector<RunRecord> rows;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    rows.push_back(record("d", "sda-fc-km", 1.0, 0.9, 0.9, s, 0.0));
    rows.push_back(record("d", "sda-fc-km", 1.0, 0.6, 0.5, s, 0.5));
  }
  const auto csv = emit_failure_curve(rows, "d", "sda-fc-km");
  CHECK(csv.find("0.000000,0.900000,0.900000,3") != std::string::npos);
  CHECK(csv.find("0.500000,0.600000,0.500000,3") != std::string::npos);
  CHECK_THROWS_AS(emit_failure_curve(rows, "d", "ffcm"), EmptyInputError);
}

TEST_CASE("toy datasets have the advertised shape") {
  DatasetSpec spec;
  spec.kind = "toy2";
  const auto t2 = make_dataset(spec, 1);
  CHECK(t2.n() == 400);
  CHECK(t2.k_true == 2);
  spec.kind = "toy4";
  const auto t4 = make_dataset(spec, 1);
  CHECK(t4.n() == 600);
  CHECK(t4.k_true == 4);
  spec.kind = "toy-skew";
  const auto ts = make_dataset(spec, 1);
  CHECK(ts.n() == 600);
  CHECK(ts.k_true == 2);
}

}  // TEST_SUITE
