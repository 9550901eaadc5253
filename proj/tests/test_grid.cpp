#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fdrpower/grid.hpp"

using namespace fdrpower;

namespace {

const char* kSmallConfig = R"({
  "theta": [0.6],
  "expected_m": [5],
  "f": [0.15],
  "n": [70],
  "m": 200
})";

}  // namespace

TEST_CASE("config parsing and single-cell expansion") {
  GridConfig cfg = GridConfig::from_json_text(kSmallConfig);
  const auto designs = expand_grid(cfg);
  REQUIRE(designs.size() == 1);
  CHECK(designs[0].m == 200);
  CHECK(designs[0].r == doctest::Approx(0.025));
  CHECK(designs[0].n == 70);

  CHECK_THROWS(GridConfig::from_json_text(R"({"theta": [0.6], "f": [0.1],
    "n": [10], "m": 100})"));  // needs r or expected_m
}

TEST_CASE("range expansion") {
  GridConfig cfg = GridConfig::from_json_text(R"({
    "theta": {"lo": 0.6, "step": 0.1, "hi": 0.8},
    "r": [0.025, 0.05],
    "f": [0.1, 0.15],
    "n": [20, 30],
    "m": 500
  })");
  CHECK(expand_grid(cfg).size() == 3 * 2 * 2 * 2);
}

TEST_CASE("power-window auto n") {
  GridConfig cfg = GridConfig::from_json_text(R"({
    "theta": [0.6667],
    "r": [0.025],
    "f": [0.15],
    "m": 1000,
    "power_window": {"lo": 0.6, "hi": 0.8, "n_step": 5}
  })");
  const auto designs = expand_grid(cfg);
  // n runs from the 60% size (51) to the 80% size (66) in steps of 5
  REQUIRE(designs.size() == 4);
  CHECK(designs.front().n == 51);
  CHECK(designs.back().n == 66);
}

TEST_CASE("grid of one matches direct module calls") {
  GridConfig cfg = GridConfig::from_json_text(kSmallConfig);
  const auto rows = run_grid(cfg, 1);
  REQUIRE(rows.size() == 1);
  const PowerReport direct = power_report(rows[0].design);
  CHECK(rows[0].report.pi_pi == direct.pi_pi);
  CHECK(rows[0].report.gamma == direct.gamma);
  CHECK(rows[0].error.empty());
}

TEST_CASE("degenerate rows are recorded, not fatal") {
  GridConfig cfg = GridConfig::from_json_text(R"({
    "theta": [0.01],
    "r": [0.025],
    "f": [0.01],
    "n": [5],
    "m": 100
  })");
  const auto rows = run_grid(cfg, 1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].report.degenerate);
  CHECK(rows[0].error.empty());
}

TEST_CASE("json round trip is lossless") {
  GridConfig cfg = GridConfig::from_json_text(kSmallConfig);
  cfg.simulate = true;
  cfg.reps = 50;
  const auto rows = run_grid(cfg, 1);
  const std::string line = row_to_json(rows[0]);
  const ResultRow back = row_from_json(line);
  CHECK(back.report.pi_pi == rows[0].report.pi_pi);
  CHECK(back.report.gamma == rows[0].report.gamma);
  CHECK(back.sim->mean_tpf == rows[0].sim->mean_tpf);
  CHECK(back.sim->lambda_power_hat == rows[0].sim->lambda_power_hat);
  CHECK(back.design.n == rows[0].design.n);
}

TEST_CASE("deterministic output and resume") {
  GridConfig cfg = GridConfig::from_json_text(R"({
    "theta": [0.6, 0.8],
    "r": [0.025],
    "f": [0.15],
    "n": [40, 70],
    "m": 200,
    "simulate": true,
    "reps": 30,
    "seed": 42
  })");
  const std::string path = "grid_test_tmp.jsonl";
  std::remove(path.c_str());
  const auto rows1 = run_grid(cfg, 2, path);
  std::ostringstream first;
  write_jsonl(rows1, first);

  // rerun with the same seed: byte-identical output
  const auto rows2 = run_grid(cfg, 4, "");
  std::ostringstream second;
  write_jsonl(rows2, second);
  CHECK(first.str() == second.str());

  // resume pass reuses the persisted rows
  const auto rows3 = run_grid(cfg, 1, path);
  std::ostringstream third;
  write_jsonl(rows3, third);
  CHECK(first.str() == third.str());
  std::remove(path.c_str());
}

TEST_CASE("csv export carries the analytic columns") {
  GridConfig cfg = GridConfig::from_json_text(kSmallConfig);
  const auto rows = run_grid(cfg, 1);
  std::ostringstream os;
  write_csv(rows, os);
  CHECK(os.str().find("pi_pi") != std::string::npos);
  CHECK(os.str().find("0.70") != std::string::npos);
}

TEST_CASE("compare_report flags nothing against itself") {
  GridConfig cfg = GridConfig::from_json_text(kSmallConfig);
  const auto rows = run_grid(cfg, 1);
  const std::string ref = "grid_ref_tmp.csv";
  {
    std::ofstream os(ref);
    os << "m,r,f,theta,n,pi_pi,pi_oracle\n";
    os.precision(17);
    os << rows[0].design.m << ',' << rows[0].design.r << ','
       << rows[0].design.f << ',' << rows[0].design.theta << ','
       << rows[0].design.n << ',' << rows[0].report.pi_pi << ','
       << rows[0].report.pi_oracle << '\n';
  }
  const CompareOutcome out = compare_report(rows, ref, 1e-12);
  CHECK(out.cells_checked == 2);
  CHECK(out.cells_failed == 0);
  std::remove(ref.c_str());
}
