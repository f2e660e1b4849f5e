#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>

#include "opscale/io.h"

using namespace opscale;
using nlohmann::json;

TEST_CASE("trace CSV format") {
  IterationTrace tr;
  tr.records.push_back({0, 1.5, 1.0, 0});
  tr.records.push_back({1, 0.1, 1.25, 12345});
  const std::string csv = trace_to_csv(tr);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,err,omega,wall_nanos");
  std::getline(is, line);
  CHECK(line == "0,1.5,1,0");
  std::getline(is, line);
  // %.17g keeps every bit of the double.
  CHECK(line.rfind("1,0.10000000000000001,1.25,12345", 0) == 0);
}

TEST_CASE("trace JSON carries config echo and status") {
  IterationTrace tr;
  tr.records.push_back({0, 2.0, 1.0, 0});
  tr.records.push_back({7, 1e-3, 1.4, 99});
  tr.status = Status::cone_violation;
  tr.omega_hat = 1.4;
  tr.beta_sq_hat = 0.7;
  tr.message = "iteration 8: left the cone";
  SolverConfig cfg;
  cfg.method = Method::pd_or;
  cfg.omega = OmegaPolicy::adaptive(5);
  const json j = trace_to_json(tr, cfg);
  CHECK(j["status"] == "cone_violation");
  CHECK(j["iterations"] == 7);
  CHECK(j["final_err"] == 1e-3);
  CHECK(j["omega_hat"] == 1.4);
  CHECK(j["config"]["method"] == "pd_or");
  CHECK(j["config"]["omega"] == "adaptive:p=5,l=2");
  CHECK(j["message"] == "iteration 8: left the cone");

  IterationTrace plain;
  plain.records.push_back({0, 1.0, 1.0, 0});
  CHECK(trace_to_json(plain, SolverConfig{})["omega_hat"].is_null());
}

TEST_CASE("diagnostic report JSON") {
  GConvexityReport r;
  r.samples = 10;
  r.worst_slack_f = -0.5;
  r.worst_slack_trace = -0.25;
  r.pass = true;
  const json j = report_to_json("gconvexity", r);
  CHECK(j["check"] == "gconvexity");
  CHECK(j["samples"] == 10);
  CHECK(j["worst_slack"] == -0.25);
  CHECK(j["pass"] == true);
}

TEST_CASE("instance files round trip through disk") {
  const auto dir = std::filesystem::temp_directory_path() / "opscale_test_io";
  std::filesystem::remove_all(dir);
  const KrausCollection a = gen_hilbert_instance(3, 4, 5);
  const auto path = dir / "nested" / "inst.json";
  write_instance(a, path);
  const KrausCollection b = read_instance(path);
  for (std::size_t i = 0; i < a.k(); ++i) CHECK(a[i] == b[i]);
  CHECK_THROWS_AS(read_instance(dir / "missing.json"), IoError);
  write_text(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(read_instance(dir / "bad.json"), IoError);
  // A singular instance is rejected at load.
  json j = instance_to_json(a);
  for (auto& m : j["matrices"])
    for (auto& row : m)
      for (auto& v : row) v = 0.0;
  CHECK_THROWS_AS(instance_from_json(j), AssumptionViolated);
  std::filesystem::remove_all(dir);
}
