#ifndef OPSCALE_TOOLS_COMPARE_H
#define OPSCALE_TOOLS_COMPARE_H

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "opscale/cpmap.h"
#include "opscale/solvers.h"

namespace opscale::tools {

// Where the instance comes from: a generator or a JSON file.
struct InstanceSource {
  std::string kind;  // "frame", "hilbert", "gaussian" or "file"
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  std::size_t k = 0;
  std::uint64_t seed = 1;
  std::filesystem::path path;
};

KrausCollection make_instance(const InstanceSource& src);

struct LabeledConfig {
  std::string label;
  SolverConfig config;
};

struct RunSpec {
  InstanceSource source;
  std::vector<LabeledConfig> configs;
  int repetitions = 10;
  std::filesystem::path out_dir = "compare_out";
  int time_buckets = 60;

  // Throws DomainError.
  void validate() const;
};

// {"instance": {"kind", "n", "m", "k", "seed"} | {"path"},
//  "configs": [{"method", "omega", "max_iter", "tol", "label", "safeguard"}],
//  "repetitions", "out_dir", "time_buckets"}.
RunSpec runspec_from_json(const nlohmann::json& j);

// The frame (n=50, k=55, p=10) and Hilbert (n=5, k=7, p=5) experiments.
RunSpec preset(const std::string& name, std::uint64_t seed);

struct Aggregate {
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;
};

struct MethodSummary {
  std::string label;
  SolverConfig config;
  std::vector<IterationTrace> runs;  // one per repetition that did not throw
  std::vector<std::string> failures;
  Aggregate by_iteration;            // x = t
  Aggregate by_time;                 // x = seconds
};

struct ComparisonReport {
  std::string instance_label;
  int repetitions = 0;
  int threads = 1;
  std::vector<MethodSummary> methods;
};

// Worker count: OPSCALE_THREADS if set and positive, else the hardware
// concurrency, capped by the number of tasks.
int worker_count(std::size_t tasks);

ComparisonReport run_comparison(const KrausCollection& a, const RunSpec& spec);

// Mean and population std of err at each t over the runs; runs that stop
// early hold their last value.
Aggregate aggregate_by_iteration(const std::vector<IterationTrace>& runs);
// Err of each run at evenly spaced wall-time buckets (last recorded value at
// or before the bucket), then mean and std.
Aggregate aggregate_by_time(const std::vector<IterationTrace>& runs, int buckets);

nlohmann::json report_to_json(const ComparisonReport& r);
std::string report_to_csv(const ComparisonReport& r);

// Writes report.json, aggregate_iter.csv, aggregate_time.csv,
// err_vs_iter.svg and err_vs_time.svg into dir.
void write_report(const ComparisonReport& r, const std::filesystem::path& dir);

}  // namespace opscale::tools

#endif  // OPSCALE_TOOLS_COMPARE_H
