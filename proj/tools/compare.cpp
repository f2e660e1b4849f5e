#include "compare.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "opscale/io.h"
#include "svg_plot.h"

namespace opscale::tools {

using nlohmann::json;

KrausCollection make_instance(const InstanceSource& src) {
  if (src.kind == "file") return read_instance(src.path);
  if (src.kind == "frame") return frame_to_kraus(gen_frame_instance(src.n, src.k, src.seed));
  if (src.kind == "hilbert") return gen_hilbert_instance(src.n, src.k, src.seed);
  if (src.kind == "gaussian") return gen_gaussian_instance(src.m, src.n, src.k, src.seed);
  throw DomainError("unknown instance kind '" + src.kind + "'");
}

void RunSpec::validate() const {
  if (configs.empty()) throw DomainError("run spec: at least one solver config is required");
  if (repetitions < 1) throw DomainError("run spec: repetitions must be >= 1");
  if (time_buckets < 2) throw DomainError("run spec: time_buckets must be >= 2");
  for (const auto& c : configs) c.config.validate();
}

RunSpec runspec_from_json(const json& j) {
  RunSpec spec;
  try {
    const json& inst = j.at("instance");
    if (inst.contains("path")) {
      spec.source.kind = "file";
      spec.source.path = inst.at("path").get<std::string>();
    } else {
      spec.source.kind = inst.at("kind").get<std::string>();
      spec.source.n = inst.at("n").get<Eigen::Index>();
      spec.source.m = inst.value("m", spec.source.n);
      spec.source.k = inst.at("k").get<std::size_t>();
      spec.source.seed = inst.value("seed", std::uint64_t{1});
    }
    for (const auto& c : j.at("configs")) {
      LabeledConfig lc;
      lc.config.method = parse_method(c.at("method").get<std::string>());
      lc.config.omega = parse_omega_policy(c.value("omega", std::string("fixed:1")));
      lc.config.max_iter = c.value("max_iter", 200);
      lc.config.tol = c.value("tol", 1e-13);
      lc.config.safeguard = c.value("safeguard", false);
      lc.label = c.value("label", std::string(to_string(lc.config.method)) + " " +
                                      to_string(lc.config.omega));
      spec.configs.push_back(std::move(lc));
    }
    spec.repetitions = j.value("repetitions", 10);
    spec.out_dir = j.value("out_dir", std::string("compare_out"));
    spec.time_buckets = j.value("time_buckets", 60);
  } catch (const json::exception& e) {
    throw DomainError(std::string("run spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

RunSpec preset(const std::string& name, std::uint64_t seed) {
  RunSpec spec;
  int p = 10;
  if (name == "frame") {
    spec.source = {"frame", 55, 50, 55, seed, {}};
  } else if (name == "hilbert") {
    spec.source = {"hilbert", 5, 5, 7, seed, {}};
    p = 5;
  } else {
    throw DomainError("unknown preset '" + name + "' (expected frame or hilbert)");
  }
  auto add = [&](Method m, OmegaPolicy w) {
    SolverConfig c;
    c.method = m;
    c.omega = w;
    c.max_iter = 200;
    c.tol = 1e-300;  // fixed budgets, as in the reference experiments
    spec.configs.push_back({std::string(to_string(m)), c});
  };
  add(Method::osi, OmegaPolicy::fixed_omega(1.0));
  add(Method::pd_or, OmegaPolicy::adaptive(p));
  add(Method::cholesky_or, OmegaPolicy::adaptive(p));
  add(Method::geodesic_or, OmegaPolicy::adaptive(p));
  spec.out_dir = name + "_compare";
  return spec;
}

int worker_count(std::size_t tasks) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("OPSCALE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) n = v;
  }
  n = std::max(n, 1);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(tasks, 1)));
}

ComparisonReport run_comparison(const KrausCollection& a, const RunSpec& spec) {
  spec.validate();
  struct Task {
    std::size_t config;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < spec.configs.size(); ++c)
    for (int r = 0; r < spec.repetitions; ++r) tasks.push_back({c, r});

  // Results land in fixed slots so the report is independent of scheduling.
  std::vector<std::optional<IterationTrace>> traces(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        traces[i] = solve(a, spec.configs[tasks[i].config].config).trace;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int threads = worker_count(tasks.size());
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  ComparisonReport rep;
  rep.instance_label = a.label();
  rep.repetitions = spec.repetitions;
  rep.threads = threads;
  for (std::size_t c = 0; c < spec.configs.size(); ++c) {
    MethodSummary ms;
    ms.label = spec.configs[c].label;
    ms.config = spec.configs[c].config;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].config != c) continue;
      if (traces[i]) {
        ms.runs.push_back(std::move(*traces[i]));
      } else {
        ms.failures.push_back(errors[i]);
      }
    }
    ms.by_iteration = aggregate_by_iteration(ms.runs);
    ms.by_time = aggregate_by_time(ms.runs, spec.time_buckets);
    rep.methods.push_back(std::move(ms));
  }
  return rep;
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

Aggregate aggregate_by_iteration(const std::vector<IterationTrace>& runs) {
  Aggregate ag;
  std::size_t len = 0;
  for (const auto& r : runs) len = std::max(len, r.records.size());
  std::vector<double> col(runs.size());
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& rec = runs[i].records;
      col[i] = rec[std::min(t, rec.size() - 1)].err;
    }
    double m = 0.0, s = 0.0;
    mean_std(col, m, s);
    ag.x.push_back(static_cast<double>(t));
    ag.mean.push_back(m);
    ag.std.push_back(s);
  }
  return ag;
}

Aggregate aggregate_by_time(const std::vector<IterationTrace>& runs, int buckets) {
  Aggregate ag;
  std::int64_t horizon = 0;
  for (const auto& r : runs) {
    if (!r.records.empty()) horizon = std::max(horizon, r.records.back().wall_nanos);
  }
  if (runs.empty() || horizon <= 0) return ag;
  std::vector<double> col(runs.size());
  for (int b = 0; b < buckets; ++b) {
    const double edge = static_cast<double>(horizon) * b / (buckets - 1);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& rec = runs[i].records;
      auto it = std::upper_bound(rec.begin(), rec.end(), edge, [](double e, const IterationRecord& r) {
        return e < static_cast<double>(r.wall_nanos);
      });
      col[i] = it == rec.begin() ? rec.front().err : std::prev(it)->err;
    }
    double m = 0.0, s = 0.0;
    mean_std(col, m, s);
    ag.x.push_back(edge * 1e-9);
    ag.mean.push_back(m);
    ag.std.push_back(s);
  }
  return ag;
}

json report_to_json(const ComparisonReport& r) {
  json methods = json::array();
  for (const auto& ms : r.methods) {
    json runs = json::array();
    for (const auto& tr : ms.runs) runs.push_back(trace_to_json(tr, ms.config));
    json omega_hats = json::array();
    for (const auto& tr : ms.runs) {
      omega_hats.push_back(tr.omega_hat ? json(*tr.omega_hat) : json(nullptr));
    }
    json statuses = json::array();
    for (const auto& tr : ms.runs) statuses.push_back(to_string(tr.status));
    methods.push_back({{"label", ms.label},
                       {"config", config_to_json(ms.config)},
                       {"statuses", statuses},
                       {"omega_hat", omega_hats},
                       {"failures", ms.failures},
                       {"final_err_mean", ms.by_iteration.mean.empty() ? json(nullptr)
                                                                       : json(ms.by_iteration.mean.back())},
                       {"runs", runs}});
  }
  return {{"instance", r.instance_label},
          {"repetitions", r.repetitions},
          {"threads", r.threads},
          {"methods", methods}};
}

namespace {

std::string aggregate_csv(const ComparisonReport& r, bool by_time) {
  std::string out = by_time ? "method,seconds,mean_err,std_err\n" : "method,t,mean_err,std_err\n";
  char buf[160];
  for (const auto& ms : r.methods) {
    const Aggregate& ag = by_time ? ms.by_time : ms.by_iteration;
    for (std::size_t i = 0; i < ag.x.size(); ++i) {
      if (by_time) {
        std::snprintf(buf, sizeof buf, ",%.9g,%.17g,%.17g\n", ag.x[i], ag.mean[i], ag.std[i]);
      } else {
        std::snprintf(buf, sizeof buf, ",%d,%.17g,%.17g\n", static_cast<int>(ag.x[i]), ag.mean[i],
                      ag.std[i]);
      }
      out += ms.label;
      out += buf;
    }
  }
  return out;
}

}  // namespace

std::string report_to_csv(const ComparisonReport& r) { return aggregate_csv(r, false); }

void write_report(const ComparisonReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.json", report_to_json(r).dump(2) + "\n");
  write_text(dir / "aggregate_iter.csv", aggregate_csv(r, false));
  write_text(dir / "aggregate_time.csv", aggregate_csv(r, true));

  std::vector<Series> by_iter, by_time;
  for (const auto& ms : r.methods) {
    by_iter.push_back({ms.label, ms.by_iteration.x, ms.by_iteration.mean, ms.by_iteration.std});
    by_time.push_back({ms.label, ms.by_time.x, ms.by_time.mean, ms.by_time.std});
  }
  PlotOptions opt;
  opt.title = "gradient norm, " + r.instance_label;
  opt.y_label = "err";
  opt.x_label = "iteration";
  write_text(dir / "err_vs_iter.svg", render_log_plot(by_iter, opt));
  opt.x_label = "wall time [s]";
  write_text(dir / "err_vs_time.svg", render_log_plot(by_time, opt));
}

}  // namespace opscale::tools
