#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "compare.h"
#include "opscale/cpmap.h"
#include "opscale/diagnostics.h"
#include "opscale/io.h"
#include "opscale/solvers.h"

using namespace opscale;
using nlohmann::json;

namespace {

enum ExitCode : int {
  kConverged = 0,
  kMaxIter = 2,
  kConeViolation = 3,
  kInputError = 4,
  kFailure = 1,
};

int exit_code(Status s) {
  switch (s) {
    case Status::converged: return kConverged;
    case Status::max_iter: return kMaxIter;
    case Status::cone_violation: return kConeViolation;
  }
  return kFailure;
}

struct GenArgs {
  std::string kind = "frame";
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  std::size_t k = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_gen(const GenArgs& g) {
  tools::InstanceSource src;
  src.kind = g.kind;
  src.n = g.n;
  src.m = g.m > 0 ? g.m : g.n;
  src.k = g.k;
  src.seed = g.seed;
  const KrausCollection a = tools::make_instance(src);
  write_instance(a, g.out);
  std::cerr << "wrote " << a.label() << " (m=" << a.m() << ", n=" << a.n() << ", k=" << a.k()
            << ") to " << g.out << "\n";
  return 0;
}

struct RunArgs {
  std::string instance;
  std::string method = "osi";
  std::string omega = "fixed:1";
  int max_iter = 200;
  double tol = 1e-13;
  std::string out = "run";
  bool safeguard = false;
  int snapshot_every = 0;
};

int cmd_run(const RunArgs& r) {
  const KrausCollection a = read_instance(r.instance);
  SolverConfig cfg;
  cfg.method = parse_method(r.method);
  cfg.omega = parse_omega_policy(r.omega);
  cfg.max_iter = r.max_iter;
  cfg.tol = r.tol;
  cfg.safeguard = r.safeguard;
  cfg.snapshot_every = r.snapshot_every;
  cfg.validate();

  const SolveOutput out = solve(a, cfg);
  json j = trace_to_json(out.trace, cfg);
  j["instance"] = a.label();
  if (!out.trace.snapshots.empty()) {
    json snaps = json::array();
    for (const auto& s : out.trace.snapshots) {
      auto mat = [](const Matrix& m) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          json row = json::array();
          for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
          rows.push_back(std::move(row));
        }
        return rows;
      };
      snaps.push_back({{"t", s.t}, {"X", mat(s.balanced.X.mat())}, {"Y", mat(s.balanced.Y.mat())}});
    }
    j["snapshots"] = std::move(snaps);
  }
  write_text(r.out + ".csv", trace_to_csv(out.trace));
  write_text(r.out + ".json", j.dump(2) + "\n");

  std::fprintf(stderr, "%s: %s after %d iterations, err = %.3e\n", std::string(to_string(cfg.method)).c_str(),
               std::string(to_string(out.trace.status)).c_str(), out.trace.records.back().t,
               out.trace.final_err());
  if (!out.trace.message.empty()) std::cerr << out.trace.message << "\n";
  return exit_code(out.trace.status);
}

struct CompareArgs {
  std::string spec;
  std::string preset;
  std::uint64_t seed = 1;
  int repetitions = 0;
  std::string out_dir;
};

int cmd_compare(const CompareArgs& c) {
  tools::RunSpec spec;
  if (!c.spec.empty()) {
    spec = tools::runspec_from_json(json::parse(read_text(c.spec)));
  } else if (!c.preset.empty()) {
    spec = tools::preset(c.preset, c.seed);
  } else {
    throw DomainError("compare needs --spec FILE or --preset frame|hilbert");
  }
  if (c.repetitions > 0) spec.repetitions = c.repetitions;
  if (!c.out_dir.empty()) spec.out_dir = c.out_dir;
  spec.validate();

  const KrausCollection a = tools::make_instance(spec.source);
  const tools::ComparisonReport rep = tools::run_comparison(a, spec);
  tools::write_report(rep, spec.out_dir);
  bool any_failure = false;
  for (const auto& ms : rep.methods) {
    const double fin = ms.by_iteration.mean.empty() ? std::nan("") : ms.by_iteration.mean.back();
    std::fprintf(stderr, "%-28s runs=%zu failed=%zu final mean err=%.3e\n", ms.label.c_str(),
                 ms.runs.size(), ms.failures.size(), fin);
    any_failure = any_failure || !ms.failures.empty();
  }
  std::cerr << "report written to " << spec.out_dir.string() << " (" << rep.threads << " threads)\n";
  return any_failure ? kFailure : 0;
}

struct CheckArgs {
  std::string instance;
  int trials = 200;
  std::uint64_t seed = 1;
  int gconvexity = 0;
  std::string out;
};

int cmd_check(const CheckArgs& c) {
  // Reading the instance runs the eager Gram-sum check.
  const KrausCollection a = read_instance(c.instance);
  json j = {{"instance", a.label()}, {"m", a.m()}, {"n", a.n()}, {"k", a.k()},
            {"gram_sums_pd", "ok"}, {"trials", c.trials}, {"seed", c.seed}};
  const auto ce = check_positivity_improving(a, c.trials, c.seed);
  if (ce) {
    j["positivity_improving"] = "counterexample";
    j["counterexample"] = {{"side", ce->primal ? "primal" : "dual"},
                           {"v", std::vector<double>(ce->v.data(), ce->v.data() + ce->v.size())}};
  } else {
    j["positivity_improving"] = "likely_yes";
  }
  const ContractionEstimate est = sample_contraction(a, c.trials, c.seed);
  j["lambda1_hat"] = est.lambda1;
  j["lambda2_hat"] = est.lambda2;
  j["safe_omega_bound"] = est.safe_omega_bound();
  if (c.gconvexity > 0) {
    j["gconvexity"] = report_to_json("gconvexity", gconvexity_check(a, c.gconvexity, c.seed));
  }
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_text(c.out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator scaling by Sinkhorn iteration and overrelaxation"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate an instance file");
  g->add_option("--kind", gen.kind, "frame | hilbert | gaussian")
      ->check(CLI::IsMember({"frame", "hilbert", "gaussian"}));
  g->add_option("--n", gen.n, "column dimension (frame vectors live in R^n)")->required();
  g->add_option("--m", gen.m, "row dimension for gaussian (defaults to n)");
  g->add_option("--k", gen.k, "number of Kraus operators / frame vectors")->required();
  g->add_option("--seed", gen.seed, "generator seed");
  g->add_option("--out", gen.out, "output JSON path")->required();

  RunArgs run;
  auto* r = app.add_subcommand("run", "run one solver and write PREFIX.csv / PREFIX.json");
  r->add_option("--instance", run.instance, "instance JSON")->required();
  r->add_option("--method", run.method, "osi | ffpi | pd_fpi | pd_or | cholesky_or | geodesic_or");
  r->add_option("--omega", run.omega, "fixed:W or adaptive:p=P[,l=L]");
  r->add_option("--max-iter", run.max_iter, "iteration budget");
  r->add_option("--tol", run.tol, "stop when err <= tol");
  r->add_option("--out", run.out, "output prefix");
  r->add_flag("--safeguard", run.safeguard, "on a cone violation retry once with (omega - 1) halved");
  r->add_option("--snapshot-every", run.snapshot_every, "store balanced iterates every N steps");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "run several configurations and plot mean/std curves");
  c->add_option("--spec", cmp.spec, "run spec JSON");
  c->add_option("--preset", cmp.preset, "frame | hilbert");
  c->add_option("--seed", cmp.seed, "instance seed for presets");
  c->add_option("--reps", cmp.repetitions, "override repetitions");
  c->add_option("--out-dir", cmp.out_dir, "override output directory");

  CheckArgs chk;
  auto* k = app.add_subcommand("check", "sampled diagnostics for an instance");
  k->add_option("--instance", chk.instance, "instance JSON")->required();
  k->add_option("--trials", chk.trials, "samples for the positivity and contraction checks");
  k->add_option("--seed", chk.seed, "sampling seed");
  k->add_option("--gconvexity", chk.gconvexity, "also run N g-convexity samples");
  k->add_option("--out", chk.out, "write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*r) return cmd_run(run);
    if (*c) return cmd_compare(cmp);
    if (*k) return cmd_check(chk);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const AssumptionViolated& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
