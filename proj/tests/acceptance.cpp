// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are fixed
// below and are not tuned per run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "opscale/cpmap.h"
#include "opscale/diagnostics.h"
#include "opscale/linalg.h"
#include "opscale/random.h"
#include "opscale/solvers.h"
#include "test_util.h"

using namespace opscale;

namespace {

// 1: frame regression
constexpr Eigen::Index kFrameN = 50;
constexpr std::size_t kFrameK = 55;
constexpr std::uint64_t kFrameSeed = 1;
constexpr int kFrameOsiIters = 200;
constexpr double kFrameOsiLo = 1e-9, kFrameOsiHi = 1e-7;
constexpr int kFrameSorBudget = 150;
constexpr double kFrameSorTarget = 1e-12;
constexpr double kFrameSeconds = 30.0;
// 2: ill-conditioned regression
constexpr std::uint64_t kHilbertSeed = 1;
constexpr int kHilbertOsiBudget = 50;
constexpr double kHilbertOsiTarget = 1e-10;
constexpr int kHilbertSorIters = 200;
constexpr double kHilbertPlateauLo = 1e-8, kHilbertPlateauHi = 1e-4;
constexpr double kHilbertSeconds = 5.0;
// 3, 4, 7: rate instance
constexpr std::uint64_t kRateSeed = 3;
constexpr double kRateRelTol = 0.10;
constexpr double kRateOmegaNineAbs = 0.02;
constexpr double kVariantRelTol = 0.05;
constexpr double kVariantOmega = 1.3;
constexpr double kTailFloor = 1e-12;
constexpr int kMaxWindow = 40;
constexpr int kRateStarts = 8;
constexpr int kWarmSteps = 3;
// 5
constexpr int kGeomTriples = 100;
constexpr int kGeomOmegaSamples = 1000;
constexpr double kScaleTol = 1e-12, kInverseTol = 1e-10, kDeltaTol = 1e-10, kOmegaSlack = 1e-10;
// 6
constexpr int kSlopeDraws = 20;
constexpr double kSlopeMin = 1.9;
// 7
constexpr double kNullRel = 1e-8, kNullCos = 1e-6, kGapRel = 1e-6;
// 8
constexpr int kEquivInstances = 10, kEquivIters = 50;
constexpr double kEquivTol = 1e-9;
// 9
constexpr int kGlobalInstances = 10;
constexpr double kGlobalTarget = 1e-10;
constexpr double kMonotoneFraction = 0.95;
constexpr double kOrbitNoiseFloor = 1e-9;
// 10
constexpr int kGconvexSamples = 1000;
constexpr double kGconvexSlack = 1e-9;
// 11
constexpr int kInvariantTrials = 100;
constexpr double kEquivarianceTol = 1e-11, kFixedPointTol = 1e-10, kOmegaOneTol = 1e-10;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

SolverConfig fixed_config(Method m, double omega, int max_iter, double tol = 1e-300) {
  SolverConfig c;
  c.method = m;
  c.omega = OmegaPolicy::fixed_omega(omega);
  c.max_iter = max_iter;
  c.tol = tol;
  return c;
}

SolverConfig adaptive_config(Method m, int p, int max_iter, double tol = 1e-300) {
  SolverConfig c = fixed_config(m, 1.0, max_iter, tol);
  c.omega = OmegaPolicy::adaptive(p);
  return c;
}

double seconds(const IterationTrace& t) {
  return t.records.empty() ? 0.0 : 1e-9 * static_cast<double>(t.records.back().wall_nanos);
}

std::optional<int> first_below(const IterationTrace& t, double target) {
  for (const auto& r : t.records)
    if (r.err <= target) return r.t;
  return std::nullopt;
}

// Geometric-mean rate over the latter half of the iterates preceding the
// first drop below the floor. The head of the run is the transient, and
// whatever follows the first crossing is rounding noise.
// With linear_prefactor set, the estimate divides out a t*rate^t envelope,
// which is how a defective eigenvalue decays. That variant is reported for
// diagnosis only and never decides a criterion.
double tail_rate(const IterationTrace& t, bool linear_prefactor = false) {
  const auto& r = t.records;
  std::size_t end = 0;
  while (end + 1 < r.size() && r[end + 1].err > kTailFloor) ++end;
  const int window = std::clamp(static_cast<int>(end) / 2, 1, kMaxWindow);
  if (static_cast<int>(end) < window) throw std::runtime_error("tail_rate: history too short");
  double ratio = r[end].err / r[end - window].err;
  if (linear_prefactor) ratio *= static_cast<double>(r[end - window].t) / r[end].t;
  return std::pow(ratio, 1.0 / window);
}

// Random starting points nudged toward the fixed point by a few unrelaxed
// steps. The slowest mode is not excited equally from every start, so the
// asymptotic rate is taken as the worst tail rate over this set.
std::vector<PDPair> rate_starts(const KrausCollection& a) {
  Rng rng(4242);
  std::vector<PDPair> out;
  for (int i = 0; i < kRateStarts; ++i) {
    PDPair p{rng.random_pd(a.m(), 0.5), rng.random_pd(a.n(), 0.5)};
    for (int j = 0; j < kWarmSteps; ++j) p = fpi_step(a, p);
    out.push_back(p);
  }
  return out;
}

double worst_tail_rate(const KrausCollection& a, Method m, double omega,
                       const std::vector<PDPair>& starts, bool linear_prefactor = false) {
  const SolverConfig cfg = fixed_config(m, omega, 5000);
  double worst = 0.0;
  for (const PDPair& p : starts) {
    IterationTrace t;
    switch (m) {
      case Method::pd_fpi: t = pd_fpi_run(a, p, cfg).trace; break;
      case Method::pd_or: t = pd_or_run(a, p, cfg).trace; break;
      case Method::cholesky_or: t = cholesky_or_run(a, lower_factors_of(p), cfg).trace; break;
      case Method::geodesic_or: t = geodesic_or_run(a, p, cfg).trace; break;
      default: throw std::logic_error("worst_tail_rate: unsupported method");
    }
    if (t.status == Status::cone_violation) {
      throw std::runtime_error(std::string(to_string(m)) + " left the cone");
    }
    worst = std::max(worst, tail_rate(t, linear_prefactor));
  }
  return worst;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

constexpr Method kSor[] = {Method::pd_or, Method::cholesky_or, Method::geodesic_or};

KrausCollection rate_instance() { return gen_gaussian_instance(6, 6, 8, kRateSeed); }

// ---------------------------------------------------------------------------

Outcome frame_regression() {
  Outcome o;
  const KrausCollection a = frame_to_kraus(gen_frame_instance(kFrameN, kFrameK, kFrameSeed));
  const SolveOutput osi = solve(a, fixed_config(Method::osi, 1.0, kFrameOsiIters));
  const double e = osi.trace.final_err();
  o.pass = e >= kFrameOsiLo && e <= kFrameOsiHi && seconds(osi.trace) <= kFrameSeconds;
  o.detail = fmt("osi err@200=%.2e (%.1fs)", e, seconds(osi.trace));
  for (Method m : kSor) {
    const SolveOutput r = solve(a, adaptive_config(m, 10, kFrameSorBudget));
    const auto hit = first_below(r.trace, kFrameSorTarget);
    o.pass = o.pass && hit.has_value() && r.trace.status != Status::cone_violation &&
             seconds(r.trace) <= kFrameSeconds;
    o.detail += fmt("; %s err<=1e-12 at t=%d (%.1fs)", std::string(to_string(m)).c_str(),
                    hit ? *hit : -1, seconds(r.trace));
  }
  return o;
}

Outcome hilbert_regression() {
  Outcome o;
  const KrausCollection a = gen_hilbert_instance(5, 7, kHilbertSeed);
  const SolveOutput osi = solve(a, fixed_config(Method::osi, 1.0, kHilbertOsiBudget));
  const auto hit = first_below(osi.trace, kHilbertOsiTarget);
  o.pass = hit.has_value() && seconds(osi.trace) <= kHilbertSeconds;
  o.detail = fmt("osi err<=1e-10 at t=%d", hit ? *hit : -1);
  for (Method m : kSor) {
    const SolveOutput r = solve(a, adaptive_config(m, 5, kHilbertSorIters));
    // The plateau: the last quarter of the run stays inside the band.
    double lo = 1e300, hi = 0.0;
    for (const auto& rec : r.trace.records) {
      if (rec.t < 3 * kHilbertSorIters / 4) continue;
      lo = std::min(lo, rec.err);
      hi = std::max(hi, rec.err);
    }
    o.pass = o.pass && r.trace.status == Status::max_iter && lo >= kHilbertPlateauLo &&
             hi <= kHilbertPlateauHi && seconds(r.trace) <= kHilbertSeconds;
    o.detail += fmt("; %s plateau [%.1e, %.1e]", std::string(to_string(m)).c_str(), lo, hi);
  }
  return o;
}

Outcome rate_verification() {
  Outcome o;
  const KrausCollection a = rate_instance();
  const PDPair star = test::converge(a);
  const auto starts = rate_starts(a);
  const double beta_sq = local_rate_from_hessian(a, star, 1.0);
  // Unrelaxed PD iteration; its error sequence matches the scaling iteration.
  const double unrelaxed = worst_tail_rate(a, Method::pd_fpi, 1.0, starts);
  o.pass = rel(unrelaxed, beta_sq) <= kRateRelTol;
  o.detail = fmt("beta^2 hessian=%.4f measured=%.4f", beta_sq, unrelaxed);
  for (double w : {1.1, omega_opt(beta_sq), 1.9}) {
    const double measured = worst_tail_rate(a, Method::geodesic_or, w, starts);
    const double predicted = rho(w, beta_sq);
    bool ok = rel(measured, predicted) <= kRateRelTol;
    if (w == 1.9) ok = ok && std::abs(measured - (w - 1.0)) <= kRateOmegaNineAbs;
    o.pass = o.pass && ok;
    o.detail += fmt("; w=%.4f rho=%.4f measured=%.4f", w, predicted, measured);
    if (w == omega_opt(beta_sq)) {
      o.detail += fmt(" (t*rate^t fit %.4f, diagnostic only)",
                      worst_tail_rate(a, Method::geodesic_or, w, starts, true));
    }
  }
  return o;
}

Outcome variant_equivalence() {
  const KrausCollection a = rate_instance();
  const auto starts = rate_starts(a);
  double rates[3];
  for (int i = 0; i < 3; ++i) rates[i] = worst_tail_rate(a, kSor[i], kVariantOmega, starts);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) worst = std::max(worst, rel(rates[i], rates[j]));
  return {worst <= kVariantRelTol,
          fmt("w=%.2f rates pd_or=%.4f cholesky_or=%.4f geodesic_or=%.4f, worst pairwise %.2f%%",
              kVariantOmega, rates[0], rates[1], rates[2], 100 * worst)};
}

Outcome geometry_suite() {
  Rng rng(505);
  double scale_err = 0.0, inv_err = 0.0, delta_err = 0.0, omega_slack = 1e300;
  for (int i = 0; i < kGeomTriples; ++i) {
    const Eigen::Index dim = 2 + i % 5;
    const PDMatrix x = rng.random_pd(dim, 1.0);
    const PDMatrix y = rng.random_pd(dim, 1.0);
    const double d = hilbert_distance(x, y);
    const double mu = 0.1 + 10.0 * rng.uniform(), nu = 0.1 + 10.0 * rng.uniform();
    scale_err = std::max(scale_err, std::abs(hilbert_distance(x.scaled(mu), y.scaled(nu)) - d));
    inv_err = std::max(inv_err, std::abs(hilbert_distance(pd_inverse(x), pd_inverse(y)) - d));
    for (double w : {-0.5, 0.3, 1.6, 2.5}) {
      delta_err = std::max(delta_err, std::abs(hilbert_distance(geodesic_sharp(x, y, w), y) -
                                               std::abs(1.0 - w) * d));
    }
  }
  for (int i = 0; i < kGeomOmegaSamples; ++i) {
    const Eigen::Index dim = 2 + i % 5;
    const PDMatrix a = rng.random_pd(dim, 1.0);
    const PDMatrix b = rng.random_pd(dim, 1.0);
    const PDMatrix c = rng.random_pd(dim, 1.0);
    const double w = 3.0 * rng.uniform();
    const double rhs = std::abs(1.0 - w) * hilbert_distance(a, c) + w * hilbert_distance(b, c);
    omega_slack = std::min(omega_slack, rhs - hilbert_distance(geodesic_sharp(a, b, w), c));
  }
  Outcome o;
  o.pass = scale_err <= kScaleTol && inv_err <= kInverseTol && delta_err <= kDeltaTol &&
           omega_slack >= -kOmegaSlack;
  o.detail = fmt("scale %.1e, inverse %.1e, delta %.1e, min omega-slack %.2e", scale_err, inv_err,
                 delta_err, omega_slack);
  return o;
}

Outcome remainder_slope() {
  Rng rng(606);
  double worst = 1e300;
  for (int i = 0; i < kSlopeDraws; ++i) {
    const Eigen::Index dim = 2 + i % 4;
    const PDMatrix x = rng.random_pd(dim, 1.0);
    const Matrix h = rng.random_sym(dim).mat();
    const Matrix ht = rng.random_sym(dim).mat();
    const double w = -0.5 + 3.0 * rng.uniform();
    worst = std::min(worst, test::geodesic_remainder_slope(x, h, ht, w));
  }
  return {worst >= kSlopeMin, fmt("min slope %.3f over %d draws", worst, kSlopeDraws)};
}

Outcome hessian_null_space() {
  const KrausCollection a = rate_instance();
  const PDPair star = test::converge(a);
  const HessianSpectrum s = hessian_spectrum(a, star);
  const double top = s.eigenvalues.maxCoeff();
  int near_zero = 0;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
    if (std::abs(s.eigenvalues(i)) <= kNullRel * top) ++near_zero;
  Vector dir = pair_coords(star.X.sym(), star.Y.sym() * -1.0);
  dir.normalize();
  const double cosine = std::abs(dir.dot(s.eigenvectors.col(0)));
  const double gap = s.eigenvalues(1) / top;
  return {near_zero == 1 && cosine >= 1.0 - kNullCos && gap >= kGapRel,
          fmt("%d eigenvalue(s) near zero (lambda_1/lambda_max=%.1e), cos=%.12f, lambda_2/lambda_max=%.2e",
              near_zero, std::abs(s.eigenvalues(0)) / top, cosine, gap)};
}

Outcome orthogonal_equivalence() {
  double worst = 0.0;
  for (int i = 0; i < kEquivInstances; ++i) {
    const Eigen::Index m = 2 + i % 4, n = 2 + (i + 1) % 5;
    const KrausCollection a = gen_gaussian_instance(m, n, static_cast<std::size_t>(std::max(m, n) + 2), 800 + i);
    const auto scaled = osi_run(a, fixed_config(Method::osi, 1.0, kEquivIters));
    const auto chol = cholesky_or_run(a, identity_factors(a), fixed_config(Method::ffpi, 1.0, kEquivIters));
    if (scaled.trace.records.size() != chol.trace.records.size()) return {false, "trace lengths differ"};
    for (std::size_t t = 0; t < scaled.trace.records.size(); ++t) {
      worst = std::max(worst, std::abs(scaled.trace.records[t].err - chol.trace.records[t].err));
    }
  }
  return {worst <= kEquivTol, fmt("max |err_osi - err_chol| = %.2e over %d instances x %d iterations", worst,
                                  kEquivInstances, kEquivIters)};
}

Outcome global_convergence() {
  Outcome o;
  int converged = 0, counted = 0, nonincreasing = 0, tried = 0;
  double min_w = 2.0, max_w = 0.0;
  for (std::uint64_t seed = 900; tried < kGlobalInstances; ++seed) {
    const KrausCollection a = gen_gaussian_instance(3, 3, 5, seed);
    if (check_positivity_improving(a, 200, seed).has_value()) continue;
    ++tried;
    const ContractionEstimate est = sample_contraction(a, 200, seed);
    const double w = std::min(1.05, 0.99 * est.safe_omega_bound());
    min_w = std::min(min_w, w);
    max_w = std::max(max_w, w);
    SolverConfig cfg = fixed_config(Method::geodesic_or, w, 2000, kGlobalTarget);
    cfg.snapshot_every = 1;
    const SolveOutput r = solve(a, cfg);
    if (r.trace.status == Status::converged) ++converged;
    const PDPair star = test::converge(a);
    double prev = -1.0;
    for (const auto& s : r.trace.snapshots) {
      const double d = test::orbit_distance(s.balanced, star);
      if (s.t > 5 && prev > kOrbitNoiseFloor) {
        ++counted;
        if (d <= prev) ++nonincreasing;
      }
      prev = d;
    }
  }
  const double frac = counted > 0 ? static_cast<double>(nonincreasing) / counted : 0.0;
  o.pass = converged == kGlobalInstances && frac >= kMonotoneFraction;
  o.detail = fmt("%d/%d converged, omega in [%.3f, %.3f], non-increasing in %d/%d steps (%.1f%%)",
                 converged, kGlobalInstances, min_w, max_w, nonincreasing, counted, 100 * frac);
  return o;
}

Outcome gconvexity_suite() {
  const KrausCollection a = gen_gaussian_instance(4, 3, 5, 1010);
  const GConvexityReport r = gconvexity_check(a, kGconvexSamples, 1011, kGconvexSlack);
  return {r.pass && r.violations == 0,
          fmt("%d samples, %d violations, worst slack f=%.2e trace=%.2e", r.samples, r.violations,
              r.worst_slack_f, r.worst_slack_trace)};
}

Outcome invariants() {
  Rng rng(1111);
  double worst_eq = 0.0, worst_fp = 0.0, worst_one = 0.0;
  int skipped = 0;
  for (int trial = 0; trial < kInvariantTrials; ++trial) {
    const Eigen::Index m = 2 + trial % 5, n = 2 + (trial / 5) % 5;
    const KrausCollection a = gen_gaussian_instance(m, n, static_cast<std::size_t>(std::max(m, n) + 2),
                                                    2000 + trial);
    const PDPair p{rng.random_pd(m, 0.5), rng.random_pd(n, 0.5)};
    const double mu = std::exp(std::log(0.1) + std::log(100.0) * rng.uniform());
    const double w = 0.1 + 1.8 * rng.uniform();
    const PDPair q{p.X.scaled(mu), p.Y.scaled(1.0 / mu)};
    auto rel_gap = [](const Matrix& x, const Matrix& y) { return (x - y).norm() / y.norm(); };

    // Orbital equivariance of the three relaxed maps.
    const PDPair gp = geodesic_or_step(a, p, w), gq = geodesic_or_step(a, q, w);
    worst_eq = std::max({worst_eq, rel_gap(gq.X.mat(), mu * gp.X.mat()), rel_gap(gq.Y.mat(), gp.Y.mat() / mu)});
    try {
      const PDPair sp = pd_or_step(a, p, w), sq = pd_or_step(a, q, w);
      worst_eq = std::max({worst_eq, rel_gap(sq.X.mat(), mu * sp.X.mat()), rel_gap(sq.Y.mat(), sp.Y.mat() / mu)});
    } catch (const NotPositiveDefinite&) {
      ++skipped;
    }
    try {
      const FactorPair f = lower_factors_of(p);
      const double r = std::sqrt(mu);
      const FactorPair cp = cholesky_or_step(a, f, w), cq = cholesky_or_step(a, {r * f.L, f.R / r}, w);
      worst_eq = std::max({worst_eq, rel_gap(cq.L, r * cp.L), rel_gap(cq.R, cp.R / r)});
    } catch (const NotPositiveDefinite&) {
      ++skipped;
    }

    // Fixed-point preservation.
    const PDPair star = test::converge(a);
    const PDPair s1 = pd_or_step(a, star, w);
    const PDPair s2 = geodesic_or_step(a, star, w);
    const PDPair s3 = pair_of(cholesky_or_step(a, lower_factors_of(star), w));
    for (const PDPair* s : {&s1, &s2, &s3}) {
      worst_fp = std::max({worst_fp, hilbert_distance(s->X, star.X), hilbert_distance(s->Y, star.Y)});
    }

    // All variants coincide at omega = 1.
    const SolverConfig one = fixed_config(Method::pd_fpi, 1.0, 15);
    const auto base = pd_fpi_run(a, identity_pair(a), one).trace;
    const IterationTrace others[] = {pd_or_run(a, identity_pair(a), one).trace,
                                     cholesky_or_run(a, identity_factors(a), one).trace,
                                     geodesic_or_run(a, identity_pair(a), one).trace};
    for (const auto& tr : others)
      for (std::size_t t = 0; t < base.records.size(); ++t)
        worst_one = std::max(worst_one, std::abs(tr.records[t].err - base.records[t].err));
  }
  return {worst_eq <= kEquivarianceTol && worst_fp <= kFixedPointTol && worst_one <= kOmegaOneTol,
          fmt("%d trials: equivariance %.1e (%d Euclidean/Cholesky steps left the cone in both), "
              "fixed point %.1e, omega=1 agreement %.1e",
              kInvariantTrials, worst_eq, skipped, worst_fp, worst_one)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"frame-scaling regression", frame_regression},
      {"ill-conditioned regression", hilbert_regression},
      {"rate formula", rate_verification},
      {"three-variant rate equivalence", variant_equivalence},
      {"geometry suite", geometry_suite},
      {"geodesic remainder slope", remainder_slope},
      {"Hessian null space", hessian_null_space},
      {"orthogonal equivalence", orthogonal_equivalence},
      {"global convergence in range", global_convergence},
      {"g-convexity suite", gconvexity_suite},
      {"equivariance and fixed points", invariants},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("criterion %2zu: %s  %s [%s] (%.1fs)\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
