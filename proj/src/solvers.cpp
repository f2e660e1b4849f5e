#include "opscale/solvers.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "opscale/diagnostics.h"

namespace opscale {

FactorPair identity_factors(const KrausCollection& a) {
  return {Matrix::Identity(a.m(), a.m()), Matrix::Identity(a.n(), a.n())};
}

PDPair identity_pair(const KrausCollection& a) {
  return {PDMatrix::identity(a.m()), PDMatrix::identity(a.n())};
}

FactorPair factors_of(const PDPair& p) {
  return {p.X.chol().mat().transpose(), p.Y.chol().mat().transpose()};
}

FactorPair lower_factors_of(const PDPair& p) {
  return {pd_inverse(p.X).chol().inverse(), pd_inverse(p.Y).chol().inverse()};
}

PDPair pair_of(const FactorPair& f) {
  return {PDMatrix(SymMatrix(f.L.transpose() * f.L)),
          PDMatrix(SymMatrix(f.R.transpose() * f.R))};
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::osi: return "osi";
    case Method::ffpi: return "ffpi";
    case Method::pd_fpi: return "pd_fpi";
    case Method::pd_or: return "pd_or";
    case Method::cholesky_or: return "cholesky_or";
    case Method::geodesic_or: return "geodesic_or";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::osi, Method::ffpi, Method::pd_fpi, Method::pd_or,
                   Method::cholesky_or, Method::geodesic_or}) {
    if (to_string(m) == name) return m;
  }
  throw DomainError("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::converged: return "converged";
    case Status::max_iter: return "max_iter";
    case Status::cone_violation: return "cone_violation";
  }
  return "unknown";
}

namespace {

double parse_double(std::string_view s, std::string_view what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DomainError("bad " + std::string(what) + " '" + std::string(s) + "'");
  }
}

int parse_int(std::string_view s, std::string_view what) {
  const double v = parse_double(s, what);
  if (v != std::floor(v)) throw DomainError("bad " + std::string(what) + " '" + std::string(s) + "'");
  return static_cast<int>(v);
}

}  // namespace

OmegaPolicy parse_omega_policy(std::string_view text) {
  if (text.starts_with("fixed:")) {
    return OmegaPolicy::fixed_omega(parse_double(text.substr(6), "omega"));
  }
  if (text == "adaptive") return OmegaPolicy::adaptive(10);
  if (text.starts_with("adaptive:")) {
    OmegaPolicy p = OmegaPolicy::adaptive(10);
    std::string_view rest = text.substr(9);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (item.starts_with("p=")) {
        p.warmup = parse_int(item.substr(2), "warmup p");
      } else if (item.starts_with("l=")) {
        p.lag = parse_int(item.substr(2), "lag l");
      } else {
        throw DomainError("bad omega policy item '" + std::string(item) + "'");
      }
    }
    return p;
  }
  throw DomainError("bad omega policy '" + std::string(text) +
                    "' (expected fixed:W or adaptive:p=P[,l=L])");
}

std::string to_string(const OmegaPolicy& p) {
  if (p.kind == OmegaPolicy::Kind::fixed) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "fixed:%.17g", p.omega);
    return buf;
  }
  return "adaptive:p=" + std::to_string(p.warmup) + ",l=" + std::to_string(p.lag);
}

void SolverConfig::validate() const {
  if (omega.kind == OmegaPolicy::Kind::fixed && !(omega.omega > 0.0)) {
    throw DomainError("SolverConfig: fixed omega must be > 0");
  }
  if (omega.kind == OmegaPolicy::Kind::adaptive && !(omega.warmup >= omega.lag && omega.lag >= 2)) {
    throw DomainError("SolverConfig: adaptive policy needs p >= l >= 2");
  }
  if (!(tol > 0.0)) throw DomainError("SolverConfig: tol must be > 0");
  if (max_iter < 0) throw DomainError("SolverConfig: max_iter must be >= 0");
  if (snapshot_every < 0) throw DomainError("SolverConfig: snapshot_every must be >= 0");
}

std::optional<double> IterationTrace::err_at(int t) const {
  // Records are dense from t = 0, but stay defensive about gaps.
  if (t >= 0 && static_cast<std::size_t>(t) < records.size() && records[t].t == t) {
    return records[t].err;
  }
  for (const auto& r : records)
    if (r.t == t) return r.err;
  return std::nullopt;
}

// --- single steps -------------------------------------------------------

OsiState osi_init(const KrausCollection& a) {
  return {a.matrices(), Matrix::Identity(a.m(), a.m()), Matrix::Identity(a.n(), a.n())};
}

void osi_step(const KrausCollection& a, OsiState& s) {
  const double sm = std::sqrt(static_cast<double>(a.m()));
  const double sn = std::sqrt(static_cast<double>(a.n()));
  const Matrix lbar = chol_lower(SymMatrix(gram_left(s.scaled)).mat()).inverse() / sm;
  for (auto& ai : s.scaled) ai = lbar * ai;
  const Matrix rbar = chol_lower(SymMatrix(gram_right(s.scaled)).mat()).inverse() / sn;
  for (auto& ai : s.scaled) ai = ai * rbar.transpose();
  s.L = lbar * s.L;
  s.R = rbar * s.R;
}

PDPair fpi_step(const KrausCollection& a, const PDPair& p) {
  PDMatrix x = s1(a, p.Y);
  PDMatrix y = s2(a, x);
  return {std::move(x), std::move(y)};
}

PDPair pd_or_step(const KrausCollection& a, const PDPair& p, double omega) {
  if (omega == 1.0) return fpi_step(a, p);
  PDMatrix x(SymMatrix((1.0 - omega) * p.X.mat() + omega * s1(a, p.Y).mat()));
  PDMatrix y(SymMatrix((1.0 - omega) * p.Y.mat() + omega * s2(a, x).mat()));
  return {std::move(x), std::move(y)};
}

namespace {

void require_positive_diagonal(const Matrix& f, const char* which) {
  if (!f.allFinite()) throw NotPositiveDefinite(std::string(which) + " factor is not finite");
  const bool lower = f.isLowerTriangular(0.0);
  if (!lower) return;
  if (!(f.diagonal().minCoeff() > 0.0)) {
    throw NotPositiveDefinite(std::string(which) +
                              " factor has a nonpositive diagonal entry after relaxation");
  }
}

}  // namespace

FactorPair cholesky_or_step(const KrausCollection& a, const FactorPair& f, double omega) {
  const double sm = std::sqrt(static_cast<double>(a.m()));
  const double sn = std::sqrt(static_cast<double>(a.n()));
  const Matrix id_m = Matrix::Identity(a.m(), a.m());
  const Matrix id_n = Matrix::Identity(a.n(), a.n());

  // sum A_i R^T R A_i^T as a Gram sum of the half-scaled A_i R^T.
  const Matrix c_inv = chol_lower(SymMatrix(gram_left(a.scaled(id_m, f.R))).mat()).inverse();
  Matrix l = omega == 1.0 ? Matrix(c_inv / sm) : Matrix((1.0 - omega) * f.L + (omega / sm) * c_inv);
  require_positive_diagonal(l, "L");

  const Matrix d_inv = chol_lower(SymMatrix(gram_right(a.scaled(l, id_n))).mat()).inverse();
  Matrix r = omega == 1.0 ? Matrix(d_inv / sn) : Matrix((1.0 - omega) * f.R + (omega / sn) * d_inv);
  require_positive_diagonal(r, "R");
  return {std::move(l), std::move(r)};
}

PDPair geodesic_or_step(const KrausCollection& a, const PDPair& p, double omega) {
  PDMatrix x = geodesic_sharp(p.X, s1(a, p.Y), omega);
  PDMatrix y = geodesic_sharp(p.Y, s2(a, x), omega);
  return {std::move(x), std::move(y)};
}

// --- run loop -----------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

// Shared iteration driver. `step(state, omega)` produces the next state and
// may throw NotPositiveDefinite/Singular; `factors(state)` yields (L, R) for
// the error measure; `pair(state)` yields the PD pair for snapshots.
template <class State, class Step, class Factors, class Pair>
RunResult<State> run_loop(const KrausCollection& a, State state, const SolverConfig& cfg,
                          bool relaxes, Step step, Factors factors, Pair pair) {
  cfg.validate();
  RunResult<State> out{std::move(state), {}};
  IterationTrace& trace = out.trace;
  const bool adaptive = relaxes && cfg.omega.kind == OmegaPolicy::Kind::adaptive;
  double omega = relaxes && !adaptive ? cfg.omega.omega : 1.0;

  const auto start = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
  };
  auto snapshot = [&](int t) {
    if (cfg.snapshot_every > 0 && t % cfg.snapshot_every == 0) {
      trace.snapshots.push_back({t, balance(pair(out.state))});
    }
  };

  double err = gradient_norm(a, factors(out.state));
  trace.records.push_back({0, err, omega, elapsed()});
  snapshot(0);
  if (!std::isfinite(err)) {
    trace.status = Status::cone_violation;
    trace.message = "non-finite error at the starting point";
    return out;
  }
  if (err <= cfg.tol) {
    trace.status = Status::converged;
    return out;
  }

  for (int t = 1; t <= cfg.max_iter; ++t) {
    State next;
    try {
      next = step(out.state, omega);
    } catch (const Error& e) {
      const bool retry = cfg.safeguard && omega > 1.0 &&
                         (dynamic_cast<const NotPositiveDefinite*>(&e) ||
                          dynamic_cast<const Singular*>(&e));
      if (!retry) {
        trace.status = Status::cone_violation;
        trace.message = "iteration " + std::to_string(t) + ": " + e.what();
        return out;
      }
      omega = 1.0 + 0.5 * (omega - 1.0);
      try {
        next = step(out.state, omega);
      } catch (const Error& e2) {
        trace.status = Status::cone_violation;
        trace.message = "iteration " + std::to_string(t) + " (safeguard retry): " + e2.what();
        return out;
      }
    }
    out.state = std::move(next);
    try {
      err = gradient_norm(a, factors(out.state));
    } catch (const Error& e) {
      trace.status = Status::cone_violation;
      trace.message = "iteration " + std::to_string(t) + ": " + e.what();
      return out;
    }
    trace.records.push_back({t, err, omega, elapsed()});
    snapshot(t);
    if (!std::isfinite(err)) {
      trace.status = Status::cone_violation;
      trace.message = "iteration " + std::to_string(t) + ": non-finite error";
      return out;
    }
    if (err <= cfg.tol) {
      trace.status = Status::converged;
      return out;
    }
    if (adaptive && t == cfg.omega.warmup) {
      const BetaEstimate est = estimate_beta_sq(trace, cfg.omega.warmup, cfg.omega.lag);
      omega = omega_opt(est.beta_sq);
      trace.beta_sq_hat = est.beta_sq;
      trace.beta_clamped = est.clamped;
      trace.omega_hat = omega;
    }
  }
  trace.status = Status::max_iter;
  return out;
}

}  // namespace

RunResult<FactorPair> osi_run(const KrausCollection& a, const SolverConfig& cfg) {
  auto res = run_loop(
      a, osi_init(a), cfg, false,
      [&](const OsiState& s, double) {
        OsiState next = s;
        osi_step(a, next);
        return next;
      },
      [](const OsiState& s) { return FactorPair{s.L, s.R}; },
      [](const OsiState& s) { return pair_of({s.L, s.R}); });
  return {FactorPair{std::move(res.state.L), std::move(res.state.R)}, std::move(res.trace)};
}

RunResult<PDPair> pd_fpi_run(const KrausCollection& a, const PDPair& start,
                             const SolverConfig& cfg) {
  return run_loop(
      a, start, cfg, false, [&](const PDPair& p, double) { return fpi_step(a, p); },
      [](const PDPair& p) { return factors_of(p); }, [](const PDPair& p) { return p; });
}

RunResult<PDPair> pd_or_run(const KrausCollection& a, const PDPair& start,
                            const SolverConfig& cfg) {
  return run_loop(
      a, start, cfg, true, [&](const PDPair& p, double w) { return pd_or_step(a, p, w); },
      [](const PDPair& p) { return factors_of(p); }, [](const PDPair& p) { return p; });
}

RunResult<FactorPair> cholesky_or_run(const KrausCollection& a, const FactorPair& start,
                                      const SolverConfig& cfg) {
  return run_loop(
      a, start, cfg, true,
      [&](const FactorPair& f, double w) { return cholesky_or_step(a, f, w); },
      [](const FactorPair& f) { return f; }, [](const FactorPair& f) { return pair_of(f); });
}

RunResult<PDPair> geodesic_or_run(const KrausCollection& a, const PDPair& start,
                                  const SolverConfig& cfg) {
  return run_loop(
      a, start, cfg, true,
      [&](const PDPair& p, double w) { return geodesic_or_step(a, p, w); },
      [](const PDPair& p) { return factors_of(p); }, [](const PDPair& p) { return p; });
}

SolveOutput solve(const KrausCollection& a, const SolverConfig& cfg) {
  switch (cfg.method) {
    case Method::osi: {
      auto r = osi_run(a, cfg);
      return {std::move(r.state), std::move(r.trace)};
    }
    case Method::ffpi: {
      SolverConfig c = cfg;
      c.omega = OmegaPolicy::fixed_omega(1.0);
      auto r = cholesky_or_run(a, identity_factors(a), c);
      return {std::move(r.state), std::move(r.trace)};
    }
    case Method::pd_fpi: {
      auto r = pd_fpi_run(a, identity_pair(a), cfg);
      return {factors_of(r.state), std::move(r.trace)};
    }
    case Method::pd_or: {
      auto r = pd_or_run(a, identity_pair(a), cfg);
      return {factors_of(r.state), std::move(r.trace)};
    }
    case Method::cholesky_or: {
      auto r = cholesky_or_run(a, identity_factors(a), cfg);
      return {std::move(r.state), std::move(r.trace)};
    }
    case Method::geodesic_or: {
      auto r = geodesic_or_run(a, identity_pair(a), cfg);
      return {factors_of(r.state), std::move(r.trace)};
    }
  }
  throw DomainError("solve: unknown method");
}

// --- rates --------------------------------------------------------------

double omega_opt(double beta_sq) {
  if (!(beta_sq >= 0.0 && beta_sq < 1.0)) {
    throw DomainError("omega_opt: beta^2 must lie in [0, 1)");
  }
  return 2.0 / (1.0 + std::sqrt(1.0 - beta_sq));
}

double rho(double omega, double beta_sq) {
  if (!(omega > 0.0 && omega < 2.0)) throw DomainError("rho: omega must lie in (0, 2)");
  const double w_opt = omega_opt(beta_sq);
  // The lower branch has a square-root singularity at w_opt, so rounding in
  // omega alone moves it by ~sqrt(eps); snap omega within a few ulps.
  constexpr double kSnap = 4.0 * std::numeric_limits<double>::epsilon();
  if (omega >= w_opt * (1.0 - kSnap)) return omega - 1.0;
  const double beta = std::sqrt(beta_sq);
  const double s = std::sqrt(1.0 - beta_sq);
  // 1 - w + w^2 beta^2 / 4 = (1 - w (1 + s) / 2) (1 - w (1 - s) / 2).
  const double radicand =
      std::max(0.0, (1.0 - 0.5 * omega * (1.0 + s)) * (1.0 - 0.5 * omega * (1.0 - s)));
  return 1.0 - omega + 0.5 * omega * omega * beta_sq + omega * beta * std::sqrt(radicand);
}

BetaEstimate estimate_beta_sq(const IterationTrace& trace, int p, int lag) {
  if (lag < 1 || p < lag) throw DomainError("estimate_beta_sq: need p >= l >= 1");
  const auto err_p = trace.err_at(p);
  const auto err_q = trace.err_at(p - lag);
  if (!err_p || !err_q) {
    throw InsufficientHistory("estimate_beta_sq: trace lacks iterations " +
                              std::to_string(p - lag) + " and " + std::to_string(p));
  }
  if (!(*err_q > 0.0) || !(*err_p >= 0.0)) {
    throw InsufficientHistory("estimate_beta_sq: errors must be positive");
  }
  constexpr double kMaxBetaSq = 1.0 - 1e-8;
  const double b = std::pow(*err_p / *err_q, 1.0 / lag);
  if (!std::isfinite(b) || b >= kMaxBetaSq) return {kMaxBetaSq, true};
  return {b, false};
}

double adaptive_omega(const IterationTrace& trace, int p, int lag) {
  return omega_opt(estimate_beta_sq(trace, p, lag).beta_sq);
}

double measure_rate(const IterationTrace& trace, int window, double floor) {
  if (window < 1) throw DomainError("measure_rate: window must be >= 1");
  const auto& rec = trace.records;
  std::ptrdiff_t end = static_cast<std::ptrdiff_t>(rec.size()) - 1;
  while (end >= 0 && !(rec[end].err > floor)) --end;
  const std::ptrdiff_t begin = end - window;
  if (begin < 0) {
    throw InsufficientHistory("measure_rate: fewer than window + 1 entries above the floor");
  }
  for (std::ptrdiff_t i = begin; i <= end; ++i) {
    if (!(rec[i].err > floor)) {
      throw InsufficientHistory("measure_rate: trailing window dips below the floor");
    }
  }
  return std::pow(rec[end].err / rec[begin].err, 1.0 / window);
}

}  // namespace opscale
