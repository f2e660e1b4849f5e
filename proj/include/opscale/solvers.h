#ifndef OPSCALE_SOLVERS_H
#define OPSCALE_SOLVERS_H

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opscale/cpmap.h"
#include "opscale/linalg.h"

namespace opscale {

// Scaling factors with X = L^T L and Y = R^T R; the scaled tuple is
// L A R^T.
struct FactorPair {
  Matrix L;
  Matrix R;
};

FactorPair identity_factors(const KrausCollection& a);
PDPair identity_pair(const KrausCollection& a);
// L = chol_lower(X)^T, so that L^T L = X.
FactorPair factors_of(const PDPair& p);
PDPair pair_of(const FactorPair& f);
// Lower triangular L with L^T L = X (and likewise R): the representation
// Cholesky-OR iterates on. L = chol_lower(X^{-1})^{-1}.
FactorPair lower_factors_of(const PDPair& p);

enum class Method { osi, ffpi, pd_fpi, pd_or, cholesky_or, geodesic_or };

std::string_view to_string(Method m);
// Throws DomainError on an unknown name.
Method parse_method(std::string_view name);

struct OmegaPolicy {
  enum class Kind { fixed, adaptive };
  Kind kind = Kind::fixed;
  double omega = 1.0;  // fixed only
  int warmup = 10;     // adaptive: p
  int lag = 2;         // adaptive: l

  static OmegaPolicy fixed_omega(double w) { return {Kind::fixed, w, 10, 2}; }
  static OmegaPolicy adaptive(int p, int l = 2) { return {Kind::adaptive, 1.0, p, l}; }
};

// "fixed:1.3" or "adaptive:p=10" / "adaptive:p=10,l=2" / "adaptive".
OmegaPolicy parse_omega_policy(std::string_view text);
std::string to_string(const OmegaPolicy& p);

struct SolverConfig {
  Method method = Method::osi;
  OmegaPolicy omega;
  int max_iter = 200;
  double tol = 1e-13;
  int snapshot_every = 0;  // 0 disables balanced-iterate snapshots
  // On a cone violation with omega > 1, retry the step once with omega - 1
  // halved and keep that omega for the rest of the run.
  bool safeguard = false;

  // Throws DomainError.
  void validate() const;
};

struct IterationRecord {
  int t = 0;
  double err = 0.0;
  double omega = 1.0;
  std::int64_t wall_nanos = 0;  // cumulative since the loop started
};

enum class Status { converged, max_iter, cone_violation };
std::string_view to_string(Status s);

struct Snapshot {
  int t = 0;
  PDPair balanced;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  Status status = Status::max_iter;
  std::vector<Snapshot> snapshots;
  std::optional<double> omega_hat;
  std::optional<double> beta_sq_hat;
  bool beta_clamped = false;
  std::string message;

  double final_err() const { return records.empty() ? 0.0 : records.back().err; }
  // Error at iteration t, if recorded.
  std::optional<double> err_at(int t) const;
};

template <class State>
struct RunResult {
  State state;
  IterationTrace trace;
};

// --- single steps -------------------------------------------------------

// Alternating-scaling state: the scaled tuple and the accumulated factors.
struct OsiState {
  std::vector<Matrix> scaled;
  Matrix L;
  Matrix R;
};

OsiState osi_init(const KrausCollection& a);
// Throws NotPositiveDefinite when a Gram sum fails to factor.
void osi_step(const KrausCollection& a, OsiState& s);

// (S1(Y), S2(S1(Y))).
PDPair fpi_step(const KrausCollection& a, const PDPair& p);
PDPair pd_or_step(const KrausCollection& a, const PDPair& p, double omega);
FactorPair cholesky_or_step(const KrausCollection& a, const FactorPair& f, double omega);
PDPair geodesic_or_step(const KrausCollection& a, const PDPair& p, double omega);

// --- full runs ----------------------------------------------------------

RunResult<FactorPair> osi_run(const KrausCollection& a, const SolverConfig& cfg);
RunResult<PDPair> pd_fpi_run(const KrausCollection& a, const PDPair& start,
                             const SolverConfig& cfg);
RunResult<PDPair> pd_or_run(const KrausCollection& a, const PDPair& start,
                            const SolverConfig& cfg);
RunResult<FactorPair> cholesky_or_run(const KrausCollection& a, const FactorPair& start,
                                      const SolverConfig& cfg);
RunResult<PDPair> geodesic_or_run(const KrausCollection& a, const PDPair& start,
                                  const SolverConfig& cfg);

struct SolveOutput {
  FactorPair factors;
  IterationTrace trace;
};

// Dispatch on cfg.method from the identity start.
SolveOutput solve(const KrausCollection& a, const SolverConfig& cfg);

// --- rates --------------------------------------------------------------

double omega_opt(double beta_sq);
double rho(double omega, double beta_sq);

struct BetaEstimate {
  double beta_sq = 0.0;
  bool clamped = false;
};

// (err_p / err_{p-l})^{1/l}, clamped to 1 - 1e-8.
BetaEstimate estimate_beta_sq(const IterationTrace& trace, int p, int lag = 2);
double adaptive_omega(const IterationTrace& trace, int p, int lag = 2);

// Geometric mean of err_{t+1}/err_t over the last `window` steps among the
// records whose err lies above `floor`.
double measure_rate(const IterationTrace& trace, int window,
                    double floor = 100.0 * 2.220446049250313e-16);

}  // namespace opscale

#endif  // OPSCALE_SOLVERS_H
