#ifndef OPSCALE_DIAGNOSTICS_H
#define OPSCALE_DIAGNOSTICS_H

#include <cstdint>
#include <string>
#include <utility>

#include "opscale/cpmap.h"
#include "opscale/linalg.h"
#include "opscale/solvers.h"

namespace opscale {

// sqrt(||sum A_t A_t^T - I/m||_F^2 + ||sum A_t^T A_t - I/n||_F^2) with
// A_t = L A R^T. This is the Euclidean gradient norm of the cost of the
// scaled tuple at (I, I).
double gradient_norm(const KrausCollection& a, const FactorPair& f);

// f(X, Y) = tr(X Phi(Y)) - log det(X) / m - log det(Y) / n.
double cost_f(const KrausCollection& a, const PDPair& p);
// Same value through tr(Phi*(X) Y).
double cost_f_dual(const KrausCollection& a, const PDPair& p);

// (Phi(Y) - X^{-1}/m, Phi*(X) - Y^{-1}/n).
std::pair<SymMatrix, SymMatrix> grad_f(const KrausCollection& a, const PDPair& p);

// Hessian of f at an anchor, as a linear map on Sym(m) x Sym(n):
// (H1, H2) -> (Phi(H2) + X^{-1} H1 X^{-1} / m, Phi*(H1) + Y^{-1} H2 Y^{-1} / n).
class HessianOperator {
 public:
  HessianOperator(const KrausCollection& a, PDPair anchor);

  std::pair<SymMatrix, SymMatrix> apply(const SymMatrix& h1, const SymMatrix& h2) const;

  // Dimension of Sym(m) x Sym(n).
  Eigen::Index dim() const;
  // Dense matrix in the orthonormal basis E_ii, (E_ij + E_ji)/sqrt(2),
  // i < j, lexicographic, X block first.
  Matrix materialize() const;

  const KrausCollection& kraus() const { return *a_; }
  const PDPair& anchor() const { return anchor_; }

 private:
  const KrausCollection* a_;
  PDPair anchor_;
  Matrix x_inv_;
  Matrix y_inv_;
};

std::pair<SymMatrix, SymMatrix> hessian_apply(const HessianOperator& h, const SymMatrix& h1,
                                              const SymMatrix& h2);

// Coordinates of a symmetric matrix in the orthonormal basis above.
Vector sym_coords(const SymMatrix& s);
SymMatrix sym_from_coords(const Vector& c, Eigen::Index dim);
Vector pair_coords(const SymMatrix& h1, const SymMatrix& h2);

struct HessianSpectrum {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // columns, in basis coordinates
};

// Throws DimensionTooLarge above kMaxHessianDim.
HessianSpectrum hessian_spectrum(const KrausCollection& a, const PDPair& anchor);

inline constexpr Eigen::Index kMaxHessianDim = 2000;

// Spectral radius of T_w = I - N_w^{-1} Hess on the quotient by the orbit
// direction. Throws NotConverged if gradient_norm at `fixed` exceeds 1e-8.
double local_rate_from_hessian(const KrausCollection& a, const PDPair& fixed, double omega);

struct ContractionEstimate {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  // 2 / (1 + sqrt(lambda1 * lambda2)).
  double safe_omega_bound() const;
};

// Sampled lower bounds on the Hilbert-metric Lipschitz constants of S1, S2.
// Samples are G G^T + 1e-3 I with Gaussian G.
ContractionEstimate sample_contraction(const KrausCollection& a, int trials,
                                       std::uint64_t seed);

struct GConvexityReport {
  int samples = 0;
  double worst_slack_f = -1e300;      // max of lhs - rhs; <= 0 means no violation
  double worst_slack_trace = -1e300;
  int violations = 0;
  bool pass = true;
};

// Sampled geodesic-convexity inequalities for f and for tr(X A_i Y A_i^T).
GConvexityReport gconvexity_check(const KrausCollection& a, int samples, std::uint64_t seed,
                                  double slack = 1e-9);

}  // namespace opscale

#endif  // OPSCALE_DIAGNOSTICS_H
