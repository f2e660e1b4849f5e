#ifndef OPSCALE_LINALG_H
#define OPSCALE_LINALG_H

#include <Eigen/Dense>

#include "opscale/errors.h"

namespace opscale {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Real symmetric matrix. Every construction re-symmetrizes (M + M^T) / 2,
// so entries(i, j) == entries(j, i) holds bit-exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix zero(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;

 private:
  Matrix m_;
};

inline SymMatrix operator*(double s, const SymMatrix& m) { return m * s; }

// Lower triangular with strictly positive diagonal.
class LowerTriangular {
 public:
  LowerTriangular() = default;
  // Throws Singular if the input has a nonpositive diagonal entry or a
  // nonzero entry above the diagonal.
  explicit LowerTriangular(const Matrix& g);

  Eigen::Index dim() const { return g_.rows(); }
  const Matrix& mat() const { return g_; }
  auto view() const { return g_.triangularView<Eigen::Lower>(); }

  // G^{-1} by a triangular solve against the identity.
  Matrix inverse() const;

 private:
  Matrix g_;
};

// Symmetric positive definite matrix. The lower Cholesky factor is computed
// once at construction and kept; construction failing is the cone test.
class PDMatrix {
 public:
  PDMatrix() = default;
  // Throws NotPositiveDefinite.
  explicit PDMatrix(const SymMatrix& m);
  explicit PDMatrix(const Matrix& m) : PDMatrix(SymMatrix(m)) {}

  static PDMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const { return m_.dim(); }
  const SymMatrix& sym() const { return m_; }
  const Matrix& mat() const { return m_.mat(); }
  const LowerTriangular& chol() const { return chol_; }

  // Positive scalar multiple (stays in the cone, no refactorization).
  PDMatrix scaled(double mu) const;

  double log_det() const;

 private:
  PDMatrix(SymMatrix m, LowerTriangular g)
      : m_(std::move(m)), chol_(std::move(g)) {}

  SymMatrix m_;
  LowerTriangular chol_;
};

struct PDPair {
  PDMatrix X;
  PDMatrix Y;
};

// Lower Cholesky factor G with G G^T = M. Throws NotPositiveDefinite when a
// pivot is nonpositive.
LowerTriangular chol_lower(const Matrix& m);
inline const LowerTriangular& chol_lower(const PDMatrix& m) { return m.chol(); }

// M^{-1} through the Cholesky factor and two triangular solves.
PDMatrix pd_inverse(const PDMatrix& m);

// U diag(lambda^p) U^T from a symmetric eigendecomposition.
PDMatrix sym_power(const PDMatrix& m, double p);

// log(lambda_max / lambda_min) of chol(Xt)^{-1} X chol(Xt)^{-T}.
double hilbert_distance(const PDMatrix& x, const PDMatrix& xt);

// X #_w Xt = X^{1/2} (X^{-1/2} Xt X^{-1/2})^w X^{1/2}, valid for any real w.
PDMatrix geodesic_sharp(const PDMatrix& x, const PDMatrix& xt, double omega);

// Orbit representative (cX, Y/c) with ||cX||_F == ||Y/c||_F.
PDPair balance(const PDPair& pair);

// Symmetric eigenvalues in ascending order.
Vector sym_eigenvalues(const SymMatrix& m);

}  // namespace opscale

#endif  // OPSCALE_LINALG_H
