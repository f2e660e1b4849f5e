#include "opscale/linalg.h"

#include <cmath>
#include <string>

namespace opscale {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("SymMatrix: matrix is " + std::to_string(m.rows()) +
                            "x" + std::to_string(m.cols()) + ", not square");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::zero(Eigen::Index dim) {
  return SymMatrix(Matrix::Zero(dim, dim));
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  if (o.dim() != dim()) throw DimensionMismatch("SymMatrix: sum of unequal dims");
  return SymMatrix(m_ + o.m_);
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  if (o.dim() != dim()) throw DimensionMismatch("SymMatrix: difference of unequal dims");
  return SymMatrix(m_ - o.m_);
}

SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(s * m_); }

LowerTriangular::LowerTriangular(const Matrix& g) : g_(g) {
  if (g.rows() != g.cols()) throw DimensionMismatch("LowerTriangular: not square");
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    if (!(g(j, j) > 0.0)) {
      throw Singular("LowerTriangular: diagonal entry " + std::to_string(j) +
                     " is not positive");
    }
    for (Eigen::Index i = 0; i < j; ++i) {
      if (g(i, j) != 0.0) throw Singular("LowerTriangular: nonzero above diagonal");
    }
  }
}

Matrix LowerTriangular::inverse() const {
  return view().solve(Matrix::Identity(dim(), dim()));
}

LowerTriangular chol_lower(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("chol_lower: not square");
  if (!m.allFinite()) throw NotPositiveDefinite("chol_lower: non-finite entries");
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("chol_lower: nonpositive pivot, matrix left the PD cone");
  }
  return LowerTriangular(Matrix(llt.matrixL()));
}

PDMatrix::PDMatrix(const SymMatrix& m) : m_(m), chol_(chol_lower(m.mat())) {}

PDMatrix PDMatrix::identity(Eigen::Index dim) {
  return PDMatrix(SymMatrix::identity(dim));
}

PDMatrix PDMatrix::scaled(double mu) const {
  if (!(mu > 0.0)) throw DomainError("PDMatrix::scaled: factor must be positive");
  return PDMatrix(m_ * mu, LowerTriangular(std::sqrt(mu) * chol_.mat()));
}

double PDMatrix::log_det() const {
  return 2.0 * chol_.mat().diagonal().array().log().sum();
}

PDMatrix pd_inverse(const PDMatrix& m) {
  const Matrix ginv = m.chol().inverse();
  return PDMatrix(SymMatrix(ginv.transpose() * ginv));
}

Vector sym_eigenvalues(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

namespace {

// U diag(f(lambda)) U^T for a symmetric input; throws when the spectrum is
// not strictly positive.
Matrix spectral_power(const Matrix& m, double p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) {
    throw NotPositiveDefinite("sym_power: eigendecomposition failed");
  }
  const Vector& lambda = es.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) {
    throw NotPositiveDefinite("sym_power: nonpositive eigenvalue");
  }
  const Matrix& u = es.eigenvectors();
  const Vector powered = lambda.array().pow(p).matrix();
  return u * powered.asDiagonal() * u.transpose();
}

}  // namespace

PDMatrix sym_power(const PDMatrix& m, double p) {
  if (p == 1.0) return m;
  return PDMatrix(SymMatrix(spectral_power(m.mat(), p)));
}

double hilbert_distance(const PDMatrix& x, const PDMatrix& xt) {
  if (x.dim() != xt.dim()) throw DimensionMismatch("hilbert_distance: unequal dims");
  const auto g = xt.chol().view();
  // W = G^{-1} X G^{-T}: congruent to Xt^{-1/2} X Xt^{-1/2}.
  Matrix w = g.solve(x.mat());
  w = g.solve(Matrix(w.transpose()));
  const Vector lambda = sym_eigenvalues(SymMatrix(w));
  const double lo = lambda(0);
  const double hi = lambda(lambda.size() - 1);
  if (!(lo > 0.0)) throw NotPositiveDefinite("hilbert_distance: nonpositive eigenvalue");
  return std::max(0.0, std::log(hi / lo));
}

PDMatrix geodesic_sharp(const PDMatrix& x, const PDMatrix& xt, double omega) {
  if (x.dim() != xt.dim()) throw DimensionMismatch("geodesic_sharp: unequal dims");
  if (omega == 0.0) return x;
  if (omega == 1.0) return xt;
  // With X = G G^T, X #_w Xt = G (G^{-1} Xt G^{-T})^w G^T for any such G.
  const auto g = x.chol().view();
  Matrix inner = g.solve(xt.mat());
  inner = g.solve(Matrix(inner.transpose()));
  const Matrix powered = spectral_power(0.5 * (inner + inner.transpose()), omega);
  const Matrix& gm = x.chol().mat();
  return PDMatrix(SymMatrix(gm * powered * gm.transpose()));
}

PDPair balance(const PDPair& pair) {
  const double nx = pair.X.mat().norm();
  const double ny = pair.Y.mat().norm();
  const double c = std::sqrt(ny / nx);
  return {pair.X.scaled(c), pair.Y.scaled(1.0 / c)};
}

}  // namespace opscale
