#include "opscale/random.h"

#include <cmath>
#include <numbers>

namespace opscale {

double Rng::uniform() {
  // (bits + 0.5) / 2^53 keeps the value strictly inside (0, 1).
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Matrix Rng::gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
  Matrix g(rows, cols);
  // Row-major fill order so the stream maps onto the JSON layout.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = normal();
  return g;
}

Vector Rng::unit_vector(Eigen::Index dim) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal();
  return v / v.norm();
}

PDMatrix Rng::random_pd(Eigen::Index dim, double tau) {
  const Matrix g = gaussian_matrix(dim, dim);
  return PDMatrix(SymMatrix(g * g.transpose() + tau * Matrix::Identity(dim, dim)));
}

SymMatrix Rng::random_sym(Eigen::Index dim) {
  return SymMatrix(gaussian_matrix(dim, dim));
}

Matrix Rng::haar_orthogonal(Eigen::Index dim) {
  const Matrix g = gaussian_matrix(dim, dim);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace opscale
