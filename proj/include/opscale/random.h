#ifndef OPSCALE_RANDOM_H
#define OPSCALE_RANDOM_H

#include <cstdint>
#include <random>

#include "opscale/linalg.h"

namespace opscale {

// Seeded generator with a fully specified output stream: std::mt19937_64
// for the bits, 53-bit mantissa uniforms, and Box-Muller for normals.
// std::normal_distribution is avoided because its algorithm differs
// between standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on (0, 1).
  double uniform();
  double normal();

  Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols);
  Vector unit_vector(Eigen::Index dim);
  // G G^T + tau I with Gaussian G.
  PDMatrix random_pd(Eigen::Index dim, double tau = 1e-3);
  SymMatrix random_sym(Eigen::Index dim);
  // Haar-uniform orthogonal matrix: QR of a Gaussian matrix with the signs
  // of diag(R) folded into Q.
  Matrix haar_orthogonal(Eigen::Index dim);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace opscale

#endif  // OPSCALE_RANDOM_H
