#ifndef OPSCALE_CPMAP_H
#define OPSCALE_CPMAP_H

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opscale/linalg.h"

namespace opscale {

// Kraus operators A_1..A_k (each m x n) of the completely positive map
// Phi(Y) = sum_i A_i Y A_i^T. Construction verifies that sum A_i A_i^T and
// sum A_i^T A_i are positive definite and throws AssumptionViolated if not.
class KrausCollection {
 public:
  KrausCollection(std::vector<Matrix> matrices, std::string label = {});

  Eigen::Index m() const { return m_; }
  Eigen::Index n() const { return n_; }
  std::size_t k() const { return mats_.size(); }
  const std::vector<Matrix>& matrices() const { return mats_; }
  const Matrix& operator[](std::size_t i) const { return mats_[i]; }
  const std::string& label() const { return label_; }

  // (L A_1 R^T, ..., L A_k R^T) without the Gram-sum check.
  std::vector<Matrix> scaled(const Matrix& l, const Matrix& r) const;

 private:
  Eigen::Index m_ = 0;
  Eigen::Index n_ = 0;
  std::vector<Matrix> mats_;
  std::string label_;
};

struct FrameInstance {
  Eigen::Index n = 0;
  std::vector<Vector> vectors;
  std::uint64_t seed = 0;

  std::size_t k() const { return vectors.size(); }
};

// Phi(Y) = sum A_i Y A_i^T.
SymMatrix apply_cp(const KrausCollection& a, const SymMatrix& y);
// Phi*(X) = sum A_i^T X A_i.
SymMatrix apply_cp_dual(const KrausCollection& a, const SymMatrix& x);

// Gram sums over a raw tuple: sum B_i B_i^T and sum B_i^T B_i.
Matrix gram_left(const std::vector<Matrix>& b);
Matrix gram_right(const std::vector<Matrix>& b);

// S1(Y) = (1/m) Phi(Y)^{-1}.
PDMatrix s1(const KrausCollection& a, const PDMatrix& y);
// S2(X) = (1/n) Phi*(X)^{-1}.
PDMatrix s2(const KrausCollection& a, const PDMatrix& x);

// A_i = e_i x_i^T, so m = k.
KrausCollection frame_to_kraus(const FrameInstance& f);

FrameInstance gen_frame_instance(Eigen::Index n, std::size_t k, std::uint64_t seed);
// A_i = Q_i H with H the n x n Hilbert matrix and Q_i Haar orthogonal.
KrausCollection gen_hilbert_instance(Eigen::Index n, std::size_t k, std::uint64_t seed);
// k i.i.d. standard Gaussian m x n matrices.
KrausCollection gen_gaussian_instance(Eigen::Index m, Eigen::Index n, std::size_t k,
                                      std::uint64_t seed);

Matrix hilbert_matrix(Eigen::Index n);

struct PositivityCounterexample {
  // true: Phi(v v^T) was singular; false: Phi*(v v^T) was.
  bool primal = true;
  Vector v;
};

// Sampled, non-certifying test of the positivity-improving property:
// checks Phi(v v^T) and Phi*(w w^T) for random unit v, w. A result of
// nullopt means "likely yes".
std::optional<PositivityCounterexample> check_positivity_improving(
    const KrausCollection& a, int trials, std::uint64_t seed);

// lambda_min > rel_tol * lambda_max. Rank-deficient inputs can pass a plain
// Cholesky with pivots at rounding level; this test rejects those.
bool is_numerically_pd(const Matrix& m, double rel_tol = 1e-12);

}  // namespace opscale

#endif  // OPSCALE_CPMAP_H
