#include "opscale/cpmap.h"

#include <cmath>
#include <string>

#include "opscale/random.h"

namespace opscale {

KrausCollection::KrausCollection(std::vector<Matrix> matrices, std::string label)
    : mats_(std::move(matrices)), label_(std::move(label)) {
  if (mats_.empty()) throw AssumptionViolated("KrausCollection: need k >= 1 matrices");
  m_ = mats_.front().rows();
  n_ = mats_.front().cols();
  if (m_ < 1 || n_ < 1) throw DimensionMismatch("KrausCollection: empty matrix shape");
  for (std::size_t i = 0; i < mats_.size(); ++i) {
    if (mats_[i].rows() != m_ || mats_[i].cols() != n_) {
      throw DimensionMismatch("KrausCollection: matrix " + std::to_string(i) +
                              " does not share shape " + std::to_string(m_) + "x" +
                              std::to_string(n_));
    }
    if (!mats_[i].allFinite()) {
      throw AssumptionViolated("KrausCollection: matrix " + std::to_string(i) +
                               " has non-finite entries");
    }
  }
  Eigen::LLT<Matrix> left(gram_left(mats_));
  if (left.info() != Eigen::Success) {
    throw AssumptionViolated("KrausCollection: sum A_i A_i^T is not positive definite");
  }
  Eigen::LLT<Matrix> right(gram_right(mats_));
  if (right.info() != Eigen::Success) {
    throw AssumptionViolated("KrausCollection: sum A_i^T A_i is not positive definite");
  }
}

std::vector<Matrix> KrausCollection::scaled(const Matrix& l, const Matrix& r) const {
  std::vector<Matrix> out;
  out.reserve(mats_.size());
  for (const auto& a : mats_) out.push_back(l * a * r.transpose());
  return out;
}

Matrix gram_left(const std::vector<Matrix>& b) {
  Matrix g = Matrix::Zero(b.front().rows(), b.front().rows());
  for (const auto& bi : b) g.noalias() += bi * bi.transpose();
  return g;
}

Matrix gram_right(const std::vector<Matrix>& b) {
  Matrix g = Matrix::Zero(b.front().cols(), b.front().cols());
  for (const auto& bi : b) g.noalias() += bi.transpose() * bi;
  return g;
}

SymMatrix apply_cp(const KrausCollection& a, const SymMatrix& y) {
  if (y.dim() != a.n()) {
    throw DimensionMismatch("apply_cp: Y is " + std::to_string(y.dim()) +
                            "x" + std::to_string(y.dim()) + ", expected n = " +
                            std::to_string(a.n()));
  }
  Matrix out = Matrix::Zero(a.m(), a.m());
  Matrix tmp(a.m(), a.n());
  for (const auto& ai : a.matrices()) {
    tmp.noalias() = ai * y.mat();
    out.noalias() += tmp * ai.transpose();
  }
  return SymMatrix(out);
}

SymMatrix apply_cp_dual(const KrausCollection& a, const SymMatrix& x) {
  if (x.dim() != a.m()) {
    throw DimensionMismatch("apply_cp_dual: X is " + std::to_string(x.dim()) +
                            "x" + std::to_string(x.dim()) + ", expected m = " +
                            std::to_string(a.m()));
  }
  Matrix out = Matrix::Zero(a.n(), a.n());
  Matrix tmp(a.n(), a.m());
  for (const auto& ai : a.matrices()) {
    tmp.noalias() = ai.transpose() * x.mat();
    out.noalias() += tmp * ai;
  }
  return SymMatrix(out);
}

PDMatrix s1(const KrausCollection& a, const PDMatrix& y) {
  const PDMatrix phi(apply_cp(a, y.sym()));
  return pd_inverse(phi).scaled(1.0 / static_cast<double>(a.m()));
}

PDMatrix s2(const KrausCollection& a, const PDMatrix& x) {
  const PDMatrix phi(apply_cp_dual(a, x.sym()));
  return pd_inverse(phi).scaled(1.0 / static_cast<double>(a.n()));
}

KrausCollection frame_to_kraus(const FrameInstance& f) {
  const std::size_t k = f.k();
  const auto kk = static_cast<Eigen::Index>(k);
  Matrix frame_gram = Matrix::Zero(f.n, f.n);
  std::vector<Matrix> mats;
  mats.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Vector& x = f.vectors[i];
    if (x.size() != f.n) throw DimensionMismatch("frame_to_kraus: vector length != n");
    if (x.norm() == 0.0) {
      throw AssumptionViolated("frame_to_kraus: frame vector " + std::to_string(i) +
                               " is zero");
    }
    Matrix ai = Matrix::Zero(kk, f.n);
    ai.row(static_cast<Eigen::Index>(i)) = x.transpose();
    mats.push_back(std::move(ai));
    frame_gram.noalias() += x * x.transpose();
  }
  if (Eigen::LLT<Matrix>(frame_gram).info() != Eigen::Success) {
    throw AssumptionViolated("frame_to_kraus: sum x_i x_i^T is singular");
  }
  return KrausCollection(std::move(mats), "frame n=" + std::to_string(f.n) +
                                              " k=" + std::to_string(k) +
                                              " seed=" + std::to_string(f.seed));
}

FrameInstance gen_frame_instance(Eigen::Index n, std::size_t k, std::uint64_t seed) {
  if (n < 1 || static_cast<Eigen::Index>(k) < n) {
    throw DomainError("gen_frame_instance: need k >= n >= 1");
  }
  Rng rng(seed);
  FrameInstance f;
  f.n = n;
  f.seed = seed;
  f.vectors.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    Vector x(n);
    for (Eigen::Index j = 0; j < n; ++j) x(j) = rng.normal();
    f.vectors.push_back(std::move(x));
  }
  return f;
}

Matrix hilbert_matrix(Eigen::Index n) {
  Matrix h(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) h(i, j) = 1.0 / static_cast<double>(i + j + 1);
  return h;
}

KrausCollection gen_hilbert_instance(Eigen::Index n, std::size_t k, std::uint64_t seed) {
  if (n < 1 || k < 1) throw DomainError("gen_hilbert_instance: need n, k >= 1");
  Rng rng(seed);
  const Matrix h = hilbert_matrix(n);
  std::vector<Matrix> mats;
  mats.reserve(k);
  for (std::size_t i = 0; i < k; ++i) mats.push_back(rng.haar_orthogonal(n) * h);
  return KrausCollection(std::move(mats), "hilbert n=" + std::to_string(n) +
                                              " k=" + std::to_string(k) +
                                              " seed=" + std::to_string(seed));
}

KrausCollection gen_gaussian_instance(Eigen::Index m, Eigen::Index n, std::size_t k,
                                      std::uint64_t seed) {
  if (m < 1 || n < 1 || k < 1) throw DomainError("gen_gaussian_instance: need m, n, k >= 1");
  Rng rng(seed);
  std::vector<Matrix> mats;
  mats.reserve(k);
  for (std::size_t i = 0; i < k; ++i) mats.push_back(rng.gaussian_matrix(m, n));
  return KrausCollection(std::move(mats), "gaussian m=" + std::to_string(m) +
                                              " n=" + std::to_string(n) +
                                              " k=" + std::to_string(k) +
                                              " seed=" + std::to_string(seed));
}

bool is_numerically_pd(const Matrix& m, double rel_tol) {
  const Vector lambda = sym_eigenvalues(SymMatrix(m));
  const double hi = lambda(lambda.size() - 1);
  return hi > 0.0 && lambda(0) > rel_tol * hi;
}

std::optional<PositivityCounterexample> check_positivity_improving(
    const KrausCollection& a, int trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("check_positivity_improving: trials must be >= 1");
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const Vector v = rng.unit_vector(a.n());
    if (!is_numerically_pd(apply_cp(a, SymMatrix(v * v.transpose())).mat())) {
      return PositivityCounterexample{true, v};
    }
    const Vector w = rng.unit_vector(a.m());
    if (!is_numerically_pd(apply_cp_dual(a, SymMatrix(w * w.transpose())).mat())) {
      return PositivityCounterexample{false, w};
    }
  }
  return std::nullopt;
}

}  // namespace opscale
