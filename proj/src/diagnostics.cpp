#include "opscale/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "opscale/random.h"

namespace opscale {

double gradient_norm(const KrausCollection& a, const FactorPair& f) {
  if (f.L.rows() != a.m() || f.L.cols() != a.m() || f.R.rows() != a.n() ||
      f.R.cols() != a.n()) {
    throw DimensionMismatch("gradient_norm: factor shapes do not match the collection");
  }
  const std::vector<Matrix> at = a.scaled(f.L, f.R);
  const double inv_m = 1.0 / static_cast<double>(a.m());
  const double inv_n = 1.0 / static_cast<double>(a.n());
  Matrix left = gram_left(at);
  left.diagonal().array() -= inv_m;
  Matrix right = gram_right(at);
  right.diagonal().array() -= inv_n;
  return std::sqrt(left.squaredNorm() + right.squaredNorm());
}

double cost_f(const KrausCollection& a, const PDPair& p) {
  const double tr = (p.X.mat().cwiseProduct(apply_cp(a, p.Y.sym()).mat())).sum();
  return tr - p.X.log_det() / static_cast<double>(a.m()) -
         p.Y.log_det() / static_cast<double>(a.n());
}

double cost_f_dual(const KrausCollection& a, const PDPair& p) {
  const double tr = (apply_cp_dual(a, p.X.sym()).mat().cwiseProduct(p.Y.mat())).sum();
  return tr - p.X.log_det() / static_cast<double>(a.m()) -
         p.Y.log_det() / static_cast<double>(a.n());
}

std::pair<SymMatrix, SymMatrix> grad_f(const KrausCollection& a, const PDPair& p) {
  const double inv_m = 1.0 / static_cast<double>(a.m());
  const double inv_n = 1.0 / static_cast<double>(a.n());
  return {apply_cp(a, p.Y.sym()) - pd_inverse(p.X).sym() * inv_m,
          apply_cp_dual(a, p.X.sym()) - pd_inverse(p.Y).sym() * inv_n};
}

// --- Hessian ------------------------------------------------------------

HessianOperator::HessianOperator(const KrausCollection& a, PDPair anchor)
    : a_(&a), anchor_(std::move(anchor)) {
  if (anchor_.X.dim() != a.m() || anchor_.Y.dim() != a.n()) {
    throw DimensionMismatch("HessianOperator: anchor dims do not match the collection");
  }
  x_inv_ = pd_inverse(anchor_.X).mat();
  y_inv_ = pd_inverse(anchor_.Y).mat();
}

std::pair<SymMatrix, SymMatrix> HessianOperator::apply(const SymMatrix& h1,
                                                       const SymMatrix& h2) const {
  if (h1.dim() != a_->m() || h2.dim() != a_->n()) {
    throw DimensionMismatch("hessian_apply: direction dims do not match the collection");
  }
  const double inv_m = 1.0 / static_cast<double>(a_->m());
  const double inv_n = 1.0 / static_cast<double>(a_->n());
  return {apply_cp(*a_, h2) + SymMatrix(x_inv_ * h1.mat() * x_inv_) * inv_m,
          apply_cp_dual(*a_, h1) + SymMatrix(y_inv_ * h2.mat() * y_inv_) * inv_n};
}

namespace {

Eigen::Index sym_dim(Eigen::Index n) { return n * (n + 1) / 2; }

}  // namespace

Eigen::Index HessianOperator::dim() const { return sym_dim(a_->m()) + sym_dim(a_->n()); }

Vector sym_coords(const SymMatrix& s) {
  const Eigen::Index n = s.dim();
  Vector c(sym_dim(n));
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    c(idx++) = s(i, i);
    for (Eigen::Index j = i + 1; j < n; ++j) c(idx++) = std::sqrt(2.0) * s(i, j);
  }
  return c;
}

SymMatrix sym_from_coords(const Vector& c, Eigen::Index dim) {
  if (c.size() != sym_dim(dim)) throw DimensionMismatch("sym_from_coords: wrong length");
  Matrix m(dim, dim);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    m(i, i) = c(idx++);
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      m(i, j) = m(j, i) = c(idx++) / std::sqrt(2.0);
    }
  }
  return SymMatrix(m);
}

Vector pair_coords(const SymMatrix& h1, const SymMatrix& h2) {
  const Vector c1 = sym_coords(h1);
  const Vector c2 = sym_coords(h2);
  Vector c(c1.size() + c2.size());
  c << c1, c2;
  return c;
}

Matrix HessianOperator::materialize() const {
  const Eigen::Index dm = sym_dim(a_->m());
  const Eigen::Index d = dim();
  if (d > kMaxHessianDim) {
    throw DimensionTooLarge("Hessian dimension " + std::to_string(d) + " exceeds " +
                            std::to_string(kMaxHessianDim));
  }
  Matrix h(d, d);
  const SymMatrix zero_m = SymMatrix::zero(a_->m());
  const SymMatrix zero_n = SymMatrix::zero(a_->n());
  for (Eigen::Index b = 0; b < d; ++b) {
    Vector e = Vector::Zero(d);
    e(b) = 1.0;
    const auto [h1, h2] =
        b < dm ? apply(sym_from_coords(e.head(dm), a_->m()), zero_n)
               : apply(zero_m, sym_from_coords(e.tail(d - dm), a_->n()));
    h.col(b) = pair_coords(h1, h2);
  }
  return 0.5 * (h + h.transpose());
}

std::pair<SymMatrix, SymMatrix> hessian_apply(const HessianOperator& h, const SymMatrix& h1,
                                              const SymMatrix& h2) {
  return h.apply(h1, h2);
}

HessianSpectrum hessian_spectrum(const KrausCollection& a, const PDPair& anchor) {
  const HessianOperator op(a, anchor);
  Eigen::SelfAdjointEigenSolver<Matrix> es(op.materialize());
  return {es.eigenvalues(), es.eigenvectors()};
}

double local_rate_from_hessian(const KrausCollection& a, const PDPair& fixed, double omega) {
  const double g = gradient_norm(a, factors_of(fixed));
  if (!(g <= 1e-8)) {
    throw NotConverged("local_rate_from_hessian: gradient norm " + std::to_string(g) +
                       " exceeds 1e-8");
  }
  const HessianOperator op(a, fixed);
  const Matrix h = op.materialize();
  const Eigen::Index d = h.rows();
  const Eigen::Index dm = sym_dim(a.m());
  const Eigen::Index dn = d - dm;

  // N_w = [[H_xx / w, 0], [H_yx, H_yy / w]].
  Matrix n = Matrix::Zero(d, d);
  n.topLeftCorner(dm, dm) = h.topLeftCorner(dm, dm) / omega;
  n.bottomLeftCorner(dn, dm) = h.bottomLeftCorner(dn, dm);
  n.bottomRightCorner(dn, dn) = h.bottomRightCorner(dn, dn) / omega;
  const Matrix t = Matrix::Identity(d, d) - n.partialPivLu().solve(h);

  // The orbit direction is fixed by T_w; factor it out by restricting the
  // quotient action to its orthogonal complement.
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::Index null_idx = 0;
  es.eigenvalues().cwiseAbs().minCoeff(&null_idx);
  const Vector v0 = es.eigenvectors().col(null_idx);
  const Matrix v0_col = v0;
  Eigen::HouseholderQR<Matrix> qr(v0_col);
  const Matrix q_full = qr.householderQ();
  const Matrix q = q_full.rightCols(d - 1);
  const Matrix quotient = q.transpose() * t * q;
  Eigen::EigenSolver<Matrix> eig(quotient, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

// --- sampled estimates --------------------------------------------------

double ContractionEstimate::safe_omega_bound() const {
  return 2.0 / (1.0 + std::sqrt(lambda1 * lambda2));
}

ContractionEstimate sample_contraction(const KrausCollection& a, int trials,
                                       std::uint64_t seed) {
  constexpr double kTau = 1e-3;
  constexpr double kMinDistance = 1e-8;
  Rng rng(seed);
  ContractionEstimate est;
  for (int t = 0; t < trials; ++t) {
    const PDMatrix y = rng.random_pd(a.n(), kTau);
    const PDMatrix yt = rng.random_pd(a.n(), kTau);
    const double dy = hilbert_distance(y, yt);
    if (dy > kMinDistance) {
      est.lambda1 = std::max(est.lambda1, hilbert_distance(s1(a, y), s1(a, yt)) / dy);
    }
    const PDMatrix x = rng.random_pd(a.m(), kTau);
    const PDMatrix xt = rng.random_pd(a.m(), kTau);
    const double dx = hilbert_distance(x, xt);
    if (dx > kMinDistance) {
      est.lambda2 = std::max(est.lambda2, hilbert_distance(s2(a, x), s2(a, xt)) / dx);
    }
  }
  return est;
}

GConvexityReport gconvexity_check(const KrausCollection& a, int samples, std::uint64_t seed,
                                  double slack) {
  if (samples < 1) throw DomainError("gconvexity_check: samples must be >= 1");
  Rng rng(seed);
  GConvexityReport rep;
  rep.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const PDPair p0{rng.random_pd(a.m()), rng.random_pd(a.n())};
    const PDPair p1{rng.random_pd(a.m()), rng.random_pd(a.n())};
    const double w = rng.uniform();
    const PDPair pw{geodesic_sharp(p0.X, p1.X, w), geodesic_sharp(p0.Y, p1.Y, w)};

    const double lhs_f = cost_f(a, pw);
    const double rhs_f = (1.0 - w) * cost_f(a, p0) + w * cost_f(a, p1);
    rep.worst_slack_f = std::max(rep.worst_slack_f, lhs_f - rhs_f);

    const Matrix& ai = a[static_cast<std::size_t>(s) % a.k()];
    auto coupling = [&](const PDPair& p) {
      return (p.X.mat() * ai * p.Y.mat() * ai.transpose()).trace();
    };
    const double lhs_t = coupling(pw);
    const double rhs_t = (1.0 - w) * coupling(p0) + w * coupling(p1);
    rep.worst_slack_trace = std::max(rep.worst_slack_trace, lhs_t - rhs_t);

    if (lhs_f - rhs_f > slack) ++rep.violations;
    if (lhs_t - rhs_t > slack) ++rep.violations;
  }
  rep.pass = rep.violations == 0;
  return rep;
}

}  // namespace opscale
