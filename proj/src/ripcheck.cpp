#include "apr/ripcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace apr {

namespace {

SripExtremes extremes_from_image(const CVector& Ax, double xnorm2) {
  const Eigen::Index m = Ax.size();
  std::vector<double> sq(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) sq[static_cast<std::size_t>(i)] = std::norm(Ax(i));
  const double high = std::accumulate(sq.begin(), sq.end(), 0.0);
  const auto half = static_cast<std::size_t>((m + 1) / 2);
  std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(half - 1), sq.end());
  std::sort(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(half));
  const double low = std::accumulate(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(half), 0.0);
  return {low / xnorm2, high / xnorm2};
}

bool is_real_matrix(const CMatrix& M) { return M.imag().cwiseAbs().maxCoeff() == 0.0; }

cplx draw_scalar(Rng& rng, bool real) {
  return real ? cplx(rng.normal(), 0.0) : rng.complex_normal();
}

std::vector<Eigen::Index> draw_support(Rng& rng, Eigen::Index n, Eigen::Index k) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

// SRIP sampler over the columns of M; the first `nfree` columns carry the
// sparsity constraint, any further column is always active.
class SripSampler {
 public:
  SripSampler(CMatrix M, Eigen::Index nfree, int k)
      : M_(std::move(M)), nfree_(nfree), k_(k), real_(is_real_matrix(M_)) {}

  CVector draw(Rng& rng) const {
    CVector x = CVector::Zero(M_.cols());
    for (Eigen::Index i : draw_support(rng, nfree_, k_)) x(i) = draw_scalar(rng, real_);
    for (Eigen::Index i = nfree_; i < M_.cols(); ++i) x(i) = draw_scalar(rng, real_);
    const double nx = x.norm();
    if (nx > 0.0) x /= nx;
    return x;
  }

  // Greedy support swaps moving one sparse entry to an inactive coordinate.
  // `want_low` minimizes the low extreme, otherwise maximizes the high one.
  CVector refine(CVector x, bool want_low) const {
    const double xn2 = x.squaredNorm();
    CVector Ax = M_ * x;
    auto score = [&](const CVector& img) {
      const SripExtremes e = extremes_from_image(img, xn2);
      return want_low ? e.low : -e.high;
    };
    double current = score(Ax);
    CVector trial(Ax.size());
    for (int swap = 0; swap < 50; ++swap) {
      double best = current;
      Eigen::Index bi = -1, bj = -1;
      for (Eigen::Index i = 0; i < nfree_; ++i) {
        if (x(i) == cplx(0.0)) continue;
        for (Eigen::Index j = 0; j < nfree_; ++j) {
          if (x(j) != cplx(0.0)) continue;
          trial = Ax + x(i) * (M_.col(j) - M_.col(i));
          const double s = score(trial);
          if (s < best) {
            best = s;
            bi = i;
            bj = j;
          }
        }
      }
      if (bi < 0) break;
      x(bj) = x(bi);
      x(bi) = 0.0;
      Ax = M_ * x;
      current = score(Ax);
    }
    return x;
  }

  SripExtremes eval(const CVector& x) const { return srip_extremes_for_x(M_, x); }

  RipEstimate run(int trials, const SeedSpec& seed, bool refine_records) const {
    if (trials < 1) throw std::invalid_argument("srip_profile: trials must be >= 1");
    RipEstimate est;
    est.lower_hat = std::numeric_limits<double>::infinity();
    est.upper_hat = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
      Rng rng(seed.child(static_cast<std::int64_t>(t)));
      const CVector x = draw(rng);
      const SripExtremes e = eval(x);
      if (e.low < est.lower_hat) {
        CVector w = refine_records ? refine(x, true) : x;
        const double v = eval(w).low;
        est.lower_hat = v;
        est.witness_lower = {std::move(w), CVector(), v};
      }
      if (e.high > est.upper_hat) {
        CVector w = refine_records ? refine(x, false) : x;
        const double v = eval(w).high;
        est.upper_hat = v;
        est.witness_upper = {std::move(w), CVector(), v};
      }
      ++est.samples;
    }
    est.config.k = k_;
    est.config.refined = refine_records;
    return est;
  }

 private:
  CMatrix M_;
  Eigen::Index nfree_;
  int k_;
  bool real_;
};

void check_k(int k, Eigen::Index n, const char* who) {
  if (k < 1 || k > n) throw std::invalid_argument(std::string(who) + ": need 1 <= k <= n");
}

}  // namespace

SripExtremes srip_extremes_for_x(const CMatrix& A, const CVector& x) {
  if (A.cols() != x.size()) throw DimensionError("srip_extremes_for_x: columns of A must match x");
  if (A.rows() < 1) throw DimensionError("srip_extremes_for_x: empty matrix");
  const double xn2 = x.squaredNorm();
  if (xn2 == 0.0) throw std::invalid_argument("srip_extremes_for_x: x must be nonzero");
  return extremes_from_image(A * x, xn2);
}

RipEstimate srip_profile(const CMatrix& A, int k, int trials, const SeedSpec& seed,
                         bool refine) {
  check_k(k, A.cols(), "srip_profile");
  return SripSampler(A, A.cols(), k).run(trials, seed, refine);
}

RipEstimate srip_profile_augmented(const CMatrix& A, const CVector& b, int k, int trials,
                                   const SeedSpec& seed, bool refine) {
  check_k(k, A.cols(), "srip_profile_augmented");
  if (b.size() != A.rows()) throw DimensionError("srip_profile_augmented: b must have m entries");
  CMatrix M(A.rows(), A.cols() + 1);
  M << A, b;
  RipEstimate est = SripSampler(std::move(M), A.cols(), k).run(trials, seed, refine);
  est.config.augmented = true;
  return est;
}

RVector lifted_map_apply(const CMatrix& A, const CVector& b, const CMatrix& H,
                         const CVector& h) {
  const Eigen::Index n = A.cols();
  if (H.rows() != n || H.cols() != n || h.size() != n || b.size() != A.rows()) {
    throw DimensionError("lifted_map_apply: dimension mismatch");
  }
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("lifted_map_apply: H must be Hermitian");
  }
  const CMatrix AH = A * H;
  const CVector Ah = A * h;
  RVector out(A.rows());
  for (Eigen::Index j = 0; j < A.rows(); ++j) {
    // r H r^H is real for Hermitian H; dot() conjugates its left operand.
    const double quad = AH.row(j).dot(A.row(j)).real();
    out(j) = quad + 2.0 * (std::conj(b(j)) * Ah(j)).real();
  }
  return out;
}

double lifted_frobenius(const CMatrix& H, const CVector& h) {
  return std::sqrt(H.squaredNorm() + 2.0 * h.squaredNorm());
}

double lifted_ratio(const CMatrix& A, const CVector& b, const CVector& x, const CVector& z) {
  if (x.size() != A.cols() || z.size() != A.cols() || b.size() != A.rows()) {
    throw DimensionError("lifted_ratio: dimension mismatch");
  }
  const CVector Ax = A * x;
  const CVector Az = A * z;
  double l1 = 0.0;
  for (Eigen::Index j = 0; j < A.rows(); ++j) {
    const double quad = std::norm(Ax(j)) - std::norm(Az(j));
    l1 += std::abs(quad + 2.0 * (std::conj(b(j)) * (Ax(j) - Az(j))).real());
  }
  const double nx2 = x.squaredNorm();
  const double nz2 = z.squaredNorm();
  const double hf2 = std::max(nx2 * nx2 + nz2 * nz2 - 2.0 * std::norm(x.dot(z)), 0.0);
  const double fro = std::sqrt(hf2 + 2.0 * (x - z).squaredNorm());
  return (l1 / static_cast<double>(A.rows())) / fro;
}

RipEstimate rip_ratio_sample(const CMatrix& A, const CVector& b, int k, int trials,
                             const SeedSpec& seed) {
  check_k(k, A.cols(), "rip_ratio_sample");
  if (b.size() != A.rows()) throw DimensionError("rip_ratio_sample: b must have m entries");
  if (trials < 1) throw std::invalid_argument("rip_ratio_sample: trials must be >= 1");
  const bool real = is_real_matrix(A) && b.imag().cwiseAbs().maxCoeff() == 0.0;
  const Eigen::Index n = A.cols();
  RipEstimate est;
  est.lower_hat = std::numeric_limits<double>::infinity();
  est.upper_hat = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed.child(static_cast<std::int64_t>(t)));
    const auto sx = draw_support(rng, n, k);
    const bool shared = rng.sign() > 0.0;
    const auto sz = shared ? sx : draw_support(rng, n, k);
    CVector x = CVector::Zero(n);
    CVector z = CVector::Zero(n);
    for (Eigen::Index i : sx) x(i) = draw_scalar(rng, real);
    for (Eigen::Index i : sz) z(i) = draw_scalar(rng, real);
    const CVector h = x - z;
    const double nx2 = x.squaredNorm();
    const double nz2 = z.squaredNorm();
    const double hf2 = std::max(nx2 * nx2 + nz2 * nz2 - 2.0 * std::norm(x.dot(z)), 0.0);
    if (std::sqrt(hf2 + 2.0 * h.squaredNorm()) < 1e-12) continue;
    const double r = lifted_ratio(A, b, x, z);
    if (r < est.lower_hat) {
      est.lower_hat = r;
      est.witness_lower = {x, z, r};
    }
    if (r > est.upper_hat) {
      est.upper_hat = r;
      est.witness_upper = {x, z, r};
    }
    ++est.samples;
  }
  if (est.samples == 0) throw std::runtime_error("rip_ratio_sample: every draw was degenerate");
  est.config.k = k;
  return est;
}

double crossterm_sup(const RMatrix& A, const RVector& b, int k) {
  if (b.size() != A.rows()) throw DimensionError("crossterm_sup: b must have m entries");
  check_k(k, A.cols(), "crossterm_sup");
  const RVector g = A.transpose() * b;
  std::vector<double> sq(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) sq[static_cast<std::size_t>(i)] = g(i) * g(i);
  std::sort(sq.begin(), sq.end(), std::greater<>());
  return std::sqrt(std::accumulate(sq.begin(), sq.begin() + k, 0.0));
}

}  // namespace apr
