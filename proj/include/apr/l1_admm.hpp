#pragma once

// ADMM engine for  min ||x||_1  s.t.  D x in C  for a closed convex set C
// given through its Euclidean projection. Shared by the basis pursuit
// denoising solver and the convex relaxation used to seed the outer loop.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <type_traits>

#include <Eigen/Dense>

namespace apr::admm {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

// Entrywise prox of t*||.||_1; complex entries shrink in modulus and keep
// their phase.
template <typename Scalar>
Vec<Scalar> soft_threshold(const Vec<Scalar>& v, double t) {
  Vec<Scalar> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    out(i) = mag > t ? v(i) * ((mag - t) / mag) : Scalar(0);
  }
  return out;
}

// Projection onto { r : ||r - center||_2 <= radius }.
template <typename Scalar>
struct BallProjector {
  const Vec<Scalar>* center;
  double radius;

  Vec<Scalar> operator()(const Vec<Scalar>& p) const {
    Vec<Scalar> d = p - *center;
    const double nd = d.norm();
    if (nd <= radius) return p;
    return *center + d * (radius / nd);
  }
};

// Projection onto { r : dist(r + b, M) <= radius } with
// M = { w : |w_j| <= half_width_j }, an interval box for real data and a
// product of discs for complex data. This is the radius-neighbourhood of a
// convex set, so its projection is the projection onto M pulled back along
// the residual direction.
template <typename Scalar>
struct MagnitudeBoxProjector {
  const Vec<Scalar>* bias;
  const Eigen::VectorXd* half_width;
  double radius;

  Vec<Scalar> operator()(const Vec<Scalar>& p) const {
    Vec<Scalar> w = p + *bias;
    Vec<Scalar> q = w;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      const double mag = std::abs(w(j));
      const double hw = (*half_width)(j);
      if (mag > hw) q(j) = w(j) * (hw / mag);
    }
    Vec<Scalar> d = w - q;
    const double nd = d.norm();
    if (nd <= radius) return p;
    return q + d * (radius / nd) - *bias;
  }
};

template <typename Scalar>
struct State {
  Vec<Scalar> x, v, r, u1, u2;
  double rho = 1.0;
  bool valid = false;
};

struct Settings {
  int max_iter = 2000;
  double tol = 1e-9;
  double rho0 = 1.0;
};

template <typename Scalar>
struct Result {
  Vec<Scalar> v;
  int iterations = 0;
  bool converged = false;
  double primal = 0.0;
  double dual = 0.0;
};

template <typename Scalar>
class L1Admm {
 public:
  explicit L1Admm(Mat<Scalar> D) : D_(std::move(D)), wide_(D_.rows() < D_.cols()) {
    const auto m = D_.rows();
    const auto n = D_.cols();
    if (wide_) {
      // Woodbury: (I + D^H D)^{-1} = I - D^H (I + D D^H)^{-1} D.
      Mat<Scalar> G = Mat<Scalar>::Identity(m, m);
      G.noalias() += D_ * D_.adjoint();
      llt_.compute(G);
    } else {
      Mat<Scalar> G = Mat<Scalar>::Identity(n, n);
      G.noalias() += D_.adjoint() * D_;
      llt_.compute(G);
    }
  }

  const Mat<Scalar>& D() const { return D_; }

  // `scale` enters the stopping rule  residual <= tol * (1 + scale).
  template <typename Projector>
  Result<Scalar> solve(const Projector& project, double scale, const Settings& s,
                       State<Scalar>* warm = nullptr) const {
    const auto m = D_.rows();
    const auto n = D_.cols();
    State<Scalar> local;
    State<Scalar>& st = warm ? *warm : local;
    if (!st.valid) {
      st.x = Vec<Scalar>::Zero(n);
      st.v = Vec<Scalar>::Zero(n);
      st.r = project(Vec<Scalar>::Zero(m));
      st.u1 = Vec<Scalar>::Zero(n);
      st.u2 = Vec<Scalar>::Zero(m);
      st.rho = s.rho0;
      st.valid = true;
    }
    constexpr double relax = 1.5;  // over-relaxation
    const double thresh = s.tol * (1.0 + scale);

    Result<Scalar> out;
    double best_score = std::numeric_limits<double>::infinity();
    Vec<Scalar> Dx(m), v_old(n), r_old(m), xh(n), dxh(m);
    for (int it = 1; it <= s.max_iter; ++it) {
      Vec<Scalar> rhs = st.v - st.u1;
      rhs.noalias() += D_.adjoint() * (st.r - st.u2);
      st.x = apply_inverse(rhs);
      Dx.noalias() = D_ * st.x;

      v_old = st.v;
      r_old = st.r;
      xh = relax * st.x + (1.0 - relax) * v_old;
      dxh = relax * Dx + (1.0 - relax) * r_old;
      st.v = soft_threshold<Scalar>(xh + st.u1, 1.0 / st.rho);
      st.r = project(dxh + st.u2);
      st.u1 += xh - st.v;
      st.u2 += dxh - st.r;

      const double primal = std::sqrt((st.x - st.v).squaredNorm() + (Dx - st.r).squaredNorm());
      Vec<Scalar> dv = st.v - v_old;
      dv.noalias() += D_.adjoint() * (st.r - r_old);
      const double dual = st.rho * dv.norm();

      const double score = std::max(primal, dual);
      if (score < best_score) {
        best_score = score;
        out.v = st.v;
        out.primal = primal;
        out.dual = dual;
      }
      out.iterations = it;
      if (primal <= thresh && dual <= thresh) {
        out.v = st.v;
        out.primal = primal;
        out.dual = dual;
        out.converged = true;
        break;
      }
      // Residual balancing: keep primal and dual within a factor of 10.
      if (it % 10 == 0) {
        if (primal > 10.0 * dual) {
          st.rho *= 2.0;
          st.u1 /= 2.0;
          st.u2 /= 2.0;
        } else if (dual > 10.0 * primal) {
          st.rho /= 2.0;
          st.u1 *= 2.0;
          st.u2 *= 2.0;
        }
      }
    }
    return out;
  }

 private:
  Vec<Scalar> apply_inverse(const Vec<Scalar>& q) const {
    if (!wide_) return llt_.solve(q);
    Vec<Scalar> t = D_ * q;
    Vec<Scalar> out = q;
    out.noalias() -= D_.adjoint() * llt_.solve(t);
    return out;
  }

  Mat<Scalar> D_;
  bool wide_;
  Eigen::LLT<Mat<Scalar>> llt_;
};

}  // namespace apr::admm
