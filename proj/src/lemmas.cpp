#include "apr/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace apr {

namespace {

// Vertex of { 0 <= u <= theta on supp p, u = 0 off supp p, sum u = L }:
// saturated coordinates stay at theta, free ones fill at theta in
// decreasing order of p, one takes the remainder.
RVector peel_vertex(const RVector& p, double L, double theta) {
  const Eigen::Index n = p.size();
  RVector w = RVector::Zero(n);
  std::vector<Eigen::Index> free_idx;
  double mass = L;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (p(i) == theta) {
      w(i) = theta;
      mass -= theta;
    } else if (p(i) > 0.0) {
      free_idx.push_back(i);
    }
  }
  std::stable_sort(free_idx.begin(), free_idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return p(a) > p(b); });
  for (Eigen::Index i : free_idx) {
    if (mass <= 1e-12 * theta) break;  // rounding leftover, not an entry
    const double take = std::min(theta, mass);
    w(i) = take;
    mass -= take;
  }
  return w;
}

}  // namespace

SparseDecomposition sparse_convex_decompose(const RVector& v, int k, double theta) {
  const Eigen::Index n = v.size();
  if (n < 1) throw DimensionError("sparse_convex_decompose: empty vector");
  if (k < 1) throw std::invalid_argument("sparse_convex_decompose: k must be >= 1");
  if (!(theta > 0.0)) throw std::invalid_argument("sparse_convex_decompose: theta must be > 0");
  const double l1 = v.cwiseAbs().sum();
  if (v.cwiseAbs().maxCoeff() > theta) {
    throw std::invalid_argument("sparse_convex_decompose: ||v||_inf exceeds theta");
  }
  if (l1 > k * theta * (1.0 + 1e-12)) {
    throw std::invalid_argument("sparse_convex_decompose: ||v||_1 exceeds k * theta");
  }

  SparseDecomposition out;
  out.k = k;
  out.theta = theta;
  const RVector sgn = v.unaryExpr([](double t) { return t < 0.0 ? -1.0 : 1.0; });
  const double L = std::min(l1, k * theta);
  const double snap = 1e-14 * theta;
  RVector p = v.cwiseAbs();
  double remaining = 1.0;
  const int max_atoms = static_cast<int>(2 * n);

  for (int step = 0;; ++step) {
    if (step >= max_atoms) {
      throw std::logic_error("sparse_convex_decompose: termination bound exceeded");
    }
    if (remaining <= 1e-13) {
      // The rest carries no reconstructible mass; close with the top-k part
      // of p so the atom stays admissible whatever drift p has picked up.
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
      std::iota(idx.begin(), idx.end(), Eigen::Index{0});
      std::stable_sort(idx.begin(), idx.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return p(a) > p(b); });
      RVector last = RVector::Zero(n);
      for (int j = 0; j < k && j < n; ++j) last(idx[static_cast<std::size_t>(j)]) = p(idx[static_cast<std::size_t>(j)]);
      if (last.sum() > L) last *= L / last.sum();
      out.weights.push_back(remaining);
      out.atoms.push_back(last.cwiseProduct(sgn));
      break;
    }
    if ((p.array() != 0.0).count() <= k) {
      // Rounding drift in p is amplified by 1 / (1 - lambda); pull the mass
      // back to L so the last atom keeps ||u||_1 <= ||v||_1.
      const double mass = p.sum();
      if (mass > L) p *= L / mass;
      out.weights.push_back(remaining);
      out.atoms.push_back(p.cwiseProduct(sgn));
      break;
    }
    const RVector w = peel_vertex(p, L, theta);
    double lambda = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (w(i) > p(i)) lambda = std::min(lambda, p(i) / w(i));
      if (w(i) < p(i)) lambda = std::min(lambda, (theta - p(i)) / (theta - w(i)));
    }
    if (lambda >= 1.0) {
      out.weights.push_back(remaining);
      out.atoms.push_back(w.cwiseProduct(sgn));
      break;
    }
    out.weights.push_back(remaining * lambda);
    out.atoms.push_back(w.cwiseProduct(sgn));
    remaining *= 1.0 - lambda;
    p = ((p - lambda * w) / (1.0 - lambda)).cwiseMax(0.0).cwiseMin(theta);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p(i) <= snap) p(i) = 0.0;
      if (p(i) >= theta - snap) p(i) = theta;
    }
  }
  return out;
}

DecompositionCheck check_decomposition(const RVector& v, const SparseDecomposition& d) {
  DecompositionCheck c;
  auto fail = [&](const std::string& why) {
    if (c.ok) {
      c.ok = false;
      c.failure = why;
    }
  };
  if (d.weights.size() != d.atoms.size() || d.weights.empty()) {
    fail("weights and atoms must be nonempty and of equal count");
    return c;
  }
  const double l1 = v.cwiseAbs().sum();
  double wsum = 0.0;
  RVector recon = RVector::Zero(v.size());
  for (std::size_t j = 0; j < d.atoms.size(); ++j) {
    const double lam = d.weights[j];
    const RVector& u = d.atoms[j];
    if (u.size() != v.size()) {
      fail("atom length differs from v");
      return c;
    }
    if (lam < -1e-12 || lam > 1.0 + 1e-12) fail("weight outside [0, 1]");
    if ((u.array() != 0.0).count() > d.k) fail("atom is not k-sparse");
    if (u.size() > 0 && u.cwiseAbs().maxCoeff() > d.theta) fail("atom exceeds theta");
    if (u.cwiseAbs().sum() > l1 * (1.0 + 1e-12)) fail("atom l1 norm exceeds ||v||_1");
    wsum += lam;
    recon += lam * u;
  }
  c.weight_sum_error = std::abs(wsum - 1.0);
  c.reconstruction_error = v.size() ? (recon - v).cwiseAbs().maxCoeff() : 0.0;
  if (c.weight_sum_error > 1e-12) fail("weights do not sum to 1");
  if (c.reconstruction_error > 1e-10) fail("reconstruction mismatch");
  return c;
}

CVector phase_align(const CVector& u, const CVector& v) {
  if (u.size() != v.size()) throw DimensionError("phase_align: length mismatch");
  const cplx ip = u.dot(v);  // u^H v
  const double mag = std::abs(ip);
  if (mag == 0.0) return v;
  return v * (std::conj(ip) / mag);
}

LiftedDistance lifted_distance_check(const CVector& u, const CVector& v) {
  if (u.size() != v.size()) throw DimensionError("lifted_distance_check: length mismatch");
  const cplx ip = u.dot(v);
  const double nu = u.norm();
  const double nv = v.norm();
  const double tol = 1e-12 * std::max(1.0, nu * nv);
  if (ip.real() < -tol || std::abs(ip.imag()) > tol) {
    throw std::invalid_argument("lifted_distance_check: <u, v> must be real and nonnegative");
  }
  const double nu2 = nu * nu;
  const double nv2 = nv * nv;
  // ||u||^4 + ||v||^4 - 2 |<u,v>|^2 rearranged as
  // (||u||^2 - ||v||^2)^2 + 2 ||u||^2 ||v_perp||^2, v_perp = v - (u^H v / ||u||^2) u,
  // which avoids cancellation when u and v nearly coincide.
  const double perp2 = nu2 > 0.0 ? (v - u * (ip / nu2)).squaredNorm() : 0.0;
  const double lhs2 = (nu2 - nv2) * (nu2 - nv2) + 2.0 * nu2 * perp2;
  LiftedDistance out;
  out.lhs = std::sqrt(lhs2);
  out.rhs = nu * (u - v).norm() / std::sqrt(2.0);
  const double slack = 1e-12 * (nu2 + nv2) * (nu2 + nv2);
  out.holds = lhs2 >= out.rhs * out.rhs - slack;
  return out;
}

MomentBound moment_bound_check(const CMatrix& H, const CVector& h, cplx b, int samples,
                               const SeedSpec& seed) {
  const Eigen::Index n = H.rows();
  if (H.cols() != n || h.size() != n || n < 1) {
    throw DimensionError("moment_bound_check: dimension mismatch");
  }
  if (samples < 1000) throw std::invalid_argument("moment_bound_check: need >= 1000 samples");
  const double hscale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * hscale) {
    throw std::invalid_argument("moment_bound_check: H must be Hermitian");
  }
  if (n > 2) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = std::abs(es.eigenvalues()(i));
    std::sort(ev.begin(), ev.end(), std::greater<>());
    if (ev[2] > 1e-8 * std::max(1.0, ev[0])) {
      throw std::invalid_argument("moment_bound_check: rank of H exceeds 2");
    }
  }

  const double hf2 = H.squaredNorm();
  const double bh2 = std::norm(b) * h.squaredNorm();
  MomentBound out;
  out.lower = std::sqrt(hf2 + bh2) / 3.0;
  out.upper = 2.0 * std::sqrt(3.0 * hf2 + bh2);

  Rng rng(seed);
  CVector a(n);
  double sum = 0.0;
  double sum2 = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) a(i) = rng.complex_normal();
    const double quad = a.dot(H * a).real();
    const double xi = std::abs(quad + 2.0 * (b * a.dot(h)).real());
    sum += xi;
    sum2 += xi * xi;
  }
  const double N = samples;
  out.mc_mean = sum / N;
  const double var = std::max(sum2 / N - out.mc_mean * out.mc_mean, 0.0) * N / (N - 1.0);
  out.radius = 5.0 * std::sqrt(var / N);
  out.holds_ci = out.mc_mean - out.radius >= out.lower - out.radius &&
                 out.mc_mean + out.radius <= out.upper + out.radius;
  return out;
}

}  // namespace apr
