#include <gtest/gtest.h>

#include <cmath>

#include "apr/lemmas.hpp"
#include "apr/rng.hpp"
#include "oracles.hpp"

using namespace apr;

namespace {

// Random admissible (v, k, theta): ||v||_inf <= theta, ||v||_1 <= k theta.
struct DecompCase {
  RVector v;
  int k;
  double theta;
};

DecompCase random_case(Rng& rng) {
  const int n = 1 + static_cast<int>(rng.uniform_index(20));
  const int k = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
  const double theta = 0.1 + 3.0 * rng.uniform01();
  RVector v(n);
  for (int i = 0; i < n; ++i) {
    v(i) = rng.uniform01() < 0.25 ? 0.0 : theta * (2.0 * rng.uniform01() - 1.0);
  }
  if (rng.uniform01() < 0.2) v(rng.uniform_index(n)) = theta;  // saturated entry
  const double l1 = v.cwiseAbs().sum();
  if (l1 > k * theta) v *= k * theta / l1 * (rng.uniform01() < 0.3 ? 1.0 : rng.uniform01());
  return {v, k, theta};
}

CVector random_complex(Rng& rng, Eigen::Index n) {
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.complex_normal();
  return v;
}

}  // namespace

TEST(SparseDecompose, SparseInputIsSingleAtom) {
  RVector v(5);
  v << 0, 1.5, 0, -0.5, 0;
  const SparseDecomposition d = sparse_convex_decompose(v, 2, 2.0);
  ASSERT_EQ(d.weights.size(), 1u);
  EXPECT_EQ(d.weights[0], 1.0);
  EXPECT_EQ(d.atoms[0], v);
}

TEST(SparseDecompose, HandExample) {
  RVector v(2);
  v << 1, 1;
  const SparseDecomposition d = sparse_convex_decompose(v, 1, 2.0);
  const DecompositionCheck c = check_decomposition(v, d);
  EXPECT_TRUE(c.ok) << c.failure;
  EXPECT_GE(d.weights.size(), 2u);
}

TEST(SparseDecompose, PreconditionsEnforced) {
  RVector v(3);
  v << 3, 0, 0;
  EXPECT_THROW(sparse_convex_decompose(v, 1, 2.0), std::invalid_argument);
  v << 1, 1, 1;
  EXPECT_THROW(sparse_convex_decompose(v, 1, 1.0), std::invalid_argument);
  EXPECT_THROW(sparse_convex_decompose(v, 0, 1.0), std::invalid_argument);
  EXPECT_THROW(sparse_convex_decompose(v, 2, 0.0), std::invalid_argument);
  EXPECT_THROW(sparse_convex_decompose(RVector(), 1, 1.0), DimensionError);
}

TEST(SparseDecompose, PropertySweep) {
  Rng rng(SeedSpec{51, {std::string("decomp")}});
  for (int t = 0; t < 3000; ++t) {
    const DecompCase dc = random_case(rng);
    const SparseDecomposition d = sparse_convex_decompose(dc.v, dc.k, dc.theta);
    EXPECT_LE(d.atoms.size(), 2 * static_cast<std::size_t>(dc.v.size()));
    const DecompositionCheck c = check_decomposition(dc.v, d);
    ASSERT_TRUE(c.ok) << "case " << t << ": " << c.failure;
  }
}

TEST(CheckDecomposition, RejectsEachViolation) {
  RVector v(2);
  v << 1, 1;
  SparseDecomposition d;
  d.k = 1;
  d.theta = 2.0;
  RVector a(2), b(2);
  a << 2, 0;
  b << 0, 2;
  d.weights = {0.5, 0.5};
  d.atoms = {a, b};
  EXPECT_TRUE(check_decomposition(v, d).ok);

  SparseDecomposition bad = d;
  bad.weights = {0.6, 0.5};
  EXPECT_FALSE(check_decomposition(v, bad).ok);
  bad = d;
  bad.k = 0;
  EXPECT_FALSE(check_decomposition(v, bad).ok);
  bad = d;
  bad.theta = 1.5;
  EXPECT_FALSE(check_decomposition(v, bad).ok);
  bad = d;
  bad.atoms[1] << 0, 2.5;
  bad.theta = 3.0;
  EXPECT_FALSE(check_decomposition(v, bad).ok);  // l1 exceeds ||v||_1
  bad = d;
  bad.weights = {1.0, 0.0};
  EXPECT_FALSE(check_decomposition(v, bad).ok);  // reconstruction
  bad = d;
  bad.weights = {1.5, -0.5};
  EXPECT_FALSE(check_decomposition(v, bad).ok);  // weights outside [0, 1]
  bad = d;
  bad.atoms.pop_back();
  EXPECT_FALSE(check_decomposition(v, bad).ok);
}

TEST(LiftedDistance, Examples) {
  CVector u(2), v(2);
  u << 1, 2;
  LiftedDistance r = lifted_distance_check(u, u);
  EXPECT_NEAR(r.lhs, 0.0, 1e-12);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_TRUE(r.holds);
  u << 1, 0;
  v << 0, 1;
  r = lifted_distance_check(u, v);
  EXPECT_NEAR(r.lhs, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r.rhs, 1.0, 1e-15);
  EXPECT_TRUE(r.holds);
  v << -1, 0;
  EXPECT_THROW(lifted_distance_check(u, v), std::invalid_argument);
  v << cplx(0, 1), 0;
  EXPECT_THROW(lifted_distance_check(u, v), std::invalid_argument);
  EXPECT_THROW(lifted_distance_check(u, CVector::Zero(3)), DimensionError);
}

TEST(LiftedDistance, ClosedFormMatchesExplicitMatrix) {
  Rng rng(52);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform_index(8));
    const CVector u = random_complex(rng, n);
    const CVector v = phase_align(u, random_complex(rng, n));
    EXPECT_NEAR(lifted_distance_check(u, v).lhs, oracle::lifted_frobenius_explicit(u, v),
                1e-10 * (1.0 + u.squaredNorm() + v.squaredNorm()));
  }
}

TEST(LiftedDistance, NoViolationsOnRandomAlignedPairs) {
  Rng rng(SeedSpec{53, {std::string("lifted")}});
  int violations = 0;
  for (int t = 0; t < 100000; ++t) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform_index(16));
    const CVector u = random_complex(rng, n);
    CVector v = random_complex(rng, n);
    if (t % 3 == 0) v = u + 0.01 * v;  // near-coincident pairs stress the bound
    violations += !lifted_distance_check(u, phase_align(u, v)).holds;
  }
  EXPECT_EQ(violations, 0);
}

TEST(PhaseAlign, Examples) {
  CVector u(3), v(3);
  u << 1, 2, 0;
  v << 2, 1, 5;
  EXPECT_EQ(phase_align(u, v), v);
  CVector un = u / u.norm();
  EXPECT_LE((phase_align(un, cplx(0, 1) * un) - un).norm(), 1e-15);
  v << 0, 0, 1;
  EXPECT_EQ(phase_align(u, v), v);  // orthogonal: unchanged
}

TEST(PhaseAlign, InnerProductRealAndNonnegative) {
  Rng rng(54);
  for (int t = 0; t < 10000; ++t) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform_index(16));
    const CVector u = random_complex(rng, n);
    const CVector v = random_complex(rng, n);
    const cplx ip = u.dot(phase_align(u, v));
    EXPECT_LE(std::abs(ip.imag()), 1e-14 * u.norm() * v.norm());
    EXPECT_GE(ip.real(), 0.0);
  }
}

TEST(MomentBound, ZeroInput) {
  const MomentBound mb = moment_bound_check(CMatrix::Zero(3, 3), CVector::Zero(3), cplx(0.5, 0), 1000,
                                            SeedSpec{55, {}});
  EXPECT_EQ(mb.lower, 0.0);
  EXPECT_EQ(mb.upper, 0.0);
  EXPECT_EQ(mb.mc_mean, 0.0);
  EXPECT_TRUE(mb.holds_ci);
}

TEST(MomentBound, ExponentialClosedForm) {
  CVector u = CVector::Zero(4);
  u(1) = cplx(0.6, 0.8);
  const MomentBound mb = moment_bound_check(u * u.adjoint(), CVector::Zero(4), cplx(0, 0), 100000,
                                            SeedSpec{56, {}});
  EXPECT_NEAR(mb.lower, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(mb.upper, 2.0 * std::sqrt(3.0), 1e-15);
  EXPECT_LE(std::abs(mb.mc_mean - 1.0), mb.radius);
  EXPECT_TRUE(mb.holds_ci);
}

TEST(MomentBound, ReproducibleAndValidated) {
  Rng rng(57);
  CVector x = random_complex(rng, 3), z = random_complex(rng, 3);
  const CMatrix H = x * x.adjoint() - z * z.adjoint();
  const SeedSpec s{57, {std::string("mb")}};
  const MomentBound a = moment_bound_check(H, x - z, cplx(0.3, -0.2), 5000, s);
  const MomentBound b = moment_bound_check(H, x - z, cplx(0.3, -0.2), 5000, s);
  EXPECT_EQ(a.mc_mean, b.mc_mean);
  EXPECT_EQ(a.radius, b.radius);
  EXPECT_THROW(moment_bound_check(H, x - z, 1.0, 999, s), std::invalid_argument);
  EXPECT_THROW(moment_bound_check(CMatrix::Identity(3, 3), x, 1.0, 1000, s), std::invalid_argument);
  CMatrix nh = H;
  nh(0, 1) += 1.0;
  EXPECT_THROW(moment_bound_check(nh, x, 1.0, 1000, s), std::invalid_argument);
  EXPECT_THROW(moment_bound_check(H, CVector::Zero(2), 1.0, 1000, s), DimensionError);
}
