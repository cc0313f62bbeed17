#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "apr/rng.hpp"

using namespace apr;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(SeedSpec, DerivationIsDeterministicAndLabelSensitive) {
  const SeedSpec s{42, {std::string("trial"), std::int64_t{3}}};
  EXPECT_EQ(s.derive(), (SeedSpec{42, {std::string("trial"), std::int64_t{3}}}.derive()));
  EXPECT_NE(s.derive(), (SeedSpec{42, {std::string("trial"), std::int64_t{4}}}.derive()));
  EXPECT_NE(s.derive(), (SeedSpec{43, {std::string("trial"), std::int64_t{3}}}.derive()));
  EXPECT_NE(s.derive(), (SeedSpec{42, {std::int64_t{3}, std::string("trial")}}.derive()));
  // An integer label and its decimal string are distinct streams.
  EXPECT_NE((SeedSpec{1, {std::int64_t{7}}}.derive()), (SeedSpec{1, {std::string("7")}}.derive()));
  EXPECT_EQ(s.child("x").labels.size(), 3u);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(SeedSpec{9, {std::string("s")}});
  Rng b(SeedSpec{9, {std::string("s")}});
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
    ASSERT_EQ(a.normal(), b.normal());
  }
}

TEST(Rng, UniformIndexInRange) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(r.uniform_index(7), 7u);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, DisjointStreamsUncorrelated) {
  Rng a(SeedSpec{5, {std::string("left")}});
  Rng b(SeedSpec{5, {std::string("right")}});
  std::vector<double> xa(100000), xb(100000);
  for (int i = 0; i < 100000; ++i) {
    xa[i] = a.normal();
    xb[i] = b.normal();
  }
  EXPECT_LT(std::abs(correlation(xa, xb)), 0.01);
}

TEST(RealGaussianMatrix, DeterministicMoments) {
  const Eigen::Index m = 1000, n = 1000;
  const SeedSpec s{11, {std::string("A")}};
  const CMatrix A = gen_real_gaussian_matrix(m, n, s);
  EXPECT_EQ(A, gen_real_gaussian_matrix(m, n, s));
  EXPECT_EQ(A.imag().cwiseAbs().maxCoeff(), 0.0);
  const double N = static_cast<double>(m * n);
  const double mean = A.real().sum() / N;
  const double var = (A.real().array() - mean).square().sum() / (N - 1.0);
  EXPECT_LE(std::abs(mean), 0.005 / std::sqrt(static_cast<double>(m)));
  EXPECT_NEAR(var * m, 1.0, 0.01);
  EXPECT_THROW(gen_real_gaussian_matrix(0, 3, s), std::invalid_argument);
}

TEST(ComplexGaussianMatrix, DeterministicMoments) {
  const SeedSpec s{12, {std::string("A")}};
  const CMatrix A = gen_complex_gaussian_matrix(1000, 1000, s);
  EXPECT_EQ(A, gen_complex_gaussian_matrix(1000, 1000, s));
  const double N = 1e6;
  EXPECT_NEAR(A.cwiseAbs2().sum() / N, 1.0, 0.01);
  std::vector<double> re(1000000), im(1000000);
  for (Eigen::Index i = 0; i < A.size(); ++i) {
    re[i] = A.data()[i].real();
    im[i] = A.data()[i].imag();
  }
  EXPECT_LT(std::abs(correlation(re, im)), 0.005);
}

TEST(BiasReal, ExamplesAndSweep) {
  const CVector b = gen_bias_real(4, 1.0);
  for (Eigen::Index j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(b(j).real(), 0.5);
  BiasBand bb = bias_band(b);
  EXPECT_NEAR(bb.alpha_hat, std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(bb.beta_hat, 1.0, 1e-15);
  bb = bias_band(gen_bias_real(9, 2.0));
  EXPECT_NEAR(bb.alpha_hat, 2.0 * std::sqrt(5.0 / 9.0), 1e-14);
  EXPECT_NEAR(bb.beta_hat, 2.0, 1e-14);
  for (int m = 2; m <= 64; ++m) {
    EXPECT_GE(bias_band(gen_bias_real(m, 1.3)).alpha_hat, 1.3 / std::sqrt(2.0) - 1e-15);
  }
  EXPECT_THROW(gen_bias_real(3, 0.0), std::invalid_argument);
}

TEST(BiasComplex, Moments) {
  const SeedSpec s{13, {std::string("b")}};
  const CVector b = gen_bias_complex(100000, s);
  EXPECT_EQ(b, gen_bias_complex(100000, s));
  EXPECT_NEAR(b.cwiseAbs().sum() / 1e5, std::sqrt(std::numbers::pi) / 2.0, 0.02);
  EXPECT_NEAR(b.norm() / std::sqrt(1e5), 1.0, 0.02);
}

TEST(SparseSignal, ExactSparsityAndDenseCase) {
  for (int t = 0; t < 10000; ++t) {
    const auto f = t % 2 ? Field::kReal : Field::kComplex;
    const auto amp = static_cast<AmplitudeModel>(t % 3);
    const SignalVector x = gen_sparse_signal(20, 4, f, amp, SeedSpec{14, {std::int64_t{t}}});
    ASSERT_EQ(x.nnz(), 4);
    ASSERT_EQ(x.field(), f);
    if (f == Field::kReal) ASSERT_EQ(x.entries().imag().cwiseAbs().maxCoeff(), 0.0);
  }
  const SignalVector d = gen_sparse_signal(6, 6, Field::kReal, AmplitudeModel::kFlat, SeedSpec{1, {}});
  EXPECT_EQ(d.nnz(), 6);
  EXPECT_EQ(d.real_part(), RVector::Ones(6));
  const SignalVector u = gen_sparse_signal(8, 3, Field::kComplex, AmplitudeModel::kUnit, SeedSpec{2, {}});
  for (Eigen::Index i = 0; i < 8; ++i) {
    if (u.entries()(i) != cplx(0, 0)) EXPECT_NEAR(std::abs(u.entries()(i)), 1.0, 1e-15);
  }
  EXPECT_THROW(gen_sparse_signal(3, 4, Field::kReal, AmplitudeModel::kUnit, SeedSpec{}), std::invalid_argument);
}

TEST(SparseSignal, SupportFrequenciesUniform) {
  // n = 16, k = 2: 120 supports, each with probability 1/120.
  const int draws = 100000;
  std::map<std::pair<int, int>, int> counts;
  for (int t = 0; t < draws; ++t) {
    const SignalVector x =
        gen_sparse_signal(16, 2, Field::kReal, AmplitudeModel::kFlat, SeedSpec{15, {std::int64_t{t}}});
    std::vector<int> s;
    for (int i = 0; i < 16; ++i) {
      if (x.entries()(i) != cplx(0, 0)) s.push_back(i);
    }
    ++counts[{s[0], s[1]}];
  }
  EXPECT_EQ(counts.size(), 120u);
  const double p = 1.0 / 120.0;
  const double mu = draws * p;
  const double sd = std::sqrt(draws * p * (1.0 - p));
  for (const auto& [key, c] : counts) EXPECT_LE(std::abs(c - mu), 5.0 * sd);
}

TEST(Noise, BudgetsRespected) {
  EXPECT_EQ(gen_noise(10, 0.0, NoiseModel::kSphere, SeedSpec{}), RVector::Zero(10));
  EXPECT_EQ(gen_noise(10, 0.0, NoiseModel::kGaussianClipped, SeedSpec{}), RVector::Zero(10));
  for (int t = 0; t < 10000; ++t) {
    const SeedSpec s{16, {std::int64_t{t}}};
    const double eps = 0.01 + 0.001 * t;
    EXPECT_NEAR(gen_noise(25, eps, NoiseModel::kSphere, s).norm(), eps, 1e-12);
    EXPECT_LE(gen_noise(25, eps, NoiseModel::kGaussianClipped, s).norm(), eps);
  }
  EXPECT_THROW(gen_noise(3, -1.0, NoiseModel::kSphere, SeedSpec{}), std::invalid_argument);
}

TEST(Instance, InvariantsAtConstruction) {
  InstanceRecipe r;
  r.field = Field::kComplex;
  r.m = 30;
  r.n = 10;
  r.k = 2;
  r.noise_budget = 0.1;
  r.with_intensity = true;
  r.master_seed = 17;
  const ProblemInstance inst = make_instance(r);
  EXPECT_EQ(inst.y, forward_model(inst.ensemble, inst.x0, inst.w));
  ASSERT_TRUE(inst.ytilde.has_value());
  EXPECT_LE((*inst.ytilde - lifted_intensity(inst.ensemble, inst.x0) - inst.w).cwiseAbs().maxCoeff(), 1e-12);
  const InstanceRecipe back = InstanceRecipe::from_seed_meta(r.to_seed_meta());
  EXPECT_TRUE(make_instance(back).y == inst.y);
}
