#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "apr/model.hpp"
#include "apr/rng.hpp"
#include "oracles.hpp"

using namespace apr;

namespace {

MeasurementEnsemble real_ens(const RMatrix& A, const RVector& b) {
  return MeasurementEnsemble(Field::kReal, A.cast<cplx>(), b.cast<cplx>());
}

MeasurementEnsemble random_complex_ens(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  const SeedSpec s{seed, {std::string("model_test")}};
  return MeasurementEnsemble(Field::kComplex, gen_complex_gaussian_matrix(m, n, s.child("A")),
                             gen_bias_complex(m, s.child("b")));
}

}  // namespace

TEST(ForwardModel, RealScalar) {
  const auto ens = real_ens(RMatrix::Constant(1, 1, 2.0), RVector::Constant(1, 3.0));
  const RVector y = forward_model(ens, SignalVector::real(RVector::Constant(1, -1.0)), RVector::Zero(1));
  EXPECT_DOUBLE_EQ(y(0), 1.0);
}

TEST(ForwardModel, ComplexScalar) {
  CMatrix A(1, 1);
  A(0, 0) = 1.0;
  CVector b(1);
  b(0) = cplx(0, 1);
  const MeasurementEnsemble ens(Field::kComplex, A, b);
  CVector x(1);
  x(0) = cplx(0, 1);
  EXPECT_DOUBLE_EQ(forward_model(ens, SignalVector::complex(x), RVector::Zero(1))(0), 2.0);
}

TEST(ForwardModel, ZeroOperatorGivesBiasMagnitudes) {
  RVector b(3);
  b << 1.5, -2.0, 0.0;
  const auto ens = real_ens(RMatrix::Zero(3, 2), b);
  const RVector y = forward_model(ens, SignalVector::real(RVector::Constant(2, 7.0)), RVector::Zero(3));
  EXPECT_EQ(y, b.cwiseAbs());
}

TEST(ForwardModel, NoiseIsAddedAndMayGoNegative) {
  const auto ens = real_ens(RMatrix::Zero(1, 1), RVector::Constant(1, 0.25));
  const RVector y = forward_model(ens, SignalVector::real(RVector::Zero(1)), RVector::Constant(1, -1.0));
  EXPECT_DOUBLE_EQ(y(0), -0.75);
}

TEST(ForwardModel, Errors) {
  const auto ens = real_ens(RMatrix::Zero(2, 2), RVector::Zero(2));
  EXPECT_THROW(forward_model(ens, SignalVector::real(RVector::Zero(3)), RVector::Zero(2)), DimensionError);
  EXPECT_THROW(forward_model(ens, SignalVector::real(RVector::Zero(2)), RVector::Zero(1)), DimensionError);
  EXPECT_THROW(forward_model(ens, SignalVector::complex(CVector::Zero(2)), RVector::Zero(2)), FieldError);
  EXPECT_THROW(SignalVector(Field::kReal, CVector::Constant(1, cplx(0, 1))), FieldError);
  EXPECT_THROW(MeasurementEnsemble(Field::kReal, CMatrix::Zero(2, 2), CVector::Zero(3)), DimensionError);
}

TEST(ForwardModel, HomogeneousWithoutBias) {
  const SeedSpec s{3, {std::string("homog")}};
  const CMatrix A = gen_complex_gaussian_matrix(5, 4, s.child("A"));
  const MeasurementEnsemble ens(Field::kComplex, A, CVector::Zero(5));
  const SignalVector x = gen_sparse_signal(4, 2, Field::kComplex, AmplitudeModel::kGaussian, s.child("x"));
  const cplx c(-1.5, 0.7);
  const RVector y1 = forward_model(ens, x, RVector::Zero(5));
  const RVector y2 = forward_model(ens, SignalVector::complex(c * x.entries()), RVector::Zero(5));
  EXPECT_LE((y2 - std::abs(c) * y1).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LiftedIntensity, RealScalarAndZeroSignal) {
  const auto ens = real_ens(RMatrix::Constant(1, 1, 2.0), RVector::Constant(1, 3.0));
  EXPECT_NEAR(lifted_intensity(ens, SignalVector::real(RVector::Constant(1, -1.0)))(0), 1.0, 1e-15);
  const auto cens = random_complex_ens(4, 3, 9);
  const RVector z = lifted_intensity(cens, SignalVector::zeros(Field::kComplex, 3));
  EXPECT_LE((z - cens.b().cwiseAbs2()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LiftedIntensity, EqualsSquaredForwardModel) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ens = random_complex_ens(3, 2, seed);
    const SignalVector x = gen_sparse_signal(2, 2, Field::kComplex, AmplitudeModel::kGaussian,
                                             SeedSpec{seed, {std::string("x")}});
    const RVector f = forward_model(ens, x, RVector::Zero(3));
    const RVector l = lifted_intensity(ens, x);
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(l(j), f(j) * f(j), 1e-12 * (1.0 + l(j)));
  }
}

TEST(LiftedIntensity, LiftedVectorConjugatesBias) {
  const auto ens = random_complex_ens(3, 2, 4);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const CVector a = ens.lifted_vector(j);
    EXPECT_EQ(a(2), std::conj(ens.b()(j)));
  }
}

TEST(BiasBand, SpecExamples) {
  CVector b(4);
  b << 1, 1, 1, 1;
  BiasBand bb = bias_band(b);
  EXPECT_NEAR(bb.alpha_hat, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(bb.beta_hat, 2.0, 1e-15);
  b << 0, 0, 1, 1;
  bb = bias_band(b);
  EXPECT_NEAR(bb.alpha_hat, 0.0, 1e-15);
  EXPECT_NEAR(bb.beta_hat, std::sqrt(2.0), 1e-15);
  EXPECT_THROW(bias_band(CVector()), std::invalid_argument);
}

TEST(BiasBand, ConstantVectorClosedForm) {
  for (int m = 1; m <= 40; ++m) {
    const BiasBand bb = bias_band(gen_bias_real(m, 1.7));
    const double half = std::ceil(m / 2.0);
    EXPECT_NEAR(bb.alpha_hat, 1.7 * std::sqrt(half / m), 1e-12);
    EXPECT_NEAR(bb.beta_hat, 1.7, 1e-12);
  }
}

TEST(BiasBand, MatchesSubsetEnumeration) {
  Rng rng(SeedSpec{17, {std::string("bias_band")}});
  for (int t = 0; t < 100; ++t) {
    const int m = 1 + static_cast<int>(rng.uniform_index(12));
    CVector b(m);
    for (int j = 0; j < m; ++j) b(j) = t % 2 ? rng.complex_normal() : cplx(rng.normal(), 0.0);
    const auto [lo, hi] = oracle::bias_band_subsets(b, (m + 1) / 2);
    const BiasBand bb = bias_band(b, 0.5);
    EXPECT_NEAR(bb.alpha_hat, lo, 1e-12);
    EXPECT_NEAR(bb.beta_hat, hi, 1e-12);
  }
}

TEST(BestKTerm, Examples) {
  RVector x(3);
  x << 3, 2, 1;
  EXPECT_DOUBLE_EQ(best_k_term_error(SignalVector::real(x), 2, 1), 1.0);
  x << 3, -4, 1;
  EXPECT_DOUBLE_EQ(best_k_term_error(SignalVector::real(x), 1, 2), std::sqrt(10.0));
  EXPECT_THROW(best_k_term_error(SignalVector::real(x), 4, 1), std::invalid_argument);
}

TEST(BestKTerm, TiesKeepLowestIndices) {
  RVector x(4);
  x << 1, -1, 1, 2;
  // Keeping indices 3 and 0 leaves |x_1| + |x_2| = 2 either way; the value
  // is tie-invariant, so check through a vector where it is not.
  EXPECT_DOUBLE_EQ(best_k_term_error(SignalVector::real(x), 2, 1), 2.0);
  RVector y(3);
  y << 1, 1, 0.5;
  EXPECT_DOUBLE_EQ(best_k_term_error(SignalVector::real(y), 1, 1), 1.5);
}

TEST(BestKTerm, NonincreasingAndZeroAtSparsity) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SignalVector x = gen_sparse_signal(12, 5, Field::kComplex, AmplitudeModel::kGaussian,
                                             SeedSpec{seed, {std::string("bk")}});
    for (int p : {1, 2}) {
      double prev = INFINITY;
      for (Eigen::Index k = 0; k <= 12; ++k) {
        const double e = best_k_term_error(x, k, p);
        EXPECT_LE(e, prev);
        prev = e;
      }
      EXPECT_EQ(best_k_term_error(x, x.nnz(), p), 0.0);
    }
  }
}

TEST(ErrorMetrics, IdentityAndSignFlip) {
  RVector x0(3);
  x0 << 1, -2, 0.5;
  const SignalVector s = SignalVector::real(x0);
  ErrorMetrics em = error_metrics(s, s);
  EXPECT_EQ(em.plain_l2, 0.0);
  EXPECT_EQ(em.sign_folded, 0.0);
  EXPECT_EQ(em.global_phase, 0.0);
  em = error_metrics(SignalVector::real(-x0), s);
  EXPECT_NEAR(em.sign_folded, 0.0, 1e-15);
  EXPECT_NEAR(em.plain_l2, 2.0 * x0.norm(), 1e-14);
  EXPECT_NEAR(em.global_phase, 2.0, 1e-14);
}

TEST(ErrorMetrics, ComplexMatchesDenseScan) {
  const SignalVector x0 = gen_sparse_signal(6, 3, Field::kComplex, AmplitudeModel::kGaussian,
                                            SeedSpec{5, {std::string("gp")}});
  const CVector u = x0.entries() / x0.norm();
  const ErrorMetrics em = error_metrics(SignalVector::complex(cplx(0, 1) * u), SignalVector::complex(u));
  EXPECT_NEAR(em.global_phase, oracle::global_phase_scan(cplx(0, 1) * u, u, 1000000), 1e-8);
}

TEST(ErrorMetrics, OrderingInvariants) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SeedSpec s{seed, {std::string("ord")}};
    const SignalVector a = gen_sparse_signal(8, 3, Field::kComplex, AmplitudeModel::kGaussian, s.child(1));
    const SignalVector b = gen_sparse_signal(8, 3, Field::kComplex, AmplitudeModel::kGaussian, s.child(2));
    const ErrorMetrics em = error_metrics(a, b);
    EXPECT_LE(em.sign_folded, em.plain_l2);
    EXPECT_LE(em.global_phase, em.plain_l2 + 1e-15);
  }
}

TEST(ErrorMetrics, GlobalPhaseInvariantUnderCommonRotation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SeedSpec s{seed, {std::string("rot")}};
    const SignalVector a = gen_sparse_signal(8, 3, Field::kComplex, AmplitudeModel::kGaussian, s.child(1));
    const SignalVector b = gen_sparse_signal(8, 3, Field::kComplex, AmplitudeModel::kGaussian, s.child(2));
    const cplx rot = std::polar(1.0, 0.37 + 0.5 * static_cast<double>(seed));
    const double g1 = error_metrics(a, b).global_phase;
    const double g2 = error_metrics(SignalVector::complex(rot * a.entries()),
                                    SignalVector::complex(rot * b.entries())).global_phase;
    EXPECT_NEAR(g1, g2, 1e-8);
  }
}

TEST(ErrorMetrics, Errors) {
  EXPECT_THROW(error_metrics(SignalVector::zeros(Field::kReal, 2), SignalVector::zeros(Field::kReal, 3)),
               DimensionError);
  EXPECT_THROW(error_metrics(SignalVector::zeros(Field::kReal, 2), SignalVector::zeros(Field::kComplex, 2)),
               FieldError);
}
