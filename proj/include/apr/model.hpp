#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace apr {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

enum class Field { kReal, kComplex };

std::string to_string(Field f);
Field field_from_string(const std::string& s);

// Raised when operand shapes disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a real-field object meets a complex-field one.
class FieldError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A length-n signal over R or C. Entries are always stored as complex
// doubles; real-field signals hold exactly zero imaginary parts.
class SignalVector {
 public:
  SignalVector() = default;
  SignalVector(Field field, CVector entries);

  static SignalVector real(const RVector& entries);
  static SignalVector complex(CVector entries);
  static SignalVector zeros(Field field, Eigen::Index n);

  Field field() const { return field_; }
  Eigen::Index size() const { return entries_.size(); }
  const CVector& entries() const { return entries_; }
  RVector real_part() const { return entries_.real(); }

  double norm() const { return entries_.norm(); }
  double l1_norm() const { return entries_.cwiseAbs().sum(); }
  Eigen::Index nnz() const;

 private:
  Field field_ = Field::kReal;
  CVector entries_;
};

// Provenance of a generated object; `params` holds everything needed to
// regenerate it (sizes, models, scales) as decimal strings.
struct SeedMeta {
  std::string generator;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> params;

  bool operator==(const SeedMeta&) const = default;
};

// Rows of `A` are the measurement functionals: y_j = |(A x)_j + b_j|.
// In the notation a_j^H x, row j of A is a_j^H.
class MeasurementEnsemble {
 public:
  MeasurementEnsemble() = default;
  MeasurementEnsemble(Field field, CMatrix A, CVector b, SeedMeta meta = {});

  Field field() const { return field_; }
  Eigen::Index m() const { return A_.rows(); }
  Eigen::Index n() const { return A_.cols(); }
  const CMatrix& A() const { return A_; }
  const CVector& b() const { return b_; }
  const SeedMeta& seed_meta() const { return meta_; }

  // Lifted measurement vector a'_j = (a_j; conj(b_j)) so that
  // a'_j^H (x; 1) = a_j^H x + b_j.
  CVector lifted_vector(Eigen::Index j) const;

 private:
  Field field_ = Field::kReal;
  CMatrix A_;
  CVector b_;
  SeedMeta meta_;
};

struct ProblemInstance {
  MeasurementEnsemble ensemble;
  SignalVector x0;
  RVector w;
  RVector y;
  std::optional<RVector> ytilde;
  int k = 0;
  SeedMeta seed_meta;
};

struct ErrorMetrics {
  double plain_l2 = 0.0;
  double sign_folded = 0.0;
  double global_phase = 0.0;
  double relative_plain = 0.0;
  double best_theta = 0.0;
};

struct BiasBand {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
};

// y_j = |a_j^H x + b_j| + w_j.
RVector forward_model(const MeasurementEnsemble& ens, const SignalVector& x,
                      const RVector& w);

// (|a_j^H x + b_j|^2)_j, evaluated through the lifted vectors a'_j.
RVector lifted_intensity(const MeasurementEnsemble& ens, const SignalVector& x);

// Exact min / max of ||b_I||_2 over index sets with |I| >= ceil(fraction*m).
BiasBand bias_band(const CVector& b, double fraction = 0.5);

// l_p norm (p in {1,2}) of x after zeroing its k largest-magnitude entries;
// on magnitude ties the lowest indices are the ones retained.
double best_k_term_error(const SignalVector& x, Eigen::Index k, int p);

ErrorMetrics error_metrics(const SignalVector& xhat, const SignalVector& x0);

// f(theta) = ||xhat - e^{i theta} x0||_2 + |1 - e^{i theta}|.
double global_phase_objective(const CVector& xhat, const CVector& x0,
                              double theta);

}  // namespace apr
