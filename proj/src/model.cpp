#include "apr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace apr {

std::string to_string(Field f) { return f == Field::kReal ? "real" : "complex"; }

Field field_from_string(const std::string& s) {
  if (s == "real") return Field::kReal;
  if (s == "complex") return Field::kComplex;
  throw std::invalid_argument("unknown field '" + s + "'");
}

SignalVector::SignalVector(Field field, CVector entries)
    : field_(field), entries_(std::move(entries)) {
  if (field_ == Field::kReal && entries_.imag().cwiseAbs().maxCoeff() != 0.0 &&
      entries_.size() > 0) {
    throw FieldError("real-field signal has nonzero imaginary part");
  }
}

SignalVector SignalVector::real(const RVector& entries) {
  return SignalVector(Field::kReal, entries.cast<cplx>());
}

SignalVector SignalVector::complex(CVector entries) {
  return SignalVector(Field::kComplex, std::move(entries));
}

SignalVector SignalVector::zeros(Field field, Eigen::Index n) {
  return SignalVector(field, CVector::Zero(n));
}

Eigen::Index SignalVector::nnz() const {
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < entries_.size(); ++i) {
    if (entries_(i) != cplx(0.0)) ++count;
  }
  return count;
}

MeasurementEnsemble::MeasurementEnsemble(Field field, CMatrix A, CVector b,
                                         SeedMeta meta)
    : field_(field), A_(std::move(A)), b_(std::move(b)), meta_(std::move(meta)) {
  if (A_.rows() < 1 || A_.cols() < 1) {
    throw DimensionError("measurement matrix must be at least 1x1");
  }
  if (b_.size() != A_.rows()) {
    throw DimensionError("bias length must equal the number of rows of A");
  }
  if (field_ == Field::kReal &&
      (A_.imag().cwiseAbs().maxCoeff() != 0.0 ||
       b_.imag().cwiseAbs().maxCoeff() != 0.0)) {
    throw FieldError("real ensemble has complex entries");
  }
}

CVector MeasurementEnsemble::lifted_vector(Eigen::Index j) const {
  CVector a(n() + 1);
  // Row j of A is a_j^H, so a_j is its conjugate transpose.
  a.head(n()) = A_.row(j).adjoint();
  a(n()) = std::conj(b_(j));
  return a;
}

namespace {

void check_signal(const MeasurementEnsemble& ens, const SignalVector& x) {
  if (x.size() != ens.n()) {
    throw DimensionError("signal length does not match ensemble width");
  }
  if (x.field() != ens.field()) {
    throw FieldError("signal field does not match ensemble field");
  }
}

}  // namespace

RVector forward_model(const MeasurementEnsemble& ens, const SignalVector& x,
                      const RVector& w) {
  check_signal(ens, x);
  if (w.size() != ens.m()) {
    throw DimensionError("noise length does not match measurement count");
  }
  const CVector z = ens.A() * x.entries() + ens.b();
  return z.cwiseAbs() + w;
}

RVector lifted_intensity(const MeasurementEnsemble& ens, const SignalVector& x) {
  check_signal(ens, x);
  CVector xl(ens.n() + 1);
  xl.head(ens.n()) = x.entries();
  xl(ens.n()) = 1.0;
  RVector out(ens.m());
  for (Eigen::Index j = 0; j < ens.m(); ++j) {
    const cplx v = ens.lifted_vector(j).dot(xl);  // a'^H x'
    out(j) = std::norm(v);
  }
  return out;
}

BiasBand bias_band(const CVector& b, double fraction) {
  if (b.size() == 0) throw std::invalid_argument("bias_band: empty vector");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("bias_band: fraction must lie in (0, 1]");
  }
  const auto m = static_cast<std::size_t>(b.size());
  std::vector<double> sq(m);
  for (std::size_t j = 0; j < m; ++j) sq[j] = std::norm(b(static_cast<Eigen::Index>(j)));
  std::sort(sq.begin(), sq.end());
  auto need = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m) - 1e-12));
  need = std::clamp<std::size_t>(need, 1, m);
  const double low = std::accumulate(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(need), 0.0);
  const double high = std::accumulate(sq.begin(), sq.end(), 0.0);
  return {std::sqrt(low), std::sqrt(high)};
}

double best_k_term_error(const SignalVector& x, Eigen::Index k, int p) {
  const Eigen::Index n = x.size();
  if (k < 0 || k > n) throw std::invalid_argument("best_k_term_error: k out of range");
  if (p != 1 && p != 2) throw std::invalid_argument("best_k_term_error: p must be 1 or 2");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const CVector& e = x.entries();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(e(a)) > std::abs(e(b));
  });
  double acc = 0.0;
  for (auto it = order.begin() + k; it != order.end(); ++it) {
    const double mag = std::abs(e(*it));
    acc += p == 1 ? mag : mag * mag;
  }
  return p == 1 ? acc : std::sqrt(acc);
}

double global_phase_objective(const CVector& xhat, const CVector& x0, double theta) {
  const cplx rot = std::polar(1.0, theta);
  return (xhat - rot * x0).norm() + std::abs(1.0 - rot);
}

ErrorMetrics error_metrics(const SignalVector& xhat, const SignalVector& x0) {
  if (xhat.size() != x0.size()) throw DimensionError("error_metrics: length mismatch");
  if (xhat.field() != x0.field()) throw FieldError("error_metrics: field mismatch");

  const CVector& a = xhat.entries();
  const CVector& b = x0.entries();
  ErrorMetrics out;
  out.plain_l2 = (a - b).norm();
  out.sign_folded = std::min(out.plain_l2, (a + b).norm());
  const double x0_norm = b.norm();
  out.relative_plain = x0_norm > 0.0 ? out.plain_l2 / x0_norm : out.plain_l2;

  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (xhat.field() == Field::kReal) {
    const double at_pi = global_phase_objective(a, b, std::numbers::pi);
    out.global_phase = out.plain_l2;
    out.best_theta = 0.0;
    if (at_pi < out.global_phase) {
      out.global_phase = at_pi;
      out.best_theta = std::numbers::pi;
    }
    return out;
  }

  constexpr int grid = 2048;
  const double h = two_pi / grid;
  int best = 0;
  double best_val = global_phase_objective(a, b, 0.0);
  for (int i = 1; i < grid; ++i) {
    const double v = global_phase_objective(a, b, i * h);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }

  // Golden-section refinement inside the neighbouring grid cells.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = (best - 1) * h;
  double hi = (best + 1) * h;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = global_phase_objective(a, b, c);
  double fd = global_phase_objective(a, b, d);
  while (hi - lo > 1e-10) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = global_phase_objective(a, b, c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = global_phase_objective(a, b, d);
    }
  }
  const double theta = 0.5 * (lo + hi);
  const double refined = global_phase_objective(a, b, theta);
  out.global_phase = best_val;
  out.best_theta = best * h;
  if (refined < best_val) {
    out.global_phase = refined;
    out.best_theta = std::fmod(theta + two_pi, two_pi);
  }
  // theta = 0 is always admissible.
  if (out.plain_l2 < out.global_phase) {
    out.global_phase = out.plain_l2;
    out.best_theta = 0.0;
  }
  return out;
}

}  // namespace apr
