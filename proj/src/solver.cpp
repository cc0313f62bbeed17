#include "apr/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "apr/l1_admm.hpp"
#include "apr/rng.hpp"

namespace apr {

std::string to_string(SolveMode m) {
  return m == SolveMode::kMagnitude ? "magnitude" : "intensity";
}

SolveMode solve_mode_from_string(const std::string& s) {
  if (s == "magnitude") return SolveMode::kMagnitude;
  if (s == "intensity") return SolveMode::kIntensity;
  throw std::invalid_argument("unknown solve mode '" + s + "'");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kSignFixedPoint: return "sign_fixed_point";
    case Termination::kMaxOuter: return "max_outer";
    case Termination::kInfeasibleInner: return "infeasible_inner";
  }
  return "max_outer";
}

void SolverOptions::validate() const {
  if (outer_max < 1 || inner_max < 1 || restarts < 1) {
    throw std::invalid_argument("solver iteration counts must be >= 1");
  }
  if (!(inner_tol > 0.0) || !(success_tol > 0.0) || !(penalty > 0.0)) {
    throw std::invalid_argument("solver tolerances and penalty must be positive");
  }
  if (!(relax_factor >= 0.0)) {
    throw std::invalid_argument("relax_factor must be nonnegative");
  }
}

namespace {

template <typename Scalar>
using Vec = admm::Vec<Scalar>;
template <typename Scalar>
using Mat = admm::Mat<Scalar>;

bool is_real_data(const CMatrix& D, const CVector& c) {
  return D.imag().cwiseAbs().maxCoeff() == 0.0 &&
         (c.size() == 0 || c.imag().cwiseAbs().maxCoeff() == 0.0);
}

template <typename Scalar>
Mat<Scalar> narrow(const CMatrix& M) {
  if constexpr (admm::is_complex<Scalar>::value) {
    return M;
  } else {
    return M.real();
  }
}

template <typename Scalar>
Vec<Scalar> narrow(const CVector& v) {
  if constexpr (admm::is_complex<Scalar>::value) {
    return v;
  } else {
    return v.real();
  }
}

template <typename Scalar>
CVector widen(const Vec<Scalar>& v) {
  if constexpr (admm::is_complex<Scalar>::value) {
    return v;
  } else {
    return v.template cast<cplx>();
  }
}

template <typename Scalar>
Scalar unit_phase(Scalar z) {
  if constexpr (admm::is_complex<Scalar>::value) {
    const double mag = std::abs(z);
    return mag > 0.0 ? z / mag : Scalar(1.0);
  } else {
    return z >= 0.0 ? 1.0 : -1.0;
  }
}

template <typename Scalar>
Vec<Scalar> phase_of(const Vec<Scalar>& z) {
  Vec<Scalar> u(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) u(j) = unit_phase(z(j));
  return u;
}

// Least-squares refit on the support of an ADMM iterate. Returns the refit
// when it is feasible for the ball and not worse in l1.
template <typename Scalar>
bool polish_on_support(const Mat<Scalar>& D, const Vec<Scalar>& c, double radius,
                       double tol, Vec<Scalar>& x) {
  const Eigen::Index n = D.cols();
  const Eigen::Index m = D.rows();
  double vmax = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) vmax = std::max(vmax, std::abs(x(i)));
  if (vmax == 0.0) return false;
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(x(i)) > 1e-8 * vmax) support.push_back(i);
  }
  const auto s = static_cast<Eigen::Index>(support.size());
  if (s > m) return false;
  Mat<Scalar> Ds(m, s);
  for (Eigen::Index j = 0; j < s; ++j) Ds.col(j) = D.col(support[static_cast<std::size_t>(j)]);
  Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(Ds);
  if (qr.rank() < s) return false;
  const Vec<Scalar> z = qr.solve(c);
  const double res = (Ds * z - c).norm();
  const double slack = tol * (1.0 + c.norm());
  if (res > radius + slack) return false;
  const double l1_old = x.cwiseAbs().sum();
  const double l1_new = z.cwiseAbs().sum();
  if (l1_new > l1_old + 1e-6 * (1.0 + l1_old)) return false;
  x.setZero();
  for (Eigen::Index j = 0; j < s; ++j) x(support[static_cast<std::size_t>(j)]) = z(j);
  return true;
}

// Exact minimizer of ||z||_1 over { ||D_S z - c|| <= radius } restricted to
// the face where z has fixed signs (phases) g: the linear objective Re(g^H z)
// over the ellipsoid is minimized at z_ls - rho G^{-1} g / sqrt(g^H G^{-1} g),
// G = D_S^H D_S, rho^2 = radius^2 - ||D_S z_ls - c||^2. Complex phases are
// re-linearized a few times. Returns false when the face is left.
template <typename Scalar>
bool face_minimizer(const Mat<Scalar>& Ds, const Vec<Scalar>& c, double radius,
                    const Vec<Scalar>& start, Vec<Scalar>& z) {
  Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(Ds);
  if (qr.rank() < Ds.cols()) return false;
  const Vec<Scalar> z_ls = qr.solve(c);
  const double r_ls = (Ds * z_ls - c).norm();
  if (r_ls > radius) {
    z = z_ls;
    return true;  // caller rejects on feasibility
  }
  const double rho = std::sqrt(std::max(radius * radius - r_ls * r_ls, 0.0));
  if (rho == 0.0) {
    z = z_ls;
    return true;
  }
  const Mat<Scalar> G = Ds.adjoint() * Ds;
  const Eigen::LDLT<Mat<Scalar>> ldlt(G);
  Vec<Scalar> g = phase_of<Scalar>(start);
  const int passes = admm::is_complex<Scalar>::value ? 50 : 1;
  for (int pass = 0; pass < passes; ++pass) {
    const Vec<Scalar> Gg = ldlt.solve(g);
    const double q = std::sqrt(std::max(std::real(g.dot(Gg)), 0.0));
    if (q == 0.0) return false;
    z = z_ls - Gg * (rho / q);
    const Vec<Scalar> g_new = phase_of<Scalar>(z);
    if constexpr (!admm::is_complex<Scalar>::value) {
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (z(i) == 0.0 || g_new(i) != g(i)) return false;
      }
      return true;
    }
    const double change = (g_new - g).cwiseAbs().maxCoeff();
    g = g_new;
    if (change <= 1e-14) break;
  }
  return true;
}

// Face polish over the supports of x at several relative thresholds; keeps
// the feasible candidate of least l1 norm when it does not lose to x.
template <typename Scalar>
bool polish_bpdn(const Mat<Scalar>& D, const Vec<Scalar>& c, double radius, double tol,
                 Vec<Scalar>& x) {
  const Eigen::Index n = D.cols();
  const Eigen::Index m = D.rows();
  double vmax = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) vmax = std::max(vmax, std::abs(x(i)));
  if (vmax == 0.0) return false;
  const double slack = tol * (1.0 + c.norm());
  const double l1_old = x.cwiseAbs().sum();
  // An infeasible iterate loses to any feasible candidate.
  const bool feasible = (D * x - c).norm() <= radius + slack;
  double best_l1 = feasible ? l1_old + 1e-6 * (1.0 + l1_old)
                            : std::numeric_limits<double>::infinity();
  bool improved = false;
  Vec<Scalar> best = x;
  std::vector<Eigen::Index> last;
  for (double rel : {1e-10, 1e-8, 1e-6, 1e-4, 1e-3}) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(x(i)) > rel * vmax) support.push_back(i);
    }
    if (support == last) continue;
    last = support;
    const auto s = static_cast<Eigen::Index>(support.size());
    if (s > m) continue;
    Mat<Scalar> Ds(m, s);
    Vec<Scalar> xs(s);
    for (Eigen::Index j = 0; j < s; ++j) {
      Ds.col(j) = D.col(support[static_cast<std::size_t>(j)]);
      xs(j) = x(support[static_cast<std::size_t>(j)]);
    }
    Vec<Scalar> z;
    if (!face_minimizer<Scalar>(Ds, c, radius, xs, z)) continue;
    if ((Ds * z - c).norm() > radius + slack) continue;
    const double l1 = z.cwiseAbs().sum();
    if (l1 < best_l1) {
      best_l1 = l1;
      best.setZero();
      for (Eigen::Index j = 0; j < s; ++j) best(support[static_cast<std::size_t>(j)]) = z(j);
      improved = true;
    }
  }
  if (improved) x = best;
  return improved;
}

template <typename Scalar>
BpdnResult bpdn_impl(const CMatrix& Dc, const CVector& cc, double epsilon,
                     const SolverOptions& opts) {
  const Mat<Scalar> D = narrow<Scalar>(Dc);
  BpdnResult out;
  const double cn = cc.norm();
  if (cn <= epsilon) {
    // Zero is feasible and has the least possible l1 norm.
    out.x = CVector::Zero(D.cols());
    out.residual = cn;
    out.converged = true;
    return out;
  }
  // Solve the unit-norm problem: bpdn(D, t c, t eps) = t bpdn(D, c, eps).
  const Vec<Scalar> c = narrow<Scalar>(cc) / cn;
  const double eps = epsilon / cn;
  admm::L1Admm<Scalar> engine(D);
  admm::Settings settings{opts.inner_max, opts.inner_tol, opts.penalty};
  const admm::BallProjector<Scalar> proj{&c, eps};
  auto res = engine.solve(proj, 1.0, settings);
  Vec<Scalar> x = res.v;
  out.polished = polish_bpdn<Scalar>(D, c, eps, opts.inner_tol, x);
  x *= cn;
  out.x = widen<Scalar>(x);
  out.objective = x.cwiseAbs().sum();
  out.residual = (D * x - narrow<Scalar>(cc)).norm();
  out.iterations = res.iterations;
  out.converged = res.converged;
  return out;
}

}  // namespace

BpdnResult bpdn(const CMatrix& D, const CVector& c, double epsilon,
                const SolverOptions& opts) {
  if (D.rows() != c.size()) throw DimensionError("bpdn: rows of D must match length of c");
  if (D.rows() < 1 || D.cols() < 1) throw DimensionError("bpdn: empty operator");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("bpdn: epsilon must be >= 0");
  opts.validate();
  if (is_real_data(D, c)) return bpdn_impl<double>(D, c, epsilon, opts);
  return bpdn_impl<cplx>(D, c, epsilon, opts);
}

OracleResult brute_force_bp_oracle(const RMatrix& D, const RVector& c) {
  const Eigen::Index m = D.rows();
  const Eigen::Index n = D.cols();
  if (c.size() != m) throw DimensionError("oracle: rows of D must match length of c");
  if (n > 8 || m > n || m < 1) {
    throw std::invalid_argument("oracle: requires 1 <= m <= n <= 8");
  }
  const double feas_tol = 1e-9 * (1.0 + c.norm());
  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();
  if (c.norm() <= feas_tol) {
    best.objective = 0.0;
    best.witness = RVector::Zero(n);
    return best;
  }
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    const int s = std::popcount(mask);
    if (s > m) continue;
    RMatrix Ds(m, s);
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mask & (1u << j)) cols.push_back(j);
    }
    for (int j = 0; j < s; ++j) Ds.col(j) = D.col(cols[static_cast<std::size_t>(j)]);
    Eigen::ColPivHouseholderQR<RMatrix> qr(Ds);
    if (qr.rank() < s) continue;
    const RVector z = qr.solve(c);
    if ((Ds * z - c).norm() > feas_tol) continue;
    const double obj = z.cwiseAbs().sum();
    if (obj < best.objective) {
      best.objective = obj;
      best.witness = RVector::Zero(n);
      for (int j = 0; j < s; ++j) best.witness(cols[static_cast<std::size_t>(j)]) = z(j);
    }
  }
  if (!std::isfinite(best.objective)) throw std::runtime_error("oracle: infeasible system");
  return best;
}

double magnitude_feasibility(const MeasurementEnsemble& ens, const CVector& x,
                             const RVector& y) {
  return ((ens.A() * x + ens.b()).cwiseAbs() - y).norm();
}

double intensity_feasibility(const MeasurementEnsemble& ens, const CVector& x,
                             const RVector& ytilde) {
  return ((ens.A() * x + ens.b()).cwiseAbs2() - ytilde).norm();
}

bool restart_less(const RestartSummary& a, const RestartSummary& b, double epsilon,
                  double slack) {
  const double va = std::max(a.feasibility - epsilon - slack, 0.0);
  const double vb = std::max(b.feasibility - epsilon - slack, 0.0);
  if (va != vb) return va < vb;
  if (a.objective != b.objective) return a.objective < b.objective;
  return a.index < b.index;
}

namespace {

// One outer run from a given initial sign/phase pattern.
template <typename Scalar>
struct OuterRun {
  Vec<Scalar> x;
  int outer_iters = 0;
  int inner_iters = 0;
  int nonconverged = 0;
  Termination termination = Termination::kMaxOuter;
  std::vector<TracePoint> trace;
};

template <typename Scalar>
class AlternatingSolver {
 public:
  AlternatingSolver(const MeasurementEnsemble& ens, const RVector& y_obs, double epsilon,
                    const SolverOptions& opts)
      : ens_(ens),
        A_(narrow<Scalar>(ens.A())),
        b_(narrow<Scalar>(ens.b())),
        engine_(A_),
        opts_(opts),
        epsilon_(epsilon),
        y_obs_(y_obs) {
    if (opts.mode == SolveMode::kIntensity) {
      ymag_ = y_obs.cwiseMax(0.0).cwiseSqrt();
      for (Eigen::Index j = 0; j < y_obs.size(); ++j) {
        if (y_obs(j) < 0.0) ++clipped_;
      }
      const double ymax = ymag_.size() ? ymag_.maxCoeff() : 0.0;
      // |z|^2 - yt = (|z| - sqrt(yt)) (|z| + sqrt(yt)), bounded through the
      // largest magnitude.
      eps_inner_ = ymax > 0.0 ? epsilon / (2.0 * ymax) : epsilon;
    } else {
      ymag_ = y_obs;
      eps_inner_ = epsilon;
    }
    Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(A_);
    rank_ = qr.rank();
    if (rank_ < A_.rows()) {
      Mat<Scalar> Qfull = qr.householderQ();
      Q_ = Qfull.leftCols(rank_);
    }
  }

  double feasibility(const CVector& x) const {
    return opts_.mode == SolveMode::kIntensity ? intensity_feasibility(ens_, x, y_obs_)
                                               : magnitude_feasibility(ens_, x, y_obs_);
  }

  int clipped() const { return clipped_; }

  Vec<Scalar> bias_pattern() const { return phase_of<Scalar>(b_); }

  Vec<Scalar> relaxation_pattern(int* inner_iters) const {
    const Eigen::VectorXd half_width = ymag_.cwiseMax(0.0);
    const admm::MagnitudeBoxProjector<Scalar> proj{&b_, &half_width, eps_inner_};
    admm::Settings settings{opts_.inner_max, std::max(opts_.inner_tol, 1e-7), opts_.penalty};
    const auto res = engine_.solve(proj, ymag_.norm() + b_.norm(), settings);
    *inner_iters += res.iterations;
    return phase_of<Scalar>(A_ * res.v + b_);
  }

  Vec<Scalar> random_pattern(Rng& rng) const {
    Vec<Scalar> u(A_.rows());
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      if constexpr (admm::is_complex<Scalar>::value) {
        u(j) = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform01());
      } else {
        u(j) = rng.sign();
      }
    }
    return u;
  }

  OuterRun<Scalar> run(Vec<Scalar> u) const {
    OuterRun<Scalar> out;
    admm::State<Scalar> state;
    admm::Settings settings{opts_.inner_max, opts_.inner_tol, opts_.penalty};
    double tau = opts_.relax_factor;
    const double phase_tol = admm::is_complex<Scalar>::value ? 10.0 * opts_.inner_tol : 0.5;
    double last_delta = 0.0;
    bool fixed = false;
    for (int it = 0; it < opts_.outer_max; ++it) {
      const Vec<Scalar> t = u.cwiseProduct(ymag_.template cast<Scalar>()) - b_;
      const double delta = ls_residual(t);
      last_delta = delta;
      const double tight = std::max(eps_inner_, delta * (1.0 + 1e-9));
      const double radius = delta > eps_inner_ ? std::max(eps_inner_, (1.0 + tau) * delta) : tight;
      const admm::BallProjector<Scalar> proj{&t, radius};
      const auto res = engine_.solve(proj, t.norm(), settings, &state);
      out.inner_iters += res.iterations;
      if (!res.converged) ++out.nonconverged;
      Vec<Scalar> x = res.v;
      polish_on_support<Scalar>(A_, t, radius, opts_.inner_tol, x);
      out.x = x;
      out.outer_iters = it + 1;
      const CVector xw = widen<Scalar>(x);
      out.trace.push_back({x.cwiseAbs().sum(), feasibility(xw)});

      const Vec<Scalar> u_new = phase_of<Scalar>(A_ * x + b_);
      const double change = (u_new - u).cwiseAbs().maxCoeff();
      if (change <= phase_tol) {
        if (radius > tight) {
          tau = 0.0;
          continue;
        }
        fixed = true;
        break;
      }
      u = u_new;
    }
    refine_on_support(out.x);
    const double slack = 1e-6 * (1.0 + ymag_.norm());
    if (last_delta > eps_inner_ + slack) {
      out.termination = Termination::kInfeasibleInner;
    } else {
      out.termination = fixed ? Termination::kSignFixedPoint : Termination::kMaxOuter;
    }
    return out;
  }

  SolveReport solve() const {
    SolveReport report;
    report.epsilon = epsilon_;
    report.clipped_intensities = clipped_;
    const double slack = 1e-8 * (1.0 + y_obs_.norm());
    std::vector<OuterRun<Scalar>> runs;
    const SeedSpec restart_seed{opts_.seed, {std::string("restart")}};
    for (int r = 0; r < opts_.restarts; ++r) {
      RestartSummary summary;
      summary.index = r;
      Vec<Scalar> u;
      int pre_iters = 0;
      if (r == 0) {
        summary.start = "bias";
        u = bias_pattern();
      } else if (r == 1 && opts_.relaxation_start) {
        summary.start = "relaxation";
        u = relaxation_pattern(&pre_iters);
      } else {
        summary.start = "random";
        Rng rng(restart_seed.child(static_cast<std::int64_t>(r)));
        u = random_pattern(rng);
      }
      OuterRun<Scalar> run_out = run(std::move(u));
      run_out.inner_iters += pre_iters;
      const CVector xw = widen<Scalar>(run_out.x);
      summary.objective = xw.cwiseAbs().sum();
      summary.feasibility = feasibility(xw);
      summary.outer_iters = run_out.outer_iters;
      summary.termination = run_out.termination;
      report.restarts.push_back(summary);
      report.inner_iters_total += run_out.inner_iters;
      report.inner_nonconverged += run_out.nonconverged;
      runs.push_back(std::move(run_out));
    }
    std::size_t best = 0;
    for (std::size_t r = 1; r < report.restarts.size(); ++r) {
      if (restart_less(report.restarts[r], report.restarts[best], epsilon_, slack)) best = r;
    }
    const OuterRun<Scalar>& win = runs[best];
    const CVector xw = widen<Scalar>(win.x);
    report.xhat = SignalVector(ens_.field(), xw);
    report.objective = xw.cwiseAbs().sum();
    report.feasibility = feasibility(xw);
    report.outer_iters = win.outer_iters;
    report.restart_index_of_best = static_cast<int>(best);
    report.termination = win.termination;
    report.trace = win.trace;
    return report;
  }

 private:
  // Alternating projections with the support frozen: u <- phase(Ax + b),
  // x_S <- argmin ||A_S z - (u o y - b)||. Removes the residual left by the
  // outer stopping tolerance; a step is kept only if it lowers the
  // feasibility and keeps the l1 norm within the polish tolerance.
  void refine_on_support(Vec<Scalar>& x) const {
    const Eigen::Index n = A_.cols();
    const Eigen::Index m = A_.rows();
    double vmax = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) vmax = std::max(vmax, std::abs(x(i)));
    if (vmax == 0.0) return;
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(x(i)) > 1e-8 * vmax) support.push_back(i);
    }
    const auto s = static_cast<Eigen::Index>(support.size());
    if (s >= m) return;
    Mat<Scalar> As(m, s);
    for (Eigen::Index j = 0; j < s; ++j) As.col(j) = A_.col(support[static_cast<std::size_t>(j)]);
    const Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(As);
    if (qr.rank() < s) return;
    const double l1_now = x.cwiseAbs().sum();
    const double l1_cap = l1_now + 1e-6 * (1.0 + l1_now);
    double feas = feasibility(widen<Scalar>(x));
    Vec<Scalar> cand = Vec<Scalar>::Zero(n);
    for (int it = 0; it < 500 && feas > 0.0; ++it) {
      const Vec<Scalar> u = phase_of<Scalar>(A_ * x + b_);
      const Vec<Scalar> t = u.cwiseProduct(ymag_.template cast<Scalar>()) - b_;
      const Vec<Scalar> z = qr.solve(t);
      cand.setZero();
      for (Eigen::Index j = 0; j < s; ++j) cand(support[static_cast<std::size_t>(j)]) = z(j);
      const double f = feasibility(widen<Scalar>(cand));
      if (!(f < feas) || cand.cwiseAbs().sum() > l1_cap) return;
      x = cand;
      feas = f;
    }
  }

  double ls_residual(const Vec<Scalar>& t) const {
    if (rank_ >= A_.rows()) return 0.0;
    const Vec<Scalar> proj = Q_ * (Q_.adjoint() * t);
    return (t - proj).norm();
  }

  const MeasurementEnsemble& ens_;
  Mat<Scalar> A_;
  Vec<Scalar> b_;
  admm::L1Admm<Scalar> engine_;
  SolverOptions opts_;
  double epsilon_;
  RVector y_obs_;
  RVector ymag_;
  double eps_inner_ = 0.0;
  int clipped_ = 0;
  Eigen::Index rank_ = 0;
  Mat<Scalar> Q_;
};

void check_inputs(const MeasurementEnsemble& ens, const RVector& y, double epsilon,
                  const SolverOptions& opts) {
  if (y.size() != ens.m()) throw DimensionError("observation length does not match m");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  opts.validate();
}

}  // namespace

SolveReport solve_affine_pr_real(const MeasurementEnsemble& ens, const RVector& y,
                                 double epsilon, const SolverOptions& opts) {
  if (ens.field() != Field::kReal) throw FieldError("real solver needs a real ensemble");
  check_inputs(ens, y, epsilon, opts);
  return AlternatingSolver<double>(ens, y, epsilon, opts).solve();
}

SolveReport solve_affine_pr_complex(const MeasurementEnsemble& ens, const RVector& y,
                                    double epsilon, const SolverOptions& opts) {
  if (ens.field() != Field::kComplex) throw FieldError("complex solver needs a complex ensemble");
  check_inputs(ens, y, epsilon, opts);
  return AlternatingSolver<cplx>(ens, y, epsilon, opts).solve();
}

SolveReport solve_affine_pr(const MeasurementEnsemble& ens, const RVector& y,
                            double epsilon, const SolverOptions& opts) {
  return ens.field() == Field::kReal ? solve_affine_pr_real(ens, y, epsilon, opts)
                                     : solve_affine_pr_complex(ens, y, epsilon, opts);
}

}  // namespace apr
