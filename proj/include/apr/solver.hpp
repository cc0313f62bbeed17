#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "apr/model.hpp"

namespace apr {

enum class SolveMode { kMagnitude, kIntensity };
enum class Termination { kSignFixedPoint, kMaxOuter, kInfeasibleInner };

std::string to_string(SolveMode m);
SolveMode solve_mode_from_string(const std::string& s);
std::string to_string(Termination t);

struct SolverOptions {
  int outer_max = 100;
  int inner_max = 2000;
  double inner_tol = 1e-9;
  int restarts = 10;
  double penalty = 1.0;
  double success_tol = 1e-5;
  SolveMode mode = SolveMode::kMagnitude;

  // Start from the sign/phase pattern of the convex relaxation
  // { x : |Ax + b| <= y } (second start, after the bias pattern).
  bool relaxation_start = true;
  // While the sign-fixed subproblem is infeasible, its radius is widened to
  // (1 + relax_factor) times the least-squares residual until the pattern
  // settles; then the tight radius is used.
  double relax_factor = 1.0;
  // Seed of the random restart stream.
  std::uint64_t seed = 0;

  void validate() const;
};

struct BpdnResult {
  CVector x;
  double objective = 0.0;
  double residual = 0.0;  // ||Dx - c||_2
  int iterations = 0;
  bool converged = false;
  bool polished = false;
};

// min ||x||_1  s.t.  ||Dx - c||_2 <= epsilon, by ADMM over the splitting
// x = v (l1 prox), Dx = r (projection onto the epsilon-ball around c).
// Real data are solved in real arithmetic.
BpdnResult bpdn(const CMatrix& D, const CVector& c, double epsilon,
                const SolverOptions& opts = {});

struct OracleResult {
  double objective = 0.0;
  RVector witness;
};

// Exact min ||x||_1 s.t. Dx = c by enumerating supports of size <= m.
// Real data only, n <= 8, m <= n.
OracleResult brute_force_bp_oracle(const RMatrix& D, const RVector& c);

struct TracePoint {
  double objective = 0.0;
  double feasibility = 0.0;
};

struct RestartSummary {
  int index = 0;
  std::string start;  // "bias", "relaxation" or "random"
  double objective = 0.0;
  double feasibility = 0.0;
  int outer_iters = 0;
  Termination termination = Termination::kMaxOuter;
};

struct SolveReport {
  SignalVector xhat;
  double objective = 0.0;
  double feasibility = 0.0;
  double epsilon = 0.0;
  int outer_iters = 0;
  int inner_iters_total = 0;
  int restart_index_of_best = 0;
  int inner_nonconverged = 0;
  int clipped_intensities = 0;
  Termination termination = Termination::kMaxOuter;
  std::vector<TracePoint> trace;
  std::vector<RestartSummary> restarts;
};

// Magnitude feasibility || |A x + b| - y ||_2.
double magnitude_feasibility(const MeasurementEnsemble& ens, const CVector& x,
                             const RVector& y);
// Intensity feasibility || A'(x') - ytilde ||_2.
double intensity_feasibility(const MeasurementEnsemble& ens, const CVector& x,
                             const RVector& ytilde);

// Alternating sign scheme for real data; y = |Ax0 + b| + w.
SolveReport solve_affine_pr_real(const MeasurementEnsemble& ens, const RVector& y,
                                 double epsilon, const SolverOptions& opts = {});

// Alternating phase scheme for complex data. In intensity mode `y` holds the
// intensity observations ytilde.
SolveReport solve_affine_pr_complex(const MeasurementEnsemble& ens, const RVector& y,
                                    double epsilon, const SolverOptions& opts = {});

// Dispatches on the ensemble field.
SolveReport solve_affine_pr(const MeasurementEnsemble& ens, const RVector& y,
                            double epsilon, const SolverOptions& opts = {});

// Lexicographic restart order: (max(feasibility - epsilon - slack, 0), objective).
bool restart_less(const RestartSummary& a, const RestartSummary& b, double epsilon,
                  double slack);

}  // namespace apr
