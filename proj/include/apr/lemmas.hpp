#pragma once

#include <string>
#include <vector>

#include "apr/model.hpp"
#include "apr/rng.hpp"

namespace apr {

struct SparseDecomposition {
  std::vector<double> weights;
  std::vector<RVector> atoms;
  int k = 0;
  double theta = 0.0;
};

// Writes v as a convex combination of k-sparse atoms with entries bounded by
// theta and l1 norm at most ||v||_1. Requires ||v||_inf <= theta and
// ||v||_1 <= k theta.
SparseDecomposition sparse_convex_decompose(const RVector& v, int k, double theta);

struct DecompositionCheck {
  bool ok = true;
  std::string failure;  // first violated invariant, empty when ok
  double weight_sum_error = 0.0;
  double reconstruction_error = 0.0;
};

// Validates a decomposition of v against its invariants; independent of the
// constructor.
DecompositionCheck check_decomposition(const RVector& v, const SparseDecomposition& d);

struct LiftedDistance {
  double lhs = 0.0;  // ||u u^H - v v^H||_F
  double rhs = 0.0;  // ||u|| ||u - v|| / sqrt(2)
  bool holds = false;
};

// Requires <u, v> real and nonnegative (see phase_align).
LiftedDistance lifted_distance_check(const CVector& u, const CVector& v);

// e^{i phi} v with <u, e^{i phi} v> real and nonnegative; v itself when
// <u, v> = 0.
CVector phase_align(const CVector& u, const CVector& v);

struct MomentBound {
  double mc_mean = 0.0;
  double radius = 0.0;  // five standard errors
  double lower = 0.0;
  double upper = 0.0;
  bool holds_ci = false;
};

// Monte Carlo estimate of E|a^H H a + 2 Re(b a^H h)| for a with i.i.d.
// N(0, 1/2) + i N(0, 1/2) entries, against
//   (1/3) sqrt(||H||_F^2 + |b|^2 ||h||^2)  and  2 sqrt(3 ||H||_F^2 + |b|^2 ||h||^2).
// H must be Hermitian of rank at most 2; samples >= 1000.
MomentBound moment_bound_check(const CMatrix& H, const CVector& h, cplx b, int samples,
                               const SeedSpec& seed);

}  // namespace apr
