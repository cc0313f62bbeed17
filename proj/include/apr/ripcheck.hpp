#pragma once

#include "apr/model.hpp"
#include "apr/rng.hpp"

namespace apr {

struct SripExtremes {
  double low = 0.0;   // ceil(m/2) smallest |(Ax)_i|^2, over ||x||^2
  double high = 0.0;  // ||Ax||^2 / ||x||^2
};

// Exact min/max of ||A_I x||^2 / ||x||^2 over row subsets |I| >= m/2.
SripExtremes srip_extremes_for_x(const CMatrix& A, const CVector& x);

// A sampled object together with the ratio it attains. For SRIP profiles
// `x` is the (possibly augmented) test vector and `z` is empty; for lifted
// ratios H' is built from the pair (x, z).
struct RipWitness {
  CVector x;
  CVector z;
  double value = 0.0;
};

struct RipConfig {
  int k = 1;
  double subset_fraction = 0.5;
  bool augmented = false;  // profile of [A b] with a free last coordinate
  bool refined = false;
};

struct RipEstimate {
  double lower_hat = 0.0;
  double upper_hat = 0.0;
  int samples = 0;
  RipWitness witness_lower;
  RipWitness witness_upper;
  RipConfig config;
};

// Monte Carlo SRIP profile over unit k-sparse x with Gaussian amplitudes in
// the field of A. Whenever a draw sets a new record, it is improved by greedy
// support swaps (at most 50). The running extremes are therefore monotone in
// the number of trials for a fixed seed.
RipEstimate srip_profile(const CMatrix& A, int k, int trials, const SeedSpec& seed,
                         bool refine = true);

// Same for [A b] with test vectors (x; z), x k-sparse and z unrestricted.
RipEstimate srip_profile_augmented(const CMatrix& A, const CVector& b, int k, int trials,
                                   const SeedSpec& seed, bool refine = true);

// Entries of A'(H') for H' = [[H, h], [h^H, 0]], where row j of A is a_j^H:
// a_j^H H a_j + 2 Re(conj(b_j) a_j^H h). Throws unless H is Hermitian.
RVector lifted_map_apply(const CMatrix& A, const CVector& b, const CMatrix& H,
                         const CVector& h);

// ||H'||_F for the block matrix above.
double lifted_frobenius(const CMatrix& H, const CVector& h);

// (1/m) ||A'(H')||_1 / ||H'||_F for H = x x^H - z z^H, h = x - z.
double lifted_ratio(const CMatrix& A, const CVector& b, const CVector& x, const CVector& z);

// Samples the ratio above over k-sparse x, z whose supports are either shared
// or drawn independently (one fair coin per draw). Draws with
// ||H'||_F < 1e-12 are skipped; throws if every draw is degenerate.
RipEstimate rip_ratio_sample(const CMatrix& A, const CVector& b, int k, int trials,
                             const SeedSpec& seed);

// sup of sum_j b_j (a_j^T x) over unit k-sparse real x: the l2 norm of the k
// largest-magnitude entries of A^T b.
double crossterm_sup(const RMatrix& A, const RVector& b, int k);

}  // namespace apr
