#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "apr/model.hpp"

namespace apr {

using StreamLabel = std::variant<std::int64_t, std::string>;

// splitmix64 finalizer: a bijective 64-bit avalanche mix.
std::uint64_t mix64(std::uint64_t z);

// Identifies one consumer's random stream. Streams for trials, cells and
// restarts are derived from (master_seed, labels) without shared state.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::vector<StreamLabel> labels;

  SeedSpec child(StreamLabel label) const;
  std::uint64_t derive() const;
};

// Deterministic scalar stream. Only within-build reproducibility is
// promised; the Gaussian transform is Marsaglia's polar method.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  explicit Rng(const SeedSpec& spec) : Rng(spec.derive()) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();                     // [0, 1)
  std::uint64_t uniform_index(std::uint64_t bound);  // [0, bound)
  double normal();                        // N(0, 1)
  cplx complex_normal();                  // real, imag ~ N(0, 1/2)
  double sign() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class AmplitudeModel { kUnit, kGaussian, kFlat };
enum class NoiseModel { kSphere, kGaussianClipped };

std::string to_string(AmplitudeModel a);
AmplitudeModel amplitude_from_string(const std::string& s);
std::string to_string(NoiseModel n);
NoiseModel noise_from_string(const std::string& s);

// Entries i.i.d. N(0, 1/m).
CMatrix gen_real_gaussian_matrix(Eigen::Index m, Eigen::Index n, const SeedSpec& seed);

// Entries i.i.d. with independent N(0, 1/2) real and imaginary parts.
CMatrix gen_complex_gaussian_matrix(Eigen::Index m, Eigen::Index n, const SeedSpec& seed);

// b = c * 1_m / sqrt(m).
CVector gen_bias_real(Eigen::Index m, double c);

// i.i.d. standard complex Gaussian entries, E|b_j|^2 = 1.
CVector gen_bias_complex(Eigen::Index m, const SeedSpec& seed);

// Exactly k nonzeros on a uniformly drawn k-subset.
SignalVector gen_sparse_signal(Eigen::Index n, Eigen::Index k, Field field,
                               AmplitudeModel amplitude, const SeedSpec& seed);

// Real noise with ||w||_2 <= epsilon_budget.
RVector gen_noise(Eigen::Index m, double epsilon_budget, NoiseModel model,
                  const SeedSpec& seed);

// Everything needed to rebuild a ProblemInstance bit-identically.
struct InstanceRecipe {
  Field field = Field::kReal;
  Eigen::Index m = 1;
  Eigen::Index n = 1;
  Eigen::Index k = 1;
  AmplitudeModel amplitude = AmplitudeModel::kGaussian;
  double bias_scale = 1.0;  // real field only
  double noise_budget = 0.0;
  NoiseModel noise = NoiseModel::kSphere;
  bool with_intensity = false;
  std::uint64_t master_seed = 0;
  std::vector<StreamLabel> labels;

  SeedMeta to_seed_meta() const;
  static InstanceRecipe from_seed_meta(const SeedMeta& meta);
};

ProblemInstance make_instance(const InstanceRecipe& recipe);

}  // namespace apr
