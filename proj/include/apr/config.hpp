#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "apr/model.hpp"
#include "apr/rng.hpp"
#include "apr/solver.hpp"

namespace apr {

enum class ExperimentKind { kPhaseGrid, kNoiseCurve, kImpossibility, kSrip, kRipmap, kLemmaSuite };

std::string to_string(ExperimentKind e);
ExperimentKind experiment_from_string(const std::string& s);

struct BiasSpec {
  std::string kind = "constant";  // "constant", "complex_gaussian" or "file"
  double c = 1.0;                 // constant: b = c 1 / sqrt(m)
  std::string path;               // file: JSON array, or {"re": [...], "im": [...]}
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kPhaseGrid;
  Field field = Field::kReal;
  int n = 64;
  std::vector<int> k_list{3};
  std::vector<int> m_list{128};
  int trials_per_cell = 100;
  std::vector<double> epsilon_list{0.0};
  BiasSpec bias;
  std::uint64_t master_seed = 0;
  SolverOptions solver;
  std::string output_path;

  AmplitudeModel amplitude = AmplitudeModel::kGaussian;
  std::vector<double> r_list{1.0, 10.0, 100.0, 1000.0};  // impossibility sweep
  int samples = 100000;  // Monte Carlo draws per lemma case
  bool timing = false;   // record wall_ms; off keeps output byte-stable

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

SolverOptions solver_options_from_json(const nlohmann::json& j);
nlohmann::json solver_options_to_json(const SolverOptions& o);

// Bias vector of length m for the given spec; `seed` feeds the complex
// Gaussian generator.
CVector make_bias(const BiasSpec& spec, Field field, Eigen::Index m, const SeedSpec& seed);

}  // namespace apr
