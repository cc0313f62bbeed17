#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "apr/config.hpp"
#include "apr/model.hpp"
#include "apr/solver.hpp"

namespace apr {

inline constexpr double kWilsonZ95 = 1.959963984540054;

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

WilsonInterval wilson_interval(int successes, int trials, double z = kWilsonZ95);

// Runs body(0..count-1) on `threads` workers; each index runs exactly once.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

// %.12g, the number format of every CSV the harness writes.
std::string format_number(double v);

struct TrialOutcome {
  int trial = 0;
  ErrorMetrics metrics;
  double x0_norm = 0.0;
  double objective_gap = 0.0;  // ||xhat||_1 - ||x0||_1
  bool success = false;
  Termination termination = Termination::kMaxOuter;
};

struct CellResult {
  int m = 0;
  int k = 0;
  double epsilon = 0.0;
  int trial_count = 0;
  int success_count = 0;
  WilsonInterval wilson;
  std::optional<double> median_plain_error;
  std::optional<double> median_global_phase_error;
  std::optional<double> median_objective_gap;
  long long wall_time_ms = 0;
  std::vector<TrialOutcome> trials;  // empty for rows restored from a CSV
};

// Builds trial `trial` of cell (m, k) with noise budget epsilon; streams are
// derived from (master_seed, tag, m, k, trial).
ProblemInstance make_trial_instance(const ExperimentConfig& cfg, const std::string& tag, int m,
                                    int k, double epsilon, int trial);

// Solves one instance and scores it: relative plain error <= success_tol for
// real data, global phase error <= success_tol (||x0|| + 1) for complex data.
TrialOutcome run_trial(const ExperimentConfig& cfg, const ProblemInstance& inst, double epsilon,
                       int trial);

CellResult summarize_cell(int m, int k, double epsilon, std::vector<TrialOutcome> trials,
                          long long wall_ms);

inline const char* kPhaseGridHeader =
    "m,k,trials,successes,wilson_lo,wilson_hi,median_err,median_phase_err,wall_ms";

std::string phase_grid_row(const CellResult& c);

// Cells in m-major, k-minor order. With `csv_path`, rows are appended and
// flushed one at a time; a file left by an interrupted run is resumed by
// keeping its valid prefix of rows and computing only the missing cells.
std::vector<CellResult> run_phase_grid(const ExperimentConfig& cfg, int threads = 1,
                                       const std::string& csv_path = "");

inline const char* kNoiseCurveHeader =
    "epsilon,m,k,trials,successes,median_err,median_rel_err,median_phase_err,wall_ms";

struct NoiseCurveResult {
  std::vector<CellResult> cells;
  std::vector<double> median_relative_error;
  double slope = 0.0;  // least-squares fit of median error = slope * epsilon
  double r2 = 0.0;     // centered coefficient of determination of that fit
};

// Fit through the origin; r2 = 1 - SS_res / SS_tot with SS_tot about the mean.
void fit_through_origin(const std::vector<double>& x, const std::vector<double>& y,
                        double* slope, double* r2);

NoiseCurveResult run_noise_curve(const ExperimentConfig& cfg, int threads = 1);
std::string noise_curve_csv(const NoiseCurveResult& r);

struct ImpossibilityPoint {
  double r = 0.0;
  double collision_residual = 0.0;  // max_j | |A(r x0 + 2 z0) - b| - |A(r x0) + b| |
  double alias_error = 0.0;         // median ||xhat - alias||, alias = -(r x0 + 2 z0)
  double sparse_error = 0.0;        // median ||xhat - r x0||
  double target_norm = 0.0;         // median ||r x0||
};

struct ImpossibilityReport {
  int m = 0;
  int n = 0;
  int k = 0;
  int trials = 0;
  std::vector<ImpossibilityPoint> points;
  double max_collision_residual = 0.0;
  double alias_growth = 0.0;  // alias error at the last r over the first
};

// b lies in range(A) whenever A has full row rank and m <= n; z0 is the
// least-norm solution of A z0 = b, and |A(-(r x0 + 2 z0)) + b| = |A(r x0) + b|,
// so the sparse r x0 and the dense alias are indistinguishable.
ImpossibilityReport run_impossibility_demo(const ExperimentConfig& cfg, int threads = 1);
std::string impossibility_csv(const ImpossibilityReport& r);

inline const char* kSripHeader =
    "m,k,trials,lower_hat,upper_hat,aug_lower_hat,aug_upper_hat";
std::string run_srip_experiment(const ExperimentConfig& cfg, int threads = 1);

inline const char* kRipmapHeader = "m,k,samples,ratio_min,ratio_max,band";
std::string run_ripmap_experiment(const ExperimentConfig& cfg, int threads = 1);

inline const char* kLemmaHeader = "check,cases,violations,worst";
std::string run_lemma_suite(const ExperimentConfig& cfg, int threads = 1);

nlohmann::json cell_to_json(const CellResult& c);

}  // namespace apr
