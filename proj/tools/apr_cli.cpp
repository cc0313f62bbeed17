// Command-line front end: instance generation, single solves and the batch
// experiments. Primary outputs go to --out (or stdout) as CSV or JSON.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "apr/config.hpp"
#include "apr/experiments.hpp"
#include "apr/instance_io.hpp"
#include "apr/rng.hpp"
#include "apr/solver.hpp"

namespace {

using nlohmann::json;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  std::string format = "csv";
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + g.out + "'");
  f << text;
}

// Rows of a header-first CSV as an array of objects; numeric cells become
// numbers, "NA" becomes null.
json csv_to_json(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> keys;
  {
    std::istringstream hs(line);
    std::string k;
    while (std::getline(hs, k, ',')) keys.push_back(k);
  }
  json rows = json::array();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    json row = json::object();
    for (std::size_t i = 0; std::getline(ls, cell, ',') && i < keys.size(); ++i) {
      if (cell == "NA") {
        row[keys[i]] = nullptr;
        continue;
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        row[keys[i]] = used == cell.size() ? json(v) : json(cell);
      } catch (const std::exception&) {
        row[keys[i]] = cell;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

apr::ExperimentConfig resolve_config(const Globals& g, apr::ExperimentKind kind) {
  apr::ExperimentConfig cfg;
  if (!g.config_path.empty()) {
    cfg = apr::load_config(g.config_path);
    if (cfg.experiment != kind) {
      throw std::invalid_argument("config describes '" + apr::to_string(cfg.experiment) +
                                  "', not '" + apr::to_string(kind) + "'");
    }
  } else {
    cfg.experiment = kind;
  }
  if (g.seed) cfg.master_seed = *g.seed;
  cfg.validate();
  return cfg;
}

std::string output_path(const Globals& g, const apr::ExperimentConfig& cfg) {
  return g.out.empty() ? cfg.output_path : g.out;
}

void emit_experiment(const Globals& g, const apr::ExperimentConfig& cfg, const std::string& csv) {
  Globals target = g;
  target.out = output_path(g, cfg);
  if (g.format == "json") {
    emit(target, json{{"config", apr::config_to_json(cfg)}, {"rows", csv_to_json(csv)}}.dump(2) + "\n");
  } else {
    emit(target, csv);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse affine phase retrieval: instances, solver and verification experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Experiment config (JSON)");
  app.add_option("--seed", g.seed, "Master seed override");
  app.add_option("--out", g.out, "Output path (default: stdout)");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  // gen
  auto* gen = app.add_subcommand("gen", "Generate and save a problem instance");
  apr::InstanceRecipe recipe;
  std::string field = "real", amplitude = "gaussian", noise = "sphere";
  gen->add_option("--field", field)->check(CLI::IsMember({"real", "complex"}));
  gen->add_option("-m,--m", recipe.m)->required();
  gen->add_option("-n,--n", recipe.n)->required();
  gen->add_option("-k,--k", recipe.k)->required();
  gen->add_option("--amplitude", amplitude)->check(CLI::IsMember({"unit", "gaussian", "flat"}));
  gen->add_option("--bias-scale", recipe.bias_scale, "Real bias constant c");
  gen->add_option("--noise-budget", recipe.noise_budget);
  gen->add_option("--noise-model", noise)->check(CLI::IsMember({"sphere", "gaussian_clipped"}));
  gen->add_flag("--intensity", recipe.with_intensity, "Also record intensity observations");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve a saved instance, print a JSON report");
  std::string instance_path;
  double epsilon = 0.0;
  apr::SolverOptions opts;
  std::string mode = "magnitude";
  solve->add_option("--instance", instance_path)->required();
  solve->add_option("--epsilon", epsilon);
  solve->add_option("--restarts", opts.restarts);
  solve->add_option("--outer-max", opts.outer_max);
  solve->add_option("--inner-max", opts.inner_max);
  solve->add_option("--inner-tol", opts.inner_tol);
  solve->add_option("--relax-factor", opts.relax_factor);
  solve->add_option("--mode", mode)->check(CLI::IsMember({"magnitude", "intensity"}));

  auto* srip = app.add_subcommand("srip", "SRIP profiles of A and [A b]");
  auto* ripmap = app.add_subcommand("ripmap", "Lifted-map l1/Frobenius ratio band");
  auto* lemma = app.add_subcommand("lemma", "Lemma property checks");
  auto* grid = app.add_subcommand("phase-grid", "Phase-transition grid (resumable)");
  auto* noisec = app.add_subcommand("noise-curve", "Error versus noise level");
  auto* imposs = app.add_subcommand("impossibility", "Measurement-collision demonstration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      recipe.field = apr::field_from_string(field);
      recipe.amplitude = apr::amplitude_from_string(amplitude);
      recipe.noise = apr::noise_from_string(noise);
      recipe.master_seed = g.seed.value_or(0);
      if (g.out.empty()) throw std::invalid_argument("gen needs --out");
      apr::save_instance(apr::make_instance(recipe), g.out);
    } else if (solve->parsed()) {
      const apr::ProblemInstance inst = apr::load_instance(instance_path);
      opts.mode = apr::solve_mode_from_string(mode);
      opts.seed = g.seed.value_or(0);
      const bool intensity = opts.mode == apr::SolveMode::kIntensity;
      if (intensity && !inst.ytilde) throw std::invalid_argument("instance has no intensity data");
      const apr::SolveReport rep =
          apr::solve_affine_pr(inst.ensemble, intensity ? *inst.ytilde : inst.y, epsilon, opts);
      emit(g, apr::report_to_json(rep, inst.seed_meta, &inst.x0).dump(2) + "\n");
    } else if (srip->parsed()) {
      const auto cfg = resolve_config(g, apr::ExperimentKind::kSrip);
      emit_experiment(g, cfg, apr::run_srip_experiment(cfg, g.threads));
    } else if (ripmap->parsed()) {
      const auto cfg = resolve_config(g, apr::ExperimentKind::kRipmap);
      emit_experiment(g, cfg, apr::run_ripmap_experiment(cfg, g.threads));
    } else if (lemma->parsed()) {
      const auto cfg = resolve_config(g, apr::ExperimentKind::kLemmaSuite);
      emit_experiment(g, cfg, apr::run_lemma_suite(cfg, g.threads));
    } else if (grid->parsed()) {
      const auto cfg = resolve_config(g, apr::ExperimentKind::kPhaseGrid);
      const std::string path = output_path(g, cfg);
      if (g.format == "csv" && !path.empty()) {
        apr::run_phase_grid(cfg, g.threads, path);  // streams rows, resumes partial files
      } else {
        std::string csv = std::string(apr::kPhaseGridHeader) + "\n";
        for (const auto& c : apr::run_phase_grid(cfg, g.threads)) csv += apr::phase_grid_row(c) + "\n";
        emit_experiment(g, cfg, csv);
      }
    } else if (noisec->parsed()) {
      const auto cfg = resolve_config(g, apr::ExperimentKind::kNoiseCurve);
      const auto res = apr::run_noise_curve(cfg, g.threads);
      if (g.format == "json") {
        Globals target = g;
        target.out = output_path(g, cfg);
        emit(target, json{{"config", apr::config_to_json(cfg)},
                          {"rows", csv_to_json(apr::noise_curve_csv(res))},
                          {"fit", {{"slope", res.slope}, {"r2", res.r2}}}}
                             .dump(2) + "\n");
      } else {
        emit_experiment(g, cfg, apr::noise_curve_csv(res));
        std::cerr << "slope=" << apr::format_number(res.slope)
                  << " r2=" << apr::format_number(res.r2) << "\n";
      }
    } else if (imposs->parsed()) {
      const auto cfg = resolve_config(g, apr::ExperimentKind::kImpossibility);
      const auto rep = apr::run_impossibility_demo(cfg, g.threads);
      emit_experiment(g, cfg, apr::impossibility_csv(rep));
      std::cerr << "max_collision_residual=" << apr::format_number(rep.max_collision_residual)
                << " alias_growth=" << apr::format_number(rep.alias_growth) << "\n";
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
