#include "apr/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace apr {

using nlohmann::json;

std::string to_string(ExperimentKind e) {
  switch (e) {
    case ExperimentKind::kPhaseGrid: return "phase_grid";
    case ExperimentKind::kNoiseCurve: return "noise_curve";
    case ExperimentKind::kImpossibility: return "impossibility";
    case ExperimentKind::kSrip: return "srip";
    case ExperimentKind::kRipmap: return "ripmap";
    case ExperimentKind::kLemmaSuite: return "lemma_suite";
  }
  return "phase_grid";
}

ExperimentKind experiment_from_string(const std::string& s) {
  for (auto e : {ExperimentKind::kPhaseGrid, ExperimentKind::kNoiseCurve,
                 ExperimentKind::kImpossibility, ExperimentKind::kSrip, ExperimentKind::kRipmap,
                 ExperimentKind::kLemmaSuite}) {
    if (to_string(e) == s) return e;
  }
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

SolverOptions solver_options_from_json(const json& j) {
  reject_unknown(j,
                 {"outer_max", "inner_max", "inner_tol", "restarts", "penalty", "success_tol",
                  "mode", "relaxation_start", "relax_factor", "seed"},
                 "solver");
  SolverOptions o;
  read_opt(j, "outer_max", o.outer_max);
  read_opt(j, "inner_max", o.inner_max);
  read_opt(j, "inner_tol", o.inner_tol);
  read_opt(j, "restarts", o.restarts);
  read_opt(j, "penalty", o.penalty);
  read_opt(j, "success_tol", o.success_tol);
  if (j.contains("mode")) o.mode = solve_mode_from_string(j.at("mode").get<std::string>());
  read_opt(j, "relaxation_start", o.relaxation_start);
  read_opt(j, "relax_factor", o.relax_factor);
  read_opt(j, "seed", o.seed);
  o.validate();
  return o;
}

json solver_options_to_json(const SolverOptions& o) {
  return json{{"outer_max", o.outer_max},       {"inner_max", o.inner_max},
              {"inner_tol", o.inner_tol},       {"restarts", o.restarts},
              {"penalty", o.penalty},           {"success_tol", o.success_tol},
              {"mode", to_string(o.mode)},      {"relaxation_start", o.relaxation_start},
              {"relax_factor", o.relax_factor}, {"seed", o.seed}};
}

void ExperimentConfig::validate() const {
  if (n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (k_list.empty() || m_list.empty() || epsilon_list.empty()) {
    throw std::invalid_argument("config: k_list, m_list and epsilon_list must be nonempty");
  }
  if (trials_per_cell < 1) throw std::invalid_argument("config: trials_per_cell must be >= 1");
  for (int k : k_list) {
    if (k < 1 || k > n) throw std::invalid_argument("config: k = " + std::to_string(k) + " outside [1, n]");
  }
  for (int m : m_list) {
    if (m < 1) throw std::invalid_argument("config: m must be >= 1");
  }
  for (double e : epsilon_list) {
    if (!(e >= 0.0)) throw std::invalid_argument("config: epsilon values must be >= 0");
  }
  if (!std::is_sorted(epsilon_list.begin(), epsilon_list.end())) {
    throw std::invalid_argument("config: epsilon_list must be ascending");
  }
  if (bias.kind != "constant" && bias.kind != "complex_gaussian" && bias.kind != "file") {
    throw std::invalid_argument("config: unknown bias kind '" + bias.kind + "'");
  }
  if (bias.kind == "constant" && !(bias.c > 0.0)) {
    throw std::invalid_argument("config: constant bias needs c > 0");
  }
  if (bias.kind == "constant" && field == Field::kComplex) {
    throw std::invalid_argument("config: constant bias is for the real field");
  }
  if (bias.kind == "complex_gaussian" && field == Field::kReal) {
    throw std::invalid_argument("config: complex_gaussian bias is for the complex field");
  }
  if (bias.kind == "file" && bias.path.empty()) {
    throw std::invalid_argument("config: file bias needs a path");
  }
  if (experiment == ExperimentKind::kImpossibility) {
    if (field != Field::kReal) throw std::invalid_argument("config: impossibility demo is real-only");
    for (int m : m_list) {
      if (m > n) throw std::invalid_argument("config: impossibility demo needs m <= n");
    }
    if (r_list.empty()) throw std::invalid_argument("config: r_list must be nonempty");
  }
  if (samples < 1000) throw std::invalid_argument("config: samples must be >= 1000");
  solver.validate();
}

ExperimentConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"experiment", "field", "n", "k_list", "m_list", "trials_per_cell",
                  "epsilon_list", "bias", "master_seed", "solver", "output_path", "amplitude",
                  "r_list", "samples", "timing"},
                 "config");
  ExperimentConfig c;
  c.experiment = experiment_from_string(j.at("experiment").get<std::string>());
  if (j.contains("field")) c.field = field_from_string(j.at("field").get<std::string>());
  c.bias.kind = c.field == Field::kReal ? "constant" : "complex_gaussian";
  read_opt(j, "n", c.n);
  read_opt(j, "k_list", c.k_list);
  read_opt(j, "m_list", c.m_list);
  read_opt(j, "trials_per_cell", c.trials_per_cell);
  read_opt(j, "epsilon_list", c.epsilon_list);
  if (j.contains("bias")) {
    const json& b = j.at("bias");
    reject_unknown(b, {"kind", "c", "path"}, "bias");
    read_opt(b, "kind", c.bias.kind);
    read_opt(b, "c", c.bias.c);
    read_opt(b, "path", c.bias.path);
  }
  read_opt(j, "master_seed", c.master_seed);
  if (j.contains("solver")) c.solver = solver_options_from_json(j.at("solver"));
  read_opt(j, "output_path", c.output_path);
  if (j.contains("amplitude")) c.amplitude = amplitude_from_string(j.at("amplitude").get<std::string>());
  read_opt(j, "r_list", c.r_list);
  read_opt(j, "samples", c.samples);
  read_opt(j, "timing", c.timing);
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return json{{"experiment", to_string(c.experiment)},
              {"field", to_string(c.field)},
              {"n", c.n},
              {"k_list", c.k_list},
              {"m_list", c.m_list},
              {"trials_per_cell", c.trials_per_cell},
              {"epsilon_list", c.epsilon_list},
              {"bias", {{"kind", c.bias.kind}, {"c", c.bias.c}, {"path", c.bias.path}}},
              {"master_seed", c.master_seed},
              {"solver", solver_options_to_json(c.solver)},
              {"output_path", c.output_path},
              {"amplitude", to_string(c.amplitude)},
              {"r_list", c.r_list},
              {"samples", c.samples},
              {"timing", c.timing}};
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& ex) {
    throw std::invalid_argument("config '" + path + "': " + ex.what());
  }
  return config_from_json(j);
}

CVector make_bias(const BiasSpec& spec, Field field, Eigen::Index m, const SeedSpec& seed) {
  if (spec.kind == "constant") return gen_bias_real(m, spec.c);
  if (spec.kind == "complex_gaussian") return gen_bias_complex(m, seed);
  std::ifstream in(spec.path);
  if (!in) throw std::runtime_error("cannot open bias file '" + spec.path + "'");
  const json j = json::parse(in);
  CVector b;
  if (j.is_array()) {
    b.resize(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) b(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  } else {
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != im.size()) throw DimensionError("bias file: re and im lengths differ");
    b.resize(static_cast<Eigen::Index>(re.size()));
    for (std::size_t i = 0; i < re.size(); ++i) b(static_cast<Eigen::Index>(i)) = cplx(re[i], im[i]);
  }
  if (b.size() != m) throw DimensionError("bias file: length does not match m");
  if (field == Field::kReal && b.imag().cwiseAbs().maxCoeff() != 0.0) {
    throw FieldError("bias file: complex entries for a real experiment");
  }
  return b;
}

}  // namespace apr
