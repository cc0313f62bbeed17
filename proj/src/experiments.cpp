#include "apr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "apr/lemmas.hpp"
#include "apr/ripcheck.hpp"
#include "apr/rng.hpp"

namespace apr {

using nlohmann::json;

WilsonInterval wilson_interval(int successes, int trials, double z) {
  if (trials < 1 || successes < 0 || successes > trials) {
    throw std::invalid_argument("wilson_interval: need 0 <= successes <= trials, trials >= 1");
  }
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // The endpoints at p = 0 and p = 1 are exactly 0 and 1; rounding in
  // center - half would otherwise leave a residue of order 1e-17.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

std::optional<double> median_of(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double t) { return !std::isfinite(t); }), v.end());
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

using Clock = std::chrono::steady_clock;

long long elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

}  // namespace

ProblemInstance make_trial_instance(const ExperimentConfig& cfg, const std::string& tag, int m,
                                    int k, double epsilon, int trial) {
  InstanceRecipe r;
  r.field = cfg.field;
  r.m = m;
  r.n = cfg.n;
  r.k = k;
  r.amplitude = cfg.amplitude;
  r.bias_scale = cfg.bias.kind == "constant" ? cfg.bias.c : 1.0;
  r.noise_budget = epsilon;
  r.noise = NoiseModel::kSphere;
  r.with_intensity = cfg.solver.mode == SolveMode::kIntensity;
  r.master_seed = cfg.master_seed;
  r.labels = {tag, std::int64_t{m}, std::int64_t{k}, std::int64_t{trial}};
  ProblemInstance inst = make_instance(r);
  if (cfg.bias.kind == "file") {
    SeedMeta meta = inst.ensemble.seed_meta();
    meta.params["bias_file"] = cfg.bias.path;
    CVector b = make_bias(cfg.bias, cfg.field, m, SeedSpec{cfg.master_seed, r.labels});
    inst.ensemble = MeasurementEnsemble(cfg.field, inst.ensemble.A(), std::move(b), meta);
    inst.y = forward_model(inst.ensemble, inst.x0, inst.w);
    if (inst.ytilde) inst.ytilde = lifted_intensity(inst.ensemble, inst.x0) + inst.w;
    inst.seed_meta = meta;
  }
  return inst;
}

TrialOutcome run_trial(const ExperimentConfig& cfg, const ProblemInstance& inst, double epsilon,
                       int trial) {
  SolverOptions opts = cfg.solver;
  opts.seed = mix64(cfg.master_seed ^ mix64(static_cast<std::uint64_t>(trial) + 0x51ed));
  const bool intensity = opts.mode == SolveMode::kIntensity;
  const RVector& obs = intensity ? *inst.ytilde : inst.y;
  // The intensity budget covers ||w||_2 through |A'(x0') - ytilde| = |w|.
  const SolveReport rep = solve_affine_pr(inst.ensemble, obs, epsilon, opts);
  TrialOutcome out;
  out.trial = trial;
  out.metrics = error_metrics(rep.xhat, inst.x0);
  out.x0_norm = inst.x0.norm();
  out.objective_gap = rep.objective - inst.x0.l1_norm();
  out.termination = rep.termination;
  out.success = cfg.field == Field::kReal
                    ? out.metrics.relative_plain <= opts.success_tol
                    : out.metrics.global_phase <= opts.success_tol * (out.x0_norm + 1.0);
  return out;
}

CellResult summarize_cell(int m, int k, double epsilon, std::vector<TrialOutcome> trials,
                          long long wall_ms) {
  CellResult c;
  c.m = m;
  c.k = k;
  c.epsilon = epsilon;
  c.trial_count = static_cast<int>(trials.size());
  std::vector<double> plain, phase, gap;
  for (const auto& t : trials) {
    c.success_count += t.success ? 1 : 0;
    plain.push_back(t.metrics.plain_l2);
    phase.push_back(t.metrics.global_phase);
    gap.push_back(t.objective_gap);
  }
  c.wilson = wilson_interval(c.success_count, c.trial_count);
  c.median_plain_error = median_of(plain);
  c.median_global_phase_error = median_of(phase);
  c.median_objective_gap = median_of(gap);
  c.wall_time_ms = wall_ms;
  c.trials = std::move(trials);
  return c;
}

std::string phase_grid_row(const CellResult& c) {
  std::ostringstream os;
  os << c.m << ',' << c.k << ',' << c.trial_count << ',' << c.success_count << ','
     << format_number(c.wilson.lo) << ',' << format_number(c.wilson.hi) << ','
     << fmt_opt(c.median_plain_error) << ',' << fmt_opt(c.median_global_phase_error) << ','
     << c.wall_time_ms;
  return os.str();
}

namespace {

CellResult run_cell(const ExperimentConfig& cfg, const std::string& tag, int m, int k,
                    double epsilon, int threads) {
  const auto t0 = Clock::now();
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials_per_cell));
  parallel_for(cfg.trials_per_cell, threads, [&](int t) {
    const ProblemInstance inst = make_trial_instance(cfg, tag, m, k, epsilon, t);
    outcomes[static_cast<std::size_t>(t)] = run_trial(cfg, inst, epsilon, t);
  });
  return summarize_cell(m, k, epsilon, std::move(outcomes), cfg.timing ? elapsed_ms(t0) : 0);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s == "NA") return std::nullopt;
  return std::stod(s);
}

// Valid complete rows at the head of an existing grid CSV, in cell order.
std::vector<CellResult> read_completed_rows(const std::string& path,
                                            const std::vector<std::pair<int, int>>& cells) {
  std::vector<CellResult> done;
  std::ifstream in(path, std::ios::binary);
  if (!in) return done;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = content.find('\n');
  if (pos == std::string::npos || content.substr(0, pos) != kPhaseGridHeader) return done;
  ++pos;
  while (done.size() < cells.size()) {
    const std::size_t end = content.find('\n', pos);
    if (end == std::string::npos) break;  // partial last line
    const auto f = split_csv(content.substr(pos, end - pos));
    if (f.size() != 9) break;
    try {
      CellResult c;
      c.m = std::stoi(f[0]);
      c.k = std::stoi(f[1]);
      if (std::make_pair(c.m, c.k) != cells[done.size()]) break;
      c.trial_count = std::stoi(f[2]);
      c.success_count = std::stoi(f[3]);
      c.wilson = {std::stod(f[4]), std::stod(f[5])};
      c.median_plain_error = parse_opt(f[6]);
      c.median_global_phase_error = parse_opt(f[7]);
      c.wall_time_ms = std::stoll(f[8]);
      done.push_back(c);
    } catch (const std::exception&) {
      break;
    }
    pos = end + 1;
  }
  return done;
}

}  // namespace

std::vector<CellResult> run_phase_grid(const ExperimentConfig& cfg, int threads,
                                       const std::string& csv_path) {
  cfg.validate();
  std::vector<std::pair<int, int>> cells;
  for (int m : cfg.m_list) {
    for (int k : cfg.k_list) cells.emplace_back(m, k);
  }
  std::vector<CellResult> results;
  std::ofstream out;
  if (!csv_path.empty()) {
    results = read_completed_rows(csv_path, cells);
    std::ostringstream prefix;
    prefix << kPhaseGridHeader << '\n';
    for (const auto& c : results) prefix << phase_grid_row(c) << '\n';
    const std::string tmp = csv_path + ".tmp";
    {
      std::ofstream t(tmp, std::ios::binary | std::ios::trunc);
      t << prefix.str();
      if (!t.flush()) throw std::runtime_error("cannot write '" + tmp + "'");
    }
    std::filesystem::rename(tmp, csv_path);
    out.open(csv_path, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot append to '" + csv_path + "'");
  }
  for (std::size_t i = results.size(); i < cells.size(); ++i) {
    CellResult c = run_cell(cfg, "grid", cells[i].first, cells[i].second, 0.0, threads);
    if (out.is_open()) {
      out << phase_grid_row(c) << '\n';
      out.flush();
    }
    results.push_back(std::move(c));
  }
  return results;
}

void fit_through_origin(const std::vector<double>& x, const std::vector<double>& y,
                        double* slope, double* r2) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("fit: bad input sizes");
  double sxx = 0.0, sxy = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    ybar += y[i];
  }
  ybar /= static_cast<double>(y.size());
  const double s = sxx > 0.0 ? sxy / sxx : 0.0;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss_res += (y[i] - s * x[i]) * (y[i] - s * x[i]);
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  *slope = s;
  *r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
}

NoiseCurveResult run_noise_curve(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  NoiseCurveResult r;
  const int m = cfg.m_list.front();
  const int k = cfg.k_list.front();
  std::vector<double> eps, med;
  for (double e : cfg.epsilon_list) {
    CellResult c = run_cell(cfg, "noise", m, k, e, threads);
    std::vector<double> rel;
    for (const auto& t : c.trials) rel.push_back(t.metrics.relative_plain);
    r.median_relative_error.push_back(median_of(rel).value_or(NAN));
    eps.push_back(e);
    med.push_back(c.median_plain_error.value_or(NAN));
    r.cells.push_back(std::move(c));
  }
  fit_through_origin(eps, med, &r.slope, &r.r2);
  return r;
}

std::string noise_curve_csv(const NoiseCurveResult& r) {
  std::ostringstream os;
  os << kNoiseCurveHeader << '\n';
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const CellResult& c = r.cells[i];
    os << format_number(c.epsilon) << ',' << c.m << ',' << c.k << ',' << c.trial_count << ','
       << c.success_count << ',' << fmt_opt(c.median_plain_error) << ','
       << format_number(r.median_relative_error[i]) << ','
       << fmt_opt(c.median_global_phase_error) << ',' << c.wall_time_ms << '\n';
  }
  return os.str();
}

ImpossibilityReport run_impossibility_demo(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  ImpossibilityReport rep;
  rep.m = cfg.m_list.front();
  rep.n = cfg.n;
  rep.k = cfg.k_list.front();
  rep.trials = cfg.trials_per_cell;
  const std::size_t R = cfg.r_list.size();
  std::vector<std::vector<double>> alias(R), sparse(R), norms(R);
  std::vector<std::vector<double>> resid(R);
  for (std::size_t i = 0; i < R; ++i) {
    alias[i].resize(static_cast<std::size_t>(rep.trials));
    sparse[i].resize(static_cast<std::size_t>(rep.trials));
    norms[i].resize(static_cast<std::size_t>(rep.trials));
    resid[i].resize(static_cast<std::size_t>(rep.trials));
  }
  parallel_for(rep.trials, threads, [&](int t) {
    const ProblemInstance base = make_trial_instance(cfg, "impossibility", rep.m, rep.k, 0.0, t);
    const MeasurementEnsemble& ens = base.ensemble;
    const RMatrix A = ens.A().real();
    const RVector b = ens.b().real();
    Eigen::CompleteOrthogonalDecomposition<RMatrix> cod(A);
    if (cod.rank() < A.rows()) throw std::runtime_error("impossibility: A lacks full row rank");
    const RVector z0 = cod.solve(b);
    const RVector x0 = base.x0.real_part();
    SolverOptions opts = cfg.solver;
    opts.seed = mix64(cfg.master_seed ^ static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < R; ++i) {
      const double r = cfg.r_list[i];
      const RVector xr = r * x0;
      const RVector y = (A * xr + b).cwiseAbs();
      const RVector lhs = (A * (xr + 2.0 * z0) - b).cwiseAbs();
      const RVector alias_x = -(xr + 2.0 * z0);
      const SolveReport sol = solve_affine_pr_real(ens, y, 0.0, opts);
      const RVector xhat = sol.xhat.real_part();
      const auto ti = static_cast<std::size_t>(t);
      resid[i][ti] = (lhs - y).cwiseAbs().maxCoeff();
      alias[i][ti] = (xhat - alias_x).norm();
      sparse[i][ti] = (xhat - xr).norm();
      norms[i][ti] = xr.norm();
    }
  });
  for (std::size_t i = 0; i < R; ++i) {
    ImpossibilityPoint p;
    p.r = cfg.r_list[i];
    p.collision_residual = *std::max_element(resid[i].begin(), resid[i].end());
    p.alias_error = median_of(alias[i]).value_or(NAN);
    p.sparse_error = median_of(sparse[i]).value_or(NAN);
    p.target_norm = median_of(norms[i]).value_or(NAN);
    rep.max_collision_residual = std::max(rep.max_collision_residual, p.collision_residual);
    rep.points.push_back(p);
  }
  rep.alias_growth = rep.points.back().alias_error / rep.points.front().alias_error;
  return rep;
}

std::string impossibility_csv(const ImpossibilityReport& r) {
  std::ostringstream os;
  os << "r,m,n,k,trials,collision_residual,median_alias_err,median_sparse_err,median_target_norm\n";
  for (const auto& p : r.points) {
    os << format_number(p.r) << ',' << r.m << ',' << r.n << ',' << r.k << ',' << r.trials << ','
       << format_number(p.collision_residual) << ',' << format_number(p.alias_error) << ','
       << format_number(p.sparse_error) << ',' << format_number(p.target_norm) << '\n';
  }
  return os.str();
}

std::string run_srip_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  std::vector<std::pair<int, int>> cells;
  for (int m : cfg.m_list) {
    for (int k : cfg.k_list) cells.emplace_back(m, k);
  }
  std::vector<std::string> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), threads, [&](int i) {
    const auto [m, k] = cells[static_cast<std::size_t>(i)];
    const SeedSpec root{cfg.master_seed, {std::string("srip"), std::int64_t{m}, std::int64_t{k}}};
    const CMatrix A = cfg.field == Field::kReal ? gen_real_gaussian_matrix(m, cfg.n, root.child("A"))
                                                : gen_complex_gaussian_matrix(m, cfg.n, root.child("A"));
    const CVector b = make_bias(cfg.bias, cfg.field, m, root.child("b"));
    const RipEstimate plain = srip_profile(A, k, cfg.trials_per_cell, root.child("x"));
    const RipEstimate aug = srip_profile_augmented(A, b, k, cfg.trials_per_cell, root.child("xz"));
    std::ostringstream os;
    os << m << ',' << k << ',' << cfg.trials_per_cell << ',' << format_number(plain.lower_hat) << ','
       << format_number(plain.upper_hat) << ',' << format_number(aug.lower_hat) << ','
       << format_number(aug.upper_hat);
    rows[static_cast<std::size_t>(i)] = os.str();
  });
  std::string out = std::string(kSripHeader) + "\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

std::string run_ripmap_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  std::vector<std::pair<int, int>> cells;
  for (int m : cfg.m_list) {
    for (int k : cfg.k_list) cells.emplace_back(m, k);
  }
  std::vector<std::string> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), threads, [&](int i) {
    const auto [m, k] = cells[static_cast<std::size_t>(i)];
    const SeedSpec root{cfg.master_seed, {std::string("ripmap"), std::int64_t{m}, std::int64_t{k}}};
    const CMatrix A = cfg.field == Field::kReal ? gen_real_gaussian_matrix(m, cfg.n, root.child("A"))
                                                : gen_complex_gaussian_matrix(m, cfg.n, root.child("A"));
    const CVector b = make_bias(cfg.bias, cfg.field, m, root.child("b"));
    const RipEstimate est = rip_ratio_sample(A, b, k, cfg.trials_per_cell, root.child("H"));
    std::ostringstream os;
    os << m << ',' << k << ',' << est.samples << ',' << format_number(est.lower_hat) << ','
       << format_number(est.upper_hat) << ',' << format_number(est.upper_hat / est.lower_hat);
    rows[static_cast<std::size_t>(i)] = os.str();
  });
  std::string out = std::string(kRipmapHeader) + "\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

namespace {

CVector random_cvec(Rng& rng, Eigen::Index n) {
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.complex_normal();
  return v;
}

}  // namespace

std::string run_lemma_suite(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const int cases = cfg.trials_per_cell;
  std::ostringstream os;
  os << kLemmaHeader << '\n';

  // Convex decomposition: random v scaled into the admissible region.
  {
    std::vector<double> worst(static_cast<std::size_t>(cases), 0.0);
    std::vector<int> bad(static_cast<std::size_t>(cases), 0);
    parallel_for(cases, threads, [&](int c) {
      Rng rng(SeedSpec{cfg.master_seed, {std::string("suite_decompose"), std::int64_t{c}}});
      const auto n = static_cast<Eigen::Index>(2 + rng.uniform_index(15));
      const int k = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      const double theta = 0.1 + 2.0 * rng.uniform01();
      RVector v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = (2.0 * rng.uniform01() - 1.0) * theta;
      const double l1 = v.cwiseAbs().sum();
      if (l1 > k * theta) v *= k * theta / l1 * rng.uniform01();
      const SparseDecomposition d = sparse_convex_decompose(v, k, theta);
      const DecompositionCheck chk = check_decomposition(v, d);
      bad[static_cast<std::size_t>(c)] = chk.ok ? 0 : 1;
      worst[static_cast<std::size_t>(c)] = chk.reconstruction_error;
    });
    os << "decompose," << cases << ',' << std::count(bad.begin(), bad.end(), 1) << ','
       << format_number(*std::max_element(worst.begin(), worst.end())) << '\n';
  }

  // Lifted distance inequality: ratio lhs / rhs, worst is the minimum.
  {
    const int pairs = cfg.samples;
    int violations = 0;
    double worst = INFINITY;
    Rng rng(SeedSpec{cfg.master_seed, {std::string("suite_lifted_distance")}});
    for (int p = 0; p < pairs; ++p) {
      const auto n = static_cast<Eigen::Index>(1 + rng.uniform_index(16));
      const CVector u = random_cvec(rng, n);
      const CVector v = phase_align(u, random_cvec(rng, n));
      const LiftedDistance ld = lifted_distance_check(u, v);
      if (!ld.holds) ++violations;
      if (ld.rhs > 0.0) worst = std::min(worst, ld.lhs / ld.rhs);
    }
    os << "lifted_distance," << pairs << ',' << violations << ',' << format_number(worst) << '\n';
  }

  // Moment bounds: rank-two Hermitian H, random h and b.
  {
    std::vector<int> bad(static_cast<std::size_t>(cases), 0);
    std::vector<double> margin(static_cast<std::size_t>(cases), 0.0);
    parallel_for(cases, threads, [&](int c) {
      Rng rng(SeedSpec{cfg.master_seed, {std::string("suite_moment"), std::int64_t{c}}});
      const auto n = static_cast<Eigen::Index>(1 + rng.uniform_index(8));
      const CVector u = random_cvec(rng, n);
      const CVector v = random_cvec(rng, n);
      const CMatrix H = rng.normal() * (u * u.adjoint()) + rng.normal() * (v * v.adjoint());
      const CVector h = random_cvec(rng, n);
      const cplx b = rng.complex_normal();
      const MomentBound mb = moment_bound_check(
          0.5 * (H + H.adjoint()), h, b, cfg.samples,
          SeedSpec{cfg.master_seed, {std::string("suite_moment_mc"), std::int64_t{c}}});
      bad[static_cast<std::size_t>(c)] = mb.holds_ci ? 0 : 1;
      margin[static_cast<std::size_t>(c)] =
          std::min(mb.mc_mean - mb.lower, mb.upper - mb.mc_mean) / std::max(mb.radius, 1e-300);
    });
    os << "moment_bound," << cases << ',' << std::count(bad.begin(), bad.end(), 1) << ','
       << format_number(*std::min_element(margin.begin(), margin.end())) << '\n';
  }

  // Cross-term supremum: frequency of sup >= zeta sqrt(m) ||b|| with zeta = 0.5
  // for rows N(0, I_n) at m = ceil(40 k log(e n / k)).
  {
    const int k = cfg.k_list.front();
    const double n = cfg.n;
    const int m = static_cast<int>(std::ceil(40.0 * k * std::log(std::numbers::e * n / k)));
    std::vector<int> hit(static_cast<std::size_t>(cases), 0);
    std::vector<double> ratio(static_cast<std::size_t>(cases), 0.0);
    parallel_for(cases, threads, [&](int c) {
      const SeedSpec root{cfg.master_seed, {std::string("suite_crossterm"), std::int64_t{c}}};
      const RMatrix A = gen_real_gaussian_matrix(m, cfg.n, root.child("A")).real() *
                        std::sqrt(static_cast<double>(m));
      const RVector b = gen_bias_real(m, cfg.bias.kind == "constant" ? cfg.bias.c : 1.0).real();
      const double sup = crossterm_sup(A, b, k);
      const double scale = std::sqrt(static_cast<double>(m)) * b.norm();
      ratio[static_cast<std::size_t>(c)] = sup / scale;
      hit[static_cast<std::size_t>(c)] = sup >= 0.5 * scale ? 1 : 0;
    });
    os << "crossterm_rate," << cases << ',' << std::count(hit.begin(), hit.end(), 1) << ','
       << format_number(*std::max_element(ratio.begin(), ratio.end())) << '\n';
  }
  return os.str();
}

json cell_to_json(const CellResult& c) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"m", c.m},
              {"k", c.k},
              {"epsilon", c.epsilon},
              {"trials", c.trial_count},
              {"successes", c.success_count},
              {"wilson_lo", c.wilson.lo},
              {"wilson_hi", c.wilson.hi},
              {"median_plain_error", opt(c.median_plain_error)},
              {"median_global_phase_error", opt(c.median_global_phase_error)},
              {"median_objective_gap", opt(c.median_objective_gap)},
              {"wall_ms", c.wall_time_ms}};
}

}  // namespace apr
