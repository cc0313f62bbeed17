#include "apr/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace apr {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string join_labels(const std::vector<StreamLabel>& labels) {
  std::ostringstream os;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) os << '/';
    if (const auto* v = std::get_if<std::int64_t>(&labels[i])) {
      os << 'i' << *v;
    } else {
      os << 's' << std::get<std::string>(labels[i]);
    }
  }
  return os.str();
}

std::vector<StreamLabel> split_labels(const std::string& s) {
  std::vector<StreamLabel> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find('/', pos);
    const std::string tok = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (tok.empty()) throw std::invalid_argument("malformed stream label list");
    if (tok[0] == 'i') {
      out.emplace_back(static_cast<std::int64_t>(std::stoll(tok.substr(1))));
    } else if (tok[0] == 's') {
      out.emplace_back(tok.substr(1));
    } else {
      throw std::invalid_argument("malformed stream label '" + tok + "'");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

SeedSpec SeedSpec::child(StreamLabel label) const {
  SeedSpec out = *this;
  out.labels.push_back(std::move(label));
  return out;
}

std::uint64_t SeedSpec::derive() const {
  std::uint64_t h = mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
  for (const auto& label : labels) {
    std::uint64_t v;
    std::uint64_t tag;
    if (const auto* i = std::get_if<std::int64_t>(&label)) {
      v = static_cast<std::uint64_t>(*i);
      tag = 0x1;
    } else {
      v = fnv1a(std::get<std::string>(label));
      tag = 0x2;
    }
    h = mix64(h ^ mix64(v + tag * 0x9e3779b97f4a7c15ULL));
  }
  return h;
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_index: zero bound");
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

cplx Rng::complex_normal() {
  constexpr double r = 0.70710678118654752440;
  const double re = normal();
  const double im = normal();
  return {re * r, im * r};
}

std::string to_string(AmplitudeModel a) {
  switch (a) {
    case AmplitudeModel::kUnit: return "unit";
    case AmplitudeModel::kGaussian: return "gaussian";
    case AmplitudeModel::kFlat: return "flat";
  }
  return "gaussian";
}

AmplitudeModel amplitude_from_string(const std::string& s) {
  if (s == "unit") return AmplitudeModel::kUnit;
  if (s == "gaussian") return AmplitudeModel::kGaussian;
  if (s == "flat") return AmplitudeModel::kFlat;
  throw std::invalid_argument("unknown amplitude model '" + s + "'");
}

std::string to_string(NoiseModel n) {
  return n == NoiseModel::kSphere ? "sphere" : "gaussian_clipped";
}

NoiseModel noise_from_string(const std::string& s) {
  if (s == "sphere") return NoiseModel::kSphere;
  if (s == "gaussian_clipped") return NoiseModel::kGaussianClipped;
  throw std::invalid_argument("unknown noise model '" + s + "'");
}

namespace {

void check_size(Eigen::Index m, Eigen::Index n) {
  if (m < 1 || n < 1) throw std::invalid_argument("matrix dimensions must be >= 1");
}

}  // namespace

CMatrix gen_real_gaussian_matrix(Eigen::Index m, Eigen::Index n, const SeedSpec& seed) {
  check_size(m, n);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  CMatrix A(m, n);
  // Row-major fill so a prefix of rows does not depend on m's column layout.
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rng.normal() * scale;
  }
  return A;
}

CMatrix gen_complex_gaussian_matrix(Eigen::Index m, Eigen::Index n, const SeedSpec& seed) {
  check_size(m, n);
  Rng rng(seed);
  CMatrix A(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rng.complex_normal();
  }
  return A;
}

CVector gen_bias_real(Eigen::Index m, double c) {
  if (m < 1) throw std::invalid_argument("gen_bias_real: m must be >= 1");
  if (!(c > 0.0)) throw std::invalid_argument("gen_bias_real: c must be positive");
  return CVector::Constant(m, cplx(c / std::sqrt(static_cast<double>(m)), 0.0));
}

CVector gen_bias_complex(Eigen::Index m, const SeedSpec& seed) {
  if (m < 1) throw std::invalid_argument("gen_bias_complex: m must be >= 1");
  Rng rng(seed);
  CVector b(m);
  for (Eigen::Index j = 0; j < m; ++j) b(j) = rng.complex_normal();
  return b;
}

SignalVector gen_sparse_signal(Eigen::Index n, Eigen::Index k, Field field,
                               AmplitudeModel amplitude, const SeedSpec& seed) {
  if (n < 1 || k < 1 || k > n) {
    throw std::invalid_argument("gen_sparse_signal: need 1 <= k <= n");
  }
  Rng rng(seed);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  CVector x = CVector::Zero(n);
  for (Eigen::Index i = 0; i < k; ++i) {
    cplx v;
    switch (amplitude) {
      case AmplitudeModel::kUnit:
        v = field == Field::kReal ? cplx(rng.sign(), 0.0)
                                  : std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform01());
        break;
      case AmplitudeModel::kGaussian:
        if (field == Field::kReal) {
          v = rng.normal();
        } else {
          v = rng.complex_normal();
        }
        break;
      case AmplitudeModel::kFlat:
        v = 1.0;
        break;
    }
    // Keep exactly k nonzeros even for a (measure-zero) exact zero draw.
    if (v == cplx(0.0)) v = 1.0;
    x(perm[static_cast<std::size_t>(i)]) = v;
  }
  return SignalVector(field, std::move(x));
}

RVector gen_noise(Eigen::Index m, double epsilon_budget, NoiseModel model,
                  const SeedSpec& seed) {
  if (m < 1) throw std::invalid_argument("gen_noise: m must be >= 1");
  if (!(epsilon_budget >= 0.0)) throw std::invalid_argument("gen_noise: negative budget");
  RVector w = RVector::Zero(m);
  if (epsilon_budget == 0.0) return w;
  Rng rng(seed);
  for (Eigen::Index j = 0; j < m; ++j) w(j) = rng.normal();
  const double nrm = w.norm();
  if (model == NoiseModel::kSphere) {
    w *= epsilon_budget / nrm;
  } else {
    // Per-entry scale chosen so the typical norm sits at half the budget.
    w *= 0.5 * epsilon_budget / std::sqrt(static_cast<double>(m));
    const double scaled = w.norm();
    if (scaled > epsilon_budget) w *= epsilon_budget / scaled;
  }
  return w;
}

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const std::string& get_param(const SeedMeta& meta, const std::string& key) {
  auto it = meta.params.find(key);
  if (it == meta.params.end()) {
    throw std::invalid_argument("seed metadata lacks parameter '" + key + "'");
  }
  return it->second;
}

}  // namespace

SeedMeta InstanceRecipe::to_seed_meta() const {
  SeedMeta meta;
  meta.generator = "apr.instance/1";
  meta.seed = master_seed;
  meta.params["field"] = apr::to_string(field);
  meta.params["m"] = std::to_string(m);
  meta.params["n"] = std::to_string(n);
  meta.params["k"] = std::to_string(k);
  meta.params["amplitude"] = apr::to_string(amplitude);
  meta.params["bias_scale"] = fmt_double(bias_scale);
  meta.params["noise_budget"] = fmt_double(noise_budget);
  meta.params["noise"] = apr::to_string(noise);
  meta.params["intensity"] = with_intensity ? "1" : "0";
  meta.params["labels"] = join_labels(labels);
  return meta;
}

InstanceRecipe InstanceRecipe::from_seed_meta(const SeedMeta& meta) {
  if (meta.generator != "apr.instance/1") {
    throw std::invalid_argument("unknown instance generator '" + meta.generator + "'");
  }
  InstanceRecipe r;
  r.master_seed = meta.seed;
  r.field = field_from_string(get_param(meta, "field"));
  r.m = std::stoll(get_param(meta, "m"));
  r.n = std::stoll(get_param(meta, "n"));
  r.k = std::stoll(get_param(meta, "k"));
  r.amplitude = amplitude_from_string(get_param(meta, "amplitude"));
  r.bias_scale = std::stod(get_param(meta, "bias_scale"));
  r.noise_budget = std::stod(get_param(meta, "noise_budget"));
  r.noise = noise_from_string(get_param(meta, "noise"));
  r.with_intensity = get_param(meta, "intensity") == "1";
  r.labels = split_labels(get_param(meta, "labels"));
  return r;
}

ProblemInstance make_instance(const InstanceRecipe& r) {
  const SeedSpec root{r.master_seed, r.labels};
  CMatrix A;
  CVector b;
  if (r.field == Field::kReal) {
    A = gen_real_gaussian_matrix(r.m, r.n, root.child("A"));
    b = gen_bias_real(r.m, r.bias_scale);
  } else {
    A = gen_complex_gaussian_matrix(r.m, r.n, root.child("A"));
    b = gen_bias_complex(r.m, root.child("b"));
  }
  const SeedMeta meta = r.to_seed_meta();
  ProblemInstance inst;
  inst.ensemble = MeasurementEnsemble(r.field, std::move(A), std::move(b), meta);
  inst.x0 = gen_sparse_signal(r.n, r.k, r.field, r.amplitude, root.child("x0"));
  inst.w = gen_noise(r.m, r.noise_budget, r.noise, root.child("w"));
  inst.y = forward_model(inst.ensemble, inst.x0, inst.w);
  if (r.with_intensity) {
    inst.ytilde = lifted_intensity(inst.ensemble, inst.x0) + inst.w;
  }
  inst.k = static_cast<int>(r.k);
  inst.seed_meta = meta;
  return inst;
}

}  // namespace apr
