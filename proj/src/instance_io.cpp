#include "apr/instance_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "apr/rng.hpp"

namespace apr {

using nlohmann::json;

namespace {

json real_to_json(const RVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

RVector real_from_json(const json& a) {
  RVector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

// Complex vectors are stored as two parallel arrays.
json cvec_to_json(const CVector& v) {
  return json{{"re", real_to_json(v.real())}, {"im", real_to_json(v.imag())}};
}

CVector cvec_from_json(const json& j) {
  const RVector re = real_from_json(j.at("re"));
  const RVector im = real_from_json(j.at("im"));
  if (re.size() != im.size()) throw ChecksumError("instance: inconsistent complex vector");
  CVector v(re.size());
  for (Eigen::Index i = 0; i < re.size(); ++i) v(i) = cplx(re(i), im(i));
  return v;
}

json cmat_to_json(const CMatrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) rows.push_back(cvec_to_json(M.row(i).transpose()));
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", rows}};
}

CMatrix cmat_from_json(const json& j) {
  const auto r = j.at("rows").get<Eigen::Index>();
  const auto c = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != r) throw ChecksumError("instance: bad matrix rows");
  CMatrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const CVector row = cvec_from_json(data[static_cast<std::size_t>(i)]);
    if (row.size() != c) throw ChecksumError("instance: bad matrix row length");
    M.row(i) = row.transpose();
  }
  return M;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json seed_meta_to_json(const SeedMeta& meta) {
  return json{{"generator", meta.generator}, {"seed", meta.seed}, {"params", meta.params}};
}

SeedMeta seed_meta_from_json(const json& j) {
  SeedMeta meta;
  meta.generator = j.at("generator").get<std::string>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  meta.params = j.at("params").get<std::map<std::string, std::string>>();
  return meta;
}

json instance_to_json(const ProblemInstance& inst) {
  const MeasurementEnsemble& e = inst.ensemble;
  json j;
  j["ensemble"] = {{"field", to_string(e.field())},
                   {"A", cmat_to_json(e.A())},
                   {"b", cvec_to_json(e.b())},
                   {"seed_meta", seed_meta_to_json(e.seed_meta())}};
  j["x0"] = {{"field", to_string(inst.x0.field())}, {"entries", cvec_to_json(inst.x0.entries())}};
  j["w"] = real_to_json(inst.w);
  j["y"] = real_to_json(inst.y);
  j["ytilde"] = inst.ytilde ? real_to_json(*inst.ytilde) : json(nullptr);
  j["k"] = inst.k;
  j["seed_meta"] = seed_meta_to_json(inst.seed_meta);
  return j;
}

ProblemInstance instance_from_json(const json& j) {
  ProblemInstance inst;
  const json& e = j.at("ensemble");
  inst.ensemble = MeasurementEnsemble(field_from_string(e.at("field").get<std::string>()),
                                      cmat_from_json(e.at("A")), cvec_from_json(e.at("b")),
                                      seed_meta_from_json(e.at("seed_meta")));
  const json& x0 = j.at("x0");
  inst.x0 = SignalVector(field_from_string(x0.at("field").get<std::string>()),
                         cvec_from_json(x0.at("entries")));
  inst.w = real_from_json(j.at("w"));
  inst.y = real_from_json(j.at("y"));
  if (!j.at("ytilde").is_null()) inst.ytilde = real_from_json(j.at("ytilde"));
  inst.k = j.at("k").get<int>();
  inst.seed_meta = seed_meta_from_json(j.at("seed_meta"));
  return inst;
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
  const std::string payload = instance_to_json(inst).dump();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_instance: cannot open '" + tmp + "'");
    out << "APRINST " << kInstanceFormatVersion << ' ' << hex64(fnv1a64(payload)) << ' '
        << payload.size() << '\n'
        << payload;
    if (!out.flush()) throw std::runtime_error("save_instance: write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_instance: cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw ChecksumError("load_instance: missing header");
  std::istringstream hs(header);
  std::string magic, sum_hex;
  int version = 0;
  std::size_t length = 0;
  if (!(hs >> magic >> version >> sum_hex >> length) || magic != "APRINST") {
    throw ChecksumError("load_instance: malformed header");
  }
  if (version != kInstanceFormatVersion) {
    throw VersionError("load_instance: format version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kInstanceFormatVersion) + ")");
  }
  std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (payload.size() != length || hex64(fnv1a64(payload)) != sum_hex) {
    throw ChecksumError("load_instance: checksum mismatch (truncated or corrupted file)");
  }
  try {
    return instance_from_json(json::parse(payload));
  } catch (const json::exception& ex) {
    throw ChecksumError(std::string("load_instance: corrupted payload: ") + ex.what());
  }
}

bool instances_equal(const ProblemInstance& a, const ProblemInstance& b) {
  const auto& ea = a.ensemble;
  const auto& eb = b.ensemble;
  if (ea.field() != eb.field() || !(ea.seed_meta() == eb.seed_meta())) return false;
  if (ea.A().rows() != eb.A().rows() || ea.A().cols() != eb.A().cols() || ea.A() != eb.A()) return false;
  if (ea.b().size() != eb.b().size() || ea.b() != eb.b()) return false;
  if (a.x0.field() != b.x0.field() || a.x0.size() != b.x0.size() ||
      a.x0.entries() != b.x0.entries()) {
    return false;
  }
  if (a.w.size() != b.w.size() || a.w != b.w || a.y.size() != b.y.size() || a.y != b.y) return false;
  if (a.ytilde.has_value() != b.ytilde.has_value()) return false;
  if (a.ytilde && (a.ytilde->size() != b.ytilde->size() || *a.ytilde != *b.ytilde)) return false;
  return a.k == b.k && a.seed_meta == b.seed_meta;
}

ProblemInstance regenerate_instance(const SeedMeta& meta) {
  return make_instance(InstanceRecipe::from_seed_meta(meta));
}

json report_to_json(const SolveReport& r, const SeedMeta& meta, const SignalVector* x0) {
  json j;
  j["xhat"] = {{"field", to_string(r.xhat.field())}, {"entries", cvec_to_json(r.xhat.entries())}};
  j["objective"] = r.objective;
  j["feasibility"] = r.feasibility;
  j["epsilon"] = r.epsilon;
  j["outer_iters"] = r.outer_iters;
  j["inner_iters_total"] = r.inner_iters_total;
  j["restart_index_of_best"] = r.restart_index_of_best;
  j["inner_nonconverged"] = r.inner_nonconverged;
  j["clipped_intensities"] = r.clipped_intensities;
  j["termination"] = to_string(r.termination);
  json trace = json::array();
  for (const auto& t : r.trace) trace.push_back({{"objective", t.objective}, {"feasibility", t.feasibility}});
  j["trace"] = trace;
  json restarts = json::array();
  for (const auto& s : r.restarts) {
    restarts.push_back({{"index", s.index},
                        {"start", s.start},
                        {"objective", s.objective},
                        {"feasibility", s.feasibility},
                        {"outer_iters", s.outer_iters},
                        {"termination", to_string(s.termination)}});
  }
  j["restarts"] = restarts;
  j["seed_meta"] = seed_meta_to_json(meta);
  if (x0 != nullptr) {
    const ErrorMetrics em = error_metrics(r.xhat, *x0);
    j["metrics"] = {{"plain_l2", em.plain_l2},
                    {"sign_folded", em.sign_folded},
                    {"global_phase", em.global_phase},
                    {"relative_plain", em.relative_plain},
                    {"best_theta", em.best_theta}};
  }
  return j;
}

}  // namespace apr
