#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "apr/model.hpp"
#include "apr/solver.hpp"

namespace apr {

// On-disk instance format: a header line
//   APRINST <version> <fnv1a-64 hex of payload> <payload bytes>
// followed by a JSON payload whose doubles round-trip exactly.
inline constexpr int kInstanceFormatVersion = 1;

class ChecksumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(const std::string& bytes);

nlohmann::json seed_meta_to_json(const SeedMeta& meta);
SeedMeta seed_meta_from_json(const nlohmann::json& j);

nlohmann::json instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const nlohmann::json& j);

// Writes through a temporary file and renames, so readers never observe a
// partial instance.
void save_instance(const ProblemInstance& inst, const std::string& path);
ProblemInstance load_instance(const std::string& path);

// Field-by-field exact equality.
bool instances_equal(const ProblemInstance& a, const ProblemInstance& b);

// Rebuilds an instance from its seed metadata alone.
ProblemInstance regenerate_instance(const SeedMeta& meta);

// All SolveReport fields plus the instance's seed metadata and, when x0 is
// given, the error metrics against it.
nlohmann::json report_to_json(const SolveReport& report, const SeedMeta& meta,
                              const SignalVector* x0 = nullptr);

}  // namespace apr
