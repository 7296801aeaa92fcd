#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pforge/certify.hpp"
#include "pforge/series.hpp"

namespace pforge {

inline constexpr std::string_view kWitnessSchema = "pathology-forge/witness/1";
inline constexpr std::string_view kReportSchema = "pathology-forge/report/1";

std::string sha256_hex(std::string_view data);

// Compact dump with keys in insertion order; the hashed form.
std::string canonical_dump(const nlohmann::ordered_json& j);

// Seeds, not data: each member is stored by the parameters it was built with,
// plus a summary (norm enclosure) for readers. `hash` covers everything else.
nlohmann::ordered_json witness_file(const std::vector<Witness>& members);

struct WitnessFile {
  std::string hash;
  std::vector<nlohmann::json> members;
  nlohmann::ordered_json raw;
};

// Throws SchemaMismatch on a wrong schema tag or hash, ParseError on bad JSON.
WitnessFile parse_witness_file(std::string_view text);
std::vector<Witness> load_members(const WitnessFile& file);

// Report JSON plus schema tag and hash.
nlohmann::ordered_json report_file(const std::vector<Report>& reports);
// Checks schema and hash of a report file. Throws SchemaMismatch.
nlohmann::ordered_json parse_report_file(std::string_view text);

// Adds "hash" computed over the other fields.
void seal(nlohmann::ordered_json& j);
// Verifies "hash". Throws SchemaMismatch.
void check_seal(const nlohmann::ordered_json& j, std::string_view schema);

}  // namespace pforge
