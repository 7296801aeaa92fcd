#include "pforge/serialize.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include "pforge/error.hpp"
#include "pforge/transport.hpp"

namespace pforge {

using nlohmann::ordered_json;

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::InvalidArgument, "SHA-256 failed");
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string canonical_dump(const ordered_json& j) { return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict); }

void seal(ordered_json& j) {
  j.erase("hash");
  j["hash"] = sha256_hex(canonical_dump(j));
}

void check_seal(const ordered_json& j, std::string_view schema) {
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != schema)
    throw Error(ErrorCode::SchemaMismatch, "expected schema " + std::string(schema));
  if (!j.contains("hash") || !j.at("hash").is_string()) throw Error(ErrorCode::SchemaMismatch, "missing hash");
  ordered_json body = j;
  body.erase("hash");
  std::string want = sha256_hex(canonical_dump(body));
  if (want != j.at("hash").get<std::string>())
    throw Error(ErrorCode::SchemaMismatch, "hash mismatch: content hashes to " + want);
}

namespace {

bool pairwise_disjoint(const std::vector<Witness>& members) {
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      for (const auto& a : members[i].groups)
        for (const auto& b : members[j].groups)
          if (!disjoint(*a.support, *b.support)) return false;
  return true;
}

ordered_json parse_json(std::string_view text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

ordered_json witness_file(const std::vector<Witness>& members) {
  ordered_json j;
  j["schema"] = kWitnessSchema;
  ordered_json arr = ordered_json::array();
  for (const auto& w : members) {
    ordered_json m;
    m["params"] = ordered_json::parse(w.params.dump());
    ordered_json s;
    s["kind"] = to_string(w.kind);
    s["space"] = w.space.name();
    s["p"] = w.p.get_str();
    s["groups"] = w.groups.size();
    s["norm_certified"] = w.norm_certified;
    if (w.norm_certified) s["norm"] = {{"lo", w.norm.lo.get_str()}, {"hi", w.norm.hi.get_str()}};
    m["summary"] = s;
    arr.push_back(m);
  }
  j["members"] = arr;
  if (members.size() > 1) j["pairwise_disjoint"] = pairwise_disjoint(members);
  seal(j);
  return j;
}

WitnessFile parse_witness_file(std::string_view text) {
  WitnessFile f;
  f.raw = parse_json(text);
  check_seal(f.raw, kWitnessSchema);
  f.hash = f.raw.at("hash").get<std::string>();
  if (!f.raw.contains("members") || !f.raw.at("members").is_array() || f.raw.at("members").empty())
    throw Error(ErrorCode::SchemaMismatch, "witness file has no members");
  for (const auto& m : f.raw.at("members")) f.members.push_back(nlohmann::json::parse(m.at("params").dump()));
  return f;
}

std::vector<Witness> load_members(const WitnessFile& file) {
  std::vector<Witness> out;
  for (const auto& params : file.members) out.push_back(rebuild_any(params));
  return out;
}

ordered_json report_file(const std::vector<Report>& reports) {
  ordered_json j;
  j["schema"] = kReportSchema;
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(ordered_json::parse(r.to_json(false).dump()));
  j["reports"] = arr;
  seal(j);
  return j;
}

ordered_json parse_report_file(std::string_view text) {
  ordered_json j = parse_json(text);
  check_seal(j, kReportSchema);
  return j;
}

}  // namespace pforge
