#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pforge/cli.hpp"
#include "pforge/constructions.hpp"
#include "pforge/error.hpp"
#include "pforge/serialize.hpp"

using namespace pforge;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code;
  std::string out, err;
};

Invocation run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("pforge-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

Witness small_hA() {
  BuildOptions opts;
  opts.horizon = 5;
  return build_hA(SpaceModel::unit_interval(), Rational(1), std::nullopt, opts);
}

}  // namespace

TEST(Serialize, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Serialize, SealDetectsTampering) {
  nlohmann::ordered_json j = witness_file({small_hA()});
  EXPECT_NO_THROW(check_seal(j, kWitnessSchema));
  nlohmann::ordered_json bad = j;
  bad["hash"] = std::string(64, '0');
  try {
    check_seal(bad, kWitnessSchema);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
  }
  try {
    check_seal(j, kReportSchema);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
  }
}

TEST(Serialize, WitnessFileRoundtrip) {
  Witness w = small_hA();
  std::string text = canonical_dump(witness_file({w}));
  WitnessFile f = parse_witness_file(text);
  auto members = load_members(f);
  ASSERT_EQ(members.size(), 1u);
  EXPECT_EQ(members[0].norm.lo, w.norm.lo);
  EXPECT_EQ(members[0].norm.hi, w.norm.hi);
  ASSERT_EQ(members[0].groups.size(), w.groups.size());
  for (std::size_t i = 0; i < w.groups.size(); ++i)
    EXPECT_EQ(members[0].groups[i].support->to_string(), w.groups[i].support->to_string());
  EXPECT_EQ(canonical_dump(witness_file(members)), text);
}

TEST(Serialize, BadJsonIsParseError) {
  try {
    parse_witness_file("{not json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(Serialize, ReportFileRoundtrip) {
  Report r = p_report(small_hA());
  std::string text = canonical_dump(report_file({r}));
  EXPECT_NO_THROW(parse_report_file(text));
  std::string tampered = text;
  tampered.replace(tampered.find("true"), 4, "fals");
  EXPECT_ANY_THROW(parse_report_file(tampered));
}

TEST(Cli, BuildCertifyExportTransport) {
  TempDir dir;
  std::string w = dir.file("w.json"), rep = dir.file("r.json"), csv = dir.file("e.csv"), t = dir.file("t.json");
  Invocation b = run({"build", "--space", "unit-interval", "--p", "1", "--kind", "hA", "--horizon", "6", "--out", w});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  Invocation c = run({"certify", w, "--claim", "nowhere-lq", "--q", "2", "--depth", "6", "--out", rep});
  EXPECT_EQ(c.code, kExitOk) << c.err;
  EXPECT_NO_THROW(parse_report_file(slurp(rep)));
  Invocation e = run({"export", w, "--depth", "3", "--format", "csv", "--out", csv});
  EXPECT_EQ(e.code, kExitOk) << e.err;
  std::string rows = slurp(csv);
  EXPECT_EQ(rows.substr(0, rows.find('\n')), "interval_start,interval_end,value_exact,value_approx");
  EXPECT_GT(std::count(rows.begin(), rows.end(), '\n'), 1);
  Invocation tr = run({"transport", w, "--map", "F", "--out", t});
  EXPECT_EQ(tr.code, kExitOk) << tr.err;
  Invocation c2 = run({"certify", t, "--claim", "in-lp"});
  EXPECT_EQ(c2.code, kExitOk) << c2.err;
}

TEST(Cli, OutputsAreDeterministic) {
  TempDir dir;
  std::vector<std::string> outputs;
  for (int i = 0; i < 2; ++i) {
    std::string w = dir.file("w" + std::to_string(i) + ".json");
    ASSERT_EQ(run({"build", "--space", "cantor", "--p", "3/2", "--kind", "sp-basic", "--count", "2", "--out", w}).code,
              kExitOk);
    outputs.push_back(slurp(w));
  }
  EXPECT_EQ(outputs[0], outputs[1]);
}

TEST(Cli, DeniedClaimExitCode) {
  TempDir dir;
  std::string w = dir.file("s.json");
  ASSERT_EQ(run({"build", "--space", "unit-interval", "--p", "1", "--kind", "simple", "--part", "dyadic:1:0=3", "--out", w})
                .code,
            kExitOk);
  EXPECT_EQ(run({"certify", w, "--claim", "nowhere-lq", "--q", "2", "--depth", "4"}).code, kExitDenied);
}

TEST(Cli, SchemaAndUsageErrors) {
  TempDir dir;
  std::string w = dir.file("bad.json");
  {
    std::ofstream os(w);
    os << R"({"schema":"something-else","hash":"00","members":[]})";
  }
  EXPECT_EQ(run({"certify", w, "--claim", "in-lp"}).code, kExitSchema);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"build", "--space", "unit-interval"}).code, kExitUsage);
}
