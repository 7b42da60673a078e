#include "cmavg/cache.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cmavg/pipeline.hpp"
#include "cmavg/presets.hpp"
#include "cmavg/report_io.hpp"

using namespace cmavg;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("cmavg-test-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(CMAVG_BIN) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Cache, RoundTripExact) {
  auto dir = temp_dir("roundtrip");
  const CurveSpec& c = preset_curve("cm-4");
  auto recs = compute_records(c, 2, 5000, {});
  write_cache(cache_path(dir, c), c, recs, 5000);
  auto data = read_cache_for(cache_path(dir, c), c);
  EXPECT_EQ(data.header.coverage, 5000u);
  EXPECT_EQ(data.header.count, recs.size());
  ASSERT_EQ(data.records.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(data.records[i], recs[i]) << i;
  }
  fs::remove_all(dir);
}

TEST(Cache, HeaderIsGreppableText) {
  auto dir = temp_dir("header");
  const CurveSpec& c = preset_curve("cm-3");
  write_cache(cache_path(dir, c), c, {}, 100);
  std::string raw = slurp(cache_path(dir, c));
  ASSERT_GE(raw.size(), kCacheHeaderSize);
  EXPECT_EQ(raw.substr(0, 20), "cmavg record cache v");
  EXPECT_NE(raw.find("curve=cm-3"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cache, WrongCurveOrTamperedHeaderRefused) {
  auto dir = temp_dir("tamper");
  const CurveSpec& c = preset_curve("cm-4");
  auto recs = compute_records(c, 2, 500, {});
  write_cache(cache_path(dir, c), c, recs, 500);
  EXPECT_THROW(read_cache_for(cache_path(dir, c), preset_curve("cm-3")), std::runtime_error);
  // flip one hash nibble in the header text
  std::string raw = slurp(cache_path(dir, c));
  std::size_t pos = raw.find("hash=");
  ASSERT_NE(pos, std::string::npos);
  raw[pos + 5] = raw[pos + 5] == '0' ? '1' : '0';
  std::ofstream(cache_path(dir, c), std::ios::binary).write(raw.data(), static_cast<std::streamsize>(raw.size()));
  EXPECT_THROW(read_cache_for(cache_path(dir, c), c), std::runtime_error);
  fs::remove_all(dir);
}

TEST(PresetsFile, MatchesEmbeddedCatalog) {
  std::ifstream in(CMAVG_PRESETS_JSON);
  ASSERT_TRUE(in) << "missing " << CMAVG_PRESETS_JSON;
  auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("catalog_version").get<int>(), kPresetCatalogVersion);
  const auto& curves = j.at("curves");
  const auto& embedded = preset_catalog();
  ASSERT_EQ(curves.size(), embedded.size());
  for (std::size_t i = 0; i < embedded.size(); ++i) {
    EXPECT_EQ(curves[i].at("label").get<std::string>(), embedded[i].label);
    EXPECT_EQ(curves[i].at("a4").get<i64>(), embedded[i].a4);
    EXPECT_EQ(curves[i].at("a6").get<i64>(), embedded[i].a6);
    EXPECT_EQ(curves[i].at("conductor").get<u64>(), embedded[i].conductor);
    EXPECT_EQ(curves[i].at("d_K").get<int>(), embedded[i].d_K);
  }
}

TEST(Cli, ComputeIsIncrementalAndIdempotent) {
  auto dir = temp_dir("cli-inc");
  std::string base = "--curve cm-4 --cache-dir " + dir.string();
  ASSERT_EQ(run_cli("compute " + base + " --xmax 10000"), 0);
  std::string first = slurp(cache_path(dir, preset_curve("cm-4")));
  // extend
  ASSERT_EQ(run_cli("compute " + base + " --xmax 20000"), 0);
  std::string second = slurp(cache_path(dir, preset_curve("cm-4")));
  EXPECT_GT(second.size(), first.size());
  // the extension only appends: old rows are a prefix of the new body
  EXPECT_EQ(second.substr(kCacheHeaderSize, first.size() - kCacheHeaderSize),
            first.substr(kCacheHeaderSize));
  // rerun at the same x: byte-identical (no timestamps, no recompute)
  ASSERT_EQ(run_cli("compute " + base + " --xmax 20000"), 0);
  std::string third = slurp(cache_path(dir, preset_curve("cm-4")));
  EXPECT_EQ(second, third);
  fs::remove_all(dir);
}

TEST(Cli, ReportShapeAndDeterminism) {
  auto dir = temp_dir("cli-rep");
  auto out1 = temp_dir("cli-rep-out1");
  auto out2 = temp_dir("cli-rep-out2");
  std::string base = "--curve cm-4 --cache-dir " + dir.string();
  ASSERT_EQ(run_cli("compute " + base + " --xmax 100000 --workers 4"), 0);
  ASSERT_EQ(run_cli("report " + base + " --xmax 100000 --out " + out1.string()), 0);
  ASSERT_EQ(run_cli("report " + base + " --xmax 100000 --out " + out2.string()), 0);
  std::string csv = slurp(out1 / "cm-4-report.csv");
  // fixed column header, one row per default checkpoint (1e3, 1e4, 1e5)
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "x,sum_e_p,sum_d_p,sum_p_over_d_p,Li_x2,R_x,c_E_trunc,sigma_total,lemma23_sup,thm12_ratio");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv, slurp(out2 / "cm-4-report.csv"));
  EXPECT_EQ(slurp(out1 / "cm-4-report.json"), slurp(out2 / "cm-4-report.json"));
  auto j = nlohmann::json::parse(slurp(out1 / "cm-4-report.json"));
  EXPECT_TRUE(j.at("all_pass").get<bool>());
  for (const auto& row : j.at("checkpoints")) {
    double R = row.at("R_x").get<double>();
    EXPECT_GT(R, 0.0);
    EXPECT_LT(R, 1.0);
  }
  fs::remove_all(dir);
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST(Cli, ReportRefusesInsufficientCache) {
  auto dir = temp_dir("cli-insuf");
  std::string base = "--curve cm-4 --cache-dir " + dir.string();
  ASSERT_EQ(run_cli("compute " + base + " --xmax 5000"), 0);
  EXPECT_NE(run_cli("report " + base + " --xmax 100000"), 0);
  fs::remove_all(dir);
}

TEST(Cli, SabotagedCacheFailsReportAndVerify) {
  auto dir = temp_dir("cli-sab");
  const CurveSpec& c = preset_curve("cm-4");
  auto recs = compute_records(c, 2, 2000, {});
  for (auto& r : recs)
    if (r.p == 101) r.e_p /= 2;  // break d*e = n and the Weil identity
  write_cache(cache_path(dir, c), c, recs, 2000);
  std::string base = "--curve cm-4 --cache-dir " + dir.string();
  EXPECT_NE(run_cli("report " + base + " --xmax 2000 --checkpoints 2000 --out " + (dir / "out").string()), 0);
  EXPECT_NE(run_cli("verify " + base + " --dual-oracle-max 200"), 0);
  fs::remove_all(dir);
}

TEST(Cli, VerifyPassesOnHonestCache) {
  auto dir = temp_dir("cli-verify");
  std::string base = "--curve cm-3 --cache-dir " + dir.string();
  ASSERT_EQ(run_cli("compute " + base + " --xmax 3000 --workers 4"), 0);
  EXPECT_EQ(run_cli("verify " + base + " --dual-oracle-max 1000 --crosscheck-rate 0.2"), 0);
  fs::remove_all(dir);
}

TEST(Cli, PresetsListsNineCurves) {
  EXPECT_EQ(run_cli("presets"), 0);
  EXPECT_EQ(run_cli("presets --presets-file " CMAVG_PRESETS_JSON), 0);
}

TEST(Cli, AdHocCurveAccepted) {
  auto dir = temp_dir("cli-adhoc");
  // twist of cm-4 by 2: y^2 = x^3 - 4x, still CM by -4
  std::string base = "--a4 -4 --a6 0 --conductor 64 --disc -4 --label twist4 --cache-dir " + dir.string();
  EXPECT_EQ(run_cli("compute " + base + " --xmax 2000"), 0);
  EXPECT_EQ(run_cli("verify " + base + " --dual-oracle-max 500"), 0);
  // wrong d_K must be rejected up front
  EXPECT_NE(run_cli("compute --a4 -4 --a6 0 --conductor 64 --disc -7 --xmax 100 --cache-dir " + dir.string()), 0);
  fs::remove_all(dir);
}
