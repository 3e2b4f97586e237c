// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rtlmark/crypto.hpp"
#include "rtlmark/embedder.hpp"
#include "rtlmark/verilog/parser.hpp"

using namespace rtlmark;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
};

// Runs the CLI with stderr discarded; returns exit code and stdout.
CliRun cli(const std::string& args) {
  std::string cmd = std::string(RTLMARK_CLI) + " " + args + " 2>/dev/null";
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf;
  while (size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  int st = ::pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rtlmark_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    key_ = (dir_ / "k.key").string();
    ASSERT_EQ(cli("keygen -o " + key_).code, 0);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& f) const { return (dir_ / f).string(); }
  std::string opts() const { return " --config " + path("none.json") + " --key " + key_; }

  fs::path dir_;
  std::string key_;
};

const std::string kEligible = std::string(RTLMARK_CORPUS) + "/eligible/counter8.v";
const std::string kClean = std::string(RTLMARK_CORPUS) + "/clean/";

std::string first_clean() {
  for (const auto& e : fs::directory_iterator(kClean))
    if (e.path().extension() == ".v") return e.path().string();
  return {};
}

}  // namespace

TEST_F(Cli, KeyFileIsPrivateAndNotOverwritten) {
  EXPECT_EQ(fs::status(key_).permissions() & fs::perms::all, fs::perms::owner_read | fs::perms::owner_write);
  EXPECT_NE(cli("keygen -o " + key_).code, 0);
  EXPECT_EQ(cli("keygen -o " + key_ + " --force").code, 0);
}

TEST_F(Cli, EmbedThenDetect) {
  CliRun e = cli("embed " + kEligible + " -o " + path("wm.v") + " --payload model=gpt-4,dev=dev-A" + opts());
  ASSERT_EQ(e.code, 0) << e.out;
  auto j = nlohmann::json::parse(e.out);
  EXPECT_GE(j["predicted_confidence"].get<double>(), 0.95);
  EXPECT_TRUE(fs::exists(path("wm.v.manifest.json")));
  CliRun d = cli("detect " + path("wm.v") + opts());
  EXPECT_EQ(d.code, 0) << d.out;
  EXPECT_TRUE(nlohmann::json::parse(d.out)["watermarked"].get<bool>());
  EXPECT_EQ(cli("detect " + first_clean() + opts()).code, 1);
}

TEST_F(Cli, DetectDoesNotModifyItsInput) {
  ASSERT_EQ(cli("embed " + kEligible + " -o " + path("wm.v") + opts()).code, 0);
  std::string before = to_hex(sha256(slurp(path("wm.v"))));
  ASSERT_EQ(cli("detect " + path("wm.v") + opts()).code, 0);
  EXPECT_EQ(to_hex(sha256(slurp(path("wm.v")))), before);
}

TEST_F(Cli, ManifestWrittenByCliReplays) {
  ASSERT_EQ(cli("embed " + kEligible + " -o " + path("wm.v") + opts()).code, 0);
  Manifest m = Manifest::from_json(slurp(path("wm.v.manifest.json")));
  vlog::SourceText src{slurp(kEligible), kEligible};
  WatermarkedDocument again = replay(src, m, load_key(key_));
  EXPECT_EQ(again.source.content, slurp(path("wm.v")));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(cli("detect " + kEligible + " --config " + path("none.json")).code, 64);
  EXPECT_EQ(cli("frobnicate").code, 64);
  EXPECT_EQ(cli("embed" + opts()).code, 64);
  EXPECT_EQ(cli("embed " + path("missing.v") + " -o " + path("o.v") + opts()).code, 74);
  EXPECT_EQ(cli("detect " + path("missing.v") + opts()).code, 2);
  std::ofstream(path("bad.v")) << "module bad(input a; endmodule\n";
  EXPECT_EQ(cli("embed " + path("bad.v") + " -o " + path("o.v") + opts()).code, 65);
  std::ofstream(path("bad.json")) << R"({"tua": 1})";
  EXPECT_NE(cli("detect " + kEligible + " --config " + path("bad.json") + " --key " + key_).code, 0);
}

TEST_F(Cli, AttackIsSeededAndEvaluateWritesReports) {
  ASSERT_EQ(cli("attack " + kEligible + " -o " + path("a1.v") + " --seed 3").code, 0);
  ASSERT_EQ(cli("attack " + kEligible + " -o " + path("a2.v") + " --seed 3").code, 0);
  EXPECT_EQ(slurp(path("a1.v")), slurp(path("a2.v")));
  EXPECT_NO_THROW(vlog::parse(vlog::SourceText{slurp(path("a1.v")), "a1.v"}));

  fs::create_directories(dir_ / "corpus" / "eligible");
  fs::create_directories(dir_ / "corpus" / "clean");
  fs::copy_file(kEligible, dir_ / "corpus" / "eligible" / "counter8.v");
  fs::copy_file(first_clean(), dir_ / "corpus" / "clean" / "c.v");
  CliRun r = cli("evaluate " + path("corpus") + " --attack 1 --out " + path("report") + opts());
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(slurp(path("report/report.json")));
  EXPECT_EQ(j["format"], "rtlmark-report-1");
  EXPECT_TRUE(fs::exists(path("report/report.txt")));
}

TEST(CliRules, ListsFifteenRules) {
  CliRun r = cli("rules --json");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 15u);
  EXPECT_EQ(j[0]["rule"], "T1");
  CliRun t = cli("rules");
  EXPECT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("T15"), std::string::npos);
}
