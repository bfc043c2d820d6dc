#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

#include "json.hpp"

namespace {

struct Outcome {
  int code;
  std::string out;
};

Outcome run(const std::string& args) {
  std::string cmd = std::string(GK_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string fx(const std::string& name) { return std::string(GK_FIXTURE_DIR) + "/" + name; }

}  // namespace

TEST(Cli, PassingDocumentExitsZeroWithJson) {
  Outcome r = run("verify " + fx("sl2.gk"));
  EXPECT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema"], "gradedkit.report/1");
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["samples"], 8);
}

TEST(Cli, FailingDocumentExitsOne) {
  Outcome r = run("verify " + fx("sl2_corrupted.gk") + " --format text");
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("FAIL linfty.jacobi"), std::string::npos);
  EXPECT_NE(r.out.find("verdict: FAIL"), std::string::npos);
}

TEST(Cli, ParseErrorExitsTwoWithPosition) {
  Outcome r = run("verify " + fx("invalid/unbalanced.gk"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("unbalanced.gk:4:18: error:"), std::string::npos) << r.out;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("frobnicate " + fx("sl2.gk")).code, 2);
  EXPECT_EQ(run("verify").code, 2);
  EXPECT_EQ(run("verify " + fx("sl2.gk") + " --mode fuzzy").code, 2);
  EXPECT_EQ(run("verify " + fx("does_not_exist.gk")).code, 2);
  EXPECT_EQ(run("transfer " + fx("transfer_source.gk")).code, 2);
}

TEST(Cli, BinaryCommandsAndFlags) {
  EXPECT_EQ(run("transfer " + fx("transfer_source.gk") + " " + fx("transfer_retract.gk")).code, 0);
  EXPECT_EQ(run("dirac " + fx("tensor_left.gk") + " " + fx("tensor_right.gk")).code, 0);
  Outcome r = run("convert " + fx("twisted_courant.gk") + " --roundtrip --seed 3 --samples 2");
  EXPECT_EQ(r.code, 0) << r.out;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["seed"], 3);
  EXPECT_EQ(j["samples"], 2);
}

TEST(Cli, OutputIsDeterministic) {
  std::string args = "verify " + fx("symplectic_missing_phi.gk") + " --mode strict";
  Outcome a = run(args), b = run(args);
  EXPECT_EQ(a.code, 1);
  EXPECT_EQ(a.out, b.out);
}
