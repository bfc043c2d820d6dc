#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gradedkit/commands.hpp"

using namespace gk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fixture(const std::string& name) { return fs::path(GK_FIXTURE_DIR) / name; }

std::vector<std::string> corpus() {
  std::vector<std::string> out;
  for (auto& e : fs::directory_iterator(GK_FIXTURE_DIR))
    if (e.path().extension() == ".gk") out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

// Retract documents need the algebroid they retract.
const char* companion(const std::string& name) { return name == "transfer_retract.gk" ? "transfer_source.gk" : nullptr; }

dsl::Model load_fixture(const dsl::Document& doc, const std::optional<dsl::Document>& other) {
  return other ? detail::load_transfer_pair(doc, *other).second : dsl::load(doc);
}

class Corpus : public ::testing::TestWithParam<std::string> {};

}  // namespace

TEST(CorpusList, CoversEveryKind) {
  std::set<dsl::Kind> kinds;
  for (auto& n : corpus()) {
    std::optional<dsl::Document> other;
    if (const char* c = companion(n)) other = dsl::parse(slurp(fixture(c)));
    kinds.insert(load_fixture(dsl::parse(slurp(fixture(n))), other).kind);
  }
  EXPECT_EQ(kinds.size(), dsl::kind_names().size());
}

TEST_P(Corpus, VerdictMatchesExpectation) {
  const std::string name = GetParam();
  const std::string text = slurp(fixture(name));
  dsl::Document doc = dsl::parse(text);
  std::optional<dsl::Document> other;
  if (const char* c = companion(name)) other = dsl::parse(slurp(fixture(c)));
  dsl::Model m = load_fixture(doc, other);
  Report r = run_command("verify", doc, other ? &*other : nullptr, {});
  if (!m.expect) {
    EXPECT_TRUE(r.pass()) << name;
    return;
  }
  EXPECT_EQ(r.pass(), m.expect->pass) << name << "\n" << emit_report(r, "text");
  if (!m.expect->check.empty()) {
    const Check* c = r.verdict.find(m.expect->check);
    ASSERT_TRUE(c) << name << ": no check " << m.expect->check;
    EXPECT_FALSE(c->pass) << name;
    if (!m.expect->witness.empty()) {
      EXPECT_EQ(c->witness, m.expect->witness) << name;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Fixtures, Corpus, ::testing::ValuesIn(corpus()), [](const auto& info) {
  std::string s = info.param.substr(0, info.param.size() - 3);
  std::replace(s.begin(), s.end(), '.', '_');
  return s;
});

TEST(CorpusPairs, TensorOfLeftAndRightGraphs) {
  dsl::Document a = dsl::parse(slurp(fixture("tensor_left.gk"))), b = dsl::parse(slurp(fixture("tensor_right.gk")));
  Report r = run_command("dirac", a, &b, {});
  EXPECT_TRUE(r.pass()) << emit_report(r, "text");
  ASSERT_TRUE(r.verdict.find("tensor.transverse"));
  auto it = std::find_if(r.outputs.begin(), r.outputs.end(), [](auto& o) { return o.first == "tensor"; });
  ASSERT_NE(it, r.outputs.end());
  // The product document is itself a passing Dirac fixture.
  Report again = run_command("dirac", dsl::parse(it->second), nullptr, {});
  EXPECT_TRUE(again.pass()) << it->second;
}

TEST(CorpusPairs, TransferEmitsVerifyingAlgebroid) {
  dsl::Document src = dsl::parse(slurp(fixture("transfer_source.gk")));
  dsl::Document ret = dsl::parse(slurp(fixture("transfer_retract.gk")));
  Report r = run_command("transfer", src, &ret, {});
  ASSERT_TRUE(r.pass()) << emit_report(r, "text");
  auto it = std::find_if(r.outputs.begin(), r.outputs.end(), [](auto& o) { return o.first == "transferred"; });
  ASSERT_NE(it, r.outputs.end());
  EXPECT_TRUE(run_command("verify", dsl::parse(it->second), nullptr, {}).pass()) << it->second;
}

TEST(CorpusPairs, ConvertRoundTripsOnCourantFixtures) {
  Flags f;
  f.roundtrip = true;
  for (const char* n : {"standard_courant.gk", "twisted_courant.gk", "kernel_rank4.gk", "symplectic_twisted.gk"}) {
    Report r = run_command("convert", dsl::parse(slurp(fixture(n))), nullptr, f);
    EXPECT_TRUE(r.pass()) << n << "\n" << emit_report(r, "text");
  }
}
