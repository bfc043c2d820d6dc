#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "gradedkit/commands.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gk;
using namespace gk::testing;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(GK_FIXTURE_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

dsl::Pos error_pos(const std::string& text) {
  try {
    dsl::load_text(text);
  } catch (const dsl::ParseError& e) {
    return e.pos;
  }
  ADD_FAILURE() << "no parse error";
  return {};
}

}  // namespace

TEST(Dsl, PrintParseIsIdentity) {
  for (const char* f : {"sl2.gk", "standard_courant.gk", "kernel_rank4.gk", "gauge_2morphism.gk", "dirac_twisted_graph.gk",
                        "closedform_base.gk", "symplectic_twisted.gk", "transfer_retract.gk"}) {
    dsl::Document d = dsl::parse(slurp(f));
    std::string printed = dsl::print(d);
    EXPECT_EQ(dsl::parse(printed), d) << f;
    EXPECT_EQ(dsl::print(dsl::parse(printed)), printed) << f;
  }
}

TEST(Dsl, GeneratedDocumentsReload) {
  auto r = make_ring({"x", "y"});
  std::mt19937 rng(5);
  for (int k = 0; k < 10; ++k) {
    LinftyAlgebroid A = random_lie2(rng, r, k % 2, false);
    std::string text = dsl::print(dsl::linfty_document(A, "generated"));
    dsl::Model m = dsl::load_text(text);
    ASSERT_TRUE(m.linfty);
    EXPECT_EQ(dsl::print(dsl::linfty_document(*m.linfty, "generated")), text);
    EXPECT_EQ(m.label, "generated");
  }
}

TEST(Dsl, MinimalDocumentIsAbelian) {
  dsl::Model m = dsl::load_text(slurp("minimal.gk"));
  ASSERT_TRUE(m.linfty);
  EXPECT_EQ(m.linfty->rank(), 0u);
  EXPECT_EQ(m.ring->vars, std::vector<std::string>{"x"});
  EXPECT_FALSE(m.expect);
  EXPECT_TRUE(verify_linfty(*m.linfty).pass());
}

TEST(Dsl, Sl2FixtureMatchesHandBuiltTable) {
  dsl::Model m = dsl::load_text(slurp("sl2.gk"));
  ASSERT_TRUE(m.linfty);
  const LinftyAlgebroid& A = *m.linfty;
  EXPECT_EQ(m.label, "sl2");
  EXPECT_EQ(A.names, (std::vector<std::string>{"h", "e", "f"}));
  EXPECT_TRUE(structurally_equal(A, sl2_algebroid(A.ring)));
  ASSERT_TRUE(m.expect);
  EXPECT_TRUE(m.expect->pass);
}

TEST(Dsl, DiagnosticPositions) {
  dsl::Pos p = error_pos(slurp("invalid/unbalanced.gk"));
  EXPECT_EQ(p.line, 4);
  EXPECT_EQ(p.col, 18);
  p = error_pos(slurp("invalid/unknown_variable.gk"));
  EXPECT_EQ(p.line, 4);
  EXPECT_EQ(p.col, 10);
  p = error_pos(slurp("invalid/bad_polynomial.gk"));
  EXPECT_EQ(p.line, 4);
  EXPECT_EQ(p.col, 22);
}

TEST(Dsl, FormattedErrorNamesFileAndExpectations) {
  try {
    dsl::parse("kind linfty\nring x\nbasis a 0\nbracket (a a) = {}\n");
    FAIL();
  } catch (const dsl::ParseError& e) {
    std::string s = dsl::format_error(e, "doc.gk");
    EXPECT_EQ(s.rfind("doc.gk:4:", 0), 0u) << s;
    EXPECT_NE(s.find("error:"), std::string::npos);
  }
}

TEST(Dsl, PolynomialsAreExactRationals) {
  auto r = make_ring({"x", "y"});
  Poly p = dsl::parse_poly(r, "1/2*x^2 - 3/6*x^2 + y");
  EXPECT_EQ(p, Poly::variable(r, 1));
  EXPECT_EQ(dsl::parse_poly(r, p.str()), p);
  EXPECT_THROW(dsl::parse_poly(r, "x/0"), dsl::ParseError);
  EXPECT_THROW(dsl::parse_poly(r, "t"), dsl::ParseError);
}

TEST(Report, JsonRoundTripAndDeterminism) {
  std::string text = slurp("sl2_corrupted.gk");
  Report a = run_command_text("verify", text, nullptr, {}), b = run_command_text("verify", text, nullptr, {});
  std::string ja = emit_report(a, "json"), jb = emit_report(b, "json");
  EXPECT_EQ(ja, jb);
  Report back = report_from_json(ja);
  EXPECT_EQ(emit_report(back, "json"), ja);
  EXPECT_EQ(report_json(a)["schema"], "gradedkit.report/1");
  EXPECT_EQ(report_json(a)["verdict"], "fail");
  EXPECT_EQ(emit_report(a, "text"), emit_report(b, "text"));
}

TEST(Report, TextFailureShowsAnchorWitnessAndResidual) {
  Report r = run_command_text("verify", slurp("sl2_corrupted.gk"), nullptr, {});
  const Check* c = r.verdict.find("linfty.jacobi");
  ASSERT_TRUE(c);
  EXPECT_FALSE(c->pass);
  EXPECT_EQ(c->witness, "(h,e,f)");
  EXPECT_FALSE(c->detail.empty());
  std::string t = emit_report(r, "text");
  EXPECT_NE(t.find("  FAIL linfty.jacobi  " + c->anchor), std::string::npos);
  EXPECT_NE(t.find("witness: (h,e,f)"), std::string::npos);
  EXPECT_NE(t.find("residual: " + c->detail), std::string::npos);
  EXPECT_NE(t.find("verdict: FAIL"), std::string::npos);
}

TEST(Report, SeedAndSamplesAreRecorded) {
  Flags f;
  f.seed = 11;
  f.samples = 3;
  Report r = run_command_text("dirac", slurp("dirac_tangent.gk"), nullptr, f);
  nlohmann::ordered_json j = report_json(r);
  EXPECT_EQ(j["seed"], 11);
  EXPECT_EQ(j["samples"], 3);
  EXPECT_EQ(j["mode"], "sampled");
  EXPECT_THROW(emit_report(r, "yaml"), std::invalid_argument);
  f.mode = "fuzzy";
  EXPECT_THROW(run_command_text("dirac", slurp("dirac_tangent.gk"), nullptr, f), CommandError);
}
