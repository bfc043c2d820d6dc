// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "courant_cases.hpp"
#include "gradedkit/commands.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gk;
using namespace gk::testing;

namespace {

struct Tally {
  int cases = 0;
  std::string first_failure;

  void check(bool ok, const std::string& what) {
    ++cases;
    if (!ok && first_failure.empty()) first_failure = what;
  }
  bool pass() const { return first_failure.empty() && cases > 0; }
};

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(GK_FIXTURE_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ce_correspondence(Tally& t) {
  auto r = make_ring({"x", "y"});
  std::mt19937 rng(2024);
  int passing = 0;
  for (int k = 0; k < 50; ++k) {
    LinftyAlgebroid A = random_lie2(rng, r, k % 2, k % 3 != 0);
    bool oracle = linfty_oracle(A);
    t.check(verify_linfty(A).pass() == oracle, "oracle disagreement on instance " + std::to_string(k));
    if (!oracle) continue;
    ++passing;
    GradedDerivation D = build_ce_differential(A);
    t.check(check_square_zero(D).pass && structurally_equal(extract_brackets(D), A),
            "extract o build on instance " + std::to_string(k));
  }
  t.check(passing > 0 && passing < 50, "family covers both verdicts");
}

void homotopy_transfer(Tally& t) {
  auto r = make_ring({"x", "y"});
  std::mt19937 rng(31);
  for (int k = 0; k < 25; ++k) {
    const std::string n = std::to_string(k);
    LinftyAlgebroid A = k % 4 == 3 ? affine_line(r) : sl2_algebroid(r, true, k % 3);
    LinftyAlgebroid C = with_cone(A);
    CEAlgebra ce = ce_algebra(C);
    CEAutomorphism phi = random_automorphism(rng, ce, 3 + k % 4);
    LinftyAlgebroid M = conjugate_algebroid(C, ce, phi);
    DeformationRetract rt = cone_retract(A, M, linear_part(ce, phi, C));
    t.check(verify_linfty(M).pass() && verify_retract(M, rt).pass(), "retract " + n);
    TransferResult T = transfer_structure(M, rt);
    t.check(verify_linfty(T.algebroid).pass(), "transferred structure " + n);
    t.check(verify_morphism(T.inclusion, T.algebroid, M).pass(), "extension " + n);
  }
}

void normalized_complex(Tally& t) {
  auto r = make_ring({"x", "y", "z", "w"});
  std::mt19937 rng(5);
  const std::vector<LinftyAlgebroid> algebroids = {sl2_on_plane_in(r), affine_line(r), heisenberg(r)};
  for (int k = 0; k < 25; ++k) {
    const std::string n = std::to_string(k);
    const LinftyAlgebroid& A = algebroids[k % 3];
    FormsAlgebra F = forms_algebra(A);
    const int q = 1 + k % 2;
    NormalizedClosedForm m{2, 1 + q, F.zero(), random_base(rng, r, 1 + q)};
    if (q == 2) m.beta = euler_h(F, random_mixed(rng, F, 2, 1, 2));
    NormalizedClosedForm c = twisted_differential(F, A, m);
    NormalizedClosedForm cc = twisted_differential(F, A, c);
    t.check(cc.beta.is_zero() && cc.G.is_zero(), "delta_tw squared on cocycle " + n);
    GCAElement w = realize_closed_form(F, A, c);
    t.check(verify_closed_form(F, 2, w).pass(), "realized form closed " + n);
    t.check(normalize_closed_form(F, 2, w, c.degree) == c, "p' i' on cocycle " + n);
    const int e = k % 3;
    BaseForm G = random_base(rng, r, 2 + e);
    t.check(h_delta_power(F, F.from_base(G), e + 1) == twisting_map(F, A, G, 2), "(h delta)^(q+1) on form " + n);
  }
}

void shift_two_round_trip(Tally& t) {
  auto r4 = xyzw(), r1 = make_ring({"x"});
  std::vector<std::pair<std::string, CourantData>> cases = {
      {"standard", make_standard(r4)},
      {"twist x dy dz dw", make_h_twist(make_standard(r4), form(r4, {1, 2, 3}, "x"))},
      {"twist (w^2+1) dx dy dz", make_h_twist(make_standard(r4), form(r4, {0, 1, 2}, "w^2 + 1"))},
      {"rank-4 kernel", rank4(r1)}};
  for (auto& [name, E] : cases) {
    const RingPtr& r = E.ring;
    std::vector<PolyMatrix> skewm(r->nvars(), zero_matrix(r, E.rank(), E.rank()));
    skewm[0][0][1] = Poly::variable(r, 0);
    skewm[0][1][0] = -Poly::variable(r, 0);
    int which = 0;
    for (const MetricConnection& nabla : {MetricConnection::trivial(r, E.rank()), skew_connection(E, skewm)}) {
      const std::string what = name + " with connection " + std::to_string(which++);
      t.check(verify_courant_axioms(E).pass() && verify_metric(E, nabla).pass(), what + " input");
      ShiftedSymplecticData s = courant_to_symplectic(E, nabla);
      t.check(verify_closure_shift2(s).pass(), what + " closure");
      CourantWithConnection back = symplectic_to_courant(s);
      t.check(same_courant(back.courant, E) && back.connection.gamma == nabla.gamma, what + " round trip");
      t.check(same_symplectic(courant_to_symplectic(back.courant, back.connection), s), what + " second round trip");
    }
  }
}

void closure_mutants(Tally& t) {
  auto ms = mutants();
  t.check(ms.size() == 12, "twelve mutants");
  for (auto& m : ms) {
    t.check(verify_courant_axioms(m.E).failed(m.axiom), m.name + " not killed by " + m.axiom);
    ShiftedSymplecticData s = courant_to_symplectic(m.E, MetricConnection::trivial(m.E.ring, m.E.rank()), false);
    t.check(verify_closure_shift2(s).failed(m.closure), m.name + " not killed by " + m.closure);
  }
}

void gauge(Tally& t) {
  auto r = xyz();
  const CourantData S = make_standard(r);
  for (auto H : {form(r, {0, 1, 2}, "1"), form(r, {0, 1, 2}, "x*y + z")}) {
    const CourantData EH = make_h_twist(S, H);
    for (auto B : {form(r, {1, 2}, "x"), form(r, {0, 1}, "z^2") + form(r, {0, 2}, "y")}) {
      const CourantData EHB = make_h_twist(S, H + de_rham_d(B));
      BundleMap id = identity_matrix(r, S.rank());
      BundleMap g2 = plus_identity(r, b_transform_part(S, EH, B));
      t.check(verify_courant_2morphism(S, EH, id, H, g2, H + de_rham_d(B), B).pass(), "2-morphism " + B.str());
      t.check(verify_courant_axioms(EHB).pass(), "twist by H + dB");
      // With this orientation of b_transform_part, -B carries E_H onto E_{H+dB}.
      BundleMap iso = plus_identity(r, b_transform_part(EH, EHB, B * Rational(-1)));
      t.check(verify_courant_morphism(EH, EHB, iso, BaseForm(r, 3)).pass(), "B-transform E_H -> E_{H+dB}");
    }
    // A closed B gives an automorphism of each twist.
    BundleMap gc = plus_identity(r, b_transform_part(EH, EH, de_rham_d(form(r, {0}, "y*z"))));
    t.check(verify_courant_morphism(EH, EH, gc, BaseForm(r, 3)).pass(), "closed B-transform");
  }
  ThreeChartCocycle cc;
  cc.charts = {S, S, S};
  cc.B = BaseForm(r, 2);
  std::array<BaseForm, 3> Bs = {form(r, {1, 2}, "x"), form(r, {0, 2}, "y^2"), form(r, {0, 1}, "x*z")};
  for (int k = 0; k < 3; ++k) {
    cc.g[k] = plus_identity(r, b_transform_part(S, S, Bs[k]));
    cc.H[k] = de_rham_d(Bs[k]);
    cc.B += Bs[k];
  }
  t.check(!de_rham_d(cc.B).is_zero(), "B on the triple overlap is not closed");
  t.check(verify_bundle_twist(cc).pass(), "three-chart cocycle");
  ThreeChartCocycle off = cc;
  off.B += form(r, {0, 1}, "1");
  t.check(verify_bundle_twist(off).failed("cocycle.bundle-twist"), "perturbed cocycle detected");
}

void dirac_poisson(Tally& t) {
  std::mt19937 rng(77);
  const std::vector<std::string> vars = {"x", "y", "z", "w"};
  int poisson = 0;
  for (int k = 0; k < 200; ++k) {
    std::size_t n = 2 + k % 3;
    auto r = make_ring({vars.begin(), vars.begin() + n});
    PolyMatrix pi = zero_matrix(r, n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::uniform_int_distribution<int>(0, 2)(rng)) {
          pi[i][j] = random_poly(rng, r, 1 + k % 2);
          pi[j][i] = -pi[i][j];
        }
    CourantData E = make_standard(r);
    bool oracle = schouten_vanishes(pi);
    poisson += oracle;
    t.check(verify_dirac(E, graph_dirac(E, pi), default_sample_points(r)).pass() == oracle,
            "bivector " + std::to_string(k));
  }
  t.check(poisson > 0 && poisson < 200, "family covers both verdicts");
}

void tensor_product(Tally& t) {
  auto r = make_ring({"x", "y"});
  auto pts = default_sample_points(r);
  CourantData S = make_standard(r);
  ExactDiracPair unit{BaseForm(r, 3), tangent_dirac(S)};
  std::vector<ExactDiracPair> ds = {{BaseForm(r, 3), graph_dirac(S, skew(r, 2, {{0, 1, "1"}}))},
                                    {BaseForm(r, 3), graph_dirac(S, skew(r, 2, {{0, 1, "x*y + 3"}}))},
                                    {BaseForm(r, 3), two_form_graph(S, skew(r, 2, {{0, 1, "x^2"}}))},
                                    {BaseForm(r, 3), two_form_graph(S, skew(r, 2, {{0, 1, "y"}}))}};
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const std::string n = std::to_string(k);
    t.check(verify_dirac(S, ds[k].F, pts).pass(), "Dirac input " + n);
    t.check(same_dirac(S, tensor_dirac(r, ds[k], unit, pts).F, ds[k].F, pts), "right unit " + n);
    t.check(same_dirac(S, tensor_dirac(r, unit, ds[k], pts).F, ds[k].F, pts), "left unit " + n);
  }
  for (auto [a, b, c] : {std::tuple{0, 2, 3}, {1, 2, 3}, {0, 3, 2}}) {
    ExactDiracPair left = tensor_dirac(r, tensor_dirac(r, ds[a], ds[b], pts), ds[c], pts);
    ExactDiracPair right = tensor_dirac(r, ds[a], tensor_dirac(r, ds[b], ds[c], pts), pts);
    t.check(left.H == right.H && same_dirac(S, left.F, right.F, pts), "associativity");
  }
  // Additivity of the twist classes on presymplectic graphs in three variables.
  auto r3 = xyz();
  auto pts3 = default_sample_points(r3);
  CourantData S3 = make_standard(r3);
  PolyMatrix w1 = skew(r3, 3, {{1, 2, "x"}}), w2 = skew(r3, 3, {{0, 1, "z^2"}, {0, 2, "y*x"}});
  BaseForm H1 = de_rham_d(two_form_of(r3, w1)), H2 = de_rham_d(two_form_of(r3, w2));
  ExactDiracPair a{H1, two_form_graph(S3, w1)}, b{H2, two_form_graph(S3, w2)};
  t.check(verify_dirac(a.courant(r3), a.F, pts3).pass() && verify_dirac(b.courant(r3), b.F, pts3).pass(),
          "twisted Dirac inputs");
  ExactDiracPair ab = tensor_dirac(r3, a, b, pts3);
  PolyMatrix sum = w1;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) sum[i][j] += w2[i][j];
  t.check(ab.H == H1 + H2, "twist classes add");
  t.check(verify_dirac(ab.courant(r3), ab.F, pts3).pass(), "product is Dirac in the summed twist");
  t.check(same_dirac(ab.courant(r3), ab.F, two_form_graph(S3, sum), pts3), "product is the graph of the sum");
}

void foliations(Tally& t) {
  const std::vector<std::tuple<std::string, bool, std::string>> table = {
      {"foliation_pass_line.gk", true, ""},
      {"foliation_pass_weighted.gk", true, ""},
      {"foliation_pass_diagonal.gk", true, ""},
      {"foliation_fail_closed.gk", false, "zero.closed"},
      {"foliation_fail_isotropic.gk", false, "zero.isotropic"},
      {"foliation_fail_transverse.gk", false, "zero.transverse"}};
  for (auto& [file, pass, check] : table) {
    Report r = run_command_text("verify", slurp(file), nullptr, {});
    t.check(r.kind == "symplectic", file + " kind");
    t.check(r.pass() == pass, file + " verdict");
    if (!pass) t.check(r.verdict.failed(check), file + " fails " + check);
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Tally&)>>> criteria = {
      {"ce-correspondence", ce_correspondence}, {"homotopy-transfer", homotopy_transfer},
      {"normalized-complex", normalized_complex}, {"shift2-round-trip", shift_two_round_trip},
      {"closure-mutants", closure_mutants},     {"gauge-and-cocycle", gauge},
      {"dirac-poisson", dirac_poisson},         {"tensor-product", tensor_product},
      {"shift0-foliations", foliations}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Tally t;
    std::string error;
    try {
      criteria[i].second(t);
    } catch (const std::exception& e) {
      error = e.what();
    }
    bool ok = error.empty() && t.pass();
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << " (" << t.cases << " checks)";
    if (!error.empty()) std::cout << ": exception: " << error;
    if (!t.first_failure.empty()) std::cout << ": " << t.first_failure;
    std::cout << "\n";
  }
  return failed ? 1 : 0;
}
