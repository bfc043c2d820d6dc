#include <gtest/gtest.h>

#include <random>

#include "gradedkit/forms.hpp"
#include "support.hpp"

using namespace gk;
using namespace gk::testing;

namespace {

RingPtr four() { return make_ring({"x", "y", "z", "w"}); }

}  // namespace

TEST(Forms, DifferentialsSquareToZeroAndAnticommute) {
  auto r = make_ring({"x", "y"});
  std::mt19937 rng(1);
  for (const LinftyAlgebroid& A : {affine_line(r), sl2_algebroid(r), sl2_algebroid(r, true, 2)}) {
    FormsAlgebra F = forms_algebra(A);
    EXPECT_TRUE(check_square_zero(F.d).pass);
    EXPECT_TRUE(check_square_zero(F.delta).pass);
    for (int k = 0; k < 10; ++k) {
      GCAElement w = random_mixed(rng, F, k % 3, 1 + k % 2, 3);
      EXPECT_TRUE((F.d.apply(F.delta.apply(w)) + F.delta.apply(F.d.apply(w))).is_zero());
    }
  }
}

TEST(Forms, EulerHomotopyContractsPositiveInternalDegree) {
  auto r = make_ring({"x", "y"});
  std::mt19937 rng(2);
  FormsAlgebra F = forms_algebra(sl2_algebroid(r, true, 1));
  for (int k = 0; k < 20; ++k) {
    GCAElement w = random_mixed(rng, F, k % 3, 1 + k % 3, 3);
    EXPECT_EQ(F.d.apply(euler_h(F, w)) + euler_h(F, F.d.apply(w)), w);
    EXPECT_TRUE(euler_h(F, euler_h(F, w)).is_zero());
  }
}

TEST(Forms, PotentialFormulasAgree) {
  auto r = make_ring({"x", "y"});
  std::mt19937 rng(3);
  for (const LinftyAlgebroid& A : {affine_line(r), sl2_algebroid(r)}) {
    FormsAlgebra F = forms_algebra(A);
    for (int k = 0; k < 10; ++k) {
      GCAElement b = euler_h(F, random_mixed(rng, F, 2, 1 + k % 2, 3));
      if (b.is_zero()) continue;
      ASSERT_TRUE(in_potentials(F, b));
      EXPECT_TRUE(verify_potential_formulas(F, b).pass());
    }
  }
}

TEST(Forms, HDeltaPowerIsTwistingMap) {
  auto r = four();
  std::mt19937 rng(4);
  for (const LinftyAlgebroid& A : {sl2_on_plane_in(r), affine_line(r), heisenberg(r)}) {
    ASSERT_TRUE(verify_linfty(A).pass());
    FormsAlgebra F = forms_algebra(A);
    for (int q = 0; q <= 2; ++q)
      for (int k = 0; k < 3; ++k) {
        BaseForm G = random_base(rng, r, 2 + q);
        EXPECT_EQ(h_delta_power(F, F.from_base(G), q + 1), twisting_map(F, A, G, 2));
      }
  }
}

TEST(Forms, NormalizedComplexRoundTrip) {
  auto r = four();
  std::mt19937 rng(5);
  for (const LinftyAlgebroid& A : {sl2_on_plane_in(r), affine_line(r), heisenberg(r)}) {
    FormsAlgebra F = forms_algebra(A);
    for (int q = 1; q <= 2; ++q)
      for (int k = 0; k < 3; ++k) {
        NormalizedClosedForm m{2, 1 + q, F.zero(), random_base(rng, r, 1 + q)};
        if (q == 2) m.beta = euler_h(F, random_mixed(rng, F, 2, 1, 2));
        NormalizedClosedForm n = twisted_differential(F, A, m);
        NormalizedClosedForm nn = twisted_differential(F, A, n);
        EXPECT_TRUE(nn.beta.is_zero() && nn.G.is_zero());
        EXPECT_EQ(perturbed_differential(F, m), n);
        GCAElement w = realize_closed_form(F, A, n);
        EXPECT_TRUE(verify_closed_form(F, 2, w).pass());
        EXPECT_EQ(normalize_closed_form(F, 2, w, n.degree), n);
      }
  }
}

TEST(Forms, ExactCocycleNormalizesToExactClass) {
  auto r = make_ring({"x", "y"});
  LinftyAlgebroid A = affine_line(r);
  FormsAlgebra F = forms_algebra(A);
  // eta = y t_a dx dy, w = (d + delta) eta.
  GCAElement eta = Poly::variable(r, 1) * (F.gen(F.theta[0]) * F.gen(F.dx[0]) * F.gen(F.dx[1]));
  GCAElement w = F.d.apply(eta) + F.delta.apply(eta);
  ASSERT_TRUE(verify_closed_form(F, 2, w).pass());
  NormalizedClosedForm n = normalize_closed_form(F, 2, w, 4);
  EXPECT_TRUE(n.beta.is_zero());
  EXPECT_TRUE(n.G.is_zero());
}

TEST(Forms, BrokenCocycleIsReported) {
  auto r = make_ring({"x", "y"});
  LinftyAlgebroid A = affine_line(r);
  FormsAlgebra F = forms_algebra(A);
  GCAElement w = Poly::variable(r, 1) * (F.gen(F.theta[0]) * F.gen(F.dx[0]) * F.gen(F.dx[1]));
  Verdict v = verify_closed_form(F, 2, w);
  EXPECT_FALSE(v.pass());
  EXPECT_THROW(normalize_closed_form(F, 2, w), std::invalid_argument);
}
