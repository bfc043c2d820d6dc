#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "gradedkit/gca.hpp"
#include "support.hpp"

using namespace gk;
using gk::testing::random_poly;

namespace {

TablePtr mixed_table(const RingPtr& r) {
  return std::make_shared<GeneratorTable>(
      r, std::vector<Generator>{{"a", 1, 1, GenKind::DualBundle, 0, 0},
                                {"b", 1, 1, GenKind::DualBundle, 0, 1},
                                {"u", 2, 2, GenKind::DualBundle, 0, 2},
                                {"v", -1, 0, GenKind::DualBundle, 0, 3},
                                {"w", 3, 1, GenKind::DualBundle, 0, 4},
                                {"dx", 0, 0, GenKind::FormSymbol, 1, 5},
                                {"dy", 0, 0, GenKind::FormSymbol, 1, 6}});
}

Monomial random_monomial(std::mt19937& rng, const GeneratorTable& t) {
  Monomial m(t.size(), 0);
  for (std::size_t i = 0; i < t.size(); ++i)
    m[i] = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(0, t.gen(i).parity() ? 1 : 2)(rng));
  return m;
}

GCAElement random_element(std::mt19937& rng, const TablePtr& t, int terms = 3) {
  GCAElement e(t);
  for (int k = 0; k < terms; ++k) e += monomial_element(t, random_monomial(rng, *t), random_poly(rng, t->ring(), 2));
  return e;
}

int parity_of(const GeneratorTable& t, const Monomial& m) {
  int p = 0;
  for (std::size_t i = 0; i < m.size(); ++i) p += m[i] * t.gen(i).parity();
  return p % 2;
}

// Concatenate the two words and bubble-sort them, flipping the sign on every
// swap of two odd letters.
int bubble_sign(const GeneratorTable& t, const Monomial& a, const Monomial& b) {
  std::vector<int> word;
  for (auto* m : {&a, &b})
    for (std::size_t i = 0; i < m->size(); ++i)
      for (int k = 0; k < (*m)[i]; ++k) word.push_back(static_cast<int>(i));
  int sign = 1;
  for (std::size_t pass = 0; pass < word.size(); ++pass)
    for (std::size_t j = 0; j + 1 < word.size(); ++j)
      if (word[j] > word[j + 1]) {
        if (t.gen(word[j]).parity() && t.gen(word[j + 1]).parity()) sign = -sign;
        std::swap(word[j], word[j + 1]);
      }
  for (std::size_t j = 0; j + 1 < word.size(); ++j)
    if (word[j] == word[j + 1] && t.gen(word[j]).parity()) return 0;
  return sign;
}

// Random derivation of the requested parity: generator values are filtered to
// the parity that keeps the Leibniz rule consistent.
GradedDerivation random_derivation(std::mt19937& rng, const TablePtr& t, int deg) {
  GradedDerivation D(t, deg);
  const int p = ((deg % 2) + 2) % 2;
  for (std::size_t i = 0; i < t->size(); ++i) {
    int want = (t->gen(i).parity() + p) % 2;
    D.values[i] = random_element(rng, t, 2).filter([&](const Monomial& m) { return parity_of(*t, m) == want; });
  }
  for (std::size_t i = 0; i < t->ring()->nvars(); ++i)
    D.base_action[i] = random_element(rng, t, 2).filter([&](const Monomial& m) { return parity_of(*t, m) == p; });
  return D;
}

}  // namespace

TEST(Koszul, SignMatchesInversionCount) {
  std::mt19937 rng(1);
  for (int t = 0; t < 200; ++t) {
    std::size_t n = 1 + t % 6;
    std::vector<int> perm(n), deg(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::pair<int, int>> items;
    for (std::size_t k = 0; k < n; ++k) {
      deg[k] = std::uniform_int_distribution<int>(-3, 3)(rng);
      items.emplace_back(perm[k], deg[k]);
    }
    int inv = 0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) inv += perm[a] > perm[b] && (deg[a] & 1) && (deg[b] & 1);
    EXPECT_EQ(koszul_sign(items), inv % 2 ? -1 : 1);
  }
  EXPECT_THROW(koszul_sign({{0, 1}, {0, 1}}), std::invalid_argument);
}

TEST(GradedAlgebra, MonomialProductMatchesBubbleSort) {
  auto r = make_ring({"x"});
  auto t = mixed_table(r);
  std::mt19937 rng(2);
  for (int k = 0; k < 300; ++k) {
    Monomial a = random_monomial(rng, *t), b = random_monomial(rng, *t), out;
    EXPECT_EQ(multiply_monomials(*t, a, b, out), bubble_sign(*t, a, b));
  }
}

TEST(GradedAlgebra, AssociativeAndGradedCommutative) {
  auto r = make_ring({"x", "y"});
  auto t = mixed_table(r);
  std::mt19937 rng(3);
  for (int k = 0; k < 60; ++k) {
    GCAElement a = random_element(rng, t), b = random_element(rng, t), c = random_element(rng, t);
    EXPECT_EQ((a * b) * c, a * (b * c));
    Monomial ma = random_monomial(rng, *t), mb = random_monomial(rng, *t);
    GCAElement x = monomial_element(t, ma, random_poly(rng, r, 1)), y = monomial_element(t, mb, random_poly(rng, r, 1));
    GCAElement yx = y * x;
    EXPECT_EQ(x * y, parity_of(*t, ma) && parity_of(*t, mb) ? -yx : yx);
  }
  GCAElement a = GCAElement::generator(t, "a"), dx = GCAElement::generator(t, "dx");
  EXPECT_TRUE((a * a).is_zero());
  EXPECT_TRUE((dx * dx).is_zero());
  GCAElement v = GCAElement::generator(t, "v");
  EXPECT_TRUE((v * v).is_zero());
  EXPECT_FALSE((GCAElement::generator(t, "u") * GCAElement::generator(t, "u")).is_zero());
}

TEST(GradedAlgebra, TableMismatchThrows) {
  auto r = make_ring({"x"});
  auto t1 = mixed_table(r), t2 = mixed_table(r);
  EXPECT_THROW(GCAElement::generator(t1, "a") * GCAElement::generator(t2, "a"), table_mismatch);
}

TEST(Derivations, LeibnizRule) {
  auto r = make_ring({"x", "y"});
  auto t = mixed_table(r);
  std::mt19937 rng(4);
  for (int k = 0; k < 40; ++k) {
    int deg = k % 2 ? 1 : 2;
    GradedDerivation D = random_derivation(rng, t, deg);
    Monomial ma = random_monomial(rng, *t);
    GCAElement a = monomial_element(t, ma, random_poly(rng, r, 2)), b = random_element(rng, t);
    GCAElement rhs = D.apply(a) * b;
    GCAElement second = a * D.apply(b);
    rhs += (D.parity() && parity_of(*t, ma)) ? -second : second;
    EXPECT_EQ(D.apply(a * b), rhs);
  }
}

TEST(Derivations, CommutatorActsAsCommutator) {
  auto r = make_ring({"x", "y"});
  auto t = mixed_table(r);
  std::mt19937 rng(5);
  for (int k = 0; k < 30; ++k) {
    GradedDerivation D1 = random_derivation(rng, t, 1 + k % 2), D2 = random_derivation(rng, t, 1);
    GradedDerivation C = derivation_commutator(D1, D2);
    GCAElement a = random_element(rng, t);
    GCAElement second = D2.apply(D1.apply(a));
    GCAElement expected = D1.apply(D2.apply(a)) + ((D1.parity() && D2.parity()) ? second : -second);
    EXPECT_EQ(C.apply(a), expected);
  }
}

TEST(Derivations, DeRhamIsSquareZeroAndWitnessesFailure) {
  auto r = make_ring({"x", "y"});
  auto t = std::make_shared<GeneratorTable>(r, std::vector<Generator>{{"dx", 0, 0, GenKind::FormSymbol, 1, 0},
                                                                       {"dy", 0, 0, GenKind::FormSymbol, 1, 1}});
  GradedDerivation d = GradedDerivation::zero(t, 0, 1);
  d.set_base("x", GCAElement::generator(t, "dx"));
  d.set_base("y", GCAElement::generator(t, "dy"));
  EXPECT_TRUE(check_square_zero(d).pass);
  // With d(dx) = y dy, d^2 x = y dy.
  GradedDerivation bad = d;
  bad.set("dx", Poly::variable(r, 1) * GCAElement::generator(t, "dy"));
  auto res = check_square_zero(bad);
  EXPECT_FALSE(res.pass);
  EXPECT_EQ(res.generator, "x");
}
