#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradedkit/base.hpp"
#include "gradedkit/gca.hpp"
#include "gradedkit/linalg.hpp"
#include "gradedkit/verdict.hpp"

namespace gk {

/// Element of a free module, by coefficients on the basis.
using LElem = std::vector<Poly>;
using Tuple = std::vector<int>;

inline LElem zero_elem(const RingPtr& r, std::size_t n) { return LElem(n, Poly(r)); }

inline bool is_zero(const LElem& x) {
  for (auto& c : x)
    if (!c.is_zero()) return false;
  return true;
}

/// acc += c * x
inline void axpy(LElem& acc, const Poly& c, const LElem& x) {
  if (c.is_zero()) return;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!x[i].is_zero()) acc[i] += c * x[i];
}

inline LElem operator+(LElem a, const LElem& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}
inline LElem operator-(LElem a, const LElem& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}
inline LElem operator*(const Poly& f, LElem a) {
  for (auto& c : a) c = f * c;
  return a;
}

/// x = sum_a x_a e_a  |->  sum_a x_a images[a]
inline LElem apply_linear(const std::vector<LElem>& images, const LElem& x, const RingPtr& r, std::size_t target_rank) {
  LElem out = zero_elem(r, target_rank);
  for (std::size_t a = 0; a < x.size(); ++a) axpy(out, x[a], images.at(a));
  return out;
}

/// Sign picked up by a graded-skew multilinear map when its arguments (with the
/// given degrees) are permuted from `from` into `to`.
inline int graded_skew_sign(Tuple from, const Tuple& to, const std::vector<int>& degrees) {
  int sign = 1;
  for (std::size_t i = 0; i < to.size(); ++i) {
    std::size_t j = i;
    while (j < from.size() && from[j] != to[i]) ++j;
    if (j == from.size()) throw std::invalid_argument("not a permutation");
    for (std::size_t k = j; k > i; --k) {
      int d1 = degrees[from[k - 1]], d2 = degrees[from[k]];
      sign = -sign;
      if ((d1 * d2) % 2) sign = -sign;
      std::swap(from[k - 1], from[k]);
    }
  }
  return sign;
}

/// All distinct orderings of a tuple.
inline std::vector<Tuple> distinct_permutations(Tuple t) {
  std::sort(t.begin(), t.end());
  std::vector<Tuple> out;
  do {
    out.push_back(t);
  } while (std::next_permutation(t.begin(), t.end()));
  return out;
}

/// Graded free module with a degree +1 differential. Basis element a sits in
/// degree degrees[a] and differential[a] is its image.
struct Complex {
  RingPtr ring;
  std::vector<std::string> names;
  std::vector<int> degrees;
  std::vector<LElem> differential;

  std::size_t rank() const { return names.size(); }

  int index_of(const std::string& n) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return static_cast<int>(i);
    return -1;
  }
  LElem zero() const { return zero_elem(ring, rank()); }
  LElem basis(std::size_t a) const {
    LElem e = zero();
    e.at(a) = Poly::constant(ring, 1);
    return e;
  }
  LElem apply_differential(const LElem& x) const { return apply_linear(differential, x, ring, rank()); }

  void add_basis(const std::string& n, int degree) {
    if (index_of(n) >= 0) throw std::invalid_argument("duplicate basis element " + n);
    names.push_back(n);
    degrees.push_back(degree);
    for (auto& d : differential) d.push_back(Poly(ring));
    differential.push_back(zero());
  }

  int min_degree() const { return degrees.empty() ? 0 : *std::min_element(degrees.begin(), degrees.end()); }
  int max_degree() const { return degrees.empty() ? 0 : *std::max_element(degrees.begin(), degrees.end()); }

  std::string tuple_str(const Tuple& t) const {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + names[t[i]];
    return s + ")";
  }

  std::string elem_str(const LElem& x) const {
    std::string s;
    for (std::size_t a = 0; a < x.size(); ++a) {
      if (x[a].is_zero()) continue;
      if (!s.empty()) s += " + ";
      s += "(" + x[a].str() + ")*" + names[a];
    }
    return s.empty() ? "0" : s;
  }
};

inline bool squares_to_zero(const Complex& c, std::string* witness = nullptr) {
  for (std::size_t a = 0; a < c.rank(); ++a)
    if (!is_zero(c.apply_differential(c.differential[a]))) {
      if (witness) *witness = c.names[a];
      return false;
    }
  return true;
}

/// L-infinity algebroid on free modules in non-positive degrees. Brackets are
/// stored on ordered basis tuples (arity >= 2); absent entries are zero. The
/// binary bracket is extended off the basis by the Leibniz rule
/// [e_a, f e_b] = f [e_a, e_b] + (s_ab f) e_b with symbol s_ab equal to the
/// anchor of e_a unless overridden; overrides make Leibniz violations
/// representable so that the check can reject them.
struct LinftyAlgebroid : Complex {
  std::vector<VectorField> anchor;
  std::map<std::pair<int, int>, VectorField> symbol_override;
  std::map<Tuple, LElem> brackets;

  void add_basis(const std::string& n, int degree) {
    Complex::add_basis(n, degree);
    for (auto& [t, v] : brackets) v.push_back(Poly(ring));
    anchor.push_back(VectorField(ring));
  }

  const VectorField& symbol(std::size_t a, std::size_t b) const {
    auto it = symbol_override.find({static_cast<int>(a), static_cast<int>(b)});
    return it == symbol_override.end() ? anchor.at(a) : it->second;
  }

  LElem bracket_basis(const Tuple& t) const {
    auto it = brackets.find(t);
    return it == brackets.end() ? zero() : it->second;
  }

  /// Store a bracket value; with `skew` every reordering is filled in by graded
  /// skew-symmetry.
  void set_bracket(const Tuple& t, const LElem& v, bool skew = false) {
    if (t.size() < 2) throw std::invalid_argument("brackets have arity at least two");
    auto put = [&](const Tuple& k, const LElem& val) {
      if (is_zero(val))
        brackets.erase(k);
      else
        brackets[k] = val;
    };
    if (!skew) {
      put(t, v);
      return;
    }
    for (auto& q : distinct_permutations(t)) {
      int s = graded_skew_sign(t, q, degrees);
      put(q, s > 0 ? v : Poly::constant(ring, -1) * v);
    }
  }

  int max_arity() const {
    int n = 1;
    for (auto& [t, v] : brackets) n = std::max<int>(n, static_cast<int>(t.size()));
    return n;
  }

  VectorField apply_anchor(const LElem& x) const {
    VectorField v(ring);
    for (std::size_t a = 0; a < x.size(); ++a)
      if (!x[a].is_zero()) v += x[a] * anchor[a];
    return v;
  }

  /// Binary bracket on arbitrary elements via the Leibniz rule in both slots.
  LElem bracket(const LElem& x, const LElem& y) const {
    LElem out = zero();
    for (std::size_t a = 0; a < x.size(); ++a) {
      if (x[a].is_zero()) continue;
      for (std::size_t b = 0; b < y.size(); ++b) {
        if (y[b].is_zero()) continue;
        axpy(out, x[a] * y[b], bracket_basis({static_cast<int>(a), static_cast<int>(b)}));
        out[b] += x[a] * symbol(a, b).apply(y[b]);
        Poly t = y[b] * symbol(b, a).apply(x[a]);
        if ((degrees[a] * degrees[b]) % 2)
          out[a] += t;
        else
          out[a] -= t;
      }
    }
    return out;
  }

  /// Multilinear bracket of arity >= 3 (arity 2 goes through the Leibniz rule).
  LElem bracket(const std::vector<LElem>& xs) const {
    if (xs.size() == 1) return apply_differential(xs[0]);
    if (xs.size() == 2) return bracket(xs[0], xs[1]);
    LElem out = zero();
    for (auto& [t, v] : brackets) {
      if (t.size() != xs.size()) continue;
      Poly c = Poly::constant(ring, 1);
      for (std::size_t i = 0; i < t.size() && !c.is_zero(); ++i) c = c * xs[i][t[i]];
      axpy(out, c, v);
    }
    return out;
  }
};

inline bool structurally_equal(const LinftyAlgebroid& a, const LinftyAlgebroid& b) {
  if (a.names != b.names || a.degrees != b.degrees) return false;
  if (a.differential != b.differential) return false;
  for (std::size_t i = 0; i < a.rank(); ++i)
    for (std::size_t j = 0; j < a.rank(); ++j)
      if (!(a.anchor[i] == b.anchor[i]) || !(a.symbol(i, j) == b.symbol(i, j))) return false;
  auto prune = [](const std::map<Tuple, LElem>& m) {
    std::map<Tuple, LElem> r;
    for (auto& [t, v] : m)
      if (!is_zero(v)) r.emplace(t, v);
    return r;
  };
  return prune(a.brackets) == prune(b.brackets);
}

inline LinftyAlgebroid make_algebroid(const RingPtr& r) {
  LinftyAlgebroid A;
  A.ring = r;
  return A;
}

// ---------------------------------------------------------------------------
// Chevalley-Eilenberg algebra

/// Generator table of Sym(L^v[-1]): basis element `e` of degree -k gives the
/// generator `t_e` of degree k+1 and weight one.
struct CEAlgebra {
  TablePtr table;
  std::vector<std::size_t> gen_of;  // basis index -> table index
  std::vector<int> basis_of;        // table index -> basis index

  GCAElement theta(std::size_t a) const { return GCAElement::generator(table, gen_of.at(a)); }

  /// Product of generators in tuple order.
  GCAElement theta_product(const Tuple& t) const {
    GCAElement e = GCAElement::scalar(table, Poly::constant(table->ring(), 1));
    for (int a : t) e = e * theta(a);
    return e;
  }
};

inline std::string dual_name(const std::string& basis_name) { return "t_" + basis_name; }

inline CEAlgebra ce_algebra(const Complex& L) {
  std::vector<Generator> gens;
  for (std::size_t a = 0; a < L.rank(); ++a)
    gens.push_back(Generator{dual_name(L.names[a]), 1 - L.degrees[a], 1, GenKind::DualBundle, 0, static_cast<int>(a)});
  CEAlgebra ce;
  ce.table = std::make_shared<const GeneratorTable>(L.ring, gens);
  ce.gen_of.resize(L.rank());
  ce.basis_of.resize(L.rank());
  for (std::size_t g = 0; g < ce.table->size(); ++g) {
    int a = ce.table->gen(g).decl;
    ce.gen_of[a] = g;
    ce.basis_of[g] = a;
  }
  return ce;
}

/// (-1)^{sum_i (n-i) k_i} with k = -degree, the symmetrization sign pairing a
/// bracket table with products of dual generators.
inline int tuple_sign(const Tuple& t, const std::vector<int>& degrees) {
  int n = static_cast<int>(t.size()), e = 0;
  for (int i = 0; i < n; ++i) e += (n - 1 - i) * (-degrees[t[i]]);
  return (e % 2) ? -1 : 1;
}

inline Rational factorial(int n) {
  Rational f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// The differential on Sym(L^v[-1]) encoding anchor, differential and brackets.
inline GradedDerivation build_ce_differential(const LinftyAlgebroid& A, const CEAlgebra& ce) {
  GradedDerivation D = GradedDerivation::zero(ce.table, 1);
  const RingPtr& r = A.ring;
  for (std::size_t i = 0; i < r->nvars(); ++i)
    for (std::size_t a = 0; a < A.rank(); ++a)
      if (!A.anchor[a].comp[i].is_zero()) D.base_action[i] += A.anchor[a].comp[i] * ce.theta(a);
  std::vector<GCAElement> vals(A.rank(), GCAElement(ce.table));
  for (std::size_t a = 0; a < A.rank(); ++a)
    for (std::size_t c = 0; c < A.rank(); ++c)
      if (!A.differential[a][c].is_zero()) vals[c] -= A.differential[a][c] * ce.theta(a);
  for (auto& [t, v] : A.brackets) {
    if (is_zero(v)) continue;
    const int n = static_cast<int>(t.size());
    Rational coef = Rational(-tuple_sign(t, A.degrees)) / factorial(n);
    GCAElement mono = coef * ce.theta_product(t);
    if (mono.is_zero()) continue;
    for (std::size_t c = 0; c < A.rank(); ++c)
      if (!v[c].is_zero()) vals[c] += v[c] * mono;
  }
  for (std::size_t c = 0; c < A.rank(); ++c) D.values[ce.gen_of[c]] = vals[c];
  return D;
}

inline GradedDerivation build_ce_differential(const LinftyAlgebroid& A) { return build_ce_differential(A, ce_algebra(A)); }

/// Inverse of build_ce_differential: read anchor, differential and brackets off
/// a square-zero degree-one derivation of Sym(L^v[-1]).
inline LinftyAlgebroid extract_brackets(const GradedDerivation& D) {
  const TablePtr& t = D.table;
  if (D.degree != 1 || D.form_degree != 0) throw std::invalid_argument("CE differential must have degree one");
  for (auto& g : t->gens())
    if (g.kind != GenKind::DualBundle || g.weight != 1) throw std::invalid_argument("table is not a CE generator table");
  if (!check_square_zero(D).pass) throw std::invalid_argument("derivation does not square to zero");

  LinftyAlgebroid A = make_algebroid(t->ring());
  const std::size_t n = t->size();
  std::vector<int> basis_of(n);
  std::vector<std::size_t> order(n);
  for (std::size_t g = 0; g < n; ++g) order[g] = g;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return t->gen(x).decl < t->gen(y).decl; });
  for (std::size_t a = 0; a < n; ++a) {
    const Generator& g = t->gen(order[a]);
    std::string name = g.name.rfind("t_", 0) == 0 ? g.name.substr(2) : g.name;
    A.add_basis(name, 1 - g.degree);
    basis_of[order[a]] = static_cast<int>(a);
  }
  GCAElement probe(t);
  for (std::size_t i = 0; i < t->ring()->nvars(); ++i)
    for (auto& [m, p] : D.base_action[i].terms()) {
      if (probe.weight(m) != 1 || probe.degree(m) != 1)
        throw std::invalid_argument("base action is not a weight-one degree-one element");
      std::size_t g = std::find(m.begin(), m.end(), 1) - m.begin();
      A.anchor[basis_of[g]].comp[i] += p;
    }
  for (std::size_t gc = 0; gc < n; ++gc) {
    const int c = basis_of[gc];
    for (auto& [m, p] : D.value(gc).terms()) {
      if (probe.degree(m) != t->gen(gc).degree + 1) throw std::invalid_argument("derivation is not homogeneous");
      Tuple tup;
      Rational mult = 1;
      for (std::size_t g = 0; g < n; ++g) {
        for (int k = 0; k < m[g]; ++k) tup.push_back(basis_of[g]);
        mult *= factorial(m[g]);
      }
      if (tup.empty()) throw std::invalid_argument("derivation has a weight-zero component");
      Poly coeff = p * Rational(-mult * tuple_sign(tup, A.degrees));
      if (tup.size() == 1) {
        A.differential[tup[0]][c] += coeff;
        continue;
      }
      for (auto& q : distinct_permutations(tup)) {
        LElem v = A.bracket_basis(q);
        int s = graded_skew_sign(tup, q, A.degrees);
        v[c] += s > 0 ? coeff : -coeff;
        A.set_bracket(q, v);
      }
    }
  }
  return A;
}

// ---------------------------------------------------------------------------
// Verification

namespace detail {

/// Lexicographically first basis tuple among the monomials of failing values.
inline std::string first_tuple(const LinftyAlgebroid& A, const CEAlgebra& ce, const std::vector<GCAElement>& failures) {
  std::optional<Tuple> best;
  for (auto& e : failures)
    for (auto& [m, p] : e.terms()) {
      Tuple t;
      for (std::size_t g = 0; g < m.size(); ++g)
        for (int k = 0; k < m[g]; ++k) t.push_back(ce.basis_of[g]);
      std::sort(t.begin(), t.end());
      if (!best || t < *best) best = t;
    }
  return best ? A.tuple_str(*best) : std::string("()");
}

}  // namespace detail

inline Verdict verify_linfty(const LinftyAlgebroid& A) {
  Verdict v;
  const RingPtr& r = A.ring;

  std::string w;
  v.add("linfty.complex", "differential squares to zero", squares_to_zero(A, &w), w);

  {
    bool ok = true;
    for (std::size_t a = 0; a < A.rank() && ok; ++a) {
      bool bad = (A.degrees[a] != 0 && !A.anchor[a].is_zero()) || !A.apply_anchor(A.differential[a]).is_zero();
      if (bad) ok = false, w = A.names[a];
    }
    v.add("linfty.anchor-chain", "anchor is a chain map to the tangent bundle in degree zero", ok, w);
  }

  {
    bool ok = true;
    for (std::size_t a = 0; a < A.rank() && ok; ++a)
      for (std::size_t b = 0; b < A.rank(); ++b)
        if (!A.differential[a][b].is_zero() && A.degrees[b] != A.degrees[a] + 1) {
          ok = false, w = A.names[a];
          break;
        }
    for (auto it = A.brackets.begin(); ok && it != A.brackets.end(); ++it) {
      const auto& [t, val] = *it;
      int expect = 2 - static_cast<int>(t.size());
      for (int a : t) expect += A.degrees[a];
      for (std::size_t b = 0; b < val.size(); ++b)
        if (!val[b].is_zero() && A.degrees[b] != expect) {
          ok = false, w = A.tuple_str(t);
          break;
        }
    }
    v.add("linfty.degree", "n-ary bracket has degree 2-n", ok, w);
  }

  {
    bool ok = true;
    for (auto it = A.brackets.begin(); ok && it != A.brackets.end(); ++it) {
      const auto& [t, val] = *it;
      for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        Tuple q = t;
        std::swap(q[i], q[i + 1]);
        int s = graded_skew_sign(t, q, A.degrees);
        LElem expect = s > 0 ? val : Poly::constant(r, -1) * val;
        if (A.bracket_basis(q) != expect) {
          ok = false, w = A.tuple_str(t);
          break;
        }
      }
    }
    v.add("linfty.skew", "brackets are graded skew-symmetric", ok, w);
  }

  {
    bool ok = true;
    for (std::size_t a = 0; a < A.rank() && ok; ++a)
      for (std::size_t b = 0; b < A.rank() && ok; ++b)
        for (std::size_t i = 0; i < r->nvars(); ++i) {
          Poly f = Poly::variable(r, i);
          LElem lhs = A.bracket(A.basis(a), f * A.basis(b));
          LElem rhs = f * A.bracket_basis({static_cast<int>(a), static_cast<int>(b)});
          rhs[b] += A.anchor[a].apply(f);
          if (lhs != rhs) {
            ok = false, w = "(" + A.names[a] + "," + r->vars[i] + "*" + A.names[b] + ")";
            break;
          }
        }
    v.add("linfty.leibniz", "binary bracket obeys the Leibniz rule along the anchor", ok, w);
  }

  {
    CEAlgebra ce = ce_algebra(A);
    GradedDerivation D = build_ce_differential(A, ce);
    std::vector<GCAElement> bad;
    for (std::size_t i = 0; i < r->nvars(); ++i) {
      GCAElement e = D.apply(D.base_action[i]);
      if (!e.is_zero()) bad.push_back(e);
    }
    v.add("linfty.anchor-bracket", "anchor maps brackets to commutators of vector fields", bad.empty(),
          bad.empty() ? "" : detail::first_tuple(A, ce, bad), bad.empty() ? "" : bad.front().str());
    bad.clear();
    for (std::size_t g = 0; g < ce.table->size(); ++g) {
      GCAElement e = D.apply(D.value(g));
      if (!e.is_zero()) bad.push_back(e);
    }
    v.add("linfty.jacobi", "higher Jacobi identities (CE differential squares to zero)", bad.empty(),
          bad.empty() ? "" : detail::first_tuple(A, ce, bad), bad.empty() ? "" : bad.front().str());
  }
  return v;
}

// ---------------------------------------------------------------------------
// Morphisms

/// Components f_n on ordered source basis tuples (arity-one entries included).
struct LinftyMorphism {
  std::map<Tuple, LElem> components;

  LElem component(const Tuple& t, const RingPtr& r, std::size_t target_rank) const {
    auto it = components.find(t);
    return it == components.end() ? zero_elem(r, target_rank) : it->second;
  }
  LElem linear(std::size_t a, const RingPtr& r, std::size_t target_rank) const {
    return component({static_cast<int>(a)}, r, target_rank);
  }
};

inline LinftyMorphism identity_morphism(const Complex& L) {
  LinftyMorphism f;
  for (std::size_t a = 0; a < L.rank(); ++a) f.components[{static_cast<int>(a)}] = L.basis(a);
  return f;
}

/// Pullback f^* on CE generators of the target, as elements of the source CE algebra.
inline std::vector<GCAElement> morphism_pullback(const LinftyMorphism& f, const LinftyAlgebroid& M, const CEAlgebra& ceM,
                                                 const LinftyAlgebroid& L, const CEAlgebra& ceL) {
  std::vector<GCAElement> images(ceL.table->size(), GCAElement(ceM.table));
  for (auto& [t, v] : f.components) {
    Rational coef = Rational(tuple_sign(t, M.degrees)) / factorial(static_cast<int>(t.size()));
    GCAElement mono = coef * ceM.theta_product(t);
    if (mono.is_zero()) continue;
    for (std::size_t c = 0; c < L.rank(); ++c)
      if (!v[c].is_zero()) images[ceL.gen_of[c]] += v[c] * mono;
  }
  return images;
}

/// f: M -> L is an L-infinity morphism iff f^* intertwines the CE differentials.
inline Verdict verify_morphism(const LinftyMorphism& f, const LinftyAlgebroid& M, const LinftyAlgebroid& L) {
  Verdict v;
  const RingPtr& r = L.ring;
  std::string w;
  {
    bool ok = true;
    for (auto it = f.components.begin(); ok && it != f.components.end(); ++it) {
      const auto& [t, val] = *it;
      int expect = 1 - static_cast<int>(t.size());
      for (int a : t) expect += M.degrees.at(a);
      if (val.size() != L.rank()) throw std::invalid_argument("morphism component has wrong length");
      for (std::size_t b = 0; b < val.size(); ++b)
        if (!val[b].is_zero() && L.degrees[b] != expect) {
          ok = false, w = M.tuple_str(t);
          break;
        }
    }
    v.add("morphism.degree", "n-th component has degree 1-n", ok, w);
  }
  {
    bool ok = true;
    for (std::size_t a = 0; a < M.rank() && ok; ++a) {
      std::vector<LElem> f1(M.rank());
      for (std::size_t b = 0; b < M.rank(); ++b) f1[b] = f.linear(b, r, L.rank());
      LElem x = apply_linear(f1, M.differential[a], r, L.rank());
      LElem y = L.apply_differential(f1[a]);
      if (x != y) ok = false, w = M.names[a];
    }
    v.add("morphism.chain", "linear component is a chain map", ok, w);
  }
  {
    bool ok = true;
    for (std::size_t a = 0; a < M.rank() && ok; ++a)
      if (!(L.apply_anchor(f.linear(a, r, L.rank())) == M.anchor[a])) ok = false, w = M.names[a];
    v.add("morphism.anchor", "target anchor after the linear component equals the source anchor", ok, w);
  }
  {
    CEAlgebra ceM = ce_algebra(M), ceL = ce_algebra(L);
    GradedDerivation DM = build_ce_differential(M, ceM), DL = build_ce_differential(L, ceL);
    auto images = morphism_pullback(f, M, ceM, L, ceL);
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < r->nvars() && ok; ++i) {
      GCAElement diff = apply_algebra_map(images, ceM.table, DL.base_action[i]) - DM.base_action[i];
      GCAElement higher = diff.filter([&](const Monomial& m) { return diff.weight(m) > 1; });
      if (!higher.is_zero()) ok = false, w = r->vars[i], detail = higher.str();
    }
    for (std::size_t g = 0; g < ceL.table->size() && ok; ++g) {
      GCAElement diff = apply_algebra_map(images, ceM.table, DL.value(g)) - DM.apply(images[g]);
      if (!diff.is_zero()) ok = false, w = ceL.table->gen(g).name, detail = diff.str();
    }
    v.add("morphism.brackets", "bracket compatibilities (pullback intertwines CE differentials)", ok, w, detail);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Homotopy transfer

/// Special deformation retract of M onto `target`: i: target -> M, p: M -> target,
/// h: M -> M of degree -1.
struct DeformationRetract {
  Complex target;
  std::vector<LElem> i;
  std::vector<LElem> p;
  std::vector<LElem> h;
};

inline Verdict verify_retract(const Complex& M, const DeformationRetract& rt) {
  Verdict v;
  const RingPtr& r = M.ring;
  const Complex& L = rt.target;
  auto I = [&](const LElem& x) { return apply_linear(rt.i, x, r, M.rank()); };
  auto P = [&](const LElem& x) { return apply_linear(rt.p, x, r, L.rank()); };
  auto H = [&](const LElem& x) { return apply_linear(rt.h, x, r, M.rank()); };
  if (rt.i.size() != L.rank() || rt.p.size() != M.rank() || rt.h.size() != M.rank())
    throw std::invalid_argument("retract maps have the wrong shape");

  auto check = [&](const char* id, const char* anchor, auto pred, std::size_t n, const Complex& names) {
    for (std::size_t a = 0; a < n; ++a)
      if (!pred(a)) {
        v.add(id, anchor, false, names.names[a]);
        return;
      }
    v.add(id, anchor, true);
  };
  check("retract.degree", "i and p have degree 0, h has degree -1",
        [&](std::size_t a) {
          for (std::size_t b = 0; b < L.rank(); ++b)
            if (!rt.p[a][b].is_zero() && L.degrees[b] != M.degrees[a]) return false;
          for (std::size_t b = 0; b < M.rank(); ++b)
            if (!rt.h[a][b].is_zero() && M.degrees[b] != M.degrees[a] - 1) return false;
          return true;
        },
        M.rank(), M);
  check("retract.i-degree", "i has degree 0",
        [&](std::size_t a) {
          for (std::size_t b = 0; b < M.rank(); ++b)
            if (!rt.i[a][b].is_zero() && M.degrees[b] != L.degrees[a]) return false;
          return true;
        },
        L.rank(), L);
  check("retract.i-chain", "i is a chain map",
        [&](std::size_t a) { return I(L.differential[a]) == M.apply_differential(rt.i[a]); }, L.rank(), L);
  check("retract.p-chain", "p is a chain map",
        [&](std::size_t a) { return P(M.differential[a]) == L.apply_differential(rt.p[a]); }, M.rank(), M);
  check("retract.homotopy", "ip - id = dh + hd",
        [&](std::size_t a) {
          LElem lhs = I(rt.p[a]) - M.basis(a);
          return lhs == M.apply_differential(rt.h[a]) + H(M.differential[a]);
        },
        M.rank(), M);
  check("retract.pi", "pi = id", [&](std::size_t a) { return P(rt.i[a]) == L.basis(a); }, L.rank(), L);
  check("retract.hi", "hi = 0", [&](std::size_t a) { return is_zero(H(rt.i[a])); }, L.rank(), L);
  check("retract.ph", "ph = 0", [&](std::size_t a) { return is_zero(P(rt.h[a])); }, M.rank(), M);
  check("retract.hh", "h^2 = 0", [&](std::size_t a) { return is_zero(H(rt.h[a])); }, M.rank(), M);
  return v;
}

struct TransferResult {
  LinftyAlgebroid algebroid;
  LinftyMorphism inclusion;  // extension of i to an L-infinity morphism
  bool inclusion_complete = true;  // false when the source reaches below degree -1
};

/// Transfer of a Lie 2-algebroid structure along a special deformation retract
/// onto a complex of the same amplitude. Anchor a i, binary bracket p[i,i],
/// ternary bracket from the trees through h.
inline TransferResult transfer_structure(const LinftyAlgebroid& M, const DeformationRetract& rt) {
  if (!verify_retract(M, rt).pass()) throw std::invalid_argument("retract identities fail");
  if (rt.target.min_degree() < -1 || M.max_degree() > 0 || rt.target.max_degree() > 0)
    throw std::invalid_argument("transfer supports targets in amplitude [-1,0] only");
  for (auto& [t, v] : M.brackets)
    if (t.size() > 3) throw std::invalid_argument("transfer supports brackets of arity at most three");

  const RingPtr& r = M.ring;
  const Complex& T = rt.target;
  auto P = [&](const LElem& x) { return apply_linear(rt.p, x, r, T.rank()); };
  auto H = [&](const LElem& x) { return apply_linear(rt.h, x, r, M.rank()); };

  TransferResult out;
  LinftyAlgebroid& L = out.algebroid;
  L.ring = r;
  for (std::size_t a = 0; a < T.rank(); ++a) L.add_basis(T.names[a], T.degrees[a]);
  L.differential = T.differential;
  for (std::size_t a = 0; a < T.rank(); ++a) L.anchor[a] = M.apply_anchor(rt.i[a]);

  const int n = static_cast<int>(T.rank());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) L.set_bracket({a, b}, P(M.bracket(rt.i[a], rt.i[b])));

  // i_2(x,y) = h[ix,iy]; l_3 = p l_3(i,i,i) - sum over (2,1)-unshuffles of p[i_2,i].
  auto i2 = [&](int a, int b) { return H(M.bracket(rt.i[a], rt.i[b])); };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        if (T.degrees[a] || T.degrees[b] || T.degrees[c]) continue;
        LElem v = P(M.bracket(std::vector<LElem>{rt.i[a], rt.i[b], rt.i[c]}));
        v = v - P(M.bracket(i2(a, b), rt.i[c]));
        v = v + P(M.bracket(i2(a, c), rt.i[b]));
        v = v - P(M.bracket(i2(b, c), rt.i[a]));
        L.set_bracket({a, b, c}, v);
      }

  out.inclusion_complete = M.min_degree() >= -1;
  for (int a = 0; a < n; ++a) out.inclusion.components[{a}] = rt.i[a];
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      LElem v = i2(a, b);
      if (!is_zero(v)) out.inclusion.components[{a, b}] = v;
    }
  return out;
}

/// The complex ... -> L_1 -> L_0 -> T_U with T_U in degree zero; L_i sits in
/// degree -i-1 and the last map is the anchor.
inline Complex pullback_tangent_complex(const LinftyAlgebroid& A) {
  Complex C;
  C.ring = A.ring;
  for (std::size_t a = 0; a < A.rank(); ++a) C.add_basis(A.names[a], A.degrees[a] - 1);
  for (std::size_t i = 0; i < A.ring->nvars(); ++i) C.add_basis("d/d" + A.ring->vars[i], 0);
  const std::size_t n = A.rank();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) C.differential[a][b] = A.differential[a][b];
    for (std::size_t i = 0; i < A.ring->nvars(); ++i) C.differential[a][n + i] = A.anchor[a].comp[i];
  }
  return C;
}

}  // namespace gk
