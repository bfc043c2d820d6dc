#pragma once

#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "gradedkit/algebroid.hpp"
#include "gradedkit/forms.hpp"

namespace gk::testing {

inline Poly c(const RingPtr& r, long k) { return Poly::constant(r, k); }

inline LElem elem(const LinftyAlgebroid& A, std::initializer_list<std::pair<const char*, Poly>> parts) {
  LElem v = A.zero();
  for (auto& [n, p] : parts) v.at(A.index_of(n)) += p;
  return v;
}

inline Tuple tup(const Complex& A, std::initializer_list<const char*> names) {
  Tuple t;
  for (auto n : names) t.push_back(A.index_of(n));
  return t;
}

/// Tangent algebroid of the affine space on `r`.
inline LinftyAlgebroid tangent_algebroid(const RingPtr& r) {
  LinftyAlgebroid A = make_algebroid(r);
  for (std::size_t i = 0; i < r->nvars(); ++i) A.add_basis(r->vars[i], 0);
  for (std::size_t i = 0; i < r->nvars(); ++i) A.anchor[i] = VectorField::coordinate(r, i);
  return A;
}

/// sl2 acting on the plane (or on a point when the ring has no variables),
/// basis declared h e f. Optionally a degree -1 summand u with a ternary
/// bracket l3(h,e,f) = k u.
inline LinftyAlgebroid sl2_algebroid(const RingPtr& r, bool with_u = false, long k = 0) {
  LinftyAlgebroid A = make_algebroid(r);
  A.add_basis("h", 0);
  A.add_basis("e", 0);
  A.add_basis("f", 0);
  if (r->nvars() == 2) {
    Poly x = Poly::variable(r, 0), y = Poly::variable(r, 1), z(r);
    A.anchor[0] = VectorField(r, {x, -y});
    A.anchor[1] = VectorField(r, {z, x});
    A.anchor[2] = VectorField(r, {y, z});
  }
  A.set_bracket(tup(A, {"h", "e"}), elem(A, {{"e", c(r, 2)}}), true);
  A.set_bracket(tup(A, {"h", "f"}), elem(A, {{"f", c(r, -2)}}), true);
  A.set_bracket(tup(A, {"e", "f"}), elem(A, {{"h", c(r, 1)}}), true);
  if (with_u) {
    A.add_basis("u", -1);
    if (k) A.set_bracket(tup(A, {"h", "e", "f"}), elem(A, {{"u", c(r, k)}}), true);
  }
  return A;
}

/// Degree 0 generator g with zero anchor hit by the differential of a degree
/// -1 generator.
inline LinftyAlgebroid contractible_pair(const RingPtr& r) {
  LinftyAlgebroid A = make_algebroid(r);
  A.add_basis("g", 0);
  A.add_basis("w", -1);
  A.differential[1][0] = c(r, 1);
  return A;
}

/// Direct sum with a contractible pair k0 (degree 0), k1 (degree -1), dk1 = k0.
inline LinftyAlgebroid with_cone(LinftyAlgebroid A) {
  A.add_basis("k0", 0);
  A.add_basis("k1", -1);
  A.differential[A.index_of("k1")][A.index_of("k0")] = c(A.ring, 1);
  return A;
}

/// Degree 0 algebra automorphism of a CE algebra, stored as generator images
/// together with the images of its inverse.
struct CEAutomorphism {
  std::vector<GCAElement> fwd, inv;
};

inline CEAutomorphism identity_automorphism(const CEAlgebra& ce) {
  CEAutomorphism phi;
  for (std::size_t g = 0; g < ce.table->size(); ++g) {
    phi.fwd.push_back(GCAElement::generator(ce.table, g));
    phi.inv.push_back(GCAElement::generator(ce.table, g));
  }
  return phi;
}

/// phi <- step o phi, where step sends generator g to g + delta (delta free of g).
inline void compose_elementary(CEAutomorphism& phi, const CEAlgebra& ce, std::size_t g, const GCAElement& delta) {
  std::vector<GCAElement> step = identity_automorphism(ce).fwd, step_inv = step;
  step[g] += delta;
  step_inv[g] -= delta;
  for (auto& e : phi.fwd) e = apply_algebra_map(step, ce.table, e);
  std::vector<GCAElement> inv;
  for (auto& e : step_inv) inv.push_back(apply_algebra_map(phi.inv, ce.table, e));
  phi.inv = inv;
}

inline Poly random_poly(std::mt19937& rng, const RingPtr& r, int max_deg) {
  std::uniform_int_distribution<int> coef(-2, 2), deg(0, max_deg);
  Poly p(r);
  for (int k = 0; k < 2; ++k) {
    Poly m = Poly::constant(r, coef(rng));
    int d = r->nvars() ? deg(rng) : 0;
    for (int j = 0; j < d; ++j) m = m * Poly::variable(r, std::uniform_int_distribution<int>(0, r->nvars() - 1)(rng));
    p += m;
  }
  return p;
}

/// Random automorphism built from shears among same-degree generators and
/// quadratic corrections. Coefficients are polynomials of degree <= max_deg.
inline CEAutomorphism random_automorphism(std::mt19937& rng, const CEAlgebra& ce, int steps, int max_deg = 1) {
  CEAutomorphism phi = identity_automorphism(ce);
  const std::size_t n = ce.table->size();
  if (n == 0) return phi;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const RingPtr& r = ce.table->ring();
  for (int s = 0; s < steps; ++s) {
    std::size_t g = pick(rng);
    const int dg = ce.table->gen(g).degree;
    std::vector<GCAElement> candidates;
    for (std::size_t a = 0; a < n; ++a) {
      if (a == g) continue;
      if (ce.table->gen(a).degree == dg) candidates.push_back(GCAElement::generator(ce.table, a));
      for (std::size_t b = a; b < n; ++b) {
        if (b == g || ce.table->gen(a).degree + ce.table->gen(b).degree != dg) continue;
        GCAElement q = GCAElement::generator(ce.table, a) * GCAElement::generator(ce.table, b);
        if (!q.is_zero()) candidates.push_back(q);
      }
    }
    if (candidates.empty()) continue;
    GCAElement delta = random_poly(rng, r, max_deg) *
                       candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
    if (!delta.is_zero()) compose_elementary(phi, ce, g, delta);
  }
  return phi;
}

/// phi D phi^{-1}.
inline GradedDerivation conjugate(const GradedDerivation& D, const CEAutomorphism& phi) {
  GradedDerivation out = GradedDerivation::zero(D.table, D.degree, D.form_degree);
  for (std::size_t i = 0; i < D.base_action.size(); ++i)
    out.base_action[i] = apply_algebra_map(phi.fwd, D.table, D.base_action[i]);
  for (std::size_t g = 0; g < D.table->size(); ++g)
    out.values[g] = apply_algebra_map(phi.fwd, D.table, D.apply(phi.inv[g]));
  return out;
}

/// Algebroid with CE differential phi D_A phi^{-1}; isomorphic to A.
inline LinftyAlgebroid conjugate_algebroid(const LinftyAlgebroid& A, const CEAlgebra& ce, const CEAutomorphism& phi) {
  return extract_brackets(conjugate(build_ce_differential(A, ce), phi));
}

/// Linear part of the morphism whose pullback is phi, as a matrix on basis
/// elements: column a holds the image of e_a.
inline std::vector<LElem> linear_part(const CEAlgebra& ce, const CEAutomorphism& phi, const Complex& L) {
  std::vector<LElem> out(L.rank(), L.zero());
  for (std::size_t c = 0; c < L.rank(); ++c)
    for (auto& [m, p] : phi.fwd[ce.gen_of[c]].terms()) {
      int w = 0;
      std::size_t g = 0;
      for (std::size_t k = 0; k < m.size(); ++k)
        if (m[k]) w += m[k], g = k;
      if (w == 1) out[ce.basis_of[g]][c] += p;
    }
  return out;
}

inline std::vector<LElem> invert_linear(const RingPtr& r, const std::vector<LElem>& cols) {
  const std::size_t n = cols.size();
  PolyMatrix m = zero_matrix(r, n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) m[b][a] = cols[a][b];
  auto inv = inverse(r, m);
  if (!inv) throw std::invalid_argument("linear part not invertible");
  std::vector<LElem> out(n, zero_elem(r, n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) out[a][b] = (*inv)[b][a];
  return out;
}

/// Standard retract of A + cone onto A, transported along the linear iso psi
/// from the conjugated structure to the unconjugated one.
inline DeformationRetract cone_retract(const LinftyAlgebroid& A, const LinftyAlgebroid& M, const std::vector<LElem>& psi) {
  const RingPtr& r = A.ring;
  const std::size_t n = A.rank(), N = M.rank();
  const int k0 = M.index_of("k0"), k1 = M.index_of("k1");
  std::vector<LElem> i0(n, zero_elem(r, N)), p0(N, zero_elem(r, n)), h0(N, zero_elem(r, N));
  for (std::size_t a = 0; a < n; ++a) i0[a][a] = c(r, 1), p0[a][a] = c(r, 1);
  h0[k0][k1] = c(r, -1);
  std::vector<LElem> psi_inv = invert_linear(r, psi);
  auto lin = [&](const std::vector<LElem>& f, const LElem& x, std::size_t rk) { return apply_linear(f, x, r, rk); };
  DeformationRetract rt;
  rt.target = A;
  for (std::size_t a = 0; a < n; ++a) rt.i.push_back(lin(psi_inv, i0[a], N));
  for (std::size_t b = 0; b < N; ++b) rt.p.push_back(lin(p0, psi[b], n));
  for (std::size_t b = 0; b < N; ++b) rt.h.push_back(lin(psi_inv, lin(h0, psi[b], N), N));
  return rt;
}

// ---------------------------------------------------------------------------
// Algebroids and random data for mixed forms

/// sl2 acting linearly on the (x,y)-plane inside a larger coordinate space.
inline LinftyAlgebroid sl2_on_plane_in(const RingPtr& r) {
  LinftyAlgebroid A = sl2_algebroid(make_ring({}));
  LinftyAlgebroid B = make_algebroid(r);
  for (std::size_t a = 0; a < A.rank(); ++a) B.add_basis(A.names[a], 0);
  Poly x = Poly::variable(r, 0), y = Poly::variable(r, 1);
  B.anchor[0] = x * VectorField::coordinate(r, 0) - y * VectorField::coordinate(r, 1);
  B.anchor[1] = x * VectorField::coordinate(r, 1);
  B.anchor[2] = y * VectorField::coordinate(r, 0);
  for (auto& [t, v] : A.brackets) {
    LElem w = B.zero();
    for (std::size_t a = 0; a < v.size(); ++a) w[a] = Poly::constant(r, v[a].constant_term());
    B.set_bracket(t, w);
  }
  return B;
}

/// Affine algebra acting on the x-line: anchors d/dx and x d/dx, [a,b] = a.
inline LinftyAlgebroid affine_line(const RingPtr& r) {
  LinftyAlgebroid A = make_algebroid(r);
  A.add_basis("a", 0);
  A.add_basis("b", 0);
  A.anchor[0] = VectorField::coordinate(r, 0);
  A.anchor[1] = Poly::variable(r, 0) * VectorField::coordinate(r, 0);
  A.set_bracket({0, 1}, elem(A, {{"a", c(r, 1)}}), true);
  return A;
}

/// Heisenberg algebra: anchors d/dx, d/dy, d/dz + x d/dy with [e1,e3] = e2.
/// The anchors span three directions, so three-fold contractions survive.
inline LinftyAlgebroid heisenberg(const RingPtr& r) {
  LinftyAlgebroid A = make_algebroid(r);
  for (auto n : {"e1", "e2", "e3"}) A.add_basis(n, 0);
  A.anchor[0] = VectorField::coordinate(r, 0);
  A.anchor[1] = VectorField::coordinate(r, 1);
  A.anchor[2] = VectorField::coordinate(r, 2) + Poly::variable(r, 0) * VectorField::coordinate(r, 1);
  A.set_bracket({0, 2}, elem(A, {{"e2", c(r, 1)}}), true);
  return A;
}

inline GCAElement random_mixed(std::mt19937& rng, const FormsAlgebra& F, int form_deg, int internal_deg, int terms) {
  const auto& t = *F.table;
  GCAElement out = F.zero();
  for (int tries = 0, got = 0; tries < 4000 && got < terms; ++tries) {
    Monomial m(t.size(), 0);
    for (std::size_t i = 0; i < t.size(); ++i)
      m[i] = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(0, 3)(rng) == 0);
    GCAElement e = monomial_element(F.table, m, random_poly(rng, F.ring(), 2));
    if (e.is_zero() || e.form_degree(m) != form_deg || e.degree(m) != internal_deg) continue;
    out += e;
    ++got;
  }
  return out;
}

inline BaseForm random_base(std::mt19937& rng, const RingPtr& r, int degree) {
  BaseForm G(r, degree);
  const int n = static_cast<int>(r->nvars());
  std::vector<int> pick;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(pick.size()) == degree) {
      if (std::uniform_int_distribution<int>(0, 1)(rng)) G.add(pick, random_poly(rng, r, 2));
      return;
    }
    for (int k = start; k < n; ++k) {
      pick.push_back(k);
      self(self, k + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  return G;
}

}  // namespace gk::testing

namespace gk {

// Readable gtest failure output.
inline void PrintTo(const Poly& p, std::ostream* os) { *os << p.str(); }
inline void PrintTo(const BaseForm& w, std::ostream* os) { *os << w.str(); }
inline void PrintTo(const VectorField& v, std::ostream* os) { *os << v.str(); }

}  // namespace gk
