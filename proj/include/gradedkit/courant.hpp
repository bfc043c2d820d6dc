#pragma once

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradedkit/algebroid.hpp"
#include "gradedkit/base.hpp"
#include "gradedkit/linalg.hpp"
#include "gradedkit/symplectic.hpp"
#include "gradedkit/verdict.hpp"

namespace gk {

/// Bundle with symmetric pairing, anchor, Courant-Dorfman bracket and a
/// four-form. The bracket is stored on basis pairs and extended by
///   [[x, f y]] = f [[x, y]] + (s f) y,  s = a(x) unless overridden per pair,
///   [[f x, y]] = f [[x, y]] - (a(y) f) x + <x, y> a* df.
/// The first-slot rule is the consequence of the axioms; it is not checked
/// separately.
struct CourantData {
  RingPtr ring;
  std::vector<std::string> names;
  PolyMatrix gram;
  std::vector<VectorField> anchor;
  std::map<std::pair<int, int>, LElem> brackets;
  std::map<std::pair<int, int>, VectorField> symbol_override;
  BaseForm K;

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

  void add_basis(const std::string& n, const VectorField& a) {
    if (index_of(n) >= 0) throw std::invalid_argument("duplicate basis element " + n);
    names.push_back(n);
    anchor.push_back(a);
    for (auto& row : gram) row.push_back(Poly(ring));
    gram.push_back(std::vector<Poly>(rank(), Poly(ring)));
    for (auto& [k, v] : brackets) v.push_back(Poly(ring));
  }

  const VectorField& symbol(std::size_t a, std::size_t b) const {
    auto it = symbol_override.find({static_cast<int>(a), static_cast<int>(b)});
    return it == symbol_override.end() ? anchor.at(a) : it->second;
  }

  LElem bracket_basis(std::size_t a, std::size_t b) const {
    auto it = brackets.find({static_cast<int>(a), static_cast<int>(b)});
    return it == brackets.end() ? zero() : it->second;
  }

  void set_bracket(std::size_t a, std::size_t b, const LElem& v) {
    if (is_zero(v))
      brackets.erase({static_cast<int>(a), static_cast<int>(b)});
    else
      brackets[{static_cast<int>(a), static_cast<int>(b)}] = v;
  }

  Poly pair(const LElem& x, const LElem& y) const {
    Poly s(ring);
    for (std::size_t a = 0; a < x.size(); ++a) {
      if (x[a].is_zero()) continue;
      for (std::size_t b = 0; b < y.size(); ++b)
        if (!y[b].is_zero() && !gram[a][b].is_zero()) s += x[a] * y[b] * gram[a][b];
    }
    return s;
  }

  VectorField apply_anchor(const LElem& x) const {
    VectorField v(ring);
    for (std::size_t a = 0; a < x.size(); ++a)
      if (!x[a].is_zero()) v += x[a] * anchor[a];
    return v;
  }

  const PolyMatrix& gram_inverse() const {
    if (!inv_cache_ || inv_source_ != gram) {
      auto inv = inverse(ring, gram);
      if (!inv) throw std::invalid_argument("pairing does not have unit determinant");
      inv_cache_ = std::move(*inv);
      inv_source_ = gram;
    }
    return *inv_cache_;
  }

  /// Transpose of the anchor: <a* xi, y> = xi(a y).
  LElem a_star(const BaseForm& xi) const {
    LElem out = zero();
    if (xi.is_zero()) return out;
    if (xi.degree != 1) throw std::invalid_argument("a* needs a one-form");
    const PolyMatrix& inv = gram_inverse();
    for (std::size_t j = 0; j < rank(); ++j) {
      Poly v(ring);
      for (auto& [idx, f] : xi.terms) v += f * anchor[j].comp[idx[0]];
      if (v.is_zero()) continue;
      for (std::size_t i = 0; i < rank(); ++i)
        if (!inv[i][j].is_zero()) out[i] += inv[i][j] * v;
    }
    return out;
  }

  LElem bracket(const LElem& x, const LElem& y) const {
    LElem out = zero();
    for (std::size_t a = 0; a < x.size(); ++a) {
      if (x[a].is_zero()) continue;
      for (std::size_t b = 0; b < y.size(); ++b) {
        if (y[b].is_zero()) continue;
        axpy(out, x[a] * y[b], bracket_basis(a, b));
        out[b] += x[a] * symbol(a, b).apply(y[b]);
        out[a] -= y[b] * anchor[b].apply(x[a]);
        if (!gram[a][b].is_zero()) axpy(out, y[b] * gram[a][b], a_star(differential(x[a])));
      }
    }
    return out;
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

 private:
  mutable std::optional<PolyMatrix> inv_cache_;
  mutable PolyMatrix inv_source_;
};

inline CourantData make_courant(const RingPtr& r) {
  CourantData E;
  E.ring = r;
  E.K = BaseForm(r, 4);
  return E;
}

inline bool same_courant(const CourantData& a, const CourantData& b) {
  if (a.names != b.names || a.gram != b.gram || !(a.K == b.K)) return false;
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (!(a.anchor[i] == b.anchor[i])) return false;
    for (std::size_t j = 0; j < a.rank(); ++j)
      if (a.bracket_basis(i, j) != b.bracket_basis(i, j) || !(a.symbol(i, j) == b.symbol(i, j))) return false;
  }
  return true;
}

/// T + T^v with basis D_v, dv; <D_i, dx_j> = 1/2 delta_ij so that the
/// pairing of X + alpha with itself is alpha(X).
inline CourantData make_standard(const RingPtr& r) {
  CourantData E = make_courant(r);
  const std::size_t n = r->nvars();
  for (std::size_t i = 0; i < n; ++i) E.add_basis("D_" + r->vars[i], VectorField::coordinate(r, i));
  for (std::size_t i = 0; i < n; ++i) E.add_basis("d" + r->vars[i], VectorField(r));
  for (std::size_t i = 0; i < n; ++i) {
    E.gram[i][n + i] = Poly::constant(r, Rational(1, 2));
    E.gram[n + i][i] = Poly::constant(r, Rational(1, 2));
  }
  return E;
}

namespace detail {

inline BaseForm iota2(const VectorField& a, const VectorField& b, const BaseForm& H) {
  if (H.is_zero()) return BaseForm(H.ring, 1);
  BaseForm w = contract(a, contract(b, H));
  w.degree = 1;
  return w;
}

}  // namespace detail

/// Bracket shifted by (1/2) a* i_{ax} i_{ay} H; K gains dH.
inline CourantData make_h_twist(CourantData E, const BaseForm& H) {
  if (H.is_zero()) return E;
  if (H.degree != 3) throw std::invalid_argument("twist needs a three-form");
  for (std::size_t a = 0; a < E.rank(); ++a)
    for (std::size_t b = 0; b < E.rank(); ++b) {
      LElem t = E.a_star(detail::iota2(E.anchor[a], E.anchor[b], H) * Rational(1, 2));
      if (!is_zero(t)) E.set_bracket(a, b, E.bracket_basis(a, b) + t);
    }
  BaseForm dH = de_rham_d(H);
  if (E.K.is_zero()) E.K = BaseForm(E.ring, 4);
  E.K += dH;
  E.K.degree = 4;
  return E;
}

// ---------------------------------------------------------------------------
// Axioms

namespace detail {

inline std::vector<int> all_indices(std::size_t n) {
  std::vector<int> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i);
  return v;
}

inline std::string elem_residual(const CourantData& E, const LElem& x) { return is_zero(x) ? std::string() : E.elem_str(x); }

inline std::string poly_residual(const Poly& p) { return p.is_zero() ? std::string() : p.str(); }

}  // namespace detail

/// Residual of the Leibniz rule in the second slot.
inline LElem courant_leibniz_residual(const CourantData& E, const LElem& x, const LElem& y, const Poly& f) {
  LElem r = E.bracket(x, f * y) - f * E.bracket(x, y);
  axpy(r, -E.apply_anchor(x).apply(f), y);
  return r;
}

/// [[x,y]] + [[y,x]] - a* d<x,y>, the polarization of the second axiom.
inline LElem courant_symmetric_residual(const CourantData& E, const LElem& x, const LElem& y) {
  return E.bracket(x, y) + E.bracket(y, x) - E.a_star(differential(E.pair(x, y)));
}

inline Poly courant_invariance_residual(const CourantData& E, const LElem& x, const LElem& y, const LElem& z) {
  return E.apply_anchor(x).apply(E.pair(y, z)) - E.pair(E.bracket(x, y), z) - E.pair(y, E.bracket(x, z));
}

inline LElem courant_jacobi_residual(const CourantData& E, const LElem& x, const LElem& y, const LElem& z) {
  LElem r = E.bracket(x, E.bracket(y, z)) - E.bracket(E.bracket(x, y), z) - E.bracket(y, E.bracket(x, z));
  if (!E.K.is_zero())
    r = r + E.a_star(detail::insert_slots({E.apply_anchor(x), E.apply_anchor(y), E.apply_anchor(z)}, E.K) *
                     Rational(1, 2));
  return r;
}

/// Pairing, the four axioms on basis tuples and coordinate probes, and dK = 0.
inline Verdict verify_courant_axioms(const CourantData& E) {
  Verdict v;
  const RingPtr& r = E.ring;
  const std::vector<int> all = detail::all_indices(E.rank());
  std::string w, det;

  bool sym = E.gram.size() == E.rank() && is_symmetric(E.gram);
  bool unit = sym && detail::unit_determinant(r, E.gram);
  v.add("courant.pairing", "pairing symmetric with unit determinant", unit, sym ? "determinant" : "symmetry");
  if (!unit) return v;

  bool ok = true;
  for (std::size_t a = 0; a < E.rank() && ok; ++a)
    for (std::size_t b = 0; b < E.rank() && ok; ++b)
      for (std::size_t k = 0; k < r->nvars() && ok; ++k) {
        LElem res = courant_leibniz_residual(E, E.basis(a), E.basis(b), Poly::variable(r, k));
        if (!is_zero(res)) {
          ok = false;
          w = "(" + E.names[a] + "," + r->vars[k] + "*" + E.names[b] + ")";
          det = E.elem_str(res);
        }
      }
  v.add("courant.tca1", "[[x, f y]] = f [[x, y]] + (a(x) f) y", ok, w, det);

  ok = detail::probe_tuples(E, {all, all}, [&](const std::vector<LElem>& xs) {
    return detail::elem_residual(E, courant_symmetric_residual(E, xs[0], xs[1]));
  }, w, det);
  v.add("courant.tca2", "[[x, x]] = 1/2 a* d<x, x>", ok, w, det);

  ok = detail::probe_tuples(E, {all, all, all}, [&](const std::vector<LElem>& xs) {
    return detail::poly_residual(courant_invariance_residual(E, xs[0], xs[1], xs[2]));
  }, w, det);
  v.add("courant.tca3", "a(x)<y, z> = <[[x, y]], z> + <y, [[x, z]]>", ok, w, det);

  ok = detail::probe_tuples(E, {all, all, all}, [&](const std::vector<LElem>& xs) {
    return detail::elem_residual(E, courant_jacobi_residual(E, xs[0], xs[1], xs[2]));
  }, w, det);
  v.add("courant.tca4", "Leibniz-Jacobi identity with the -1/2 a* i i i K correction", ok, w, det);

  BaseForm dK = E.K.is_zero() ? BaseForm(r, 5) : de_rham_d(E.K);
  v.add("courant.k-closed", "dK = 0", dK.is_zero(), "dK", dK.str());
  return v;
}

// ---------------------------------------------------------------------------
// Exactness

namespace detail {

inline PolyMatrix anchor_matrix(const CourantData& E) {
  PolyMatrix m = zero_matrix(E.ring, E.ring->nvars(), E.rank());
  for (std::size_t j = 0; j < E.rank(); ++j)
    for (std::size_t i = 0; i < E.ring->nvars(); ++i) m[i][j] = E.anchor[j].comp[i];
  return m;
}

/// Columns a*(dx_i).
inline PolyMatrix coanchor_matrix(const CourantData& E) {
  const std::size_t n = E.ring->nvars();
  PolyMatrix m = zero_matrix(E.ring, E.rank(), n);
  for (std::size_t i = 0; i < n; ++i) {
    LElem c = E.a_star(BaseForm::term(E.ring, {static_cast<int>(i)}, Poly::constant(E.ring, 1)));
    for (std::size_t a = 0; a < E.rank(); ++a) m[a][i] = c[a];
  }
  return m;
}

}  // namespace detail

/// 0 -> T^v -> E -> T -> 0: rank, a a* = 0 exactly, and the ranks of a and a*
/// at the sample points.
inline Verdict verify_exact(const CourantData& E, const std::vector<Point>& points) {
  Verdict v;
  const RingPtr& r = E.ring;
  const std::size_t n = r->nvars();
  v.add("exact.rank", "rank E = 2 dim U", E.rank() == 2 * n, std::to_string(E.rank()));
  if (E.rank() != 2 * n) return v;
  PolyMatrix a = detail::anchor_matrix(E), as = detail::coanchor_matrix(E);
  PolyMatrix comp = matmul(r, a, as);
  v.add("exact.complex", "a a* = 0", is_zero_matrix(comp), "a a*");
  std::string w;
  bool surj = true, inj = true;
  for (auto& pt : points) {
    if (surj && rank_at(a, pt) != n) surj = false, w = point_str(r, pt);
    if (!surj) break;
  }
  v.add("exact.anchor-surjective", "anchor surjective at sample points", surj, w);
  for (auto& pt : points)
    if (rank_at(as, pt) != n) {
      inj = false, w = point_str(r, pt);
      break;
    }
  v.add("exact.coanchor-injective", "a* injective at sample points", inj, w);
  return v;
}

// ---------------------------------------------------------------------------
// Metric connections

/// nabla_{d/dx_k} e_j = sum_i gamma[k][i][j] e_i.
struct MetricConnection {
  std::vector<PolyMatrix> gamma;

  static MetricConnection trivial(const RingPtr& r, std::size_t rank) {
    return MetricConnection{std::vector<PolyMatrix>(r->nvars(), zero_matrix(r, rank, rank))};
  }

  LElem covariant(const LElem& x, std::size_t k) const {
    LElem out(x.size(), Poly(x.empty() ? RingPtr() : x[0].ring()));
    for (std::size_t j = 0; j < x.size(); ++j) {
      out[j] += x[j].derivative(k);
      if (x[j].is_zero()) continue;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!gamma[k][i][j].is_zero()) out[i] += gamma[k][i][j] * x[j];
    }
    return out;
  }

  /// The one-form <nabla x, y>.
  BaseForm pair_form(const CourantData& E, const LElem& x, const LElem& y) const {
    BaseForm w(E.ring, 1);
    for (std::size_t k = 0; k < E.ring->nvars(); ++k) w.add({static_cast<int>(k)}, E.pair(covariant(x, k), y));
    return w;
  }
};

/// Gamma_k = G^{-1} A_k with each A_k skew is metric for a constant pairing.
inline MetricConnection skew_connection(const CourantData& E, const std::vector<PolyMatrix>& skew) {
  MetricConnection c;
  for (auto& A : skew) c.gamma.push_back(matmul(E.ring, E.gram_inverse(), A));
  return c;
}

inline Verdict verify_metric(const CourantData& E, const MetricConnection& nabla) {
  Verdict v;
  std::string w, det;
  bool ok = nabla.gamma.size() == E.ring->nvars();
  for (std::size_t a = 0; a < E.rank() && ok; ++a)
    for (std::size_t b = 0; b < E.rank() && ok; ++b) {
      BaseForm res = differential(E.gram[a][b]) - nabla.pair_form(E, E.basis(a), E.basis(b)) -
                     nabla.pair_form(E, E.basis(b), E.basis(a));
      if (!res.is_zero()) ok = false, w = "(" + E.names[a] + "," + E.names[b] + ")", det = res.str();
    }
  v.add("connection.metric", "d<x, y> = <nabla x, y> + <x, nabla y>", ok, w, det);
  return v;
}

// ---------------------------------------------------------------------------
// Conversion to and from two-shifted symplectic data in Courant form

inline std::string cotangent_name(const RingPtr& r, std::size_t i) { return "c_" + r->vars[i]; }

/// L_0 = E, L_1 = T^v framed by c_i with phi(c_i) = dx_i, Q = <,>,
/// psi(x,y) = d<x,y> - 2<nabla x, y>, and the remaining brackets solved from
/// the closure equations. `check` runs the preconditions; mutation tests turn
/// it off to convert data that is not a Courant algebroid.
inline ShiftedSymplecticData courant_to_symplectic(const CourantData& E, const MetricConnection& nabla,
                                                    bool check = true) {
  const RingPtr& r = E.ring;
  const std::size_t m = E.rank(), n = r->nvars();
  if (check) {
    if (!verify_courant_axioms(E).pass()) throw std::invalid_argument("not a twisted Courant algebroid");
    if (!verify_metric(E, nabla).pass()) throw std::invalid_argument("connection is not metric");
  }
  ShiftedSymplecticData s;
  s.shift = 2;
  LinftyAlgebroid& L = s.algebroid;
  L = make_algebroid(r);
  for (std::size_t a = 0; a < m; ++a) L.add_basis(E.names[a], 0);
  for (std::size_t i = 0; i < n; ++i) L.add_basis(cotangent_name(r, i), -1);
  for (std::size_t a = 0; a < m; ++a) L.anchor[a] = E.anchor[a];
  for (auto& [k, f] : E.symbol_override) L.symbol_override[k] = f;
  auto lift = [&](const LElem& x) {
    LElem y = L.zero();
    for (std::size_t a = 0; a < m; ++a) y[a] = x[a];
    return y;
  };

  s.Q = zero_matrix(r, m + n, m + n);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) s.Q[a][b] = E.gram[a][b];
  s.phi.assign(m + n, BaseForm(r, 1));
  for (std::size_t i = 0; i < n; ++i) {
    s.phi[m + i] = BaseForm::term(r, {static_cast<int>(i)}, Poly::constant(r, 1));
    L.differential[m + i] = Poly::constant(r, Rational(-1, 2)) * lift(E.a_star(s.phi[m + i]));
  }
  s.K = E.K;

  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      BaseForm p = differential(E.gram[a][b]) - nabla.pair_form(E, E.basis(a), E.basis(b)) * Rational(2);
      p.degree = 1;
      if (check && a > b && !(p == s.psi_basis(static_cast<int>(b), static_cast<int>(a)) * Rational(-1)))
        throw std::invalid_argument("psi from the connection is not skew");
      if (!p.is_zero()) s.psi[{static_cast<int>(a), static_cast<int>(b)}] = p;
    }

  // [x,y] = [[x,y]] - 1/2 a* d<x,y> + 1/2 a* psi(x,y)
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      LElem t = E.bracket_basis(a, b) - E.a_star(differential(E.gram[a][b]) * Rational(1, 2)) +
                E.a_star(s.psi_basis(static_cast<int>(a), static_cast<int>(b)) * Rational(1, 2));
      L.set_bracket({static_cast<int>(a), static_cast<int>(b)}, lift(t), false);
    }

  // [x,c_i] from phi([x,u]) = L_{ax} phi(u) - psi(x, du) + d Q(x, du).
  Shift2Equations eq{s};
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t i = 0; i < n; ++i) {
      LElem x = L.basis(a), u = L.basis(m + i);
      BaseForm f = eq.eq2(x, u);  // bracket [x,u] still zero here
      LElem v = L.zero();
      for (std::size_t k = 0; k < n; ++k) v[m + k] = f.coeff({static_cast<int>(k)});
      L.set_bracket({static_cast<int>(a), static_cast<int>(m + i)}, v, true);
    }

  // l3 on L_0 from the first closure equation.
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t c = 0; c < m; ++c) {
        BaseForm f = eq.eq1(L.basis(a), L.basis(b), L.basis(c));
        LElem v = L.zero();
        for (std::size_t k = 0; k < n; ++k) v[m + k] = -f.coeff({static_cast<int>(k)});
        L.set_bracket({static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)}, v, false);
      }
  return s;
}

struct CourantWithConnection {
  CourantData courant;
  MetricConnection connection;
};

/// Inverse conversion: [[x,y]] = [x,y] + 1/2 a* d<x,y> - 1/2 a* psi(x,y) and
/// <nabla x, y> = 1/2 (d<x,y> - psi(x,y)).
inline CourantWithConnection symplectic_to_courant(const ShiftedSymplecticData& s) {
  const LinftyAlgebroid& L = s.algebroid;
  const RingPtr& r = L.ring;
  const std::size_t n = r->nvars();
  if (s.shift != 2) throw std::invalid_argument("conversion needs shift two");
  std::vector<int> L0 = s.degree_indices(0), L1 = s.degree_indices(-1);
  // Courant form: L_0 first, then c_i with phi(c_i) = dx_i.
  bool form = L1.size() == n;
  for (std::size_t a = 0; a < L0.size() && form; ++a) form = L0[a] == static_cast<int>(a);
  for (std::size_t i = 0; i < L1.size() && form; ++i) {
    BaseForm want = BaseForm::term(r, {static_cast<int>(i)}, Poly::constant(r, 1));
    form = L1[i] == static_cast<int>(L0.size() + i) && s.phi.at(L1[i]) == want;
  }
  if (!form) throw std::invalid_argument("data is not in Courant form");
  const std::size_t m = L0.size();

  CourantWithConnection out;
  CourantData& E = out.courant;
  E = make_courant(r);
  for (std::size_t a = 0; a < m; ++a) E.add_basis(L.names[a], L.anchor[a]);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) E.gram[a][b] = s.Q[a][b];
  if (!detail::unit_determinant(r, E.gram)) throw std::invalid_argument("pairing is degenerate");
  for (auto& [k, f] : L.symbol_override)
    if (k.first < static_cast<int>(m) && k.second < static_cast<int>(m)) E.symbol_override[k] = f;
  E.K = s.K;
  if (E.K.is_zero()) E.K = BaseForm(r, 4);

  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      LElem lb = L.bracket_basis({static_cast<int>(a), static_cast<int>(b)});
      LElem t(lb.begin(), lb.begin() + m);
      t = t + E.a_star(differential(E.gram[a][b]) * Rational(1, 2)) -
          E.a_star(s.psi_basis(static_cast<int>(a), static_cast<int>(b)) * Rational(1, 2));
      E.set_bracket(a, b, t);
    }

  // <nabla_k e_j, e_l> = 1/2 (d_k G_jl - psi_k(e_j, e_l)); gamma_k = G^{-1} of that.
  MetricConnection& c = out.connection;
  const PolyMatrix& inv = E.gram_inverse();
  for (std::size_t k = 0; k < n; ++k) {
    PolyMatrix P = zero_matrix(r, m, m);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = 0; l < m; ++l)
        P[l][j] = (E.gram[j][l].derivative(k) -
                   s.psi_basis(static_cast<int>(j), static_cast<int>(l)).coeff({static_cast<int>(k)})) *
                  Rational(1, 2);
    c.gamma.push_back(matmul(r, inv, P));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Morphisms

/// Bundle map with column j the image of basis element j.
using BundleMap = PolyMatrix;

inline LElem apply_map(const BundleMap& g, const LElem& x) {
  LElem out(g.size(), Poly(x.empty() ? RingPtr() : x[0].ring()));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      if (!x[j].is_zero() && !g[i][j].is_zero()) out[i] += g[i][j] * x[j];
  return out;
}

/// The map x -> 1/2 a'* B(-, a x) from E to E'; B a is the matrix product of
/// B: T -> T^v with the anchor.
inline BundleMap b_transform_part(const CourantData& src, const CourantData& dst, const BaseForm& B) {
  BundleMap m = zero_matrix(src.ring, dst.rank(), src.rank());
  if (B.is_zero()) return m;
  for (std::size_t j = 0; j < src.rank(); ++j) {
    LElem c = dst.a_star(detail::insert_slots({src.anchor[j]}, B) * Rational(-1, 2));
    for (std::size_t i = 0; i < dst.rank(); ++i) m[i][j] = c[i];
  }
  return m;
}

/// 1-morphism (g, H): g orthogonal and anchor-compatible,
/// g[[x,y]] - [[gx,gy]]' = 1/2 a'* H(ax, ay, -) and K' - K = dH.
inline Verdict verify_courant_morphism(const CourantData& src, const CourantData& dst, const BundleMap& g,
                                       const BaseForm& H) {
  Verdict v;
  const RingPtr& r = src.ring;
  if (src.rank() != dst.rank()) throw std::invalid_argument("ranks differ");
  if (g.size() != dst.rank() || (!g.empty() && g[0].size() != src.rank()))
    throw std::invalid_argument("bundle map has the wrong shape");
  PolyMatrix gt = transpose(r, g);
  bool orth = matmul(r, gt, matmul(r, dst.gram, g)) == src.gram;
  v.add("morphism.orthogonal", "g^T G' g = G", orth, "g");
  std::string w, det;
  bool anc = true;
  for (std::size_t j = 0; j < src.rank() && anc; ++j)
    if (!(dst.apply_anchor(apply_map(g, src.basis(j))) == src.anchor[j])) anc = false, w = src.names[j];
  v.add("morphism.anchor", "a' g = a", anc, w);

  const std::vector<int> all = detail::all_indices(src.rank());
  bool ok = detail::probe_tuples(src, {all, all}, [&](const std::vector<LElem>& xs) {
    LElem res = apply_map(g, src.bracket(xs[0], xs[1])) - dst.bracket(apply_map(g, xs[0]), apply_map(g, xs[1]));
    if (!H.is_zero())
      res = res - dst.a_star(detail::insert_slots({src.apply_anchor(xs[0]), src.apply_anchor(xs[1])}, H) *
                             Rational(1, 2));
    return detail::elem_residual(dst, res);
  }, w, det);
  v.add("morphism.bracket", "g[[x,y]] - [[gx,gy]]' = 1/2 a'* i_{ax} i_{ay} H", ok, w, det);

  BaseForm res = dst.K - src.K;
  if (!H.is_zero()) res -= de_rham_d(H);
  v.add("morphism.four-form", "K' - K = dH", res.is_zero(), "K' - K - dH", res.str());
  return v;
}

/// 2-morphism B: (g, H) => (g2, H2) between the same objects.
inline Verdict verify_courant_2morphism(const CourantData& src, const CourantData& dst, const BundleMap& g,
                                        const BaseForm& H, const BundleMap& g2, const BaseForm& H2,
                                        const BaseForm& B) {
  Verdict v;
  Verdict m1 = verify_courant_morphism(src, dst, g, H), m2 = verify_courant_morphism(src, dst, g2, H2);
  v.add("2morphism.source", "(g, H) is a 1-morphism", m1.pass(), m1.pass() ? "" : m1.first_failure()->id);
  v.add("2morphism.target", "(g~, H~) is a 1-morphism", m2.pass(), m2.pass() ? "" : m2.first_failure()->id);
  BundleMap diff = g2;
  BundleMap bt = b_transform_part(src, dst, B);
  for (std::size_t i = 0; i < diff.size(); ++i)
    for (std::size_t j = 0; j < diff[i].size(); ++j) diff[i][j] -= g[i][j] + bt[i][j];
  v.add("2morphism.maps", "g~ - g = 1/2 a'* B a", is_zero_matrix(diff), "g~ - g");
  BaseForm res = H2 - H;
  if (!B.is_zero()) res -= de_rham_d(B);
  v.add("2morphism.forms", "H~ - H = dB", res.is_zero(), "H~ - H - dB", res.str());
  return v;
}

/// Gluing data on the nerve of three charts: objects E_i, 1-morphisms
/// (g_01, H_01), (g_12, H_12), (g_20, H_20) and B on the triple overlap.
struct ThreeChartCocycle {
  std::array<CourantData, 3> charts;
  std::array<BundleMap, 3> g;
  std::array<BaseForm, 3> H;
  BaseForm B;
};

/// Each gluing map is a 1-morphism, the composite around the triangle is
/// 1 + 1/2 a* B a, and the three-forms sum to dB. The composite applies g_01
/// first.
inline Verdict verify_bundle_twist(const ThreeChartCocycle& c) {
  Verdict v;
  const char* labels[3] = {"01", "12", "20"};
  for (int k = 0; k < 3; ++k) {
    Verdict m = verify_courant_morphism(c.charts[k], c.charts[(k + 1) % 3], c.g[k], c.H[k]);
    v.add(std::string("cocycle.morphism-") + labels[k], "gluing map is a 1-morphism", m.pass(),
          m.pass() ? "" : m.first_failure()->id, m.pass() ? "" : m.first_failure()->witness);
  }
  const RingPtr& r = c.charts[0].ring;
  BundleMap comp = matmul(r, c.g[2], matmul(r, c.g[1], c.g[0]));
  BundleMap want = identity_matrix(r, c.charts[0].rank());
  BundleMap bt = b_transform_part(c.charts[0], c.charts[0], c.B);
  for (std::size_t i = 0; i < want.size(); ++i)
    for (std::size_t j = 0; j < want.size(); ++j) want[i][j] += bt[i][j];
  v.add("cocycle.bundle-twist", "g_01 g_12 g_20 = 1 + 1/2 a* B a", comp == want, "composite");
  BaseForm res = c.H[0] + c.H[1] + c.H[2];
  if (!c.B.is_zero()) res -= de_rham_d(c.B);
  v.add("cocycle.forms", "H_01 + H_12 + H_20 = dB", res.is_zero(), "sum", res.str());
  return v;
}

// ---------------------------------------------------------------------------
// Dirac structures

/// p lies in the ideal of V(x_keep, ..., x_{n-1}).
inline bool in_support_ideal(const Poly& p, std::size_t keep) {
  for (auto& [e, c] : p.terms()) {
    bool killed = false;
    for (std::size_t i = keep; i < e.size(); ++i) killed |= e[i] > 0;
    if (!killed) return false;
  }
  return true;
}

/// Framed subbundle with optional coordinate support V(x_keep, ..., x_{n-1}).
struct DiracData {
  std::vector<LElem> generators;
  std::optional<std::size_t> support;
};

inline std::vector<Point> points_on_support(const std::vector<Point>& pts, std::optional<std::size_t> keep) {
  if (!keep) return pts;
  std::vector<Point> out = pts;
  for (auto& p : out)
    for (std::size_t i = *keep; i < p.size(); ++i) p[i] = 0;
  return out;
}

/// Lagrangian frame compatible with the anchor and involutive modulo the
/// support ideal. Involutivity uses F = F^perp: [[f_a, f_b]] lies in F iff it
/// pairs to zero with every generator.
inline Verdict verify_dirac(const CourantData& E, const DiracData& D, const std::vector<Point>& points) {
  Verdict v;
  const RingPtr& r = E.ring;
  const std::size_t keep = D.support.value_or(r->nvars());
  const auto& F = D.generators;
  if (2 * F.size() != E.rank()) throw std::invalid_argument("Dirac frame must have half the rank of E");
  std::string w, det;
  auto zero_mod = [&](const Poly& p) { return D.support ? in_support_ideal(p, keep) : p.is_zero(); };

  PolyMatrix frame = zero_matrix(r, E.rank(), F.size());
  for (std::size_t k = 0; k < F.size(); ++k)
    for (std::size_t a = 0; a < E.rank(); ++a) frame[a][k] = F[k].at(a);
  bool framed = true;
  for (auto& pt : points_on_support(points, D.support))
    if (rank_at(frame, pt) != F.size()) {
      framed = false, w = point_str(r, pt);
      break;
    }
  v.add("dirac.frame", "generators are independent at sample points", framed, w);

  bool lag = true;
  for (std::size_t a = 0; a < F.size() && lag; ++a)
    for (std::size_t b = a; b < F.size() && lag; ++b) {
      Poly p = E.pair(F[a], F[b]);
      if (!zero_mod(p)) lag = false, w = "(" + std::to_string(a) + "," + std::to_string(b) + ")", det = p.str();
    }
  v.add("dirac.lagrangian", "pairing vanishes on F", lag, w, det);

  bool anc = true;
  for (std::size_t a = 0; a < F.size() && anc; ++a) {
    VectorField x = E.apply_anchor(F[a]);
    for (std::size_t i = keep; i < r->nvars() && anc; ++i)
      if (!in_support_ideal(x.comp[i], keep)) anc = false, w = std::to_string(a), det = x.str();
  }
  v.add("dirac.anchor", "a(F) is tangent to the support", anc, w, det);

  bool inv = true;
  for (std::size_t a = 0; a < F.size() && inv; ++a)
    for (std::size_t b = 0; b < F.size() && inv; ++b) {
      LElem br = E.bracket(F[a], F[b]);
      for (std::size_t c = 0; c < F.size() && inv; ++c) {
        Poly p = E.pair(br, F[c]);
        if (!zero_mod(p))
          inv = false, w = "(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")",
          det = p.str();
      }
    }
  v.add("dirac.involutive", "<[[F, F]], F> = 0", inv, w, det);
  return v;
}

/// Bivector as the skew matrix pi_ij = pi(dx_i, dx_j).
using Bivector = PolyMatrix;

inline std::size_t tangent_index(const CourantData& E, std::size_t i) {
  int k = E.index_of("D_" + E.ring->vars[i]);
  if (k < 0) throw std::invalid_argument("expected the standard frame");
  return static_cast<std::size_t>(k);
}
inline std::size_t cotangent_index(const CourantData& E, std::size_t i) {
  int k = E.index_of("d" + E.ring->vars[i]);
  if (k < 0) throw std::invalid_argument("expected the standard frame");
  return static_cast<std::size_t>(k);
}

/// Standard frame: D_v, dv with the standard anchor and pairing.
inline bool has_standard_frame(const CourantData& E) {
  const CourantData S = make_standard(E.ring);
  return E.names == S.names && E.gram == S.gram && E.anchor == S.anchor;
}

/// T inside T + T^v.
inline DiracData tangent_dirac(const CourantData& E) {
  DiracData D;
  for (std::size_t i = 0; i < E.ring->nvars(); ++i) D.generators.push_back(E.basis(tangent_index(E, i)));
  return D;
}

/// Graph {xi + pi(xi, -)}: generator i is dx_i + sum_j pi_ij D_j.
inline DiracData graph_dirac(const CourantData& E, const Bivector& pi) {
  DiracData D;
  const std::size_t n = E.ring->nvars();
  for (std::size_t i = 0; i < n; ++i) {
    LElem g = E.basis(cotangent_index(E, i));
    for (std::size_t j = 0; j < n; ++j) g[tangent_index(E, j)] += pi[i][j];
    D.generators.push_back(g);
  }
  return D;
}

/// Y = V(x_keep, ...) is coisotropic for pi: pi(dx_m, dx_j) vanishes on Y for
/// all conormal directions m and j.
inline Verdict check_coisotropic(const Bivector& pi, std::size_t keep, const std::vector<Point>& points) {
  Verdict v;
  if (pi.empty()) return v;
  const RingPtr r = pi[0][0].ring();
  if (!is_zero_matrix(pi)) {
    CourantData E = make_standard(r);
    if (!verify_dirac(E, graph_dirac(E, pi), points).pass()) throw std::invalid_argument("bivector is not Poisson");
  }
  std::string w, det;
  bool ok = true;
  for (std::size_t m = keep; m < r->nvars() && ok; ++m)
    for (std::size_t j = keep; j < r->nvars() && ok; ++j)
      if (!in_support_ideal(pi[m][j], keep))
        ok = false, w = "d" + r->vars[m], det = "component along d/d" + r->vars[j] + ": " + pi[m][j].str();
  v.add("coisotropic.conormal", "pi(N^v) is tangent to Y", ok, w, det);
  return v;
}

// ---------------------------------------------------------------------------
// Restriction and tensor product of exact Dirac pairs

/// f^! E for Y = V(x_keep, ...): keeps a^{-1}(T_Y) modulo the conormal
/// directions. E must be exact and in the standard frame.
inline CourantData restrict_exact(const CourantData& E, std::size_t keep, const std::vector<Point>& points) {
  const RingPtr& r = E.ring;
  if (keep > r->nvars()) throw std::invalid_argument("support keeps more variables than the ring has");
  if (!verify_exact(E, points).pass()) throw std::invalid_argument("restriction needs an exact Courant algebroid");
  if (!has_standard_frame(E)) throw std::invalid_argument("restriction needs the standard frame");
  std::vector<std::string> vars(r->vars.begin(), r->vars.begin() + keep);
  std::vector<int> kept;
  for (std::size_t i = 0; i < keep; ++i) kept.push_back(static_cast<int>(i));
  RingPtr ry = make_ring(vars);
  CourantData out = make_standard(ry);
  const std::size_t n = r->nvars();
  auto new_index = [&](std::size_t a) -> int {
    std::size_t i = a % n;
    if (i >= keep) return -1;
    return static_cast<int>(a < n ? i : keep + i);
  };
  for (std::size_t a = 0; a < E.rank(); ++a)
    for (std::size_t b = 0; b < E.rank(); ++b) {
      int na = new_index(a), nb = new_index(b);
      if (na < 0 || nb < 0) continue;
      LElem br = E.bracket_basis(a, b), t = out.zero();
      for (std::size_t c = 0; c < E.rank(); ++c) {
        Poly p = br[c].restrict_to(ry, kept);
        int nc = new_index(c);
        if (nc >= 0)
          t[nc] = p;
        else if (c < n && !p.is_zero())
          throw std::invalid_argument("bracket leaves the preimage of T_Y");
      }
      out.set_bracket(na, nb, t);
    }
  out.K = BaseForm(ry, 4);
  for (auto& [idx, f] : E.K.terms) {
    bool tangent = true;
    for (int i : idx) tangent &= i < static_cast<int>(keep);
    if (tangent) out.K.add(idx, f.restrict_to(ry, kept));
  }
  return out;
}

/// Exact Dirac pair: a Dirac structure in the H-twisted standard algebroid.
struct ExactDiracPair {
  BaseForm H;
  DiracData F;

  CourantData courant(const RingPtr& r) const { return make_h_twist(make_standard(r), H); }
};

/// Fibre product over T of two exact Dirac pairs, living in the twist by
/// H_1 + H_2. Needs transversal anchors at the sample points; one of the two
/// restricted anchors must be invertible so that the fibre product is framed
/// over the polynomial ring.
inline ExactDiracPair tensor_dirac(const RingPtr& r, const ExactDiracPair& d1, const ExactDiracPair& d2,
                                   const std::vector<Point>& points) {
  const std::size_t n = r->nvars();
  const CourantData S = make_standard(r);
  auto anchor_block = [&](const DiracData& D) {
    PolyMatrix m = zero_matrix(r, n, D.generators.size());
    for (std::size_t k = 0; k < D.generators.size(); ++k)
      for (std::size_t i = 0; i < n; ++i) m[i][k] = D.generators[k][tangent_index(S, i)];
    return m;
  };
  if (d1.F.generators.size() != n || d2.F.generators.size() != n)
    throw std::invalid_argument("Dirac frames must have rank dim U");
  PolyMatrix A1 = anchor_block(d1.F), A2 = anchor_block(d2.F);
  PolyMatrix both = zero_matrix(r, n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) both[i][k] = A1[i][k], both[i][n + k] = A2[i][k];
  for (auto& pt : points)
    if (rank_at(both, pt) != n) throw std::invalid_argument("anchors are not transverse at " + point_str(r, pt));

  ExactDiracPair out{d1.H + d2.H, {}};
  out.H.degree = 3;
  // Pair every generator of one side with the unique partner of the other.
  auto fuse = [&](const DiracData& lead, const DiracData& other, const PolyMatrix& inv) {
    for (auto& f : lead.generators) {
      std::vector<Poly> X(n, Poly(r));
      for (std::size_t i = 0; i < n; ++i) X[i] = f[tangent_index(S, i)];
      LElem g = f;
      for (std::size_t k = 0; k < n; ++k) {
        Poly c(r);
        for (std::size_t i = 0; i < n; ++i) c += inv[k][i] * X[i];
        if (c.is_zero()) continue;
        for (std::size_t i = 0; i < n; ++i) g[cotangent_index(S, i)] += c * other.generators[k][cotangent_index(S, i)];
      }
      out.F.generators.push_back(g);
    }
  };
  if (detail::unit_determinant(r, A2)) {
    fuse(d1.F, d2.F, *inverse(r, A2));
  } else if (detail::unit_determinant(r, A1)) {
    fuse(d2.F, d1.F, *inverse(r, A1));
  } else {
    throw std::invalid_argument("fibre product without an invertible anchor is not framed at desk scale");
  }
  return out;
}

/// Two Lagrangian frames span the same subbundle: they pair to zero and both
/// have full rank at the sample points.
inline bool same_dirac(const CourantData& E, const DiracData& a, const DiracData& b, const std::vector<Point>& points) {
  if (a.generators.size() != b.generators.size()) return false;
  for (auto& f : a.generators)
    for (auto& g : b.generators)
      if (!E.pair(f, g).is_zero()) return false;
  Verdict va = verify_dirac(E, a, points), vb = verify_dirac(E, b, points);
  return !va.failed("dirac.frame") && !vb.failed("dirac.frame") && !va.failed("dirac.lagrangian") &&
         !vb.failed("dirac.lagrangian");
}

}  // namespace gk
