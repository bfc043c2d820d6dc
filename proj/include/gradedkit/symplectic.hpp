#pragma once

#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradedkit/algebroid.hpp"
#include "gradedkit/base.hpp"
#include "gradedkit/linalg.hpp"
#include "gradedkit/verdict.hpp"

namespace gk {

enum class NondegMode { Strict, Sampled };

using Point = std::vector<Rational>;

/// The origin followed by `count` pseudorandom rational points from `seed`.
inline std::vector<Point> default_sample_points(const RingPtr& r, unsigned seed = 7, int count = 8) {
  std::vector<Point> pts{Point(r->nvars(), Rational(0))};
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> num(-5, 5), den(1, 3);
  for (int k = 0; k < count; ++k) {
    Point p;
    for (std::size_t i = 0; i < r->nvars(); ++i) {
      Rational v(num(rng), den(rng));
      v.canonicalize();
      p.push_back(v);
    }
    pts.push_back(p);
  }
  return pts;
}

inline std::string point_str(const RingPtr& r, const Point& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + r->vars[i] + "=" + to_string(p[i]);
  return s + ")";
}

/// Shifted symplectic data. Shift 2: algebroid in amplitude [-1,0] with
/// phi: L_1 -> Omega^1, psi on degree-zero basis pairs, Q on degree-zero
/// basis, closed four-form K. Shift 0: algebroid in degree 0 and a two-form B.
/// All tables are indexed by full algebroid basis indices.
struct ShiftedSymplecticData {
  int shift = 2;
  LinftyAlgebroid algebroid;
  std::vector<BaseForm> phi;
  std::map<std::pair<int, int>, BaseForm> psi;
  PolyMatrix Q;
  BaseForm K;
  BaseForm B;

  const RingPtr& ring() const { return algebroid.ring; }

  std::vector<int> degree_indices(int d) const {
    std::vector<int> out;
    for (std::size_t a = 0; a < algebroid.rank(); ++a)
      if (algebroid.degrees[a] == d) out.push_back(static_cast<int>(a));
    return out;
  }

  BaseForm psi_basis(int a, int b) const {
    auto it = psi.find({a, b});
    return it == psi.end() ? BaseForm(ring(), 1) : it->second;
  }

  Poly q(const LElem& x, const LElem& y) const {
    Poly s(ring());
    for (std::size_t a = 0; a < x.size(); ++a) {
      if (x[a].is_zero()) continue;
      for (std::size_t b = 0; b < y.size(); ++b)
        if (!y[b].is_zero() && !Q[a][b].is_zero()) s += x[a] * y[b] * Q[a][b];
    }
    return s;
  }

  /// psi on arbitrary sections: O-bilinear on the basis table plus the symbol
  /// terms psi(x, f y) = f psi(x, y) + Q(x, y) df, skew in the first slot.
  BaseForm psi_eval(const LElem& x, const LElem& y) const {
    BaseForm s(ring(), 1);
    for (std::size_t a = 0; a < x.size(); ++a) {
      if (x[a].is_zero()) continue;
      for (std::size_t b = 0; b < y.size(); ++b) {
        if (y[b].is_zero()) continue;
        s += (x[a] * y[b]) * psi_basis(static_cast<int>(a), static_cast<int>(b));
        if (Q[a][b].is_zero()) continue;
        s += (x[a] * Q[a][b]) * differential(y[b]);
        s -= (y[b] * Q[a][b]) * differential(x[a]);
      }
    }
    s.degree = 1;
    return s;
  }

  BaseForm phi_eval(const LElem& u) const {
    BaseForm s(ring(), 1);
    for (std::size_t c = 0; c < u.size(); ++c)
      if (!u[c].is_zero()) s += u[c] * phi.at(c);
    s.degree = 1;
    return s;
  }
};

namespace detail {

inline Poly as_function(const BaseForm& w) { return w.degree == 0 ? w.coeff({}) : Poly(w.ring); }

inline BaseForm one_form(const RingPtr& r) { return BaseForm(r, 1); }

/// w(v_1, ..., v_k, -).
inline BaseForm insert_slots(const std::vector<VectorField>& vs, const BaseForm& w) {
  BaseForm r = w;
  for (auto& v : vs) r = contract_or_zero(v, r);
  r.degree = w.degree - static_cast<int>(vs.size());
  return r;
}

/// i_a i_b i_c K, read as K(a, b, c, -).
inline BaseForm iota3(const VectorField& a, const VectorField& b, const VectorField& c, const BaseForm& K) {
  if (K.is_zero()) return BaseForm(K.ring, 1);
  return insert_slots({a, b, c}, K);
}

inline BaseForm lie_one(const VectorField& v, const BaseForm& w) {
  BaseForm r = lie_derivative(v, w);
  r.degree = 1;
  return r;
}

inline Poly iota_one(const VectorField& v, const BaseForm& w) {
  return w.is_zero() ? Poly(v.ring) : as_function(contract(v, w));
}

inline BaseForm dfun(const Poly& f) {
  BaseForm w = differential(f);
  w.degree = 1;
  return w;
}

inline std::string tuple_label(const std::vector<std::string>& tags) {
  std::string s = "(";
  for (std::size_t i = 0; i < tags.size(); ++i) s += (i ? "," : "") + tags[i];
  return s + ")";
}

}  // namespace detail

/// Residuals of the four shift-two closure equations on arbitrary sections.
struct Shift2Equations {
  const ShiftedSymplecticData& s;

  const LinftyAlgebroid& L() const { return s.algebroid; }
  VectorField a(const LElem& x) const { return L().apply_anchor(x); }

  /// One summand of the cyclic sum in the first equation.
  BaseForm eq1_cyclic_term(const LElem& x, const LElem& y, const LElem& z) const {
    LElem yz = L().bracket(y, z);
    BaseForm t = detail::lie_one(a(x), s.psi_eval(y, z));
    t += s.psi_eval(x, yz);
    Poly inner = s.q(x, yz) + detail::iota_one(a(x), s.psi_eval(y, z));
    t -= detail::dfun(inner) * Rational(1, 3);
    t.degree = 1;
    return t;
  }

  BaseForm eq1(const LElem& x, const LElem& y, const LElem& z) const {
    BaseForm lhs = eq1_cyclic_term(x, y, z) + eq1_cyclic_term(y, z, x) + eq1_cyclic_term(z, x, y);
    lhs += s.phi_eval(L().bracket(std::vector<LElem>{x, y, z}));
    lhs -= detail::iota3(a(x), a(y), a(z), s.K);
    lhs.degree = 1;
    return lhs;
  }

  BaseForm eq2(const LElem& x, const LElem& u) const {
    LElem du = L().apply_differential(u);
    BaseForm r = detail::lie_one(a(x), s.phi_eval(u));
    r -= s.phi_eval(L().bracket(x, u));
    r -= s.psi_eval(x, du);
    r += detail::dfun(s.q(x, du));
    r.degree = 1;
    return r;
  }

  Poly eq3(const LElem& x, const LElem& y, const LElem& z) const {
    auto part = [&](const LElem& x1, const LElem& y1) {
      return Rational(3) * a(y1).apply(s.q(x1, z)) - Rational(2) * s.q(x1, L().bracket(y1, z)) +
             detail::iota_one(a(x1), s.psi_eval(y1, z));
    };
    return part(x, y) - part(y, x) + Rational(4) * s.q(L().bracket(x, y), z) -
           Rational(2) * detail::iota_one(a(z), s.psi_eval(x, y));
  }

  Poly eq4(const LElem& u, const LElem& x) const {
    return Rational(2) * s.q(L().apply_differential(u), x) + detail::iota_one(a(x), s.phi_eval(u));
  }
};

namespace detail {

/// Calls fn on every basis tuple drawn from `slots` and on every probe that
/// multiplies one slot by a coordinate; stops at the first nonzero residual.
template <class Alg, class Fn>
bool probe_tuples(const Alg& L, const std::vector<std::vector<int>>& slots, Fn fn, std::string& witness,
                  std::string& detail) {
  const RingPtr& r = L.ring;
  std::vector<int> idx(slots.size(), 0);
  for (auto& s : slots)
    if (s.empty()) return true;
  while (true) {
    for (int probe = -1; probe < static_cast<int>(slots.size()); ++probe)
      for (std::size_t v = 0; v < (probe < 0 ? 1 : r->nvars()); ++v) {
        std::vector<LElem> xs;
        std::vector<std::string> tags;
        for (std::size_t k = 0; k < slots.size(); ++k) {
          int a = slots[k][idx[k]];
          LElem e = L.basis(a);
          std::string tag = L.names[a];
          if (static_cast<int>(k) == probe) {
            e = Poly::variable(r, v) * e;
            tag = r->vars[v] + "*" + tag;
          }
          xs.push_back(e);
          tags.push_back(tag);
        }
        std::string res = fn(xs);
        if (!res.empty()) {
          witness = tuple_label(tags);
          detail = res;
          return false;
        }
      }
    int k = static_cast<int>(slots.size()) - 1;
    while (k >= 0 && ++idx[k] == static_cast<int>(slots[k].size())) idx[k--] = 0;
    if (k < 0) return true;
  }
}

}  // namespace detail

/// Closure of shift-two data: the underlying algebroid identities, symmetry of
/// Q, the symbol relation of psi, and the four closure equations.
inline Verdict verify_closure_shift2(const ShiftedSymplecticData& s) {
  if (s.shift != 2) throw std::invalid_argument("closure check needs shift two");
  const LinftyAlgebroid& L = s.algebroid;
  Verdict v = verify_linfty(L);
  const std::vector<int> L0 = s.degree_indices(0), L1 = s.degree_indices(-1);

  bool amp = L.min_degree() >= -1 && L.max_degree() <= 0;
  v.add("shift2.amplitude", "algebroid concentrated in degrees -1 and 0", amp, "degree " + std::to_string(L.min_degree()));

  std::string w, det;
  bool sym = is_symmetric(s.Q);
  for (std::size_t a = 0; a < L.rank() && sym; ++a)
    for (std::size_t b = 0; b < L.rank(); ++b)
      if (!s.Q[a][b].is_zero() && (L.degrees[a] != 0 || L.degrees[b] != 0)) sym = false;
  v.add("shift2.q-symmetric", "Q is a symmetric pairing on L_0", sym, "Q");

  bool skew = true;
  for (auto& [k, f] : s.psi)
    if (!(f == s.psi_basis(k.second, k.first) * Rational(-1))) {
      skew = false;
      w = "(" + L.names[k.first] + "," + L.names[k.second] + ")";
      break;
    }
  v.add("shift2.psi-skew", "psi is skew-symmetric", skew, w);

  Shift2Equations eq{s};
  auto form_res = [](const BaseForm& f) { return f.is_zero() ? std::string() : f.str(); };
  auto fun_res = [](const Poly& f) { return f.is_zero() ? std::string() : f.str(); };

  bool ok = detail::probe_tuples(L, {L0, L0, L0}, [&](const std::vector<LElem>& xs) {
    return form_res(eq.eq1(xs[0], xs[1], xs[2]));
  }, w, det);
  v.add("shift2.eq1", "cyclic psi identity with ternary bracket and K", ok, w, det);
  ok = detail::probe_tuples(L, {L0, L1}, [&](const std::vector<LElem>& xs) {
    return form_res(eq.eq2(xs[0], xs[1]));
  }, w, det);
  v.add("shift2.eq2", "phi intertwines the L_0 action on L_1", ok, w, det);
  ok = detail::probe_tuples(L, {L0, L0, L0}, [&](const std::vector<LElem>& xs) {
    return fun_res(eq.eq3(xs[0], xs[1], xs[2]));
  }, w, det);
  v.add("shift2.eq3", "invariance of Q", ok, w, det);
  ok = detail::probe_tuples(L, {L1, L0}, [&](const std::vector<LElem>& xs) {
    return fun_res(eq.eq4(xs[0], xs[1]));
  }, w, det);
  v.add("shift2.eq4", "2Q(du,x) + i_{ax} phi(u) = 0", ok, w, det);
  return v;
}

// ---------------------------------------------------------------------------
// Nondegeneracy

namespace detail {

/// Acyclicity of the mapping cone of f: C -> D for bounded complexes of
/// rational vector spaces. dims_c[k], dims_d[k] are dimensions in degree lo+k;
/// dc[k]: C^{lo+k} -> C^{lo+k+1} as (rows = target) matrices, likewise dd; f[k]
/// maps C^{lo+k} -> D^{lo+k}. Returns the first degree with cohomology.
inline std::optional<int> cone_cohomology(int lo, const std::vector<int>& dims_c, const std::vector<int>& dims_d,
                                          const std::vector<RatMatrix>& dc, const std::vector<RatMatrix>& dd,
                                          const std::vector<RatMatrix>& f) {
  const int n = static_cast<int>(dims_c.size());
  auto dimc = [&](int k) { return (k >= 0 && k < n) ? dims_c[k] : 0; };
  auto dimd = [&](int k) { return (k >= 0 && k < n) ? dims_d[k] : 0; };
  // cone^k = C^{k+1} + D^k, differential (c, e) -> (-dc c, f c + dd e).
  auto cone_d = [&](int k) {
    const int rows = dimc(k + 2) + dimd(k + 1), cols = dimc(k + 1) + dimd(k);
    RatMatrix m(rows, std::vector<Rational>(cols, Rational(0)));
    if (k + 1 >= 0 && k + 1 < n - 1)
      for (int i = 0; i < dimc(k + 2); ++i)
        for (int j = 0; j < dimc(k + 1); ++j) m[i][j] = -dc[k + 1][i][j];
    if (k + 1 >= 0 && k + 1 < n)
      for (int i = 0; i < dimd(k + 1); ++i)
        for (int j = 0; j < dimc(k + 1); ++j) m[dimc(k + 2) + i][j] = f[k + 1][i][j];
    if (k >= 0 && k < n - 1)
      for (int i = 0; i < dimd(k + 1); ++i)
        for (int j = 0; j < dimd(k); ++j) m[dimc(k + 2) + i][dimc(k + 1) + j] = dd[k][i][j];
    return m;
  };
  auto rk = [&](int k) {
    RatMatrix m = cone_d(k);
    return (m.empty() || m[0].empty()) ? std::size_t(0) : rank(m);
  };
  for (int k = -1; k < n; ++k) {
    int dim = dimc(k + 1) + dimd(k);
    if (static_cast<int>(rk(k - 1) + rk(k)) != dim) return lo + k;
  }
  return std::nullopt;
}

inline RatMatrix rat_zero(std::size_t r, std::size_t c) { return RatMatrix(r, std::vector<Rational>(c, Rational(0))); }

inline bool unit_determinant(const RingPtr& r, const PolyMatrix& m) {
  if (m.empty()) return true;
  if (m.size() != m[0].size()) return false;
  Poly d = determinant(r, m);
  return !d.is_zero() && d.is_constant();
}

inline PolyMatrix two_form_matrix(const RingPtr& r, const BaseForm& B) {
  const std::size_t n = r->nvars();
  PolyMatrix m = zero_matrix(r, n, n);
  for (auto& [idx, f] : B.terms) {
    m[idx[0]][idx[1]] += f;
    m[idx[1]][idx[0]] -= f;
  }
  return m;
}

}  // namespace detail

/// Comparison of the tangent complex with the shifted cotangent complex.
/// Shift 2 uses the components (phi, -2Q, phi^T); shift 0 uses B.
inline Verdict verify_nondegenerate(const ShiftedSymplecticData& s, NondegMode mode,
                                    const std::vector<Point>& points = {}) {
  Verdict v;
  const RingPtr& r = s.ring();
  const LinftyAlgebroid& L = s.algebroid;
  const std::size_t nv = r->nvars();
  if (s.shift != 0 && s.shift != 2) throw std::invalid_argument("shift one is checked through Dirac structures");
  if (mode == NondegMode::Sampled && points.empty()) throw std::invalid_argument("sampled mode needs sample points");

  std::vector<int> L0 = s.degree_indices(0), L1 = s.degree_indices(-1);
  // Polynomial matrices of the complexes and of the comparison map.
  PolyMatrix anchor = zero_matrix(r, nv, L0.size());
  for (std::size_t j = 0; j < L0.size(); ++j)
    for (std::size_t i = 0; i < nv; ++i) anchor[i][j] = L.anchor[L0[j]].comp[i];

  if (s.shift == 0) {
    PolyMatrix Bm = detail::two_form_matrix(r, s.B);
    if (mode == NondegMode::Strict) {
      bool ok = L0.empty() && detail::unit_determinant(r, Bm);
      v.add("nondegenerate.strict", "contraction with B is an isomorphism of free modules", ok,
            L0.empty() ? "degree 0" : "degree -1");
      return v;
    }
    for (auto& pt : points) {
      RatMatrix a = evaluate(anchor, pt), at = evaluate(transpose(r, anchor), pt), b = evaluate(Bm, pt);
      auto bad = detail::cone_cohomology(-1, {static_cast<int>(L0.size()), static_cast<int>(nv), 0},
                                         {0, static_cast<int>(nv), static_cast<int>(L0.size())}, {a, detail::rat_zero(0, nv)},
                                         {detail::rat_zero(nv, 0), at}, {detail::rat_zero(0, L0.size()), b, detail::rat_zero(L0.size(), 0)});
      if (bad) {
        v.add("nondegenerate.sampled", "mapping cone of the contraction is acyclic at sample points", false,
              point_str(r, pt) + " degree " + std::to_string(*bad));
        return v;
      }
    }
    v.add("nondegenerate.sampled", "mapping cone of the contraction is acyclic at sample points", true);
    return v;
  }

  PolyMatrix phi = zero_matrix(r, nv, L1.size()), Q = zero_matrix(r, L0.size(), L0.size()),
             del = zero_matrix(r, L0.size(), L1.size());
  for (std::size_t j = 0; j < L1.size(); ++j)
    for (std::size_t i = 0; i < nv; ++i) phi[i][j] = s.phi.at(L1[j]).coeff({static_cast<int>(i)});
  for (std::size_t i = 0; i < L0.size(); ++i)
    for (std::size_t j = 0; j < L0.size(); ++j) Q[i][j] = s.Q[L0[i]][L0[j]];
  for (std::size_t j = 0; j < L1.size(); ++j)
    for (std::size_t i = 0; i < L0.size(); ++i) del[i][j] = L.differential[L1[j]][L0[i]];

  if (mode == NondegMode::Strict) {
    if (!detail::unit_determinant(r, phi)) {
      v.add("nondegenerate.strict", "phi and Q are isomorphisms of free modules", false, "degree -2");
      return v;
    }
    v.add("nondegenerate.strict", "phi and Q are isomorphisms of free modules", detail::unit_determinant(r, Q),
          "degree -1");
    return v;
  }
  const int n1 = static_cast<int>(L1.size()), n0 = static_cast<int>(L0.size()), n = static_cast<int>(nv);
  for (auto& pt : points) {
    RatMatrix p = evaluate(phi, pt), q = evaluate(Q, pt), d = evaluate(del, pt), a = evaluate(anchor, pt);
    RatMatrix pt_t = evaluate(transpose(r, phi), pt), a_t = evaluate(transpose(r, anchor), pt),
              d_t = evaluate(transpose(r, del), pt);
    for (auto& row : q)
      for (auto& e : row) e *= -2;
    auto bad = detail::cone_cohomology(-2, {n1, n0, n}, {n, n0, n1}, {d, a}, {a_t, d_t}, {p, q, pt_t});
    if (bad) {
      v.add("nondegenerate.sampled", "mapping cone of the contraction is acyclic at sample points", false,
            point_str(r, pt) + " degree " + std::to_string(*bad));
      return v;
    }
  }
  v.add("nondegenerate.sampled", "mapping cone of the contraction is acyclic at sample points", true);
  return v;
}

// ---------------------------------------------------------------------------
// Shift zero and transitive algebroids

/// Zero-shifted structure on a Lie algebroid in degree zero: dB = 0,
/// i_a B = 0, injective anchor and transverse nondegeneracy at sample points.
inline Verdict verify_zero_shifted(const LinftyAlgebroid& A, const BaseForm& B, const std::vector<Point>& points) {
  Verdict v;
  const RingPtr& r = A.ring;
  if (A.min_degree() < 0) throw std::invalid_argument("zero-shifted structures need an algebroid in degree zero");
  if (B.degree != 2 && !B.is_zero()) throw std::invalid_argument("B must be a two-form");
  BaseForm dB = de_rham_d(B);
  v.add("zero.closed", "dB = 0", dB.is_zero(), "dB", dB.str());
  std::string w, det;
  bool iso = true;
  for (std::size_t a = 0; a < A.rank() && iso; ++a) {
    BaseForm c = contract_or_zero(A.anchor[a], B);
    if (!c.is_zero()) iso = false, w = A.names[a], det = c.str();
  }
  v.add("zero.isotropic", "i_a B = 0", iso, w, det);

  PolyMatrix anchor = zero_matrix(r, r->nvars(), A.rank());
  for (std::size_t j = 0; j < A.rank(); ++j)
    for (std::size_t i = 0; i < r->nvars(); ++i) anchor[i][j] = A.anchor[j].comp[i];
  bool fol = true;
  for (auto& pt : points)
    if (rank_at(anchor, pt) != A.rank()) {
      fol = false, w = point_str(r, pt);
      break;
    }
  v.add("zero.foliation", "anchor is injective at sample points", fol, w);

  ShiftedSymplecticData s;
  s.shift = 0;
  s.algebroid = A;
  s.B = B;
  Verdict nd = verify_nondegenerate(s, NondegMode::Sampled, points);
  const Check& c = nd.checks.front();
  v.add("zero.transverse", "B is nondegenerate transverse to the foliation", c.pass, c.witness);
  return v;
}

/// Invariant pairing on the kernel of a transitive algebroid. The kernel is
/// framed by a subset of basis elements.
inline Verdict verify_transitive_pairing(const LinftyAlgebroid& A, const std::vector<int>& kernel, const PolyMatrix& g,
                                         const std::vector<Point>& points) {
  Verdict v;
  const RingPtr& r = A.ring;
  std::string w;
  bool surj = true;
  PolyMatrix anchor = zero_matrix(r, r->nvars(), A.rank());
  for (std::size_t j = 0; j < A.rank(); ++j)
    for (std::size_t i = 0; i < r->nvars(); ++i) anchor[i][j] = A.anchor[j].comp[i];
  for (auto& pt : points)
    if (rank_at(anchor, pt) != r->nvars()) {
      surj = false, w = point_str(r, pt);
      break;
    }
  v.add("transitive.surjective", "anchor is surjective at sample points", surj, w);

  bool framed = true;
  for (int k : kernel)
    if (!A.anchor.at(k).is_zero()) framed = false, w = A.names[k];
  for (auto& pt : points)
    if (framed && rank_at(anchor, pt) + kernel.size() != A.rank()) framed = false, w = point_str(r, pt);
  if (!framed) throw std::invalid_argument("kernel framing inconsistent with the anchor at " + w);

  bool sym = g.size() == kernel.size() && is_symmetric(g);
  v.add("transitive.symmetric", "pairing is symmetric", sym, "g");
  bool nondeg = sym && detail::unit_determinant(r, g);
  v.add("transitive.nondegenerate", "pairing has unit determinant", nondeg, "g");

  auto coords = [&](const LElem& x) -> std::optional<std::vector<Poly>> {
    std::vector<Poly> c(kernel.size(), Poly(r));
    for (std::size_t a = 0; a < x.size(); ++a) {
      if (x[a].is_zero()) continue;
      auto it = std::find(kernel.begin(), kernel.end(), static_cast<int>(a));
      if (it == kernel.end()) return std::nullopt;
      c[it - kernel.begin()] = x[a];
    }
    return c;
  };
  auto pair = [&](const std::vector<Poly>& x, const std::vector<Poly>& y) {
    Poly s(r);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < y.size(); ++j) s += x[i] * y[j] * g[i][j];
    return s;
  };
  bool inv = true;
  std::string det;
  for (std::size_t x = 0; x < A.rank() && inv && sym; ++x)
    for (std::size_t i = 0; i < kernel.size() && inv; ++i)
      for (std::size_t j = 0; j < kernel.size() && inv; ++j) {
        auto xu = coords(A.bracket(A.basis(x), A.basis(kernel[i])));
        auto xv = coords(A.bracket(A.basis(x), A.basis(kernel[j])));
        if (!xu || !xv) throw std::invalid_argument("kernel framing is not preserved by the bracket");
        std::vector<Poly> u(kernel.size(), Poly(r)), vv = u;
        u[i] = Poly::constant(r, 1);
        vv[j] = Poly::constant(r, 1);
        Poly res = A.anchor[x].apply(g[i][j]) - pair(*xu, vv) - pair(u, *xv);
        if (!res.is_zero())
          inv = false, w = "(" + A.names[x] + "," + A.names[kernel[i]] + "," + A.names[kernel[j]] + ")", det = res.str();
      }
  v.add("transitive.invariant", "a(x) g(u,v) = g([x,u],v) + g(u,[x,v])", inv, w, det);
  return v;
}

/// Truncation to amplitude [-(q-1), 0]. Unchanged when already there; else
/// transfers along the given split retract, whose target must be in range.
inline LinftyAlgebroid amplitude_truncate(const LinftyAlgebroid& A, int q,
                                          const std::optional<DeformationRetract>& split = std::nullopt) {
  if (q < 1) throw std::invalid_argument("shift must be positive");
  if (A.min_degree() >= -(q - 1)) return A;
  if (!split) throw std::invalid_argument("truncation needs a split of the quotient by the image of the differential");
  if (split->target.min_degree() < -(q - 1)) throw std::invalid_argument("split target is not truncated");
  return transfer_structure(A, *split).algebroid;
}

/// Equality of all structure tables; zero entries and missing entries agree.
inline bool same_symplectic(const ShiftedSymplecticData& a, const ShiftedSymplecticData& b) {
  if (a.shift != b.shift || !structurally_equal(a.algebroid, b.algebroid)) return false;
  const std::size_t n = a.algebroid.rank();
  for (std::size_t i = 0; i < n; ++i) {
    BaseForm pa = i < a.phi.size() ? a.phi[i] : BaseForm(a.ring(), 1);
    BaseForm pb = i < b.phi.size() ? b.phi[i] : BaseForm(b.ring(), 1);
    if (pa.terms != pb.terms) return false;
    for (std::size_t j = 0; j < n; ++j) {
      int x = static_cast<int>(i), y = static_cast<int>(j);
      if (a.psi_basis(x, y).terms != b.psi_basis(x, y).terms) return false;
    }
  }
  auto q = [&](const PolyMatrix& m, std::size_t i, std::size_t j) { return m.size() > i ? m[i][j] : Poly(a.ring()); };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (q(a.Q, i, j) != q(b.Q, i, j)) return false;
  return a.K.terms == b.K.terms && a.B.terms == b.B.terms;
}

}  // namespace gk
