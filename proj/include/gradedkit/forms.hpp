#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradedkit/algebroid.hpp"
#include "gradedkit/base.hpp"
#include "gradedkit/gca.hpp"
#include "gradedkit/verdict.hpp"

namespace gk {

/// Mixed forms on [U/L]: CE generators t_e, base one-forms dx and form symbols
/// dt_e. Internal degree is the GCA degree, form degree counts d-symbols. The
/// de Rham differential d and the internal differential delta anticommute.
struct FormsAlgebra {
  TablePtr table;
  CEAlgebra ce;
  GradedDerivation ce_delta;
  std::vector<std::size_t> theta;   // basis index -> generator
  std::vector<std::size_t> dtheta;  // basis index -> generator
  std::vector<std::size_t> dx;      // coordinate -> generator
  std::vector<int> basis_degree;    // L-degree of each basis element
  int amplitude = 0;
  GradedDerivation d, delta, iota_xi;

  const RingPtr& ring() const { return table->ring(); }
  GCAElement zero() const { return GCAElement(table); }
  GCAElement gen(std::size_t g) const { return GCAElement::generator(table, g); }
  GCAElement scalar(const Poly& f) const { return GCAElement::scalar(table, f); }

  /// CE algebra element viewed as a mixed form of form degree zero.
  GCAElement embed(const GCAElement& a) const {
    std::vector<GCAElement> images;
    for (std::size_t g = 0; g < ce.table->size(); ++g) images.push_back(gen(theta[ce.basis_of[g]]));
    return apply_algebra_map(images, table, a);
  }

  GCAElement from_base(const BaseForm& w) const {
    GCAElement r = zero();
    for (auto& [idx, f] : w.terms) {
      GCAElement m = scalar(f);
      for (int i : idx) m = m * gen(dx[i]);
      r += m;
    }
    return r;
  }

  /// Base form, if the element only involves coordinates and dx.
  std::optional<BaseForm> to_base(const GCAElement& a) const {
    std::optional<int> deg;
    BaseForm w(ring(), 0);
    for (auto& [m, p] : a.terms()) {
      MultiIndex idx;
      for (std::size_t i = 0; i < dx.size(); ++i)
        if (m[dx[i]]) idx.push_back(static_cast<int>(i));
      if (static_cast<int>(idx.size()) != a.form_degree(m) || a.degree(m) != 0 || a.weight(m) != 0) return std::nullopt;
      if (!deg) w = BaseForm(ring(), *(deg = static_cast<int>(idx.size())));
      w.add(idx, p);
    }
    return w;
  }

  /// Part of internal degree q.
  GCAElement internal(const GCAElement& a, int q) const {
    return a.filter([&](const Monomial& m) { return a.degree(m) == q; });
  }
  GCAElement form_part(const GCAElement& a, int p) const {
    return a.filter([&](const Monomial& m) { return a.form_degree(m) == p; });
  }
  int max_weight(const GCAElement& a) const {
    int w = 0;
    for (auto& [m, p] : a.terms()) w = std::max(w, a.weight(m));
    return w;
  }
};

inline std::string form_symbol_name(const std::string& n) { return "d" + n; }

inline FormsAlgebra forms_algebra(const LinftyAlgebroid& A) {
  FormsAlgebra F;
  F.ce = ce_algebra(A);
  F.ce_delta = build_ce_differential(A, F.ce);
  const RingPtr& r = A.ring;
  const std::size_t n = A.rank(), nv = r->nvars();
  std::vector<Generator> gens;
  for (std::size_t a = 0; a < n; ++a)
    gens.push_back(Generator{dual_name(A.names[a]), 1 - A.degrees[a], 1, GenKind::DualBundle, 0, static_cast<int>(a)});
  for (std::size_t i = 0; i < nv; ++i)
    gens.push_back(Generator{form_symbol_name(r->vars[i]), 0, 0, GenKind::FormSymbol, 1, static_cast<int>(n + i)});
  for (std::size_t a = 0; a < n; ++a)
    gens.push_back(Generator{form_symbol_name(dual_name(A.names[a])), 1 - A.degrees[a], 1, GenKind::FormSymbol, 1,
                             static_cast<int>(n + nv + a)});
  F.table = std::make_shared<const GeneratorTable>(r, gens);
  F.theta.resize(n);
  F.dtheta.resize(n);
  F.dx.resize(nv);
  for (std::size_t g = 0; g < F.table->size(); ++g) {
    int decl = F.table->gen(g).decl;
    if (decl < static_cast<int>(n))
      F.theta[decl] = g;
    else if (decl < static_cast<int>(n + nv))
      F.dx[decl - n] = g;
    else
      F.dtheta[decl - n - nv] = g;
  }
  F.basis_degree = A.degrees;
  F.amplitude = -A.min_degree();

  F.d = GradedDerivation::zero(F.table, 0, 1);
  for (std::size_t i = 0; i < nv; ++i) F.d.base_action[i] = F.gen(F.dx[i]);
  for (std::size_t a = 0; a < n; ++a) F.d.values[F.theta[a]] = F.gen(F.dtheta[a]);

  F.delta = GradedDerivation::zero(F.table, 1, 0);
  for (std::size_t i = 0; i < nv; ++i) {
    F.delta.base_action[i] = F.embed(F.ce_delta.base_action[i]);
    F.delta.values[F.dx[i]] = -F.d.apply(F.delta.base_action[i]);
  }
  for (std::size_t a = 0; a < n; ++a) {
    GCAElement v = F.embed(F.ce_delta.value(F.ce.gen_of[a]));
    F.delta.values[F.theta[a]] = v;
    F.delta.values[F.dtheta[a]] = -F.d.apply(v);
  }

  F.iota_xi = GradedDerivation::zero(F.table, 0, -1);
  for (std::size_t a = 0; a < n; ++a)
    F.iota_xi.values[F.dtheta[a]] = Rational(1 - A.degrees[a]) * F.gen(F.theta[a]);
  return F;
}

inline GCAElement internal_delta(const FormsAlgebra& F, const GCAElement& w) { return F.delta.apply(w); }
inline GCAElement de_rham_d_mixed(const FormsAlgebra& F, const GCAElement& w) { return F.d.apply(w); }

/// h = (1/q) iota_xi on internal degree q > 0, zero on internal degree 0;
/// applied to each internal-degree component.
inline GCAElement euler_h(const FormsAlgebra& F, const GCAElement& w) {
  GCAElement out = F.zero();
  std::map<int, GCAElement> parts;
  for (auto& [m, p] : w.terms()) {
    int q = w.degree(m);
    if (q == 0) continue;
    auto it = parts.try_emplace(q, F.table).first;
    it->second.add_term(m, p);
  }
  for (auto& [q, part] : parts) out += Rational(1, q) * F.iota_xi.apply(part);
  return out;
}

/// h on an element homogeneous in internal degree.
inline GCAElement euler_contraction_h(const FormsAlgebra& F, const GCAElement& w) {
  std::optional<int> q;
  for (auto& [m, p] : w.terms()) {
    if (q && *q != w.degree(m)) throw std::invalid_argument("h needs input homogeneous in internal degree");
    q = w.degree(m);
  }
  return euler_h(F, w);
}

/// beta lies in im h iff h(beta) = 0 and (dh + hd)(beta) = beta with beta of
/// positive internal degree.
inline bool in_potentials(const FormsAlgebra& F, const GCAElement& b) {
  if (!F.internal(b, 0).is_zero()) return false;
  if (!euler_h(F, b).is_zero()) return false;
  return F.d.apply(euler_h(F, b)) + euler_h(F, F.d.apply(b)) == b;
}

/// delta_Pot = h delta d.
inline GCAElement potential_differential(const FormsAlgebra& F, const GCAElement& b) {
  if (!in_potentials(F, b)) throw std::invalid_argument("input is not in the image of h");
  return euler_h(F, F.delta.apply(F.d.apply(b)));
}

/// The three expressions h delta d, -h d delta and (dh - 1) delta agree on potentials.
inline Verdict verify_potential_formulas(const FormsAlgebra& F, const GCAElement& b) {
  Verdict v;
  GCAElement a = euler_h(F, F.delta.apply(F.d.apply(b)));
  GCAElement c = -euler_h(F, F.d.apply(F.delta.apply(b)));
  GCAElement db = F.delta.apply(b);
  GCAElement e = F.d.apply(euler_h(F, db)) - db;
  v.add("pot.h-delta-d", "h delta d = -h d delta on potentials", a == c, a.str(), (a - c).str());
  v.add("pot.dh-minus-one", "h delta d = (dh - 1) delta on potentials", a == e, a.str(), (a - e).str());
  return v;
}

/// Contraction of a base (p+q)-form with q+1 copies of the anchor:
/// (-1)^{q+1} times the sum over increasing tuples of degree-zero basis
/// elements of theta^{a_1}...theta^{a_{q+1}} i_{a(a_{q+1})}...i_{a(a_1)} G.
/// With this sign it coincides with (h delta)^{q+1} on base forms.
inline GCAElement twisting_map(const FormsAlgebra& F, const LinftyAlgebroid& A, const BaseForm& G, int p) {
  const int q = G.degree - p;
  if (q < 0) throw std::invalid_argument("twisting map needs a form of degree at least p");
  if (p < 1) throw std::invalid_argument("twisting map needs p >= 1");
  std::vector<int> l0;
  for (std::size_t a = 0; a < A.rank(); ++a)
    if (A.degrees[a] == 0) l0.push_back(static_cast<int>(a));
  GCAElement out = F.zero();
  std::vector<int> pick;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (static_cast<int>(pick.size()) == q + 1) {
      BaseForm c = G;
      for (int a : pick) c = contract_or_zero(A.anchor[a], c);
      if (c.is_zero()) return;
      GCAElement mono = F.scalar(Poly::constant(F.ring(), 1));
      for (int a : pick) mono = mono * F.gen(F.theta[a]);
      out += mono * F.from_base(c);
      return;
    }
    for (std::size_t k = start; k < l0.size(); ++k) {
      pick.push_back(l0[k]);
      self(self, k + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  return (q % 2) ? out : -out;
}

/// (h delta)^{k} applied k times.
inline GCAElement h_delta_power(const FormsAlgebra& F, GCAElement w, int k) {
  for (int i = 0; i < k; ++i) w = euler_h(F, F.delta.apply(w));
  return w;
}

// ---------------------------------------------------------------------------
// Normalized complex of closed p-forms

/// Element of Pot^{p-1} + Omega^{>=p}(U) of total degree `degree`: beta is a
/// potential of form degree p-1 and internal degree degree-p, G a base form of
/// form degree `degree`.
struct NormalizedClosedForm {
  int p = 1;
  int degree = 0;
  GCAElement beta;
  BaseForm G;
};

inline bool operator==(const NormalizedClosedForm& a, const NormalizedClosedForm& b) {
  return a.p == b.p && a.degree == b.degree && a.beta == b.beta && a.G == b.G;
}

/// delta_tw(beta + G) = (h delta d beta + (-1)^q tau G) + dG, with q = deg G - p.
inline NormalizedClosedForm twisted_differential(const FormsAlgebra& F, const LinftyAlgebroid& A,
                                                 const NormalizedClosedForm& n) {
  NormalizedClosedForm out{n.p, n.degree + 1, F.zero(), BaseForm(F.ring(), n.degree + 1)};
  if (!n.beta.is_zero()) out.beta += euler_h(F, F.delta.apply(F.d.apply(n.beta)));
  if (!n.G.is_zero()) {
    const int q = n.degree - n.p;
    GCAElement t = twisting_map(F, A, n.G, n.p);
    out.beta += (q % 2) ? -t : t;
    out.G = de_rham_d(n.G);
    out.G.degree = n.degree + 1;
  }
  return out;
}

namespace detail {

inline int series_cap(const FormsAlgebra& F, const GCAElement& w) { return F.max_weight(w) + F.amplitude + 2; }

/// Homotopy of the unperturbed retract: h on form degrees above p.
inline GCAElement retract_h(const FormsAlgebra& F, int p, const GCAElement& w) {
  return euler_h(F, w.filter([&](const Monomial& m) { return w.form_degree(m) > p; }));
}

/// A = sum_n (-delta k)^n delta, terminating by weight.
inline GCAElement perturbation_series(const FormsAlgebra& F, int p, const GCAElement& w, int cap) {
  GCAElement term = F.delta.apply(w), out = term;
  for (int n = 1; !term.is_zero(); ++n) {
    if (n > cap) throw std::runtime_error("perturbation series did not terminate within the weight cap");
    term = -F.delta.apply(retract_h(F, p, term));
    out += term;
  }
  return out;
}

inline NormalizedClosedForm project(const FormsAlgebra& F, int p, int degree, const GCAElement& w) {
  NormalizedClosedForm n{p, degree, euler_h(F, F.form_part(w, p)), BaseForm(F.ring(), degree)};
  auto base = F.to_base(F.internal(w, 0));
  if (!base) throw std::invalid_argument("internal degree zero part is not a base form");
  n.G = *base;
  n.G.degree = degree;
  return n;
}

}  // namespace detail

/// Total degree of a mixed form, if homogeneous.
inline std::optional<int> total_degree(const GCAElement& w) {
  std::optional<int> n;
  for (auto& [m, p] : w.terms()) {
    int t = w.degree(m) + w.form_degree(m);
    if (n && *n != t) return std::nullopt;
    n = t;
  }
  return n;
}

/// Closure equations of a closed p-form: delta w_p = 0 and d w_k + delta w_{k+1} = 0.
inline Verdict verify_closed_form(const FormsAlgebra& F, int p, const GCAElement& w) {
  Verdict v;
  GCAElement D = F.d.apply(w) + F.delta.apply(w);
  int top = 0;
  for (auto& [m, c] : w.terms()) {
    if (w.form_degree(m) < p) throw std::invalid_argument("form has components below form degree p");
    top = std::max(top, w.form_degree(m));
  }
  for (int k = p; k <= top + 1; ++k) {
    GCAElement r = F.form_part(D, k);
    v.add("closed.form-degree-" + std::to_string(k),
          k == p ? "delta w_p = 0" : "d w_" + std::to_string(k - 1) + " + delta w_" + std::to_string(k) + " = 0",
          r.is_zero(), "form degree " + std::to_string(k), r.str());
  }
  return v;
}

/// p' = p (1 + A k') with k' the retract homotopy; sends cocycles to
/// delta_tw-cocycles.
inline NormalizedClosedForm normalize_closed_form(const FormsAlgebra& F, int p, const GCAElement& w,
                                                  std::optional<int> degree = std::nullopt) {
  if (!degree) degree = total_degree(w);
  if (!degree) throw std::invalid_argument("closed form must be homogeneous in total degree");
  Verdict v = verify_closed_form(F, p, w);
  if (!v.pass()) throw std::invalid_argument("not a cocycle: " + v.first_failure()->anchor);
  GCAElement k = detail::retract_h(F, p, w);
  GCAElement corr = k.is_zero() ? F.zero() : detail::perturbation_series(F, p, k, detail::series_cap(F, w));
  // H = -k, so p A H w = -p A k w.
  return detail::project(F, p, *degree, w - corr);
}

/// i' = (1 + H A) i with i(beta + G) = d beta + G and H = -k.
inline GCAElement realize_closed_form(const FormsAlgebra& F, const LinftyAlgebroid& A, const NormalizedClosedForm& n,
                                      bool check = true) {
  if (check) {
    NormalizedClosedForm t = twisted_differential(F, A, n);
    if (!t.beta.is_zero() || !t.G.is_zero()) throw std::invalid_argument("normalized form is not delta_tw-closed");
  }
  GCAElement i = F.d.apply(n.beta) + F.from_base(n.G);
  if (i.is_zero()) return i;
  GCAElement a = detail::perturbation_series(F, n.p, i, detail::series_cap(F, i) + n.degree);
  return i - detail::retract_h(F, n.p, a);
}

/// Transferred differential computed by the perturbation lemma, d' + p A i.
inline NormalizedClosedForm perturbed_differential(const FormsAlgebra& F, const NormalizedClosedForm& n) {
  GCAElement i = F.d.apply(n.beta) + F.from_base(n.G);
  NormalizedClosedForm out{n.p, n.degree + 1, F.zero(), BaseForm(F.ring(), n.degree + 1)};
  if (!i.is_zero()) out = detail::project(F, n.p, n.degree + 1, detail::perturbation_series(F, n.p, i, detail::series_cap(F, i) + n.degree));
  out.G += de_rham_d(n.G);
  out.G.degree = n.degree + 1;
  return out;
}

// ---------------------------------------------------------------------------
// Operator / symbol decomposition of mixed one-forms

/// Contraction with a section x: t_e -> x_e, dt_e -> d(x_e), trivial on
/// coordinates and dx. With `symbol`, dt_e -> x_e and t_e -> 0.
inline GradedDerivation section_contraction(const FormsAlgebra& F, const LElem& x, int l_degree, bool symbol) {
  const int fd = symbol ? -1 : 0;
  GradedDerivation D = GradedDerivation::zero(F.table, l_degree - 1, fd);
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (x[a].is_zero()) continue;
    if (F.basis_degree[a] != l_degree) throw std::invalid_argument("section is not homogeneous");
    if (symbol) {
      D.values[F.dtheta[a]] = F.scalar(x[a]);
    } else {
      D.values[F.theta[a]] = F.scalar(x[a]);
      D.values[F.dtheta[a]] = F.from_base(differential(x[a]));
    }
  }
  return D;
}

inline int section_degree(const FormsAlgebra& F, const LElem& x) {
  for (std::size_t a = 0; a < x.size(); ++a)
    if (!x[a].is_zero()) return F.basis_degree[a];
  return 0;
}

/// First-order skew operator omega_n and its symbol, read off a mixed one-form
/// of weight n.
struct OperatorSymbolPair {
  const FormsAlgebra* forms = nullptr;
  int arity = 0;
  GCAElement form;

  /// omega_n(x_1, ..., x_n) = i_{x_n} ... i_{x_1} omega, a base one-form.
  BaseForm evaluate(const std::vector<LElem>& xs) const {
    if (static_cast<int>(xs.size()) != arity) throw std::invalid_argument("operator arity mismatch");
    GCAElement w = form;
    for (auto& x : xs) w = section_contraction(*forms, x, section_degree(*forms, x), false).apply(w);
    auto b = forms->to_base(w);
    if (!b) throw std::logic_error("operator value is not a base form");
    if (b->is_zero()) b->degree = 1;
    return *b;
  }

  /// Symbol omega-bar(x_1, ..., x_{n-1} | y), a function.
  Poly symbol(const std::vector<LElem>& xs, const LElem& y) const {
    if (static_cast<int>(xs.size()) + 1 != arity) throw std::invalid_argument("symbol arity mismatch");
    GCAElement w = form;
    for (auto& x : xs) w = section_contraction(*forms, x, section_degree(*forms, x), false).apply(w);
    w = section_contraction(*forms, y, section_degree(*forms, y), true).apply(w);
    auto b = forms->to_base(w);
    if (!b) throw std::logic_error("symbol value is not a function");
    return b->coeff({});
  }
};

/// Split a mixed one-form into operator/symbol pairs by weight.
inline std::vector<OperatorSymbolPair> form_to_operator(const FormsAlgebra& F, const GCAElement& w) {
  std::map<int, GCAElement> parts;
  for (auto& [m, p] : w.terms()) {
    if (w.form_degree(m) != 1) throw std::invalid_argument("operator decomposition needs a one-form");
    parts.try_emplace(w.weight(m), F.table).first->second.add_term(m, p);
  }
  std::vector<OperatorSymbolPair> out;
  for (auto& [n, part] : parts) out.push_back(OperatorSymbolPair{&F, n, part});
  return out;
}

/// Inverse of form_to_operator: rebuild the form from operator values and
/// symbols on basis tuples.
inline GCAElement operator_to_form(const FormsAlgebra& F, const std::vector<OperatorSymbolPair>& ops,
                                   const Complex& L) {
  GCAElement out = F.zero();
  const RingPtr& r = F.ring();
  for (auto& op : ops) {
    const int n = op.arity;
    // Multisets of basis indices of size n (operator part) and n-1 plus one (symbol part).
    std::vector<Tuple> multisets;
    Tuple cur;
    auto rec = [&](auto&& self, int start, int left) -> void {
      if (left == 0) {
        multisets.push_back(cur);
        return;
      }
      for (int a = start; a < static_cast<int>(L.rank()); ++a) {
        cur.push_back(a);
        self(self, a, left - 1);
        cur.pop_back();
      }
    };
    rec(rec, 0, n);
    for (auto& t : multisets) {
      std::vector<LElem> xs;
      for (int a : t) xs.push_back(L.basis(a));
      GCAElement mono = F.scalar(Poly::constant(r, 1));
      for (int a : t) mono = mono * F.gen(F.theta[a]);
      if (mono.is_zero()) continue;
      BaseForm val = op.evaluate(xs);
      for (std::size_t i = 0; i < r->nvars(); ++i) {
        GCAElement probe = mono * F.gen(F.dx[i]);
        OperatorSymbolPair unit{&F, n, probe};
        Rational pair = unit.evaluate(xs).coeff({static_cast<int>(i)}).constant_term();
        Poly c = val.coeff({static_cast<int>(i)});
        if (!c.is_zero()) out += (c * (1 / pair)) * probe;
      }
    }
    multisets.clear();
    rec(rec, 0, n - 1);
    for (auto& t : multisets)
      for (std::size_t b = 0; b < L.rank(); ++b) {
        std::vector<LElem> xs;
        for (int a : t) xs.push_back(L.basis(a));
        GCAElement mono = F.scalar(Poly::constant(r, 1));
        for (int a : t) mono = mono * F.gen(F.theta[a]);
        GCAElement probe = mono * F.gen(F.dtheta[b]);
        if (probe.is_zero()) continue;
        OperatorSymbolPair unit{&F, n, probe};
        Rational pair = unit.symbol(xs, L.basis(b)).constant_term();
        Poly c = op.symbol(xs, L.basis(b));
        if (!c.is_zero()) out += (c * (1 / pair)) * probe;
      }
  }
  return out;
}

}  // namespace gk
