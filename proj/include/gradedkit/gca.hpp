#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gradedkit/poly.hpp"

namespace gk {

enum class GenKind { BaseCoordinate, DualBundle, FormSymbol };

struct Generator {
  std::string name;
  int degree = 0;       // internal degree
  int weight = 0;
  GenKind kind = GenKind::DualBundle;
  int form_degree = 0;  // 1 for form symbols, 0 otherwise
  int decl = 0;         // declaration index, used for canonical order

  int parity() const { return ((degree + form_degree) % 2 + 2) % 2; }
};

constexpr int kMinGenDegree = -8;
constexpr int kMaxGenDegree = 8;

/// Graded generators over a coordinate ring. Base coordinates live in the
/// coefficient ring; `gens` holds the remaining generators in canonical order.
class GeneratorTable {
 public:
  GeneratorTable(RingPtr ring, std::vector<Generator> gens) : ring_(std::move(ring)) {
    for (std::size_t i = 0; i < ring_->nvars(); ++i)
      base_.push_back(Generator{ring_->vars[i], 0, 0, GenKind::BaseCoordinate, 0, static_cast<int>(i)});
    for (auto& g : gens) {
      if (g.kind == GenKind::BaseCoordinate) throw std::invalid_argument("base coordinates come from the ring");
      if (g.degree < kMinGenDegree || g.degree > kMaxGenDegree)
        throw std::invalid_argument("generator degree out of supported range [-8,8]: " + g.name);
      if (g.weight < 0) throw std::invalid_argument("negative weight: " + g.name);
    }
    std::stable_sort(gens.begin(), gens.end(), [](const Generator& a, const Generator& b) {
      auto key = [](const Generator& g) {
        int k = g.kind == GenKind::DualBundle ? 0 : 1;
        int d = g.kind == GenKind::DualBundle ? g.degree : 0;
        return std::make_tuple(k, d, g.decl);
      };
      return key(a) < key(b);
    });
    gens_ = std::move(gens);
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j)
        if (gens_[j].name == gens_[i].name) throw std::invalid_argument("duplicate generator " + gens_[i].name);
      if (ring_->index_of(gens_[i].name) >= 0) throw std::invalid_argument("generator clashes with coordinate " + gens_[i].name);
    }
  }

  const RingPtr& ring() const { return ring_; }
  std::size_t size() const { return gens_.size(); }
  const Generator& gen(std::size_t i) const { return gens_.at(i); }
  const std::vector<Generator>& gens() const { return gens_; }
  const std::vector<Generator>& base() const { return base_; }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < gens_.size(); ++i)
      if (gens_[i].name == name) return static_cast<int>(i);
    return -1;
  }

 private:
  RingPtr ring_;
  std::vector<Generator> base_;
  std::vector<Generator> gens_;
};

using TablePtr = std::shared_ptr<const GeneratorTable>;

struct table_mismatch : std::invalid_argument {
  table_mismatch() : std::invalid_argument("elements over different generator tables") {}
};

/// Sign of reordering items with the given degrees. items[k] = (target position,
/// degree) for the item currently at position k.
inline int koszul_sign(const std::vector<std::pair<int, int>>& items) {
  const std::size_t n = items.size();
  std::vector<bool> seen(n, false);
  for (auto& [pos, deg] : items) {
    if (pos < 0 || static_cast<std::size_t>(pos) >= n || seen[pos]) throw std::invalid_argument("malformed permutation");
    seen[pos] = true;
  }
  int sign = 1;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (items[a].first > items[b].first && (items[a].second % 2) && (items[b].second % 2)) sign = -sign;
  return sign;
}

using Monomial = std::vector<std::uint8_t>;

/// Element of the free graded-commutative algebra with polynomial coefficients.
class GCAElement {
 public:
  GCAElement() = default;
  explicit GCAElement(TablePtr t) : table_(std::move(t)) {}

  static GCAElement scalar(TablePtr t, const Poly& p) {
    GCAElement e(t);
    if (!p.is_zero()) e.terms_[Monomial(t->size(), 0)] = p;
    return e;
  }
  static GCAElement generator(TablePtr t, std::size_t i) {
    GCAElement e(t);
    Monomial m(t->size(), 0);
    m.at(i) = 1;
    e.terms_[m] = Poly::constant(t->ring(), 1);
    return e;
  }
  static GCAElement generator(TablePtr t, const std::string& name) {
    int i = t->index_of(name);
    if (i < 0) throw std::invalid_argument("unknown generator " + name);
    return generator(t, static_cast<std::size_t>(i));
  }

  const TablePtr& table() const { return table_; }
  const std::map<Monomial, Poly>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Monomial& m, const Poly& p) {
    if (p.is_zero()) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, p);
    } else {
      it->second += p;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  Poly coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Poly(table_->ring()) : it->second;
  }

  GCAElement& operator+=(const GCAElement& o) {
    adopt(o);
    for (auto& [m, p] : o.terms_) add_term(m, p);
    return *this;
  }
  GCAElement& operator-=(const GCAElement& o) {
    adopt(o);
    for (auto& [m, p] : o.terms_) add_term(m, -p);
    return *this;
  }
  friend GCAElement operator+(GCAElement a, const GCAElement& b) { return a += b; }
  friend GCAElement operator-(GCAElement a, const GCAElement& b) { return a -= b; }
  friend GCAElement operator-(GCAElement a) {
    for (auto& [m, p] : a.terms_) p = -p;
    return a;
  }
  friend GCAElement operator*(const Poly& f, GCAElement a) {
    GCAElement r(a.table_);
    for (auto& [m, p] : a.terms_) r.add_term(m, f * p);
    return r;
  }
  friend GCAElement operator*(const Rational& c, GCAElement a) {
    if (c == 0) a.terms_.clear();
    for (auto& [m, p] : a.terms_) p *= c;
    return a;
  }
  friend GCAElement operator*(const GCAElement& a, const GCAElement& b);

  friend bool operator==(const GCAElement& a, const GCAElement& b) {
    if (a.is_zero() && b.is_zero()) return true;
    return a.terms_ == b.terms_;
  }

  /// Internal degree, form degree and weight of a monomial.
  int degree(const Monomial& m) const { return sum(m, [](const Generator& g) { return g.degree; }); }
  int form_degree(const Monomial& m) const { return sum(m, [](const Generator& g) { return g.form_degree; }); }
  int weight(const Monomial& m) const { return sum(m, [](const Generator& g) { return g.weight; }); }
  int parity(const Monomial& m) const { return ((degree(m) + form_degree(m)) % 2 + 2) % 2; }

  /// Homogeneous component of the given internal degree and weight.
  GCAElement component(int deg, int wt) const {
    GCAElement r(table_);
    for (auto& [m, p] : terms_)
      if (degree(m) == deg && weight(m) == wt) r.terms_.emplace(m, p);
    return r;
  }
  template <class Pred>
  GCAElement filter(Pred pred) const {
    GCAElement r(table_);
    for (auto& [m, p] : terms_)
      if (pred(m)) r.terms_.emplace(m, p);
    return r;
  }

  std::string monomial_str(const Monomial& m) const {
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m[i]) continue;
      if (!s.empty()) s += "*";
      s += table_->gen(i).name;
      if (m[i] > 1) s += "^" + std::to_string(m[i]);
    }
    return s.empty() ? "1" : s;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (auto& [m, p] : terms_) {
      if (!s.empty()) s += " + ";
      s += "(" + p.str() + ")*" + monomial_str(m);
    }
    return s;
  }

 private:
  template <class F>
  int sum(const Monomial& m, F f) const {
    int s = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i]) s += m[i] * f(table_->gen(i));
    return s;
  }
  void adopt(const GCAElement& o) {
    if (!table_) {
      table_ = o.table_;
    } else if (o.table_ && table_ != o.table_) {
      throw table_mismatch();
    }
  }

  TablePtr table_;
  std::map<Monomial, Poly> terms_;
};

/// Product of canonical monomials: returns the sign (0 if an odd generator repeats).
inline int multiply_monomials(const GeneratorTable& t, const Monomial& a, const Monomial& b, Monomial& out) {
  out.assign(a.size(), 0);
  int sign = 1;
  // Walk generators from the back: an odd generator of `a` passes every odd
  // generator of `b` with a smaller canonical index.
  std::vector<int> odd_b_prefix(a.size() + 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    odd_b_prefix[i + 1] = odd_b_prefix[i] + ((t.gen(i).parity() && b[i]) ? 1 : 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool odd = t.gen(i).parity();
    if (odd && a[i] && b[i]) return 0;
    out[i] = static_cast<std::uint8_t>(a[i] + b[i]);
    if (odd && a[i] && (odd_b_prefix[i] % 2)) sign = -sign;
  }
  return sign;
}

inline GCAElement operator*(const GCAElement& a, const GCAElement& b) {
  TablePtr t = a.table_ ? a.table_ : b.table_;
  if (a.table_ && b.table_ && a.table_ != b.table_) throw table_mismatch();
  GCAElement r(t);
  if (a.is_zero() || b.is_zero()) return r;
  Monomial m;
  for (auto& [ma, pa] : a.terms_)
    for (auto& [mb, pb] : b.terms_) {
      int s = multiply_monomials(*t, ma, mb, m);
      if (!s) continue;
      Poly c = pa * pb;
      r.add_term(m, s > 0 ? c : -c);
    }
  return r;
}

inline GCAElement gca_multiply(const GCAElement& a, const GCAElement& b) { return a * b; }

inline GCAElement monomial_element(const TablePtr& t, const Monomial& m, const Poly& c) {
  GCAElement e(t);
  e.add_term(m, c);
  return e;
}

/// Algebra map fixing coefficients, given by generator images in `dst`.
inline GCAElement apply_algebra_map(const std::vector<GCAElement>& images, const TablePtr& dst, const GCAElement& a) {
  GCAElement r(dst);
  const Poly one = Poly::constant(dst->ring(), 1);
  for (auto& [m, p] : a.terms()) {
    GCAElement prod = GCAElement::scalar(dst, one);
    for (std::size_t i = 0; i < m.size(); ++i)
      for (int k = 0; k < m[i]; ++k) prod = prod * images.at(i);
    r += p * prod;
  }
  return r;
}

/// Graded derivation determined by its values on generators and on coordinates.
struct GradedDerivation {
  TablePtr table;
  int degree = 0;       // internal degree shift
  int form_degree = 0;  // form degree shift
  std::vector<std::optional<GCAElement>> values;
  std::vector<GCAElement> base_action;

  GradedDerivation() = default;
  GradedDerivation(TablePtr t, int deg, int fdeg = 0)
      : table(t), degree(deg), form_degree(fdeg), values(t->size()), base_action(t->ring()->nvars(), GCAElement(t)) {}

  static GradedDerivation zero(TablePtr t, int deg, int fdeg = 0) {
    GradedDerivation D(t, deg, fdeg);
    for (auto& v : D.values) v = GCAElement(t);
    return D;
  }

  int parity() const { return ((degree + form_degree) % 2 + 2) % 2; }

  void set(const std::string& name, GCAElement v) {
    int i = table->index_of(name);
    if (i < 0) throw std::invalid_argument("unknown generator " + name);
    values[i] = std::move(v);
  }
  void set_base(const std::string& coord, GCAElement v) {
    int i = table->ring()->index_of(coord);
    if (i < 0) throw std::invalid_argument("unknown coordinate " + coord);
    base_action[i] = std::move(v);
  }

  const GCAElement& value(std::size_t i) const {
    if (!values.at(i)) throw std::invalid_argument("derivation has no value on generator " + table->gen(i).name);
    return *values[i];
  }

  /// D applied to a coefficient function.
  GCAElement apply_poly(const Poly& f) const {
    GCAElement r(table);
    for (std::size_t i = 0; i < base_action.size(); ++i) {
      if (base_action[i].is_zero()) continue;
      Poly df = f.derivative(i);
      if (df.is_zero()) continue;
      r += df * base_action[i];
    }
    return r;
  }

  GCAElement apply(const GCAElement& a) const {
    if (a.table() && a.table() != table) throw table_mismatch();
    GCAElement r(table);
    for (auto& [m, p] : a.terms()) {
      GCAElement mono = GCAElement(table);
      mono.add_term(m, Poly::constant(table->ring(), 1));
      GCAElement dp = apply_poly(p);
      if (!dp.is_zero()) r += dp * mono;
      r += p * apply_monomial(m);
    }
    return r;
  }

  GCAElement apply_monomial(const Monomial& m) const {
    GCAElement r(table);
    const Poly one = Poly::constant(table->ring(), 1);
    int prefix_parity = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m[i]) continue;
      const Generator& g = table->gen(i);
      Monomial pre(m.size(), 0), post(m.size(), 0);
      for (std::size_t j = 0; j < i; ++j) pre[j] = m[j];
      for (std::size_t j = i + 1; j < m.size(); ++j) post[j] = m[j];
      post[i] = static_cast<std::uint8_t>(m[i] - 1);
      GCAElement P(table), S(table);
      P.add_term(pre, one);
      S.add_term(post, one);
      GCAElement term = P * value(i) * S;
      if (m[i] > 1) term = Rational(m[i]) * term;
      if (parity() && prefix_parity) term = -term;
      r += term;
      prefix_parity = (prefix_parity + m[i] * g.parity()) % 2;
    }
    return r;
  }
};

inline GCAElement derivation_apply(const GradedDerivation& D, const GCAElement& a) { return D.apply(a); }

/// Graded commutator [D1,D2] = D1 D2 - (-1)^{|D1||D2|} D2 D1, by generator values.
inline GradedDerivation derivation_commutator(const GradedDerivation& D1, const GradedDerivation& D2) {
  if (D1.table != D2.table) throw table_mismatch();
  GradedDerivation C(D1.table, D1.degree + D2.degree, D1.form_degree + D2.form_degree);
  const bool minus = !(D1.parity() && D2.parity());
  for (std::size_t i = 0; i < C.values.size(); ++i) {
    GCAElement a = D1.apply(D2.value(i));
    GCAElement b = D2.apply(D1.value(i));
    C.values[i] = minus ? a - b : a + b;
  }
  for (std::size_t i = 0; i < C.base_action.size(); ++i) {
    GCAElement a = D1.apply(D2.base_action[i]);
    GCAElement b = D2.apply(D1.base_action[i]);
    C.base_action[i] = minus ? a - b : a + b;
  }
  return C;
}

inline bool operator==(const GradedDerivation& a, const GradedDerivation& b) {
  if (a.table != b.table) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (!(a.value(i) == b.value(i))) return false;
  for (std::size_t i = 0; i < a.base_action.size(); ++i)
    if (!(a.base_action[i] == b.base_action[i])) return false;
  return true;
}

struct SquareZeroResult {
  bool pass = true;
  std::string generator;  // witness generator name on failure
  GCAElement value;       // D(D(generator)) on failure
};

/// D^2 = 0 iff it vanishes on every coordinate and every generator.
inline SquareZeroResult check_square_zero(const GradedDerivation& D) {
  if (!D.parity()) throw std::invalid_argument("square-zero test needs an odd derivation");
  const auto& t = *D.table;
  for (std::size_t i = 0; i < D.base_action.size(); ++i) {
    GCAElement v = D.apply(D.base_action[i]);
    if (!v.is_zero()) return {false, t.ring()->vars[i], v};
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    GCAElement v = D.apply(D.value(i));
    if (!v.is_zero()) return {false, t.gen(i).name, v};
  }
  return {};
}

}  // namespace gk
