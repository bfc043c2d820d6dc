#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradedkit/poly.hpp"

namespace gk {

/// Vector field sum_i v_i d/dx_i on the affine base.
struct VectorField {
  RingPtr ring;
  std::vector<Poly> comp;

  VectorField() = default;
  explicit VectorField(RingPtr r) : ring(r), comp(r->nvars(), Poly(r)) {}
  VectorField(RingPtr r, std::vector<Poly> c) : ring(std::move(r)), comp(std::move(c)) {
    if (comp.size() != ring->nvars()) throw std::invalid_argument("vector field component count");
  }
  static VectorField coordinate(RingPtr r, std::size_t i) {
    VectorField v(r);
    v.comp.at(i) = Poly::constant(r, 1);
    return v;
  }

  /// Derivative of a function along the field.
  Poly apply(const Poly& f) const {
    Poly s(ring);
    for (std::size_t i = 0; i < comp.size(); ++i)
      if (!comp[i].is_zero()) s += comp[i] * f.derivative(i);
    return s;
  }

  bool is_zero() const {
    for (auto& c : comp)
      if (!c.is_zero()) return false;
    return true;
  }

  VectorField& operator+=(const VectorField& o) {
    check(o);
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] += o.comp[i];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    check(o);
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] -= o.comp[i];
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(const Poly& f, VectorField v) {
    for (auto& c : v.comp) c = f * c;
    return v;
  }
  friend bool operator==(const VectorField& a, const VectorField& b) { return a.comp == b.comp; }

  void check(const VectorField& o) const {
    if (!same_ring(ring, o.ring)) throw ring_mismatch();
  }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      if (comp[i].is_zero()) continue;
      if (!s.empty()) s += " + ";
      s += "(" + comp[i].str() + ")*d/d" + ring->vars[i];
    }
    return s.empty() ? "0" : s;
  }
};

/// [v,w] = v o w - w o v as derivations of the coordinate ring.
inline VectorField lie_bracket_vf(const VectorField& v, const VectorField& w) {
  v.check(w);
  VectorField r(v.ring);
  for (std::size_t j = 0; j < r.comp.size(); ++j) r.comp[j] = v.apply(w.comp[j]) - w.apply(v.comp[j]);
  return r;
}

using MultiIndex = std::vector<int>;

/// Sign of the permutation sorting `idx`; 0 when an index repeats.
inline int sort_sign(MultiIndex& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  return sign;
}

/// Homogeneous differential p-form sum_I f_I dx_I with strictly increasing I.
struct BaseForm {
  RingPtr ring;
  int degree = 0;
  std::map<MultiIndex, Poly> terms;

  BaseForm() = default;
  BaseForm(RingPtr r, int p) : ring(std::move(r)), degree(p) {}

  static BaseForm function(const Poly& f) {
    BaseForm w(f.ring(), 0);
    w.add({}, f);
    return w;
  }
  /// f dx_{i1} ^ ... ^ dx_{ip}, indices in any order.
  static BaseForm term(const RingPtr& r, MultiIndex idx, const Poly& f) {
    BaseForm w(r, static_cast<int>(idx.size()));
    w.add(std::move(idx), f);
    return w;
  }

  void add(MultiIndex idx, const Poly& f) {
    if (static_cast<int>(idx.size()) != degree) throw std::invalid_argument("form degree mismatch");
    int s = sort_sign(idx);
    if (s == 0 || f.is_zero()) return;
    auto it = terms.find(idx);
    if (it == terms.end()) {
      terms.emplace(std::move(idx), s > 0 ? f : -f);
    } else {
      if (s > 0)
        it->second += f;
      else
        it->second -= f;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  Poly coeff(const MultiIndex& idx) const {
    auto it = terms.find(idx);
    return it == terms.end() ? Poly(ring) : it->second;
  }

  bool is_zero() const { return terms.empty(); }

  BaseForm& operator+=(const BaseForm& o) {
    if (o.is_zero()) return *this;
    if (is_zero() && degree != o.degree) degree = o.degree;
    if (degree != o.degree) throw std::invalid_argument("adding forms of different degree");
    if (!ring) ring = o.ring;
    for (auto& [i, f] : o.terms) add(i, f);
    return *this;
  }
  BaseForm& operator-=(const BaseForm& o) { return *this += o * Rational(-1); }
  friend BaseForm operator+(BaseForm a, const BaseForm& b) { return a += b; }
  friend BaseForm operator-(BaseForm a, const BaseForm& b) { return a -= b; }
  friend BaseForm operator*(BaseForm a, const Rational& c) {
    if (c == 0) a.terms.clear();
    for (auto& [i, f] : a.terms) f *= c;
    return a;
  }
  friend BaseForm operator*(const Poly& g, BaseForm a) {
    BaseForm r(a.ring, a.degree);
    for (auto& [i, f] : a.terms) r.add(i, g * f);
    return r;
  }
  friend bool operator==(const BaseForm& a, const BaseForm& b) {
    if (a.is_zero() && b.is_zero()) return true;
    return a.degree == b.degree && a.terms == b.terms;
  }

  std::string str() const {
    if (terms.empty()) return "0";
    std::string s;
    for (auto& [idx, f] : terms) {
      if (!s.empty()) s += " + ";
      s += "(" + f.str() + ")";
      for (int i : idx) s += "*d" + ring->vars[i];
    }
    return s;
  }
};

inline BaseForm wedge(const BaseForm& a, const BaseForm& b) {
  BaseForm r(a.ring ? a.ring : b.ring, a.degree + b.degree);
  for (auto& [ia, fa] : a.terms)
    for (auto& [ib, fb] : b.terms) {
      MultiIndex idx = ia;
      idx.insert(idx.end(), ib.begin(), ib.end());
      r.add(idx, fa * fb);
    }
  return r;
}

/// Exterior derivative.
inline BaseForm de_rham_d(const BaseForm& w) {
  BaseForm r(w.ring, w.degree + 1);
  for (auto& [idx, f] : w.terms)
    for (std::size_t i = 0; i < w.ring->nvars(); ++i) {
      Poly df = f.derivative(i);
      if (df.is_zero()) continue;
      MultiIndex j{static_cast<int>(i)};
      j.insert(j.end(), idx.begin(), idx.end());
      r.add(j, df);
    }
  return r;
}

inline BaseForm differential(const Poly& f) { return de_rham_d(BaseForm::function(f)); }

/// Interior contraction in the first slot.
inline BaseForm contract(const VectorField& v, const BaseForm& w) {
  if (w.degree < 1) throw std::invalid_argument("contraction of a function");
  BaseForm r(w.ring, w.degree - 1);
  for (auto& [idx, f] : w.terms)
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const Poly& vk = v.comp.at(idx[k]);
      if (vk.is_zero()) continue;
      MultiIndex j;
      for (std::size_t m = 0; m < idx.size(); ++m)
        if (m != k) j.push_back(idx[m]);
      Poly c = vk * f;
      r.add(j, (k % 2) ? -c : c);
    }
  return r;
}

/// Contraction that returns zero on functions instead of throwing.
inline BaseForm contract_or_zero(const VectorField& v, const BaseForm& w) {
  if (w.degree < 1) return BaseForm(w.ring, 0);
  return contract(v, w);
}

/// Lie derivative via the Cartan formula.
inline BaseForm lie_derivative(const VectorField& v, const BaseForm& w) {
  BaseForm r = contract_or_zero(v, de_rham_d(w));
  if (w.degree > 0) r += de_rham_d(contract(v, w));
  r.degree = w.degree;
  return r;
}

}  // namespace gk
