#pragma once

#include <gmpxx.h>

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace gk {

using Rational = mpq_class;

inline std::string to_string(const Rational& q) { return q.get_str(); }

/// Coordinate ring Q[x_1..x_n] with a fixed variable order.
struct Ring {
  std::vector<std::string> vars;

  std::size_t nvars() const { return vars.size(); }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i] == name) return static_cast<int>(i);
    return -1;
  }
};

using RingPtr = std::shared_ptr<const Ring>;

inline RingPtr make_ring(std::vector<std::string> vars) {
  return std::make_shared<const Ring>(Ring{std::move(vars)});
}

inline bool same_ring(const RingPtr& a, const RingPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->vars == b->vars;
}

struct ring_mismatch : std::invalid_argument {
  ring_mismatch() : std::invalid_argument("polynomials over different rings") {}
};

using Exponent = std::vector<int>;

/// Sparse polynomial over Q. A default-constructed Poly is the zero of any ring.
class Poly {
 public:
  Poly() = default;
  explicit Poly(RingPtr ring) : ring_(std::move(ring)) {}

  // mpq_class(n, d) is not reduced, and mpq equality assumes reduced values.
  static Rational canonical(Rational c) {
    c.canonicalize();
    return c;
  }

  static Poly constant(RingPtr ring, const Rational& c) {
    Poly p(ring);
    if (c != 0) p.terms_[Exponent(ring->nvars(), 0)] = canonical(c);
    return p;
  }
  static Poly variable(RingPtr ring, std::size_t i) {
    Poly p(ring);
    Exponent e(ring->nvars(), 0);
    e.at(i) = 1;
    p.terms_[e] = 1;
    return p;
  }
  static Poly monomial(RingPtr ring, Exponent e, const Rational& c) {
    if (e.size() != ring->nvars()) throw std::invalid_argument("exponent length mismatch");
    Poly p(ring);
    if (c != 0) p.terms_[std::move(e)] = canonical(c);
    return p;
  }

  const RingPtr& ring() const { return ring_; }
  const std::map<Exponent, Rational>& terms() const { return terms_; }

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    if (terms_.empty()) return true;
    if (terms_.size() > 1) return false;
    for (int v : terms_.begin()->first)
      if (v) return false;
    return true;
  }
  Rational constant_term() const {
    if (!ring_) return 0;
    auto it = terms_.find(Exponent(ring_->nvars(), 0));
    return it == terms_.end() ? Rational(0) : it->second;
  }
  int total_degree() const {
    int d = -1;
    for (auto& [e, c] : terms_) {
      int s = 0;
      for (int v : e) s += v;
      d = std::max(d, s);
    }
    return d;
  }

  Poly& operator+=(const Poly& o) {
    adopt(o);
    for (auto& [e, c] : o.terms_) {
      auto it = terms_.find(e);
      if (it == terms_.end()) {
        terms_.emplace(e, c);
      } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
      }
    }
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    adopt(o);
    for (auto& [e, c] : o.terms_) {
      auto it = terms_.find(e);
      if (it == terms_.end()) {
        terms_.emplace(e, -c);
      } else {
        it->second -= c;
        if (it->second == 0) terms_.erase(it);
      }
    }
    return *this;
  }
  Poly& operator*=(const Rational& c) {
    if (c == 0) {
      terms_.clear();
      return *this;
    }
    Rational k = canonical(c);
    for (auto& [e, v] : terms_) v *= k;
    return *this;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator-(Poly a) {
    for (auto& [e, v] : a.terms_) v = -v;
    return a;
  }
  friend Poly operator*(Poly a, const Rational& c) { return a *= c; }
  friend Poly operator*(const Rational& c, Poly a) { return a *= c; }

  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) {
      Poly z;
      z.ring_ = a.ring_ ? a.ring_ : b.ring_;
      return z;
    }
    if (!same_ring(a.ring_, b.ring_)) throw ring_mismatch();
    Poly r(a.ring_);
    Exponent e(a.ring_->nvars());
    for (auto& [ea, ca] : a.terms_)
      for (auto& [eb, cb] : b.terms_) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
        auto it = r.terms_.find(e);
        if (it == r.terms_.end()) {
          r.terms_.emplace(e, ca * cb);
        } else {
          it->second += ca * cb;
          if (it->second == 0) r.terms_.erase(it);
        }
      }
    return r;
  }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }

  friend bool operator==(const Poly& a, const Poly& b) {
    if (a.is_zero() && b.is_zero()) return true;
    if (!same_ring(a.ring_, b.ring_)) return false;
    return a.terms_ == b.terms_;
  }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  /// Partial derivative with respect to variable i.
  Poly derivative(std::size_t i) const {
    Poly r;
    r.ring_ = ring_;
    for (auto& [e, c] : terms_) {
      if (e[i] == 0) continue;
      Exponent f = e;
      f[i] -= 1;
      r.terms_.emplace(std::move(f), c * e[i]);
    }
    return r;
  }

  Rational evaluate(const std::vector<Rational>& pt) const {
    Rational s = 0;
    for (auto& [e, c] : terms_) {
      Rational t = c;
      for (std::size_t i = 0; i < e.size(); ++i)
        for (int k = 0; k < e[i]; ++k) t *= pt.at(i);
      s += t;
    }
    return s;
  }

  /// Set the flagged variables to zero and drop them, landing in `target`.
  Poly restrict_to(const RingPtr& target, const std::vector<int>& keep) const {
    Poly r(target);
    for (auto& [e, c] : terms_) {
      bool killed = false;
      for (std::size_t i = 0; i < e.size(); ++i) {
        bool kept = false;
        for (int k : keep) kept |= (k == static_cast<int>(i));
        if (!kept && e[i] > 0) killed = true;
      }
      if (killed) continue;
      Exponent f(keep.size());
      for (std::size_t j = 0; j < keep.size(); ++j) f[j] = e[keep[j]];
      r += Poly::monomial(target, f, c);
    }
    return r;
  }

  /// Re-express in a larger ring whose variables include ours.
  Poly lift_to(const RingPtr& target) const {
    Poly r(target);
    if (!ring_) return r;
    std::vector<int> map(ring_->nvars());
    for (std::size_t i = 0; i < ring_->nvars(); ++i) {
      map[i] = target->index_of(ring_->vars[i]);
      if (map[i] < 0) throw std::invalid_argument("variable " + ring_->vars[i] + " missing in target ring");
    }
    for (auto& [e, c] : terms_) {
      Exponent f(target->nvars(), 0);
      for (std::size_t i = 0; i < e.size(); ++i) f[map[i]] = e[i];
      r.terms_.emplace(std::move(f), c);
    }
    return r;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [e, c] = *it;
      Rational a = abs(c);
      bool neg = c < 0;
      if (first) {
        if (neg) s += "-";
      } else {
        s += neg ? " - " : " + ";
      }
      first = false;
      std::string mono;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (!e[i]) continue;
        if (!mono.empty()) mono += "*";
        mono += ring_->vars[i];
        if (e[i] > 1) mono += "^" + std::to_string(e[i]);
      }
      if (mono.empty()) {
        s += a.get_str();
      } else if (a == 1) {
        s += mono;
      } else {
        s += a.get_str() + "*" + mono;
      }
    }
    return s;
  }

 private:
  void adopt(const Poly& o) {
    if (!ring_) {
      ring_ = o.ring_;
    } else if (o.ring_ && !same_ring(ring_, o.ring_)) {
      throw ring_mismatch();
    }
  }

  RingPtr ring_;
  std::map<Exponent, Rational> terms_;
};

inline Poly operator*(const Poly& a, int c) { return a * Rational(c); }

}  // namespace gk
