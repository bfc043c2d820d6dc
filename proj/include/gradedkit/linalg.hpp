#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "gradedkit/poly.hpp"

namespace gk {

/// Dense matrix over Poly, row-major.
using PolyMatrix = std::vector<std::vector<Poly>>;
using RatMatrix = std::vector<std::vector<Rational>>;

inline PolyMatrix zero_matrix(const RingPtr& r, std::size_t rows, std::size_t cols) {
  return PolyMatrix(rows, std::vector<Poly>(cols, Poly(r)));
}

inline PolyMatrix identity_matrix(const RingPtr& r, std::size_t n) {
  PolyMatrix m = zero_matrix(r, n, n);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = Poly::constant(r, 1);
  return m;
}

inline PolyMatrix matmul(const RingPtr& r, const PolyMatrix& a, const PolyMatrix& b) {
  const std::size_t n = a.size(), k = b.size(), m = k ? b[0].size() : 0;
  PolyMatrix c = zero_matrix(r, n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      if (a[i][l].is_zero()) continue;
      for (std::size_t j = 0; j < m; ++j)
        if (!b[l][j].is_zero()) c[i][j] += a[i][l] * b[l][j];
    }
  return c;
}

inline PolyMatrix transpose(const RingPtr& r, const PolyMatrix& a) {
  const std::size_t n = a.size(), m = n ? a[0].size() : 0;
  PolyMatrix t = zero_matrix(r, m, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) t[j][i] = a[i][j];
  return t;
}

inline bool is_zero_matrix(const PolyMatrix& a) {
  for (auto& row : a)
    for (auto& e : row)
      if (!e.is_zero()) return false;
  return true;
}

inline bool is_symmetric(const PolyMatrix& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (a[i][j] != a[j][i]) return false;
  return true;
}

/// Characteristic data by Faddeev-LeVerrier: determinant and adjugate. Only
/// divides by integers, so it stays inside Q[x].
struct FaddeevLeVerrier {
  Poly det;
  PolyMatrix adj;
};

inline FaddeevLeVerrier faddeev_leverrier(const RingPtr& r, const PolyMatrix& a) {
  const std::size_t n = a.size();
  for (auto& row : a)
    if (row.size() != n) throw std::invalid_argument("square matrix required");
  if (n == 0) return {Poly::constant(r, 1), {}};
  PolyMatrix m = zero_matrix(r, n, n);
  Poly c = Poly::constant(r, 1);
  for (std::size_t k = 1; k <= n; ++k) {
    PolyMatrix am = matmul(r, a, m);
    for (std::size_t i = 0; i < n; ++i) am[i][i] += c;
    m = std::move(am);
    PolyMatrix t = matmul(r, a, m);
    Poly tr(r);
    for (std::size_t i = 0; i < n; ++i) tr += t[i][i];
    c = tr * (Rational(-1) / Rational(static_cast<long>(k)));
  }
  // c is now c_0; det = (-1)^n c_0 and adj = (-1)^(n+1) M_n.
  FaddeevLeVerrier out;
  out.det = (n % 2) ? -c : c;
  out.adj = m;
  if (n % 2 == 0)
    for (auto& row : out.adj)
      for (auto& e : row) e = -e;
  return out;
}

inline Poly determinant(const RingPtr& r, const PolyMatrix& a) { return faddeev_leverrier(r, a).det; }

/// Inverse over Q[x]; exists iff the determinant is a nonzero constant.
inline std::optional<PolyMatrix> inverse(const RingPtr& r, const PolyMatrix& a) {
  auto fl = faddeev_leverrier(r, a);
  if (fl.det.is_zero() || !fl.det.is_constant()) return std::nullopt;
  Rational s = 1 / fl.det.constant_term();
  for (auto& row : fl.adj)
    for (auto& e : row) e *= s;
  return fl.adj;
}

inline RatMatrix evaluate(const PolyMatrix& a, const std::vector<Rational>& pt) {
  RatMatrix m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (auto& e : a[i]) m[i].push_back(e.evaluate(pt));
  return m;
}

inline std::size_t rank(RatMatrix m) {
  std::size_t rows = m.size(), cols = rows ? m[0].size() : 0, r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && m[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[r]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      Rational f = m[i][c] / m[r][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    ++r;
  }
  return r;
}

inline std::size_t rank_at(const PolyMatrix& a, const std::vector<Rational>& pt) { return rank(evaluate(a, pt)); }

}  // namespace gk
