#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gradedkit/algebroid.hpp"
#include "gradedkit/courant.hpp"
#include "gradedkit/dsl.hpp"
#include "gradedkit/forms.hpp"
#include "gradedkit/symplectic.hpp"

namespace gk::dsl {

enum class Kind { Linfty, Courant, Symplectic, Dirac, Retract, Morphism, ClosedForm };

inline const std::vector<std::pair<std::string, Kind>>& kind_names() {
  static const std::vector<std::pair<std::string, Kind>> k{
      {"linfty", Kind::Linfty},     {"courant", Kind::Courant},   {"symplectic", Kind::Symplectic},
      {"dirac", Kind::Dirac},       {"retract", Kind::Retract},   {"morphism", Kind::Morphism},
      {"closedform", Kind::ClosedForm}};
  return k;
}

inline std::string kind_name(Kind k) {
  for (auto& [n, v] : kind_names())
    if (v == k) return n;
  return "?";
}

/// Expected verdict of a corpus document, optionally with the failing check
/// and its witness.
struct Expectation {
  bool pass = true;
  std::string check;
  std::string witness;
};

/// Courant algebroid with the optional metric connection used by conversion.
/// `twist` is set while the document only declares a standard algebroid and
/// its twist, so that it is an exact Dirac pair ambient.
struct CourantDoc {
  CourantData data;
  std::optional<MetricConnection> connection;
  std::optional<BaseForm> twist;
};

struct DiracDoc {
  CourantDoc ambient;
  DiracData dirac;
  std::optional<Bivector> bivector;
  std::optional<std::size_t> coisotropic;
};

struct MorphismDoc {
  CourantDoc source, target;
  BundleMap g;
  BaseForm H;
  std::optional<BundleMap> g2;
  std::optional<BaseForm> H2;
  std::optional<BaseForm> B;
};

struct ClosedFormDoc {
  LinftyAlgebroid algebroid;
  std::shared_ptr<FormsAlgebra> forms;
  int p = 2;
  GCAElement cocycle;
};

/// Fully resolved document.
struct Model {
  Kind kind = Kind::Linfty;
  std::string label;
  std::optional<Expectation> expect;
  RingPtr ring;
  std::optional<LinftyAlgebroid> linfty;
  std::optional<CourantDoc> courant;
  std::optional<ShiftedSymplecticData> symplectic;
  std::optional<DiracDoc> dirac;
  std::optional<DeformationRetract> retract;
  std::optional<MorphismDoc> morphism;
  std::optional<ClosedFormDoc> closed;
};

namespace detail {

[[noreturn]] inline void fail_at(Pos p, const std::string& m, std::vector<std::string> exp = {}) {
  throw ParseError(p, m, std::move(exp));
}

/// Name resolution and literal conversion against a declared ring.
struct Reader {
  RingPtr ring;

  void need_ring(const Statement& s) const {
    if (!ring) fail_at(s.pos, "'" + s.keyword + "' before 'ring'", {"ring"});
  }

  static const Value& value(const Statement& s) {
    if (!s.value) fail_at(s.pos, "'" + s.keyword + "' needs a value", {"'='"});
    return *s.value;
  }

  static void kind_of(const Value& v, Value::Kind k, const char* what) {
    if (v.kind != k) fail_at(v.pos, std::string("expected ") + what);
  }

  Poly poly(const Value& v) const {
    kind_of(v, Value::Kind::String, "a polynomial string");
    return parse_poly(ring, v.text, v.pos);
  }

  VectorField vector_field(const Value& v) const {
    kind_of(v, Value::Kind::Array, "an array of components");
    if (v.items.size() != ring->nvars())
      fail_at(v.pos, "expected " + std::to_string(ring->nvars()) + " components, got " + std::to_string(v.items.size()));
    VectorField f(ring);
    for (std::size_t i = 0; i < v.items.size(); ++i) f.comp[i] = poly(v.items[i]);
    return f;
  }

  PolyMatrix matrix(const Value& v, std::size_t rows, std::size_t cols) const {
    kind_of(v, Value::Kind::Array, "a matrix literal");
    if (v.items.size() != rows) fail_at(v.pos, "expected " + std::to_string(rows) + " rows");
    PolyMatrix m = zero_matrix(ring, rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      const Value& row = v.items[i];
      kind_of(row, Value::Kind::Array, "a matrix row");
      if (row.items.size() != cols) fail_at(row.pos, "expected " + std::to_string(cols) + " entries");
      for (std::size_t j = 0; j < cols; ++j) m[i][j] = poly(row.items[j]);
    }
    return m;
  }

  /// {name: "poly", ...} over the given basis names.
  LElem element(const Value& v, const std::vector<std::string>& names) const {
    kind_of(v, Value::Kind::Map, "a map from basis names to polynomials");
    LElem x = zero_elem(ring, names.size());
    for (std::size_t e = 0; e < v.entries.size(); ++e) {
      auto& [key, val] = v.entries[e];
      int k = -1;
      if (key.size() == 1)
        for (std::size_t a = 0; a < names.size(); ++a)
          if (names[a] == key[0]) k = static_cast<int>(a);
      if (k < 0) fail_at(v.key_pos[e], "unknown basis element '" + join(key) + "'", names);
      x[k] += poly(val);
    }
    return x;
  }

  /// {dx^dy: "poly", 1: "poly"}; all keys must have the same degree. An empty
  /// map is the zero form of degree `empty_degree`.
  BaseForm form(const Value& v, int empty_degree) const {
    kind_of(v, Value::Kind::Map, "a map from dx^dy keys to polynomials");
    std::optional<int> deg;
    BaseForm w(ring, empty_degree);
    for (std::size_t e = 0; e < v.entries.size(); ++e) {
      auto& [key, val] = v.entries[e];
      MultiIndex idx;
      if (!(key.size() == 1 && key[0] == "1")) {
        for (auto& k : key) {
          int i = (k.size() > 1 && k[0] == 'd') ? ring->index_of(k.substr(1)) : -1;
          if (i < 0) fail_at(v.key_pos[e], "unknown coordinate differential '" + k + "'");
          idx.push_back(i);
        }
      }
      int d = static_cast<int>(idx.size());
      if (deg && *deg != d) fail_at(v.key_pos[e], "mixed form degrees in one form");
      if (!deg) {
        deg = d;
        w = BaseForm(ring, d);
      }
      Poly f = poly(val);
      int s = sort_sign(idx);
      for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] == idx[i - 1]) fail_at(v.key_pos[e], "repeated differential in '" + join(key) + "'");
      w.add(idx, s > 0 ? f : -f);
    }
    return w;
  }

  static std::string join(const std::vector<std::string>& key) {
    std::string s;
    for (auto& k : key) s += (s.empty() ? "" : "^") + k;
    return s;
  }
};

inline int word_int(const Word& w) {
  try {
    std::size_t used = 0;
    int n = std::stoi(w.text, &used);
    if (used == w.text.size()) return n;
  } catch (const std::exception&) {
  }
  fail_at(w.pos, "expected an integer", {"integer"});
}

inline void arity(const Statement& s, std::size_t lo, std::size_t hi) {
  if (s.words.size() < lo || s.words.size() > hi) {
    Pos p = s.words.empty() ? s.pos : s.words.back().pos;
    fail_at(p, "'" + s.keyword + "' takes " + (lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi)) +
                   " word(s)");
  }
}

inline int resolve(const Word& w, const std::vector<std::string>& names, const char* what) {
  for (std::size_t a = 0; a < names.size(); ++a)
    if (names[a] == w.text) return static_cast<int>(a);
  fail_at(w.pos, std::string("unknown ") + what + " '" + w.text + "'", names);
}

inline Tuple tuple_of(const Statement& s, const std::vector<std::string>& names, std::size_t lo, std::size_t hi) {
  if (!s.tuple) fail_at(s.pos, "'" + s.keyword + "' needs a tuple", {"'('"});
  if (s.tuple->size() < lo || s.tuple->size() > hi) fail_at(s.tuple->front().pos, "wrong tuple length");
  Tuple t;
  for (auto& w : *s.tuple) t.push_back(resolve(w, names, "basis element"));
  return t;
}

/// Keyword-table driven statement loop with one diagnostic for unknown keywords.
struct Handlers {
  std::vector<std::pair<std::string, std::function<void(const Statement&)>>> table;

  /// Later registrations replace earlier ones for the same keyword.
  void on(std::string kw, std::function<void(const Statement&)> f) {
    for (auto& [k, g] : table)
      if (k == kw) {
        g = std::move(f);
        return;
      }
    table.emplace_back(std::move(kw), std::move(f));
  }

  void run(const std::vector<Statement>& ss) const {
    for (auto& s : ss) {
      bool done = false;
      for (auto& [kw, f] : table)
        if (kw == s.keyword) {
          f(s);
          done = true;
          break;
        }
      if (!done) {
        std::vector<std::string> exp;
        for (auto& [kw, f] : table) exp.push_back(kw);
        fail_at(s.pos, "unknown statement '" + s.keyword + "'", exp);
      }
    }
  }
};

/// Statements shared by every kind: kind, label, expect, ring.
inline void common_handlers(Handlers& h, Model& m, Reader& rd) {
  h.on("kind", [](const Statement&) {});
  h.on("label", [&m](const Statement& s) {
    arity(s, 1, 1);
    m.label = s.words[0].text;
  });
  h.on("expect", [&m](const Statement& s) {
    arity(s, 1, 3);
    Expectation e;
    if (s.words[0].text == "pass")
      e.pass = true;
    else if (s.words[0].text == "fail")
      e.pass = false;
    else
      fail_at(s.words[0].pos, "expected pass or fail", {"pass", "fail"});
    if (s.words.size() > 1) e.check = s.words[1].text;
    if (s.words.size() > 2) e.witness = s.words[2].text;
    m.expect = e;
  });
  h.on("ring", [&m, &rd](const Statement& s) {
    if (m.ring) fail_at(s.pos, "ring declared twice");
    std::vector<std::string> vars;
    for (auto& w : s.words) {
      if (w.quoted || !(std::isalpha(static_cast<unsigned char>(w.text[0])) || w.text[0] == '_'))
        fail_at(w.pos, "expected a variable name");
      for (auto& v : vars)
        if (v == w.text) fail_at(w.pos, "duplicate variable '" + w.text + "'");
      vars.push_back(w.text);
    }
    m.ring = make_ring(vars);
    rd.ring = m.ring;
  });
}

inline void linfty_handlers(Handlers& h, LinftyAlgebroid& L, Reader& rd, bool& started) {
  auto init = [&L, &rd, &started](const Statement& s) {
    rd.need_ring(s);
    if (!started) {
      L = make_algebroid(rd.ring);
      started = true;
    }
  };
  h.on("basis", [&, init](const Statement& s) {
    init(s);
    arity(s, 2, 2);
    if (L.index_of(s.words[0].text) >= 0) fail_at(s.words[0].pos, "duplicate basis element '" + s.words[0].text + "'");
    int d = word_int(s.words[1]);
    if (d > 0) fail_at(s.words[1].pos, "basis degrees must be non-positive");
    L.add_basis(s.words[0].text, d);
  });
  h.on("anchor", [&, init](const Statement& s) {
    init(s);
    arity(s, 1, 1);
    L.anchor[resolve(s.words[0], L.names, "basis element")] = rd.vector_field(Reader::value(s));
  });
  h.on("differential", [&, init](const Statement& s) {
    init(s);
    arity(s, 1, 1);
    L.differential[resolve(s.words[0], L.names, "basis element")] = rd.element(Reader::value(s), L.names);
  });
  h.on("bracket", [&, init](const Statement& s) {
    init(s);
    arity(s, 0, 1);
    bool ordered = false;
    if (!s.words.empty()) {
      if (s.words[0].text != "ordered") fail_at(s.words[0].pos, "unexpected word", {"ordered", "'('"});
      ordered = true;
    }
    Tuple t = tuple_of(s, L.names, 2, 8);
    L.set_bracket(t, rd.element(Reader::value(s), L.names), !ordered);
  });
  h.on("symbol", [&, init](const Statement& s) {
    init(s);
    arity(s, 0, 0);
    Tuple t = tuple_of(s, L.names, 2, 2);
    L.symbol_override[{t[0], t[1]}] = rd.vector_field(Reader::value(s));
  });
}

inline void courant_handlers(Handlers& h, CourantDoc& C, Reader& rd, bool& started) {
  auto init = [&C, &rd, &started](const Statement& s) {
    rd.need_ring(s);
    if (!started) {
      C.data = make_courant(rd.ring);
      started = true;
    }
  };
  auto structural = [&C]() { C.twist.reset(); };
  h.on("standard", [&, init](const Statement& s) {
    init(s);
    arity(s, 0, 0);
    if (C.data.rank() != 0) fail_at(s.pos, "'standard' must come before other basis elements");
    C.data = make_standard(rd.ring);
    C.twist = BaseForm(rd.ring, 3);
  });
  h.on("twist", [&, init](const Statement& s) {
    init(s);
    arity(s, 0, 0);
    BaseForm H = rd.form(Reader::value(s), 3);
    if (H.degree != 3) fail_at(s.value->pos, "twist must be a three-form");
    if (!has_standard_frame(C.data)) fail_at(s.pos, "'twist' needs the standard frame");
    C.data = make_h_twist(C.data, H);
    if (C.twist) *C.twist += H;
  });
  h.on("element", [&, init, structural](const Statement& s) {
    init(s);
    arity(s, 1, 1);
    if (C.data.index_of(s.words[0].text) >= 0) fail_at(s.words[0].pos, "duplicate basis element '" + s.words[0].text + "'");
    C.data.add_basis(s.words[0].text, rd.vector_field(Reader::value(s)));
    structural();
  });
  h.on("pairing", [&, init, structural](const Statement& s) {
    init(s);
    arity(s, 0, 0);
    C.data.gram = rd.matrix(Reader::value(s), C.data.rank(), C.data.rank());
    structural();
  });
  h.on("bracket", [&, init, structural](const Statement& s) {
    init(s);
    arity(s, 0, 0);
    Tuple t = tuple_of(s, C.data.names, 2, 2);
    C.data.set_bracket(t[0], t[1], rd.element(Reader::value(s), C.data.names));
    structural();
  });
  h.on("symbol", [&, init, structural](const Statement& s) {
    init(s);
    arity(s, 0, 0);
    Tuple t = tuple_of(s, C.data.names, 2, 2);
    C.data.symbol_override[{t[0], t[1]}] = rd.vector_field(Reader::value(s));
    structural();
  });
  h.on("form", [&, init, structural](const Statement& s) {
    init(s);
    arity(s, 1, 1);
    if (s.words[0].text != "K") fail_at(s.words[0].pos, "unknown form", {"K"});
    C.data.K = rd.form(Reader::value(s), 4);
    structural();
  });
  h.on("connection", [&, init](const Statement& s) {
    init(s);
    arity(s, 1, 1);
    int k = rd.ring->index_of(s.words[0].text);
    if (k < 0) fail_at(s.words[0].pos, "unknown variable '" + s.words[0].text + "'", rd.ring->vars);
    if (!C.connection) C.connection = MetricConnection::trivial(rd.ring, C.data.rank());
    if (C.connection->gamma[k].size() != C.data.rank()) fail_at(s.pos, "connection declared before all basis elements");
    C.connection->gamma[k] = rd.matrix(Reader::value(s), C.data.rank(), C.data.rank());
  });
}

inline std::optional<Kind> find_kind(const Document& d) {
  std::optional<Kind> k;
  for (auto& s : d.statements) {
    if (s.keyword != "kind") continue;
    if (k) fail_at(s.pos, "kind declared twice");
    arity(s, 1, 1);
    for (auto& [n, v] : kind_names())
      if (n == s.words[0].text) k = v;
    if (!k) {
      std::vector<std::string> exp;
      for (auto& [n, v] : kind_names()) exp.push_back(n);
      fail_at(s.words[0].pos, "unknown kind '" + s.words[0].text + "'", exp);
    }
  }
  return k;
}

inline void no_blocks(const Document& d) {
  if (!d.blocks.empty()) fail_at(d.blocks.front().pos, "unexpected block '" + d.blocks.front().name + "'");
}

inline CourantDoc load_courant_body(const Document& d, Reader& rd) {
  no_blocks(d);
  CourantDoc C;
  bool started = false;
  Handlers h;
  courant_handlers(h, C, rd, started);
  h.run(d.statements);
  if (!started) C.data = make_courant(rd.ring);
  if (C.connection)
    for (auto& g : C.connection->gamma)
      if (g.size() != C.data.rank()) throw ParseError(d.statements.back().pos, "connection declared before all basis elements");
  return C;
}

}  // namespace detail

/// Resolve a parsed document. Retract documents name source basis elements
/// and so need the source algebroid.
inline Model load(const Document& d, const LinftyAlgebroid* source = nullptr) {
  using namespace detail;
  Model m;
  std::optional<Kind> k = find_kind(d);
  if (!k) throw ParseError(Pos{1, 1}, "missing 'kind' statement", {"kind"});
  m.kind = *k;
  Reader rd;
  Handlers h;
  common_handlers(h, m, rd);

  switch (m.kind) {
    case Kind::Linfty: {
      no_blocks(d);
      LinftyAlgebroid L;
      bool started = false;
      linfty_handlers(h, L, rd, started);
      h.run(d.statements);
      if (!m.ring) fail_at(Pos{1, 1}, "missing 'ring' statement", {"ring"});
      if (!started) L = make_algebroid(m.ring);
      m.linfty = std::move(L);
      break;
    }
    case Kind::Courant: {
      no_blocks(d);
      CourantDoc C;
      bool started = false;
      courant_handlers(h, C, rd, started);
      h.run(d.statements);
      if (!m.ring) fail_at(Pos{1, 1}, "missing 'ring' statement", {"ring"});
      if (!started) C.data = make_courant(m.ring);
      m.courant = std::move(C);
      break;
    }
    case Kind::Symplectic: {
      no_blocks(d);
      ShiftedSymplecticData S;
      bool started = false;
      std::optional<int> shift;
      LinftyAlgebroid& L = S.algebroid;
      linfty_handlers(h, L, rd, started);
      auto sized = [&](const Statement& s) {
        rd.need_ring(s);
        if (!started) L = make_algebroid(rd.ring), started = true;
        S.phi.resize(L.rank(), BaseForm(rd.ring, 1));
      };
      h.on("shift", [&](const Statement& s) {
        arity(s, 1, 1);
        int n = word_int(s.words[0]);
        if (n != 0 && n != 2) fail_at(s.words[0].pos, "supported shifts are 0 and 2", {"0", "2"});
        shift = n;
        S.shift = n;
      });
      h.on("form", [&](const Statement& s) {
        sized(s);
        arity(s, 1, 1);
        const std::string& f = s.words[0].text;
        if (f == "phi") {
          Tuple t = tuple_of(s, L.names, 1, 1);
          S.phi[t[0]] = rd.form(Reader::value(s), 1);
          if (S.phi[t[0]].degree != 1) fail_at(s.value->pos, "phi takes values in one-forms");
        } else if (f == "psi") {
          Tuple t = tuple_of(s, L.names, 2, 2);
          BaseForm w = rd.form(Reader::value(s), 1);
          if (w.degree != 1) fail_at(s.value->pos, "psi takes values in one-forms");
          auto put = [&](int a, int b, const BaseForm& v) {
            if (v.is_zero())
              S.psi.erase({a, b});
            else
              S.psi[{a, b}] = v;
          };
          put(t[0], t[1], w);
          if (t[0] != t[1]) put(t[1], t[0], w * Rational(-1));
        } else if (f == "K") {
          S.K = rd.form(Reader::value(s), 4);
        } else if (f == "B") {
          S.B = rd.form(Reader::value(s), 2);
        } else {
          fail_at(s.words[0].pos, "unknown form", {"phi", "psi", "K", "B"});
        }
      });
      h.on("pairing", [&](const Statement& s) {
        sized(s);
        arity(s, 0, 0);
        S.Q = rd.matrix(Reader::value(s), L.rank(), L.rank());
      });
      h.run(d.statements);
      if (!m.ring) fail_at(Pos{1, 1}, "missing 'ring' statement", {"ring"});
      if (!shift) fail_at(Pos{1, 1}, "missing 'shift' statement", {"shift"});
      if (!S.K.ring) S.K = BaseForm(m.ring, 4);
      if (!S.B.ring) S.B = BaseForm(m.ring, 2);
      if (!started) L = make_algebroid(m.ring);
      S.phi.resize(L.rank(), BaseForm(m.ring, 1));
      if (S.Q.size() != L.rank()) S.Q = zero_matrix(m.ring, L.rank(), L.rank());
      m.symplectic = std::move(S);
      break;
    }
    case Kind::Dirac: {
      no_blocks(d);
      DiracDoc D;
      bool started = false;
      courant_handlers(h, D.ambient, rd, started);
      h.on("generator", [&](const Statement& s) {
        rd.need_ring(s);
        arity(s, 0, 0);
        D.dirac.generators.push_back(rd.element(Reader::value(s), D.ambient.data.names));
      });
      h.on("tangent", [&](const Statement& s) {
        rd.need_ring(s);
        arity(s, 0, 0);
        if (!has_standard_frame(D.ambient.data)) fail_at(s.pos, "'tangent' needs the standard frame");
        D.dirac.generators = tangent_dirac(D.ambient.data).generators;
      });
      h.on("bivector", [&](const Statement& s) {
        rd.need_ring(s);
        arity(s, 0, 0);
        if (!has_standard_frame(D.ambient.data)) fail_at(s.pos, "'bivector' needs the standard frame");
        std::size_t n = m.ring->nvars();
        D.bivector = rd.matrix(Reader::value(s), n, n);
        D.dirac.generators = graph_dirac(D.ambient.data, *D.bivector).generators;
      });
      auto prefix = [&](const Statement& s) {
        rd.need_ring(s);
        for (std::size_t i = 0; i < s.words.size(); ++i)
          if (i >= m.ring->nvars() || s.words[i].text != m.ring->vars[i])
            fail_at(s.words[i].pos, "support variables must be a prefix of the ring variables",
                    {i < m.ring->nvars() ? m.ring->vars[i] : std::string("end of line")});
        return s.words.size();
      };
      h.on("support", [&](const Statement& s) { D.dirac.support = prefix(s); });
      h.on("coisotropic", [&](const Statement& s) {
        if (!D.bivector) fail_at(s.pos, "'coisotropic' needs a bivector", {"bivector"});
        D.coisotropic = prefix(s);
      });
      h.run(d.statements);
      if (!m.ring) fail_at(Pos{1, 1}, "missing 'ring' statement", {"ring"});
      if (!started) D.ambient.data = make_courant(m.ring);
      m.dirac = std::move(D);
      break;
    }
    case Kind::Retract: {
      no_blocks(d);
      if (!source) fail_at(Pos{1, 1}, "retract documents need the source algebroid document");
      DeformationRetract R;
      R.target.ring = source->ring;
      R.p.assign(source->rank(), LElem());
      R.h.assign(source->rank(), source->zero());
      std::vector<std::pair<const Statement*, int>> pending_p;
      h.on("target", [&](const Statement& s) {
        arity(s, 2, 2);
        if (R.target.index_of(s.words[0].text) >= 0) fail_at(s.words[0].pos, "duplicate basis element");
        R.target.add_basis(s.words[0].text, word_int(s.words[1]));
        R.i.push_back(source->zero());
      });
      h.on("target_differential", [&](const Statement& s) {
        arity(s, 1, 1);
        R.target.differential[resolve(s.words[0], R.target.names, "target basis element")] =
            rd.element(Reader::value(s), R.target.names);
      });
      h.on("inclusion", [&](const Statement& s) {
        arity(s, 1, 1);
        R.i[resolve(s.words[0], R.target.names, "target basis element")] = rd.element(Reader::value(s), source->names);
      });
      h.on("projection", [&](const Statement& s) {
        arity(s, 1, 1);
        pending_p.push_back({&s, resolve(s.words[0], source->names, "source basis element")});
      });
      h.on("homotopy", [&](const Statement& s) {
        arity(s, 1, 1);
        R.h[resolve(s.words[0], source->names, "source basis element")] = rd.element(Reader::value(s), source->names);
      });
      h.on("ring", [&](const Statement& s) {
        std::vector<std::string> vars;
        for (auto& w : s.words) vars.push_back(w.text);
        if (vars != source->ring->vars) fail_at(s.pos, "ring differs from the source algebroid");
        m.ring = source->ring;
        rd.ring = m.ring;
      });
      h.run(d.statements);
      if (!m.ring) fail_at(Pos{1, 1}, "missing 'ring' statement", {"ring"});
      for (auto& pe : R.p) pe = R.target.zero();
      for (auto& [s, a] : pending_p) R.p[a] = rd.element(Reader::value(*s), R.target.names);
      m.retract = std::move(R);
      break;
    }
    case Kind::Morphism: {
      MorphismDoc M;
      auto side = [&](const char* name) -> CourantDoc {
        for (auto& b : d.blocks)
          if (b.name == name) {
            if (!m.ring) fail_at(b.pos, "block before 'ring'", {"ring"});
            for (auto& s : b.body.statements)
              if (s.keyword == "ring" || s.keyword == "kind") fail_at(s.pos, "'" + s.keyword + "' inside a block");
            return load_courant_body(b.body, rd);
          }
        fail_at(Pos{1, 1}, std::string("missing block '") + name + "'", {std::string("begin ") + name});
      };
      for (auto& b : d.blocks)
        if (b.name != "source" && b.name != "target") fail_at(b.pos, "unknown block '" + b.name + "'", {"source", "target"});
      std::vector<const Statement*> maps, forms;
      h.on("map", [&](const Statement& s) { maps.push_back(&s); });
      h.on("form", [&](const Statement& s) { forms.push_back(&s); });
      h.run(d.statements);
      if (!m.ring) fail_at(Pos{1, 1}, "missing 'ring' statement", {"ring"});
      M.source = side("source");
      M.target = side("target");
      const std::size_t rs = M.source.data.rank(), rt = M.target.data.rank();
      M.g = rs == rt ? identity_matrix(m.ring, rs) : zero_matrix(m.ring, rt, rs);
      M.H = BaseForm(m.ring, 3);
      for (auto* s : maps) {
        arity(*s, 1, 1);
        const std::string& n = s->words[0].text;
        PolyMatrix g = rd.matrix(Reader::value(*s), rt, rs);
        if (n == "g")
          M.g = g;
        else if (n == "g2")
          M.g2 = g;
        else
          fail_at(s->words[0].pos, "unknown map", {"g", "g2"});
      }
      for (auto* s : forms) {
        arity(*s, 1, 1);
        const std::string& n = s->words[0].text;
        if (n == "H")
          M.H = rd.form(Reader::value(*s), 3);
        else if (n == "H2")
          M.H2 = rd.form(Reader::value(*s), 3);
        else if (n == "B")
          M.B = rd.form(Reader::value(*s), 2);
        else
          fail_at(s->words[0].pos, "unknown form", {"H", "H2", "B"});
      }
      if (M.g2 || M.H2 || M.B) {
        if (!M.g2) M.g2 = M.g;
        if (!M.H2) M.H2 = M.H;
        if (!M.B) M.B = BaseForm(m.ring, 2);
      }
      m.morphism = std::move(M);
      break;
    }
    case Kind::ClosedForm: {
      no_blocks(d);
      ClosedFormDoc C;
      bool started = false;
      linfty_handlers(h, C.algebroid, rd, started);
      const Statement* cocycle = nullptr;
      h.on("pdegree", [&](const Statement& s) {
        arity(s, 1, 1);
        C.p = word_int(s.words[0]);
        if (C.p < 1) fail_at(s.words[0].pos, "form degree must be positive");
      });
      h.on("cocycle", [&](const Statement& s) {
        arity(s, 0, 0);
        if (cocycle) fail_at(s.pos, "cocycle declared twice");
        Reader::value(s);
        cocycle = &s;
      });
      h.run(d.statements);
      if (!m.ring) fail_at(Pos{1, 1}, "missing 'ring' statement", {"ring"});
      if (!started) C.algebroid = make_algebroid(m.ring);
      C.forms = std::make_shared<FormsAlgebra>(forms_algebra(C.algebroid));
      C.cocycle = C.forms->zero();
      if (cocycle) {
        const Value& v = *cocycle->value;
        Reader::kind_of(v, Value::Kind::Map, "a map from generator monomials to polynomials");
        const GeneratorTable& T = *C.forms->table;
        for (std::size_t e = 0; e < v.entries.size(); ++e) {
          auto& [key, val] = v.entries[e];
          GCAElement term = C.forms->scalar(rd.poly(val));
          if (!(key.size() == 1 && key[0] == "1"))
            for (auto& g : key) {
              int i = T.index_of(g);
              if (i < 0) {
                std::vector<std::string> exp;
                for (auto& gen : T.gens()) exp.push_back(gen.name);
                fail_at(v.key_pos[e], "unknown generator '" + g + "'", exp);
              }
              term = term * C.forms->gen(i);
            }
          C.cocycle += term;
        }
      }
      m.closed = std::move(C);
      break;
    }
  }
  return m;
}

inline Model load_text(const std::string& text, const LinftyAlgebroid* source = nullptr) { return load(parse(text), source); }

// ---------------------------------------------------------------------------
// Printers: models back to canonical documents

namespace detail {

inline Statement stmt(std::string kw, std::vector<std::string> words = {}) {
  Statement s;
  s.keyword = std::move(kw);
  for (auto& w : words) s.words.push_back(Word{w, false, {}});
  return s;
}

inline Value str_value(const std::string& t) {
  Value v;
  v.kind = Value::Kind::String;
  v.text = t;
  return v;
}

inline Value poly_value(const Poly& p) { return str_value(p.is_zero() ? "0" : p.str()); }

inline Value array_value(std::vector<Value> items) {
  Value v;
  v.kind = Value::Kind::Array;
  v.items = std::move(items);
  return v;
}

inline Value map_value() {
  Value v;
  v.kind = Value::Kind::Map;
  return v;
}

inline void put(Value& m, std::vector<std::string> key, Value v) {
  m.entries.emplace_back(std::move(key), std::move(v));
  m.key_pos.push_back({});
}

inline Value vf_value(const VectorField& f) {
  std::vector<Value> items;
  for (auto& c : f.comp) items.push_back(poly_value(c));
  return array_value(items);
}

inline Value matrix_value(const PolyMatrix& m) {
  std::vector<Value> rows;
  for (auto& r : m) {
    std::vector<Value> row;
    for (auto& e : r) row.push_back(poly_value(e));
    rows.push_back(array_value(row));
  }
  return array_value(rows);
}

inline Value elem_value(const LElem& x, const std::vector<std::string>& names) {
  Value v = map_value();
  for (std::size_t a = 0; a < x.size(); ++a)
    if (!x[a].is_zero()) put(v, {names[a]}, poly_value(x[a]));
  return v;
}

inline Value form_value(const BaseForm& w) {
  Value v = map_value();
  for (auto& [idx, f] : w.terms) {
    std::vector<std::string> key;
    for (int i : idx) key.push_back("d" + w.ring->vars[i]);
    if (key.empty()) key.push_back("1");
    put(v, key, poly_value(f));
  }
  return v;
}

/// Monomial keys list generator names in table order, repeating powers.
inline Value gca_value(const GCAElement& w) {
  Value v = map_value();
  const GeneratorTable& T = *w.table();
  for (auto& [m, p] : w.terms()) {
    std::vector<std::string> key;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (int k = 0; k < m[i]; ++k) key.push_back(T.gen(i).name);
    if (key.empty()) key.push_back("1");
    put(v, key, poly_value(p));
  }
  return v;
}

inline Statement with_value(Statement s, Value v) {
  s.value = std::move(v);
  return s;
}

inline Statement with_tuple(Statement s, const Tuple& t, const std::vector<std::string>& names) {
  std::vector<Word> ws;
  for (int a : t) ws.push_back(Word{names[a], false, {}});
  s.tuple = ws;
  return s;
}

inline void header(Document& d, Kind k, const RingPtr& r, const std::string& label) {
  d.statements.push_back(stmt("kind", {kind_name(k)}));
  if (!label.empty()) {
    Statement s = stmt("label");
    s.words.push_back(Word{label, true, {}});
    d.statements.push_back(s);
  }
  d.statements.push_back(stmt("ring", r->vars));
}

inline void linfty_body(Document& d, const LinftyAlgebroid& L) {
  for (std::size_t a = 0; a < L.rank(); ++a) d.statements.push_back(stmt("basis", {L.names[a], std::to_string(L.degrees[a])}));
  for (std::size_t a = 0; a < L.rank(); ++a)
    if (!L.anchor[a].is_zero()) d.statements.push_back(with_value(stmt("anchor", {L.names[a]}), vf_value(L.anchor[a])));
  for (std::size_t a = 0; a < L.rank(); ++a)
    if (!is_zero(L.differential[a]))
      d.statements.push_back(with_value(stmt("differential", {L.names[a]}), elem_value(L.differential[a], L.names)));
  for (auto& [t, v] : L.brackets)
    d.statements.push_back(with_value(with_tuple(stmt("bracket", {"ordered"}), t, L.names), elem_value(v, L.names)));
  for (auto& [k, f] : L.symbol_override)
    d.statements.push_back(with_value(with_tuple(stmt("symbol"), {k.first, k.second}, L.names), vf_value(f)));
}

inline void courant_body(Document& d, const CourantData& E) {
  for (std::size_t a = 0; a < E.rank(); ++a)
    d.statements.push_back(with_value(stmt("element", {E.names[a]}), vf_value(E.anchor[a])));
  d.statements.push_back(with_value(stmt("pairing"), matrix_value(E.gram)));
  for (auto& [k, v] : E.brackets)
    if (!is_zero(v))
      d.statements.push_back(with_value(with_tuple(stmt("bracket"), {k.first, k.second}, E.names), elem_value(v, E.names)));
  for (auto& [k, f] : E.symbol_override)
    d.statements.push_back(with_value(with_tuple(stmt("symbol"), {k.first, k.second}, E.names), vf_value(f)));
  if (!E.K.is_zero()) d.statements.push_back(with_value(stmt("form", {"K"}), form_value(E.K)));
}

}  // namespace detail

inline Document linfty_document(const LinftyAlgebroid& L, const std::string& label = {}) {
  Document d;
  detail::header(d, Kind::Linfty, L.ring, label);
  detail::linfty_body(d, L);
  return d;
}

inline Document courant_document(const CourantData& E, const std::optional<MetricConnection>& nabla = std::nullopt,
                                 const std::string& label = {}) {
  using namespace detail;
  Document d;
  header(d, Kind::Courant, E.ring, label);
  courant_body(d, E);
  if (nabla)
    for (std::size_t k = 0; k < E.ring->nvars(); ++k)
      if (!is_zero_matrix(nabla->gamma[k]))
        d.statements.push_back(with_value(stmt("connection", {E.ring->vars[k]}), matrix_value(nabla->gamma[k])));
  return d;
}

inline Document symplectic_document(const ShiftedSymplecticData& s, const std::string& label = {}) {
  using namespace detail;
  Document d;
  header(d, Kind::Symplectic, s.ring(), label);
  d.statements.insert(d.statements.begin() + 1, stmt("shift", {std::to_string(s.shift)}));
  const LinftyAlgebroid& L = s.algebroid;
  linfty_body(d, L);
  for (std::size_t a = 0; a < s.phi.size(); ++a)
    if (!s.phi[a].is_zero()) d.statements.push_back(with_value(with_tuple(stmt("form", {"phi"}), {int(a)}, L.names), form_value(s.phi[a])));
  for (auto& [k, w] : s.psi)
    if (k.first < k.second && !w.is_zero())
      d.statements.push_back(with_value(with_tuple(stmt("form", {"psi"}), {k.first, k.second}, L.names), form_value(w)));
  if (!is_zero_matrix(s.Q)) d.statements.push_back(with_value(stmt("pairing"), matrix_value(s.Q)));
  if (!s.K.is_zero()) d.statements.push_back(with_value(stmt("form", {"K"}), form_value(s.K)));
  if (!s.B.is_zero()) d.statements.push_back(with_value(stmt("form", {"B"}), form_value(s.B)));
  return d;
}

inline Document closedform_document(const LinftyAlgebroid& A, int p, const GCAElement& w, const std::string& label = {}) {
  using namespace detail;
  Document d;
  header(d, Kind::ClosedForm, A.ring, label);
  linfty_body(d, A);
  d.statements.push_back(stmt("pdegree", {std::to_string(p)}));
  d.statements.push_back(with_value(stmt("cocycle"), gca_value(w)));
  return d;
}

/// Canonical text of a document: parse then print.
inline std::string canonicalize(const std::string& text) { return print(parse(text)); }

}  // namespace gk::dsl
