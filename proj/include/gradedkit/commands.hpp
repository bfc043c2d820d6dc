#pragma once

#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gradedkit/document.hpp"
#include "gradedkit/report.hpp"

namespace gk {

/// Usage-level failure: wrong kind for a command or a missing companion file.
struct CommandError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string mode = "sampled";
  unsigned seed = 7;
  int samples = 8;
  bool roundtrip = false;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> c{"verify", "ce", "normalize", "convert", "dirac", "transfer"};
  return c;
}

namespace detail {

using dsl::Kind;
using dsl::Model;

inline std::vector<Point> sample_points(const Model& m, const Flags& f) {
  return default_sample_points(m.ring, f.seed, f.samples);
}

/// Lines present on only one side, prefixed with - or +.
inline std::string line_diff(const std::string& a, const std::string& b) {
  auto lines = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  };
  std::vector<std::string> la = lines(a), lb = lines(b);
  std::multiset<std::string> sa(la.begin(), la.end()), sb(lb.begin(), lb.end());
  std::string d;
  for (auto& l : la)
    if (!sb.count(l)) d += "- " + l + "\n";
  for (auto& l : lb)
    if (!sa.count(l)) d += "+ " + l + "\n";
  return d;
}

[[noreturn]] inline void mismatch(const std::string& cmd, const Model& m) {
  throw CommandError("command '" + cmd + "' does not apply to kind " + dsl::kind_name(m.kind));
}

inline Verdict dirac_checks(const dsl::DiracDoc& D, const std::vector<Point>& pts) {
  Verdict v = verify_dirac(D.ambient.data, D.dirac, pts);
  if (D.coisotropic) v.merge(check_coisotropic(*D.bivector, *D.coisotropic, pts));
  return v;
}

inline Verdict courant_checks(const dsl::CourantDoc& C) {
  Verdict v = verify_courant_axioms(C.data);
  if (C.connection) v.merge(verify_metric(C.data, *C.connection));
  return v;
}

inline Verdict symplectic_checks(const ShiftedSymplecticData& s, const Flags& f, const std::vector<Point>& pts) {
  if (s.shift == 0) return verify_zero_shifted(s.algebroid, s.B, pts);
  Verdict v = verify_closure_shift2(s);
  v.merge(verify_nondegenerate(s, f.mode == "strict" ? NondegMode::Strict : NondegMode::Sampled, pts));
  return v;
}

inline const LinftyAlgebroid& algebroid_of(const std::string& cmd, const Model& m) {
  if (m.linfty) return *m.linfty;
  if (m.symplectic) return m.symplectic->algebroid;
  if (m.closed) return m.closed->algebroid;
  mismatch(cmd, m);
}

inline std::string closed_str(const NormalizedClosedForm& n) {
  return "p " + std::to_string(n.p) + ", degree " + std::to_string(n.degree) + "\nbeta: " + (n.beta.is_zero() ? "0" : n.beta.str()) +
         "\nG: " + (n.G.is_zero() ? "0" : n.G.str()) + "\n";
}

/// Runs `f`, tagging parse errors with the document they came from.
template <class F>
auto tagged(int document, F f) {
  try {
    return f();
  } catch (dsl::ParseError& e) {
    e.document = document;
    throw;
  }
}

/// Splits a pair of documents into the algebroid and the retract, in either order.
inline std::pair<Model, Model> load_transfer_pair(const dsl::Document& a, const dsl::Document& b) {
  auto ka = dsl::detail::find_kind(a), kb = dsl::detail::find_kind(b);
  const dsl::Document* src = nullptr;
  const dsl::Document* rt = nullptr;
  if (ka == Kind::Linfty && kb == Kind::Retract) src = &a, rt = &b;
  if (kb == Kind::Linfty && ka == Kind::Retract) src = &b, rt = &a;
  if (!src) throw CommandError("transfer needs one linfty document and one retract document");
  Model M = tagged(src == &b, [&] { return dsl::load(*src); });
  Model R = tagged(rt == &b, [&] { return dsl::load(*rt, &*M.linfty); });
  return {std::move(M), std::move(R)};
}

}  // namespace detail

/// Runs one command on one or two parsed documents.
inline Report run_command(const std::string& cmd, const dsl::Document& doc, const dsl::Document* doc2, const Flags& f) {
  using namespace detail;
  if (f.mode != "strict" && f.mode != "sampled") throw CommandError("unknown mode '" + f.mode + "'");
  if (f.samples < 0) throw CommandError("sample count must be non-negative");
  Report r;
  r.command = cmd;
  r.mode = f.mode;
  r.seed = f.seed;
  r.samples = f.samples;

  const bool binary = cmd == "transfer" || (cmd == "verify" && dsl::detail::find_kind(doc) == Kind::Retract);
  if (binary && !doc2) throw CommandError("command '" + cmd + "' needs a companion document");
  if (!binary && doc2 && cmd != "dirac") throw CommandError("command '" + cmd + "' takes one document");

  if (binary) {
    auto [M, R] = load_transfer_pair(doc, *doc2);
    r.label = R.label.empty() ? M.label : R.label;
    r.kind = "retract";
    const LinftyAlgebroid& src = *M.linfty;
    Verdict rv = verify_retract(src, *R.retract);
    r.verdict.merge(rv);
    if (cmd == "verify" || !rv.pass()) return r;
    TransferResult t = transfer_structure(src, *R.retract);
    r.verdict.merge(verify_linfty(t.algebroid));
    Verdict mv = verify_morphism(t.inclusion, t.algebroid, src);
    for (auto& c : mv.checks) c.id = "transfer.inclusion." + c.id;
    r.verdict.merge(mv);
    if (!t.inclusion_complete) r.outputs.emplace_back("note", "inclusion extended to arity two only\n");
    r.outputs.emplace_back("transferred", dsl::print(dsl::linfty_document(t.algebroid, r.label)));
    return r;
  }

  Model m = dsl::load(doc);
  r.label = m.label;
  r.kind = dsl::kind_name(m.kind);
  const std::vector<Point> pts = sample_points(m, f);

  if (cmd == "verify") {
    switch (m.kind) {
      case Kind::Linfty: r.verdict = verify_linfty(*m.linfty); break;
      case Kind::Courant: r.verdict = courant_checks(*m.courant); break;
      case Kind::Symplectic: r.verdict = symplectic_checks(*m.symplectic, f, pts); break;
      case Kind::Dirac: r.verdict = dirac_checks(*m.dirac, pts); break;
      case Kind::Morphism: {
        const dsl::MorphismDoc& M = *m.morphism;
        if (M.B)
          r.verdict = verify_courant_2morphism(M.source.data, M.target.data, M.g, M.H, *M.g2, *M.H2, *M.B);
        else
          r.verdict = verify_courant_morphism(M.source.data, M.target.data, M.g, M.H);
        break;
      }
      case Kind::ClosedForm: r.verdict = verify_closed_form(*m.closed->forms, m.closed->p, m.closed->cocycle); break;
      case Kind::Retract: break;
    }
    return r;
  }

  if (cmd == "ce") {
    const LinftyAlgebroid& A = algebroid_of(cmd, m);
    CEAlgebra ce = ce_algebra(A);
    GradedDerivation D = build_ce_differential(A, ce);
    std::string table;
    for (std::size_t i = 0; i < A.ring->nvars(); ++i)
      table += "Q(" + A.ring->vars[i] + ") = " + (D.base_action[i].is_zero() ? "0" : D.base_action[i].str()) + "\n";
    for (std::size_t g = 0; g < ce.table->size(); ++g) {
      GCAElement val = D.value(g);
      table += "Q(" + ce.table->gen(g).name + ") = " + (val.is_zero() ? "0" : val.str()) + "\n";
    }
    SquareZeroResult sq = check_square_zero(D);
    r.verdict.add("ce.square-zero", "Q^2 = 0 on coordinates and generators", sq.pass, sq.generator,
                  sq.pass ? "" : sq.value.str());
    LinftyAlgebroid back = extract_brackets(D);
    bool same = structurally_equal(A, back);
    r.verdict.add("ce.roundtrip", "brackets recovered from Q agree with the input", same, same ? "" : "bracket table",
                  same ? "" : line_diff(dsl::print(dsl::linfty_document(A)), dsl::print(dsl::linfty_document(back))));
    r.outputs.emplace_back("generators", table);
    return r;
  }

  if (cmd == "normalize") {
    if (!m.closed) mismatch(cmd, m);
    const dsl::ClosedFormDoc& C = *m.closed;
    Verdict cv = verify_closed_form(*C.forms, C.p, C.cocycle);
    r.verdict.merge(cv);
    if (!cv.pass()) return r;
    NormalizedClosedForm n = normalize_closed_form(*C.forms, C.p, C.cocycle);
    NormalizedClosedForm t = twisted_differential(*C.forms, C.algebroid, n);
    bool closed = t.beta.is_zero() && t.G.is_zero();
    r.verdict.add("normalize.closed", "normalized form is closed for the twisted differential", closed,
                  closed ? "" : "delta_tw", closed ? "" : closed_str(t));
    if (closed) {
      NormalizedClosedForm again = normalize_closed_form(*C.forms, C.p, realize_closed_form(*C.forms, C.algebroid, n), n.degree);
      bool same = again == n;
      r.verdict.add("normalize.roundtrip", "p'i' = id on the normalized form", same, same ? "" : "p'i'",
                    same ? "" : closed_str(again));
    }
    r.outputs.emplace_back("normalized", closed_str(n));
    return r;
  }

  if (cmd == "convert") {
    if (m.courant) {
      const dsl::CourantDoc& C = *m.courant;
      Verdict pre = verify_courant_axioms(C.data);
      MetricConnection nabla = C.connection ? *C.connection : MetricConnection::trivial(m.ring, C.data.rank());
      pre.merge(verify_metric(C.data, nabla));
      r.verdict.merge(pre);
      if (!pre.pass()) return r;
      ShiftedSymplecticData s = courant_to_symplectic(C.data, nabla);
      r.verdict.merge(verify_closure_shift2(s));
      r.outputs.emplace_back("converted", dsl::print(dsl::symplectic_document(s, m.label)));
      if (f.roundtrip) {
        CourantWithConnection back = symplectic_to_courant(s);
        std::string diff = line_diff(dsl::print(dsl::courant_document(C.data, nabla)),
                                     dsl::print(dsl::courant_document(back.courant, back.connection)));
        bool same = same_courant(C.data, back.courant) && back.connection.gamma == nabla.gamma;
        r.verdict.add("convert.roundtrip", "symplectic_to_courant o courant_to_symplectic = id", same && diff.empty(),
                      same ? "document" : "courant data", diff);
        r.outputs.emplace_back("diff", diff);
      }
      return r;
    }
    if (m.symplectic) {
      const ShiftedSymplecticData& s = *m.symplectic;
      if (s.shift != 2) throw CommandError("convert needs a shift-2 structure");
      Verdict pre = verify_closure_shift2(s);
      r.verdict.merge(pre);
      if (!pre.pass()) return r;
      CourantWithConnection E = symplectic_to_courant(s);
      r.verdict.merge(verify_courant_axioms(E.courant));
      r.outputs.emplace_back("converted", dsl::print(dsl::courant_document(E.courant, E.connection, m.label)));
      if (f.roundtrip) {
        ShiftedSymplecticData back = courant_to_symplectic(E.courant, E.connection);
        std::string diff =
            line_diff(dsl::print(dsl::symplectic_document(s)), dsl::print(dsl::symplectic_document(back)));
        bool same = same_symplectic(s, back);
        r.verdict.add("convert.roundtrip", "courant_to_symplectic o symplectic_to_courant = id", same && diff.empty(),
                      same ? "document" : "symplectic data", diff);
        r.outputs.emplace_back("diff", diff);
      }
      return r;
    }
    mismatch(cmd, m);
  }

  if (cmd == "dirac") {
    if (!m.dirac) mismatch(cmd, m);
    if (!doc2) {
      r.verdict = dirac_checks(*m.dirac, pts);
      return r;
    }
    Model m2 = tagged(1, [&] { return dsl::load(*doc2); });
    if (!m2.dirac) mismatch(cmd, m2);
    if (m2.ring->vars != m.ring->vars) throw CommandError("tensor product needs both documents over the same ring");
    // Both pairs are expressed over the first document's ring.
    auto pair_of = [&](const Model& x) {
      if (!x.dirac->ambient.twist) throw CommandError("tensor product needs standard (twisted) ambients");
      ExactDiracPair p;
      p.H = BaseForm(m.ring, 3);
      for (auto& [idx, c] : x.dirac->ambient.twist->terms) p.H.add(idx, c.lift_to(m.ring));
      for (auto& g : x.dirac->dirac.generators) {
        LElem h;
        for (auto& e : g) h.push_back(e.lift_to(m.ring));
        p.F.generators.push_back(h);
      }
      p.F.support = x.dirac->dirac.support;
      return p;
    };
    ExactDiracPair a = pair_of(m), b = pair_of(m2);
    auto side = [&](const char* tag, const ExactDiracPair& p) {
      Verdict v = verify_dirac(p.courant(m.ring), p.F, pts);
      for (auto& c : v.checks) c.id = tag + c.id;
      r.verdict.merge(v);
    };
    side("left.", a);
    side("right.", b);
    if (!r.pass()) return r;
    try {
      ExactDiracPair t = tensor_dirac(m.ring, a, b, pts);
      r.verdict.add("tensor.transverse", "anchors are transversal at the sample points", true);
      Verdict tv = verify_dirac(t.courant(m.ring), t.F, pts);
      for (auto& c : tv.checks) c.id = "tensor." + c.id;
      r.verdict.merge(tv);
      dsl::Document out;
      dsl::detail::header(out, Kind::Dirac, m.ring, m.label + " x " + m2.label);
      out.statements.push_back(dsl::detail::stmt("standard"));
      if (!t.H.is_zero()) out.statements.push_back(dsl::detail::with_value(dsl::detail::stmt("twist"), dsl::detail::form_value(t.H)));
      CourantData E = t.courant(m.ring);
      for (auto& g : t.F.generators)
        out.statements.push_back(dsl::detail::with_value(dsl::detail::stmt("generator"), dsl::detail::elem_value(g, E.names)));
      r.outputs.emplace_back("tensor", dsl::print(out));
    } catch (const std::invalid_argument& e) {
      r.verdict.add("tensor.transverse", "anchors are transversal at the sample points", false, "sample points", e.what());
    }
    return r;
  }

  throw CommandError("unknown command '" + cmd + "'");
}

inline Report run_command_text(const std::string& cmd, const std::string& text, const std::string* text2, const Flags& f) {
  dsl::Document d = dsl::parse(text);
  if (!text2) return run_command(cmd, d, nullptr, f);
  dsl::Document d2 = dsl::parse(*text2);
  return run_command(cmd, d, &d2, f);
}

}  // namespace gk
