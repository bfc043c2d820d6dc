#pragma once

#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradedkit/poly.hpp"

namespace gk::dsl {

struct Pos {
  int line = 1;
  int col = 1;
};

/// Lexical, syntactic or name-resolution error with its location.
struct ParseError : std::runtime_error {
  Pos pos;
  std::vector<std::string> expected;
  int document = 0;  // 1 when raised by the companion document
  ParseError(Pos p, const std::string& msg, std::vector<std::string> exp = {})
      : std::runtime_error(msg), pos(p), expected(std::move(exp)) {}
};

inline std::string format_error(const ParseError& e, const std::string& file) {
  std::string s = file + ":" + std::to_string(e.pos.line) + ":" + std::to_string(e.pos.col) + ": error: " + e.what();
  if (!e.expected.empty()) {
    s += "; expected one of:";
    for (auto& x : e.expected) s += " " + x;
  }
  return s;
}

/// Literal value: a quoted string, an array, or a map whose keys are words
/// joined by '^'.
struct Value {
  enum class Kind { String, Array, Map };
  Kind kind = Kind::String;
  Pos pos;
  std::string text;
  std::vector<Value> items;
  std::vector<std::pair<std::vector<std::string>, Value>> entries;
  std::vector<Pos> key_pos;  // not part of equality
};

inline bool operator==(const Value& a, const Value& b) {
  return a.kind == b.kind && a.text == b.text && a.items == b.items && a.entries == b.entries;
}

struct Word {
  std::string text;
  bool quoted = false;
  Pos pos;
};

inline bool operator==(const Word& a, const Word& b) { return a.text == b.text && a.quoted == b.quoted; }

/// keyword word* [ '(' name {',' name} ')' ] [ '=' value ]
struct Statement {
  Pos pos;
  std::string keyword;
  std::vector<Word> words;
  std::optional<std::vector<Word>> tuple;
  std::optional<Value> value;
};

inline bool operator==(const Statement& a, const Statement& b) {
  return a.keyword == b.keyword && a.words == b.words && a.tuple == b.tuple && a.value == b.value;
}

struct Block;

/// Top-level statements plus named blocks (begin NAME ... end).
struct Document {
  std::vector<Statement> statements;
  std::vector<Block> blocks;
};

struct Block {
  Pos pos;
  std::string name;
  Document body;
};

inline bool operator==(const Block& a, const Block& b);
inline bool operator==(const Document& a, const Document& b) {
  return a.statements == b.statements && a.blocks == b.blocks;
}
inline bool operator==(const Block& a, const Block& b) { return a.name == b.name && a.body == b.body; }

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Int, String, LParen, RParen, LBrack, RBrack, LBrace, RBrace, Comma, Colon, Equals, Caret, Newline, End };

inline const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::String: return "string";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrack: return "'['";
    case Tok::RBrack: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Equals: return "'='";
    case Tok::Caret: return "'^'";
    case Tok::Newline: return "end of line";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  Pos pos;
};

/// Newlines inside brackets are dropped so literals may span lines.
inline std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  Pos p;
  std::size_t i = 0;
  std::vector<Token> open;
  auto advance = [&](std::size_t k = 1) {
    for (std::size_t j = 0; j < k; ++j) {
      if (src[i] == '\n') {
        ++p.line;
        p.col = 1;
      } else {
        ++p.col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    Pos start = p;
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    if (c == '\n') {
      if (open.empty() && (out.empty() || out.back().kind != Tok::Newline)) out.push_back({Tok::Newline, "", start});
      advance();
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      advance();
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) s += src[i], advance();
      out.push_back({Tok::Ident, s, start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::string s(1, c);
      advance();
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) s += src[i], advance();
      out.push_back({Tok::Int, s, start});
      continue;
    }
    if (c == '"') {
      advance();
      std::string s;
      while (i < src.size() && src[i] != '"') {
        if (src[i] == '\n') throw ParseError(start, "unterminated string");
        s += src[i];
        advance();
      }
      if (i >= src.size()) throw ParseError(start, "unterminated string");
      advance();
      out.push_back({Tok::String, s, start});
      continue;
    }
    Tok k;
    switch (c) {
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBrack; break;
      case ']': k = Tok::RBrack; break;
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case ',': k = Tok::Comma; break;
      case ':': k = Tok::Colon; break;
      case '=': k = Tok::Equals; break;
      case '^': k = Tok::Caret; break;
      default: throw ParseError(start, std::string("unexpected character '") + c + "'");
    }
    if (k == Tok::LParen || k == Tok::LBrack || k == Tok::LBrace) open.push_back({k, std::string(1, c), start});
    if ((k == Tok::RParen || k == Tok::RBrack || k == Tok::RBrace) && !open.empty()) open.pop_back();
    out.push_back({k, std::string(1, c), start});
    advance();
  }
  if (!open.empty()) {
    const Token& o = open.back();
    const char* close = o.kind == Tok::LParen ? "')'" : o.kind == Tok::LBrack ? "']'" : "'}'";
    throw ParseError(o.pos, "unclosed '" + o.text + "'", {close});
  }
  if (!out.empty() && out.back().kind != Tok::Newline) out.push_back({Tok::Newline, "", p});
  out.push_back({Tok::End, "", p});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(lex(src)) {}

  Document document() {
    Document d = body(false);
    expect(Tok::End);
    return d;
  }

 private:
  std::vector<Token> toks_;
  std::size_t k_ = 0;

  const Token& peek() const { return toks_[k_]; }
  Token take() { return toks_[k_++]; }

  [[noreturn]] void fail(const std::vector<Tok>& want) const {
    std::vector<std::string> names;
    for (Tok t : want) names.push_back(tok_name(t));
    const Token& t = peek();
    std::string got = t.text.empty() ? tok_name(t.kind) : "'" + t.text + "'";
    throw ParseError(t.pos, "unexpected " + got, names);
  }

  Token expect(Tok t) {
    if (peek().kind != t) fail({t});
    return take();
  }

  Document body(bool in_block) {
    Document d;
    while (true) {
      const Token& t = peek();
      if (t.kind == Tok::Newline) {
        take();
        continue;
      }
      if (t.kind == Tok::End) {
        if (in_block) fail({Tok::Ident});
        return d;
      }
      if (t.kind != Tok::Ident) fail({Tok::Ident, Tok::Newline});
      if (t.text == "end") {
        if (!in_block) throw ParseError(t.pos, "'end' without 'begin'");
        take();
        expect(Tok::Newline);
        return d;
      }
      if (t.text == "begin") {
        Block b;
        b.pos = take().pos;
        b.name = expect(Tok::Ident).text;
        expect(Tok::Newline);
        b.body = body(true);
        d.blocks.push_back(std::move(b));
        continue;
      }
      d.statements.push_back(statement());
    }
  }

  Statement statement() {
    Statement s;
    Token kw = take();
    s.pos = kw.pos;
    s.keyword = kw.text;
    while (peek().kind == Tok::Ident || peek().kind == Tok::Int || peek().kind == Tok::String) {
      Token w = take();
      s.words.push_back(Word{w.text, w.kind == Tok::String, w.pos});
    }
    if (peek().kind == Tok::LParen) {
      take();
      std::vector<Word> t;
      Token n = expect(Tok::Ident);
      t.push_back(Word{n.text, false, n.pos});
      while (peek().kind == Tok::Comma) {
        take();
        n = expect(Tok::Ident);
        t.push_back(Word{n.text, false, n.pos});
      }
      expect(Tok::RParen);
      s.tuple = std::move(t);
    }
    if (peek().kind == Tok::Equals) {
      take();
      s.value = value();
    }
    if (peek().kind != Tok::Newline) {
      std::vector<Tok> want{Tok::Newline};
      if (!s.value) want.insert(want.begin(), {Tok::Equals, Tok::LParen});
      fail(want);
    }
    take();
    return s;
  }

  Value value() {
    Value v;
    const Token& t = peek();
    v.pos = t.pos;
    if (t.kind == Tok::String) {
      v.kind = Value::Kind::String;
      v.text = take().text;
      return v;
    }
    if (t.kind == Tok::LBrack) {
      take();
      v.kind = Value::Kind::Array;
      if (peek().kind != Tok::RBrack) {
        v.items.push_back(value());
        while (peek().kind == Tok::Comma) {
          take();
          v.items.push_back(value());
        }
      }
      if (peek().kind != Tok::RBrack) fail({Tok::Comma, Tok::RBrack});
      take();
      return v;
    }
    if (t.kind == Tok::LBrace) {
      take();
      v.kind = Value::Kind::Map;
      if (peek().kind != Tok::RBrace) {
        v.key_pos.push_back(peek().pos);
        v.entries.push_back(entry());
        while (peek().kind == Tok::Comma) {
          take();
          v.key_pos.push_back(peek().pos);
          v.entries.push_back(entry());
        }
      }
      if (peek().kind != Tok::RBrace) fail({Tok::Comma, Tok::RBrace});
      take();
      return v;
    }
    fail({Tok::String, Tok::LBrack, Tok::LBrace});
  }

  std::pair<std::vector<std::string>, Value> entry() {
    std::vector<std::string> key;
    if (peek().kind == Tok::Int) {
      Token t = take();
      if (t.text != "1") throw ParseError(t.pos, "numeric key must be 1");
      key.push_back("1");
    } else {
      key.push_back(expect(Tok::Ident).text);
      while (peek().kind == Tok::Caret) {
        take();
        key.push_back(expect(Tok::Ident).text);
      }
    }
    if (peek().kind != Tok::Colon) fail({Tok::Caret, Tok::Colon});
    take();
    return {key, value()};
  }
};

inline Document parse(const std::string& src) { return Parser(src).document(); }

// ---------------------------------------------------------------------------
// Printer

inline std::string print_value(const Value& v) {
  switch (v.kind) {
    case Value::Kind::String: return "\"" + v.text + "\"";
    case Value::Kind::Array: {
      std::string s = "[";
      for (std::size_t i = 0; i < v.items.size(); ++i) s += (i ? ", " : "") + print_value(v.items[i]);
      return s + "]";
    }
    case Value::Kind::Map: {
      std::string s = "{";
      for (std::size_t i = 0; i < v.entries.size(); ++i) {
        if (i) s += ", ";
        for (std::size_t j = 0; j < v.entries[i].first.size(); ++j) s += (j ? "^" : "") + v.entries[i].first[j];
        s += ": " + print_value(v.entries[i].second);
      }
      return s + "}";
    }
  }
  return "";
}

inline std::string print_statement(const Statement& s) {
  std::string out = s.keyword;
  for (auto& w : s.words) out += " " + (w.quoted ? "\"" + w.text + "\"" : w.text);
  if (s.tuple) {
    out += " (";
    for (std::size_t i = 0; i < s.tuple->size(); ++i) out += (i ? ", " : "") + (*s.tuple)[i].text;
    out += ")";
  }
  if (s.value) out += " = " + print_value(*s.value);
  return out;
}

inline std::string print(const Document& d, const std::string& indent = "") {
  std::string out;
  for (auto& s : d.statements) out += indent + print_statement(s) + "\n";
  for (auto& b : d.blocks) {
    out += indent + "begin " + b.name + "\n";
    out += print(b.body, indent + "  ");
    out += indent + "end\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Polynomial strings

/// Infix polynomial over the ring's variables: + - * ^, parentheses, integer
/// and a/b literals. Division is allowed by nonzero constants only. Errors
/// carry the position of the offending character, offset by `at`.
class PolyParser {
 public:
  PolyParser(const RingPtr& r, const std::string& s, Pos at) : r_(r), s_(s), at_(at) {}

  Poly parse() {
    Poly p = sum();
    skip();
    if (i_ < s_.size()) err("unexpected '" + std::string(1, s_[i_]) + "'", {"operator", "end of polynomial"});
    return p;
  }

 private:
  RingPtr r_;
  const std::string& s_;
  Pos at_;
  std::size_t i_ = 0;

  [[noreturn]] void err(const std::string& m, std::vector<std::string> exp = {}) const {
    throw ParseError(Pos{at_.line, at_.col + 1 + static_cast<int>(i_)}, m, std::move(exp));
  }
  void skip() {
    while (i_ < s_.size() && s_[i_] == ' ') ++i_;
  }
  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  Poly sum() {
    skip();
    Poly p(r_);
    bool neg = false;
    if (eat('-'))
      neg = true;
    else
      eat('+');
    Poly t = product();
    p = neg ? -t : t;
    while (true) {
      if (eat('+'))
        p += product();
      else if (eat('-'))
        p -= product();
      else
        return p;
    }
  }

  Poly product() {
    Poly p = power();
    while (true) {
      if (eat('*')) {
        p = p * power();
      } else if (eat('/')) {
        std::size_t at = i_;
        Poly q = power();
        if (!q.is_constant() || q.is_zero()) {
          i_ = at;
          err("division by a non-constant or zero");
        }
        p *= Rational(1) / q.constant_term();
      } else {
        return p;
      }
    }
  }

  Poly power() {
    Poly b = atom();
    if (eat('^')) {
      skip();
      std::size_t st = i_;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      if (st == i_) err("expected exponent", {"integer"});
      int e = std::stoi(s_.substr(st, i_ - st));
      Poly out = Poly::constant(r_, 1);
      for (int k = 0; k < e; ++k) out = out * b;
      return out;
    }
    return b;
  }

  Poly atom() {
    skip();
    if (i_ >= s_.size()) err("unexpected end of polynomial", {"number", "variable", "'('"});
    char c = s_[i_];
    if (c == '(') {
      ++i_;
      Poly p = sum();
      if (!eat(')')) err("unbalanced parenthesis", {"')'"});
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t st = i_;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      return Poly::constant(r_, Rational(s_.substr(st, i_ - st)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t st = i_;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
      std::string name = s_.substr(st, i_ - st);
      int k = r_->index_of(name);
      if (k < 0) {
        i_ = st;
        err("unknown variable '" + name + "'");
      }
      return Poly::variable(r_, k);
    }
    err("unexpected '" + std::string(1, c) + "'", {"number", "variable", "'('"});
  }
};

inline Poly parse_poly(const RingPtr& r, const std::string& s, Pos at = {}) { return PolyParser(r, s, at).parse(); }

}  // namespace gk::dsl
