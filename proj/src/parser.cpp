#include <algorithm>
#include <optional>

#include "idrt/frontend.hpp"

namespace idrt {

ParseError::ParseError(const std::string& msg, SourcePos pos)
    : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + msg),
      pos_(pos),
      detail_(msg) {}

namespace {

enum class Tok { Ident, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
  SourcePos end;
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '\''; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  SourcePos pos;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[pos.offset] == '\n') {
        ++pos.line;
        pos.col = 1;
      } else if ((static_cast<unsigned char>(src[pos.offset]) & 0xC0) != 0x80) {
        ++pos.col;
      }
      ++pos.offset;
    }
  };
  auto starts = [&](std::string_view s) { return src.substr(pos.offset, s.size()) == s; };
  while (pos.offset < src.size()) {
    unsigned char c = static_cast<unsigned char>(src[pos.offset]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (starts("--")) {
      while (pos.offset < src.size() && src[pos.offset] != '\n') advance(1);
      continue;
    }
    Token t;
    t.pos = pos;
    if (ident_start(c)) {
      std::size_t n = 0;
      while (pos.offset + n < src.size() && ident_char(static_cast<unsigned char>(src[pos.offset + n])))
        ++n;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(pos.offset, n));
      advance(n);
    } else if (starts("|-")) {
      t.kind = Tok::Punct;
      t.text = "|-";
      advance(2);
    } else if (starts("⊢")) {
      t.kind = Tok::Punct;
      t.text = "|-";
      advance(3);
    } else if (starts("⟨")) {
      t.kind = Tok::Punct;
      t.text = "<";
      advance(3);
    } else if (starts("⟩")) {
      t.kind = Tok::Punct;
      t.text = ">";
      advance(3);
    } else if (std::string_view("()[]<>,:=.;{}@").find(static_cast<char>(c)) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, static_cast<char>(c));
      advance(1);
    } else {
      throw ParseError(std::string("unexpected character '") + static_cast<char>(c) + "'", pos);
    }
    t.end = pos;
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.pos = pos;
  end.end = pos;
  out.push_back(end);
  return out;
}

bool reserved(const std::string& s) { return s == "Type" || s == "El" || s == "RType"; }

struct Level {
  Name name;  // empty: cannot be referenced
  std::vector<Label> aliases;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_punct(const char* p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool is_ident(std::size_t k = 0) const { return peek(k).kind == Tok::Ident; }
  bool is_word(const char* w, std::size_t k = 0) const { return is_ident(k) && peek(k).text == w; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", got " + got, t.pos);
  }

  const Token& expect(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'");
    return toks_[i_++];
  }

  std::string ident(const char* what) {
    if (!is_ident()) fail(std::string("expected ") + what);
    return toks_[i_++].text;
  }

  void expect_end() {
    if (!at_end()) fail("unexpected trailing input");
  }

  std::size_t mark() const { return i_; }
  void reset(std::size_t m) { i_ = m; }
  SourcePos last_end() const { return i_ > 0 ? toks_[i_ - 1].end : peek().pos; }

  // ---- terms ----

  Term term() {
    Term t = atom();
    for (;;) {
      if (is_punct("(")) {
        ++i_;
        Term a = term();
        expect(")");
        t = app(t, a);
      } else if (is_punct(".")) {
        ++i_;
        t = sel(t, Label(ident("field label")));
      } else {
        return t;
      }
    }
  }

  Term atom() {
    if (is_ident()) {
      const Token& tok = peek();
      if (reserved(tok.text)) fail("expected a term");
      ++i_;
      return resolve(tok);
    }
    if (is_punct("(")) {
      ++i_;
      Term t = term();
      expect(")");
      return t;
    }
    if (is_punct("[")) {
      ++i_;
      if (is_ident() && is_punct(":", 1)) {
        std::string x = ident("binder");
        expect(":");
        Kind dom = kind();
        expect("]");
        scope_.push_back({x == "_" ? Name() : x, {}});
        Term body = term();
        scope_.pop_back();
        return lam(x, dom, body);
      }
      Term r = term();
      expect("]");
      return restr(r);
    }
    if (is_punct("<")) return record();
    fail("expected a term");
  }

  Term resolve(const Token& tok) {
    const std::string& x = tok.text;
    for (std::size_t k = scope_.size(); k-- > 0;) {
      auto depth = static_cast<std::uint32_t>(scope_.size() - 1 - k);
      if (!scope_[k].name.empty() && scope_[k].name == x) return bvar(depth);
      for (const auto& l : scope_[k].aliases) {
        if (l.name() == x) return sel(bvar(depth), l);
      }
    }
    if (x == "_") throw ParseError("the anonymous binder '_' cannot be referenced", tok.pos);
    return var(x);
  }

  Term record() {
    expect("<");
    if (is_punct(">")) {
      ++i_;
      return empty_rec();
    }
    if (is_ident() && is_punct(":", 1)) return record_type_sugar();
    if (is_ident() && is_punct("=", 1)) return record_sugar();
    Term r = term();
    expect(",");
    Label l(ident("field label"));
    if (is_punct(":")) {
      ++i_;
      Term fam = term();
      expect(">");
      return rec_type(r, l, fam);
    }
    if (is_punct("=")) {
      ++i_;
      Term a = term();
      Term fam = hole();
      if (is_punct(":")) {
        ++i_;
        fam = term();
      }
      expect(">");
      return rec(r, l, a, fam);
    }
    fail("expected ':' or '=' after field label");
  }

  Term record_type_sugar() {
    std::vector<Label> labels;
    std::vector<SourcePos> positions;
    std::vector<Term> bodies;
    Term acc = empty_rec();
    std::vector<Term> prefixes;
    for (;;) {
      positions.push_back(peek().pos);
      Label l(ident("field label"));
      expect(":");
      scope_.push_back({Name(), labels});
      Term body = term();
      scope_.pop_back();
      labels.push_back(l);
      bodies.push_back(body);
      if (is_punct(",")) {
        ++i_;
        continue;
      }
      expect(">");
      break;
    }
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      for (std::size_t j = i; j < labels.size(); ++j) {
        if (occurs_free(bodies[i], labels[j].name())) {
          throw ParseError("label '" + labels[j].name() + "' referenced before it is introduced",
                           positions[i]);
        }
      }
      std::string hint = occurs_bound(bodies[i], 0) ? "x" : "_";
      acc = rec_type(acc, labels[i], lam(hint, el(acc), bodies[i]));
    }
    return acc;
  }

  Term record_sugar() {
    Term acc = empty_rec();
    for (;;) {
      Label l(ident("field label"));
      expect("=");
      Term a = term();
      acc = rec(acc, l, a, hole());
      if (is_punct(",")) {
        ++i_;
        continue;
      }
      expect(">");
      return acc;
    }
  }

  // ---- kinds ----

  Kind kind() {
    if (is_word("Type")) {
      ++i_;
      return type_kind();
    }
    if (is_word("RType")) {
      ++i_;
      if (!is_punct("[")) return rtype();
      ++i_;
      LabelSet ls;
      if (!is_punct("]")) {
        for (;;) {
          ls.insert(Label(ident("label")));
          if (is_punct(",")) {
            ++i_;
            continue;
          }
          break;
        }
      }
      expect("]");
      return rtype(std::move(ls));
    }
    if (is_word("El")) {
      ++i_;
      expect("(");
      Term t = term();
      expect(")");
      return el(t);
    }
    if (is_punct("(")) {
      ++i_;
      if (is_ident() && is_punct(":", 1)) {
        std::string x = ident("binder");
        expect(":");
        Kind dom = kind();
        expect(")");
        scope_.push_back({x == "_" ? Name() : x, {}});
        Kind cod = kind();
        scope_.pop_back();
        return prod(x, dom, cod);
      }
      Kind dom = kind();
      expect(")");
      scope_.push_back({Name(), {}});
      Kind cod = kind();
      scope_.pop_back();
      return prod("_", dom, cod);
    }
    return el(term());
  }

  // ---- contexts and judgements ----

  Context context() {
    Context g;
    if (is_punct("(") && is_punct(")", 1)) {
      i_ += 2;
      return g;
    }
    if (at_end() || is_word("valid") || is_punct("|-")) return g;
    for (;;) {
      std::string x = ident("variable");
      expect(":");
      g.push(x, kind());
      if (is_punct(",")) {
        ++i_;
        continue;
      }
      return g;
    }
  }

  Judgement judgement() {
    Context g = context();
    if (is_word("valid")) {
      ++i_;
      return Judgement::ctx_valid(std::move(g));
    }
    expect("|-");
    std::size_t start = mark();
    try {
      Kind k = kind();
      if (is_word("kind")) {
        ++i_;
        return Judgement::kind_wf(std::move(g), k);
      }
      if (is_punct("=")) {
        ++i_;
        Kind k2 = kind();
        if (is_punct("}") || at_end()) return Judgement::kind_eq(std::move(g), k, k2);
      }
    } catch (const ParseError&) {
    }
    reset(start);
    Term t = term();
    if (is_punct(":")) {
      ++i_;
      return Judgement::has_kind(std::move(g), t, kind());
    }
    expect("=");
    Term t2 = term();
    expect(":");
    return Judgement::term_eq(std::move(g), t, t2, kind());
  }

  // ---- files ----

  SourceFile file() {
    SourceFile f;
    while (!at_end()) {
      Directive d;
      d.span.begin = peek().pos;
      if (is_ident() && is_punct(":", 1)) {
        d.what = DirectiveKind::Declare;
        d.name = ident("variable");
        if (reserved(d.name)) fail("reserved word cannot be declared");
        expect(":");
        d.classifier = kind();
      } else if (is_word("check")) {
        ++i_;
        d.what = DirectiveKind::Check;
        d.lhs = term();
        expect(":");
        d.classifier = kind();
      } else if (is_word("eq")) {
        ++i_;
        d.what = DirectiveKind::Eq;
        d.lhs = term();
        expect("=");
        d.rhs = term();
        expect(":");
        d.classifier = kind();
      } else if (is_word("normalize")) {
        ++i_;
        d.what = DirectiveKind::Normalize;
        d.lhs = term();
      } else {
        fail("expected a declaration or a check, eq or normalize directive");
      }
      expect(";");
      d.span.end = last_end();
      f.directives.push_back(std::move(d));
    }
    return f;
  }

  // ---- derivation scripts ----

  DerivPtr deriv(const std::map<std::string, DerivPtr>& defs) {
    if (is_punct("@")) {
      ++i_;
      const Token& tok = peek();
      std::string name = ident("definition name");
      auto it = defs.find(name);
      if (it == defs.end()) throw ParseError("undefined derivation '" + name + "'", tok.pos);
      return it->second;
    }
    expect("(");
    const Token& tok = peek();
    std::string rn = ident("rule name");
    auto rule = rule_from_name(rn);
    if (!rule) throw ParseError("unknown rule '" + rn + "'", tok.pos);
    expect("{");
    Judgement j = judgement();
    expect("}");
    std::vector<DerivPtr> premises;
    while (!is_punct(")")) premises.push_back(deriv(defs));
    expect(")");
    return make_deriv(*rule, std::move(j), std::move(premises));
  }

  Script script() {
    Script s;
    while (!at_end()) {
      SourcePos begin = peek().pos;
      if (is_word("def")) {
        ++i_;
        std::string name = ident("definition name");
        expect("=");
        DerivPtr d = deriv(s.defs);
        expect(";");
        s.defs[name] = d;
      } else if (is_word("derive") || is_word("refute")) {
        ScriptEntry e;
        e.expect = peek().text == "derive" ? Expectation::Valid : Expectation::Invalid;
        ++i_;
        e.deriv = deriv(s.defs);
        expect(";");
        e.span = {begin, last_end()};
        s.entries.push_back(std::move(e));
      } else {
        fail("expected def, derive or refute");
      }
    }
    return s;
  }

 private:
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::vector<Level> scope_;
};

}  // namespace

Term parse_term(std::string_view text) {
  Parser p(text);
  Term t = p.term();
  p.expect_end();
  return t;
}

Kind parse_kind(std::string_view text) {
  Parser p(text);
  Kind k = p.kind();
  p.expect_end();
  return k;
}

Context parse_context(std::string_view text) {
  Parser p(text);
  Context g = p.context();
  p.expect_end();
  return g;
}

Judgement parse_judgement(std::string_view text) {
  Parser p(text);
  Judgement j = p.judgement();
  p.expect_end();
  return j;
}

SourceFile parse_file(std::string_view text) {
  Parser p(text);
  return p.file();
}

Script parse_script(std::string_view text) {
  Parser p(text);
  return p.script();
}

Term desugar_record_type(const std::vector<std::pair<Label, Term>>& fields) {
  Term acc = empty_rec();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = i; j < fields.size(); ++j) {
      if (occurs_free(fields[i].second, fields[j].first.name())) {
        throw std::invalid_argument("label '" + fields[j].first.name() +
                                    "' referenced before it is introduced");
      }
    }
    Term body = shift(fields[i].second, 1);
    for (std::size_t j = 0; j < i; ++j) {
      const Label& l = fields[j].first;
      body = substitute(body, l.name(), sel(bvar(0), l));
    }
    std::string hint = occurs_bound(body, 0) ? "x" : "_";
    acc = rec_type(acc, fields[i].first, lam(hint, el(acc), body));
  }
  return acc;
}

Term fill_families(const Term& t, const Kind& expected_nf) {
  if (t.tag() != TermTag::RecExt) return t;
  if (expected_nf.tag() != KindTag::El || expected_nf.term().tag() != TermTag::RecTypeExt) {
    if (t.fam().tag() == TermTag::Hole)
      throw std::invalid_argument("cannot infer the family of field '" + t.label().name() +
                                  "': expected kind is not a record type");
    return t;
  }
  const Term& rt = expected_nf.term();
  if (rt.label() != t.label()) {
    if (t.fam().tag() == TermTag::Hole)
      throw std::invalid_argument("record field '" + t.label().name() +
                                  "' does not match expected field '" + rt.label().name() + "'");
    return t;
  }
  Term r = fill_families(t.rec(), el(rt.rec()));
  Term fam = t.fam().tag() == TermTag::Hole ? rt.fam() : t.fam();
  return rec(r, t.label(), t.val(), fam);
}

}  // namespace idrt
