#include "idrt/declarative.hpp"

#include <sstream>
#include <unordered_map>

#include "idrt/frontend.hpp"

namespace idrt {

std::string_view variant_name(SystemVariant v) { return v == SystemVariant::Full ? "full" : "minus"; }

std::optional<SystemVariant> variant_from_name(std::string_view s) {
  if (s == "full") return SystemVariant::Full;
  if (s == "minus") return SystemVariant::Minus;
  return std::nullopt;
}

std::string DeclDiagnostic::to_text() const {
  std::ostringstream out;
  out << "rule " << rule << " at node /";
  for (std::size_t i = 0; i < path.size(); ++i) out << (i ? "/" : "") << path[i];
  out << ": ";
  if (!slot.empty()) out << slot << ": ";
  out << message;
  return out.str();
}

namespace {

struct NodeError {
  std::string slot;
  std::string message;
};

[[noreturn]] void fail(std::string slot, std::string message) {
  throw NodeError{std::move(slot), std::move(message)};
}

const char* form_name(JudgementForm f) {
  switch (f) {
    case JudgementForm::CtxValid:
      return "G valid";
    case JudgementForm::KindWf:
      return "G |- K kind";
    case JudgementForm::KindEq:
      return "G |- K = K'";
    case JudgementForm::HasKind:
      return "G |- k : K";
    case JudgementForm::TermEq:
      return "G |- k = k' : K";
  }
  return "?";
}

class NodeCheck {
 public:
  explicit NodeCheck(const DeclDerivation& d) : d_(d), c_(d.conclusion) {}

  void run(SystemVariant v) {
    if (v == SystemVariant::Minus && is_substitution_rule(d_.rule)) {
      fail("rule", "rule excluded in IDRT⁻");
    }
    if (d_.premises.size() != rule_arity(d_.rule)) {
      fail("premises", "expected " + std::to_string(rule_arity(d_.rule)) + " premises, got " +
                           std::to_string(d_.premises.size()));
    }
    for (std::size_t i = 0; i < d_.premises.size(); ++i) {
      if (!d_.premises[i]) fail(slot(i), "missing premise");
    }
    dispatch();
  }

 private:
  const DeclDerivation& d_;
  const Judgement& c_;

  static std::string slot(std::size_t i) { return "premise " + std::to_string(i + 1); }
  const Judgement& p(std::size_t i) const { return d_.premises[i]->conclusion; }

  std::string show(const Term& t) const { return print_term(t, c_.ctx.domain()); }
  std::string show(const Kind& k) const { return print_kind(k, c_.ctx.domain()); }

  static void form(const Judgement& j, JudgementForm f, const std::string& where) {
    if (j.form != f) fail(where, std::string("expected a judgement of the form ") + form_name(f));
  }
  void concl(JudgementForm f) const { form(c_, f, "conclusion"); }
  void prem(std::size_t i, JudgementForm f) const { form(p(i), f, slot(i)); }

  void same_ctx(std::size_t i) const {
    if (!alpha_eq(p(i).ctx, c_.ctx)) fail(slot(i), "context differs from the conclusion's");
  }
  void term_is(const Term& got, const Term& want, const std::string& where, const char* what) const {
    if (!alpha_eq(got, want)) fail(where, std::string(what) + ": expected " + show(want) + ", got " + show(got));
  }
  void kind_is(const Kind& got, const Kind& want, const std::string& where, const char* what) const {
    if (!alpha_eq(got, want)) fail(where, std::string(what) + ": expected " + show(want) + ", got " + show(got));
  }
  static void tag_is(const Term& t, TermTag tag, const std::string& where, const char* shape) {
    if (t.tag() != tag) fail(where, std::string("expected ") + shape);
  }
  static void kind_tag_is(const Kind& k, KindTag tag, const std::string& where, const char* shape) {
    if (k.tag() != tag) fail(where, std::string("expected kind ") + shape);
  }

  // El(<R, l : A>) ; returns the record type term.
  static const Term& el_record(const Kind& k, const std::string& where) {
    if (k.tag() != KindTag::El || k.term().tag() != TermTag::RecTypeExt) {
      fail(where, "expected kind El(<R, l : A>)");
    }
    return k.term();
  }

  // (El(R))Type
  void family_kind(const Kind& k, const Term& r, const std::string& where) const {
    if (k.tag() != KindTag::Prod || k.cod().tag() != KindTag::Type) fail(where, "expected kind (R)Type");
    kind_is(k.dom(), el(r), where, "family domain");
  }

  // Premise i has context G, x:K with G the conclusion's context; returns x.
  Name binder_ctx(std::size_t i, const Kind& k) const {
    const Context& pc = p(i).ctx;
    if (pc.size() != c_.ctx.size() + 1 || !alpha_eq(pc.prefix(c_.ctx.size()), c_.ctx)) {
      fail(slot(i), "context must extend the conclusion's by one declaration");
    }
    const Decl& last = pc[pc.size() - 1];
    kind_is(last.kind, k, slot(i), "declared kind of the bound variable");
    if (c_.ctx.declares(last.name) || free_vars(c_.ctx).contains(last.name)) {
      fail(slot(i), "side condition x ∉ FV(G) violated for " + last.name);
    }
    return last.name;
  }

  void fresh_in(const Name& x, const Term& t) const {
    if (occurs_free(t, x)) fail("conclusion", "bound variable " + x + " occurs free in the conclusion");
  }
  void fresh_in(const Name& x, const Kind& k) const {
    if (occurs_free(k, x)) fail("conclusion", "bound variable " + x + " occurs free in the conclusion");
  }

  void no_label(const LabelSet& ls, const Label& l) const {
    if (ls.contains(l)) fail("side condition", "l ∉ L violated: label " + l.name() + " already present");
  }

  struct Split {
    Context gamma;
    Name x;
    Context rest;
  };

  // Premise 0 has context G, x:K, G' and premise 1 has context G and classifier K.
  Split subst_split() const {
    const Context& big = p(0).ctx;
    const Context& small = p(1).ctx;
    std::size_t n = small.size();
    if (big.size() <= n || !alpha_eq(big.prefix(n), small)) {
      fail(slot(0), "context must have the form G, x:K, G' with G the context of premise 2");
    }
    kind_is(big[n].kind, p(1).k1, slot(1), "classifier of the substituted term");
    std::vector<Decl> rest(big.entries().begin() + static_cast<std::ptrdiff_t>(n) + 1, big.entries().end());
    return {small, big[n].name, Context(std::move(rest))};
  }

  void subst_ctx(const Split& s, const Term& v) const {
    std::vector<Decl> ds = s.gamma.entries();
    Context rest = substitute(s.rest, s.x, v);
    for (const auto& d : rest.entries()) ds.push_back(d);
    if (!alpha_eq(c_.ctx, Context(std::move(ds)))) fail("conclusion", "context must be G, [k/x]G'");
  }

  void dispatch();
};

void NodeCheck::dispatch() {
  using F = JudgementForm;
  switch (d_.rule) {
    case DeclRule::CTX_EMPTY:
      concl(F::CtxValid);
      if (!c_.ctx.empty()) fail("conclusion", "expected the empty context");
      return;
    case DeclRule::CTX_EXT: {
      concl(F::CtxValid);
      prem(0, F::KindWf);
      if (c_.ctx.empty()) fail("conclusion", "expected a non-empty context");
      Context pre = c_.ctx.prefix(c_.ctx.size() - 1);
      const Decl& last = c_.ctx[c_.ctx.size() - 1];
      if (!alpha_eq(p(0).ctx, pre)) fail(slot(0), "context must be the conclusion's without its last entry");
      kind_is(p(0).k1, last.kind, slot(0), "declared kind");
      if (pre.declares(last.name) || free_vars(pre).contains(last.name)) {
        fail("side condition", "x ∉ FV(G) violated for " + last.name);
      }
      return;
    }
    case DeclRule::VAR: {
      concl(F::HasKind);
      prem(0, F::CtxValid);
      same_ctx(0);
      tag_is(c_.t1, TermTag::Free, "conclusion", "a variable");
      const Decl* decl = c_.ctx.find(c_.t1.name());
      if (!decl) fail("conclusion", "variable " + c_.t1.name() + " is not declared");
      kind_is(c_.k1, decl->kind, "conclusion", "kind of the variable");
      return;
    }
    case DeclRule::KEQ_REFL:
      concl(F::KindEq);
      prem(0, F::KindWf);
      same_ctx(0);
      kind_is(c_.k1, p(0).k1, "conclusion", "left kind");
      kind_is(c_.k2, p(0).k1, "conclusion", "right kind");
      return;
    case DeclRule::KEQ_SYM:
      concl(F::KindEq);
      prem(0, F::KindEq);
      same_ctx(0);
      kind_is(c_.k1, p(0).k2, "conclusion", "left kind");
      kind_is(c_.k2, p(0).k1, "conclusion", "right kind");
      return;
    case DeclRule::KEQ_TRANS:
      concl(F::KindEq);
      prem(0, F::KindEq);
      prem(1, F::KindEq);
      same_ctx(0);
      same_ctx(1);
      kind_is(p(1).k1, p(0).k2, slot(1), "middle kind");
      kind_is(c_.k1, p(0).k1, "conclusion", "left kind");
      kind_is(c_.k2, p(1).k2, "conclusion", "right kind");
      return;
    case DeclRule::EQ_REFL:
      concl(F::TermEq);
      prem(0, F::HasKind);
      same_ctx(0);
      term_is(c_.t1, p(0).t1, "conclusion", "left term");
      term_is(c_.t2, p(0).t1, "conclusion", "right term");
      kind_is(c_.k1, p(0).k1, "conclusion", "kind");
      return;
    case DeclRule::EQ_SYM:
      concl(F::TermEq);
      prem(0, F::TermEq);
      same_ctx(0);
      term_is(c_.t1, p(0).t2, "conclusion", "left term");
      term_is(c_.t2, p(0).t1, "conclusion", "right term");
      kind_is(c_.k1, p(0).k1, "conclusion", "kind");
      return;
    case DeclRule::EQ_TRANS:
      concl(F::TermEq);
      prem(0, F::TermEq);
      prem(1, F::TermEq);
      same_ctx(0);
      same_ctx(1);
      term_is(p(1).t1, p(0).t2, slot(1), "middle term");
      kind_is(p(1).k1, p(0).k1, slot(1), "kind");
      term_is(c_.t1, p(0).t1, "conclusion", "left term");
      term_is(c_.t2, p(1).t2, "conclusion", "right term");
      kind_is(c_.k1, p(0).k1, "conclusion", "kind");
      return;
    case DeclRule::CONV:
      concl(F::HasKind);
      prem(0, F::HasKind);
      prem(1, F::KindEq);
      same_ctx(0);
      same_ctx(1);
      kind_is(p(1).k1, p(0).k1, slot(1), "left kind");
      term_is(c_.t1, p(0).t1, "conclusion", "term");
      kind_is(c_.k1, p(1).k2, "conclusion", "kind");
      return;
    case DeclRule::CONV_EQ:
      concl(F::TermEq);
      prem(0, F::TermEq);
      prem(1, F::KindEq);
      same_ctx(0);
      same_ctx(1);
      kind_is(p(1).k1, p(0).k1, slot(1), "left kind");
      term_is(c_.t1, p(0).t1, "conclusion", "left term");
      term_is(c_.t2, p(0).t2, "conclusion", "right term");
      kind_is(c_.k1, p(1).k2, "conclusion", "kind");
      return;
    case DeclRule::SUBST_CTX: {
      concl(F::CtxValid);
      prem(0, F::CtxValid);
      prem(1, F::HasKind);
      Split s = subst_split();
      subst_ctx(s, p(1).t1);
      return;
    }
    case DeclRule::SUBST_KIND: {
      concl(F::KindWf);
      prem(0, F::KindWf);
      prem(1, F::HasKind);
      Split s = subst_split();
      const Term& v = p(1).t1;
      subst_ctx(s, v);
      kind_is(c_.k1, substitute(p(0).k1, s.x, v), "conclusion", "[k/x]K'");
      return;
    }
    case DeclRule::SUBST_KIND_EQARG: {
      concl(F::KindEq);
      prem(0, F::KindWf);
      prem(1, F::TermEq);
      Split s = subst_split();
      subst_ctx(s, p(1).t1);
      kind_is(c_.k1, substitute(p(0).k1, s.x, p(1).t1), "conclusion", "[k/x]K'");
      kind_is(c_.k2, substitute(p(0).k1, s.x, p(1).t2), "conclusion", "[k'/x]K'");
      return;
    }
    case DeclRule::SUBST_TERM: {
      concl(F::HasKind);
      prem(0, F::HasKind);
      prem(1, F::HasKind);
      Split s = subst_split();
      const Term& v = p(1).t1;
      subst_ctx(s, v);
      term_is(c_.t1, substitute(p(0).t1, s.x, v), "conclusion", "[k/x]k'");
      kind_is(c_.k1, substitute(p(0).k1, s.x, v), "conclusion", "[k/x]K'");
      return;
    }
    case DeclRule::SUBST_TERM_EQARG: {
      concl(F::TermEq);
      prem(0, F::HasKind);
      prem(1, F::TermEq);
      Split s = subst_split();
      subst_ctx(s, p(1).t1);
      term_is(c_.t1, substitute(p(0).t1, s.x, p(1).t1), "conclusion", "[k1/x]k'");
      term_is(c_.t2, substitute(p(0).t1, s.x, p(1).t2), "conclusion", "[k2/x]k'");
      kind_is(c_.k1, substitute(p(0).k1, s.x, p(1).t1), "conclusion", "[k1/x]K'");
      return;
    }
    case DeclRule::SUBST_KINDEQ: {
      concl(F::KindEq);
      prem(0, F::KindEq);
      prem(1, F::HasKind);
      Split s = subst_split();
      const Term& v = p(1).t1;
      subst_ctx(s, v);
      kind_is(c_.k1, substitute(p(0).k1, s.x, v), "conclusion", "[k/x]K'");
      kind_is(c_.k2, substitute(p(0).k2, s.x, v), "conclusion", "[k/x]K''");
      return;
    }
    case DeclRule::SUBST_TERMEQ: {
      concl(F::TermEq);
      prem(0, F::TermEq);
      prem(1, F::HasKind);
      Split s = subst_split();
      const Term& v = p(1).t1;
      subst_ctx(s, v);
      term_is(c_.t1, substitute(p(0).t1, s.x, v), "conclusion", "[k/x]k'");
      term_is(c_.t2, substitute(p(0).t2, s.x, v), "conclusion", "[k/x]k''");
      kind_is(c_.k1, substitute(p(0).k1, s.x, v), "conclusion", "[k/x]K'");
      return;
    }
    case DeclRule::TYPE_KIND:
      concl(F::KindWf);
      prem(0, F::CtxValid);
      same_ctx(0);
      kind_tag_is(c_.k1, KindTag::Type, "conclusion", "Type");
      return;
    case DeclRule::EL_KIND:
      concl(F::KindWf);
      prem(0, F::HasKind);
      same_ctx(0);
      kind_tag_is(p(0).k1, KindTag::Type, slot(0), "Type");
      kind_is(c_.k1, el(p(0).t1), "conclusion", "kind");
      return;
    case DeclRule::EL_EQ:
      concl(F::KindEq);
      prem(0, F::TermEq);
      same_ctx(0);
      kind_tag_is(p(0).k1, KindTag::Type, slot(0), "Type");
      kind_is(c_.k1, el(p(0).t1), "conclusion", "left kind");
      kind_is(c_.k2, el(p(0).t2), "conclusion", "right kind");
      return;
    case DeclRule::PI_KIND: {
      concl(F::KindWf);
      prem(0, F::KindWf);
      prem(1, F::KindWf);
      same_ctx(0);
      kind_tag_is(c_.k1, KindTag::Prod, "conclusion", "(x:K)K'");
      kind_is(c_.k1.dom(), p(0).k1, "conclusion", "domain");
      Name x = binder_ctx(1, p(0).k1);
      fresh_in(x, c_.k1);
      kind_is(instantiate(c_.k1.cod(), var(x)), p(1).k1, slot(1), "codomain");
      return;
    }
    case DeclRule::PI_EQ: {
      concl(F::KindEq);
      prem(0, F::KindEq);
      prem(1, F::KindEq);
      same_ctx(0);
      kind_tag_is(c_.k1, KindTag::Prod, "conclusion", "(x:K1)K1'");
      kind_tag_is(c_.k2, KindTag::Prod, "conclusion", "(x:K2)K2'");
      kind_is(c_.k1.dom(), p(0).k1, "conclusion", "left domain");
      kind_is(c_.k2.dom(), p(0).k2, "conclusion", "right domain");
      Name x = binder_ctx(1, p(0).k1);
      fresh_in(x, c_.k1);
      fresh_in(x, c_.k2);
      kind_is(instantiate(c_.k1.cod(), var(x)), p(1).k1, slot(1), "left codomain");
      kind_is(instantiate(c_.k2.cod(), var(x)), p(1).k2, slot(1), "right codomain");
      return;
    }
    case DeclRule::LAM: {
      concl(F::HasKind);
      prem(0, F::HasKind);
      tag_is(c_.t1, TermTag::Lam, "conclusion", "an abstraction");
      kind_tag_is(c_.k1, KindTag::Prod, "conclusion", "(x:K)K'");
      kind_is(c_.k1.dom(), c_.t1.dom(), "conclusion", "domain of the product");
      Name x = binder_ctx(0, c_.t1.dom());
      fresh_in(x, c_.t1);
      fresh_in(x, c_.k1);
      term_is(instantiate(c_.t1.body(), var(x)), p(0).t1, slot(0), "body");
      kind_is(instantiate(c_.k1.cod(), var(x)), p(0).k1, slot(0), "codomain");
      return;
    }
    case DeclRule::LAM_EQ: {
      concl(F::TermEq);
      prem(0, F::KindEq);
      prem(1, F::TermEq);
      same_ctx(0);
      tag_is(c_.t1, TermTag::Lam, "conclusion", "an abstraction on the left");
      tag_is(c_.t2, TermTag::Lam, "conclusion", "an abstraction on the right");
      kind_tag_is(c_.k1, KindTag::Prod, "conclusion", "(x:K1)K");
      kind_is(c_.t1.dom(), p(0).k1, "conclusion", "left domain");
      kind_is(c_.t2.dom(), p(0).k2, "conclusion", "right domain");
      kind_is(c_.k1.dom(), p(0).k1, "conclusion", "domain of the product");
      Name x = binder_ctx(1, p(0).k1);
      fresh_in(x, c_.t1);
      fresh_in(x, c_.t2);
      fresh_in(x, c_.k1);
      term_is(instantiate(c_.t1.body(), var(x)), p(1).t1, slot(1), "left body");
      term_is(instantiate(c_.t2.body(), var(x)), p(1).t2, slot(1), "right body");
      kind_is(instantiate(c_.k1.cod(), var(x)), p(1).k1, slot(1), "codomain");
      return;
    }
    case DeclRule::APP: {
      concl(F::HasKind);
      prem(0, F::HasKind);
      prem(1, F::HasKind);
      same_ctx(0);
      same_ctx(1);
      const Kind& fk = p(0).k1;
      kind_tag_is(fk, KindTag::Prod, slot(0), "(x:K)K'");
      kind_is(p(1).k1, fk.dom(), slot(1), "argument kind");
      tag_is(c_.t1, TermTag::App, "conclusion", "an application");
      term_is(c_.t1.fun(), p(0).t1, "conclusion", "function");
      term_is(c_.t1.arg(), p(1).t1, "conclusion", "argument");
      kind_is(c_.k1, instantiate(fk.cod(), p(1).t1), "conclusion", "[k/x]K'");
      return;
    }
    case DeclRule::APP_EQ: {
      concl(F::TermEq);
      prem(0, F::TermEq);
      prem(1, F::TermEq);
      same_ctx(0);
      same_ctx(1);
      const Kind& fk = p(0).k1;
      kind_tag_is(fk, KindTag::Prod, slot(0), "(x:K)K'");
      kind_is(p(1).k1, fk.dom(), slot(1), "argument kind");
      tag_is(c_.t1, TermTag::App, "conclusion", "an application on the left");
      tag_is(c_.t2, TermTag::App, "conclusion", "an application on the right");
      term_is(c_.t1.fun(), p(0).t1, "conclusion", "left function");
      term_is(c_.t2.fun(), p(0).t2, "conclusion", "right function");
      term_is(c_.t1.arg(), p(1).t1, "conclusion", "left argument");
      term_is(c_.t2.arg(), p(1).t2, "conclusion", "right argument");
      kind_is(c_.k1, instantiate(fk.cod(), p(1).t1), "conclusion", "[k1/x]K'");
      return;
    }
    case DeclRule::BETA: {
      concl(F::TermEq);
      prem(0, F::HasKind);
      prem(1, F::HasKind);
      same_ctx(1);
      tag_is(c_.t1, TermTag::App, "conclusion", "a beta-redex");
      tag_is(c_.t1.fun(), TermTag::Lam, "conclusion", "a beta-redex");
      const Term& abs = c_.t1.fun();
      Name x = binder_ctx(0, abs.dom());
      fresh_in(x, c_.t1);
      kind_is(p(1).k1, abs.dom(), slot(1), "argument kind");
      term_is(instantiate(abs.body(), var(x)), p(0).t1, slot(0), "body");
      term_is(c_.t1.arg(), p(1).t1, "conclusion", "argument");
      term_is(c_.t2, instantiate(abs.body(), p(1).t1), "conclusion", "[k/x]k'");
      kind_is(c_.k1, substitute(p(0).k1, x, p(1).t1), "conclusion", "[k/x]K'");
      return;
    }
    case DeclRule::ETA: {
      concl(F::TermEq);
      prem(0, F::HasKind);
      same_ctx(0);
      tag_is(c_.t1, TermTag::Lam, "conclusion", "an abstraction [x:K]f(x)");
      const Term& body = c_.t1.body();
      if (body.tag() != TermTag::App || body.arg().tag() != TermTag::Bound || body.arg().index() != 0) {
        fail("conclusion", "expected an abstraction [x:K]f(x)");
      }
      if (occurs_bound(body.fun(), 0)) fail("side condition", "x ∉ FV(f) violated");
      term_is(shift(body.fun(), -1), p(0).t1, "conclusion", "f");
      term_is(c_.t2, p(0).t1, "conclusion", "right term");
      kind_tag_is(p(0).k1, KindTag::Prod, slot(0), "(x:K)K'");
      kind_is(c_.t1.dom(), p(0).k1.dom(), "conclusion", "domain");
      kind_is(c_.k1, p(0).k1, "conclusion", "kind");
      return;
    }
    case DeclRule::RTYPE_KIND:
      concl(F::KindWf);
      prem(0, F::CtxValid);
      same_ctx(0);
      kind_tag_is(c_.k1, KindTag::RType, "conclusion", "RType");
      return;
    case DeclRule::RTYPEL_KIND:
      concl(F::KindWf);
      prem(0, F::CtxValid);
      same_ctx(0);
      kind_tag_is(c_.k1, KindTag::RTypeL, "conclusion", "RType[L]");
      return;
    case DeclRule::RTYPE_SUB:
      concl(F::HasKind);
      prem(0, F::HasKind);
      same_ctx(0);
      term_is(c_.t1, p(0).t1, "conclusion", "term");
      kind_tag_is(p(0).k1, KindTag::RTypeL, slot(0), "RType[L]");
      kind_tag_is(c_.k1, KindTag::RTypeL, "conclusion", "RType[L']");
      if (!is_subset(p(0).k1.labels(), c_.k1.labels())) fail("side condition", "L ⊆ L' violated");
      return;
    case DeclRule::RTYPE_FORGET:
      concl(F::HasKind);
      prem(0, F::HasKind);
      same_ctx(0);
      term_is(c_.t1, p(0).t1, "conclusion", "term");
      kind_tag_is(p(0).k1, KindTag::RTypeL, slot(0), "RType[L]");
      kind_tag_is(c_.k1, KindTag::RType, "conclusion", "RType");
      return;
    case DeclRule::RTYPE_TYPE:
      concl(F::HasKind);
      prem(0, F::HasKind);
      same_ctx(0);
      term_is(c_.t1, p(0).t1, "conclusion", "term");
      kind_tag_is(p(0).k1, KindTag::RType, slot(0), "RType");
      kind_tag_is(c_.k1, KindTag::Type, "conclusion", "Type");
      return;
    case DeclRule::FORM_EMPTY:
      concl(F::HasKind);
      prem(0, F::CtxValid);
      same_ctx(0);
      tag_is(c_.t1, TermTag::EmptyRec, "conclusion", "<>");
      kind_is(c_.k1, rtype(LabelSet{}), "conclusion", "kind");
      return;
    case DeclRule::FORM_EXT: {
      concl(F::HasKind);
      prem(0, F::HasKind);
      prem(1, F::HasKind);
      same_ctx(0);
      same_ctx(1);
      tag_is(c_.t1, TermTag::RecTypeExt, "conclusion", "<R, l : A>");
      kind_tag_is(p(0).k1, KindTag::RTypeL, slot(0), "RType[L]");
      term_is(c_.t1.rec(), p(0).t1, "conclusion", "R");
      term_is(c_.t1.fam(), p(1).t1, "conclusion", "A");
      family_kind(p(1).k1, p(0).t1, slot(1));
      no_label(p(0).k1.labels(), c_.t1.label());
      LabelSet out = p(0).k1.labels();
      out.insert(c_.t1.label());
      kind_is(c_.k1, rtype(out), "conclusion", "kind RType[L ∪ {l}]");
      return;
    }
    case DeclRule::INTRO_EMPTY:
      concl(F::HasKind);
      prem(0, F::CtxValid);
      same_ctx(0);
      tag_is(c_.t1, TermTag::EmptyRec, "conclusion", "<>");
      kind_is(c_.k1, el(empty_rec()), "conclusion", "kind");
      return;
    case DeclRule::INTRO_EXT: {
      concl(F::HasKind);
      for (std::size_t i = 0; i < 3; ++i) {
        prem(i, F::HasKind);
        same_ctx(i);
      }
      tag_is(c_.t1, TermTag::RecExt, "conclusion", "<r, l = a : A>");
      const Term& rt = p(0).t1;
      tag_is(rt, TermTag::RecTypeExt, slot(0), "<R, l : A>");
      kind_tag_is(p(0).k1, KindTag::RType, slot(0), "RType");
      if (rt.label() != c_.t1.label()) fail(slot(0), "label differs from the record's");
      term_is(rt.fam(), c_.t1.fam(), slot(0), "A");
      term_is(p(1).t1, c_.t1.rec(), slot(1), "r");
      kind_is(p(1).k1, el(rt.rec()), slot(1), "kind El(R)");
      term_is(p(2).t1, c_.t1.val(), slot(2), "a");
      kind_is(p(2).k1, el(app(c_.t1.fam(), c_.t1.rec())), slot(2), "kind El(A(r))");
      kind_is(c_.k1, el(rt), "conclusion", "kind");
      return;
    }
    case DeclRule::ELIM_RESTR: {
      concl(F::HasKind);
      prem(0, F::HasKind);
      same_ctx(0);
      const Term& rt = el_record(p(0).k1, slot(0));
      term_is(c_.t1, restr(p(0).t1), "conclusion", "[r]");
      kind_is(c_.k1, el(rt.rec()), "conclusion", "kind El(R)");
      return;
    }
    case DeclRule::ELIM_SEL: {
      concl(F::HasKind);
      prem(0, F::HasKind);
      same_ctx(0);
      const Term& rt = el_record(p(0).k1, slot(0));
      term_is(c_.t1, sel(p(0).t1, rt.label()), "conclusion", "r.l");
      kind_is(c_.k1, el(app(rt.fam(), restr(p(0).t1))), "conclusion", "kind El(A([r]))");
      return;
    }
    case DeclRule::ELIM_SEL2: {
      concl(F::HasKind);
      prem(0, F::HasKind);
      prem(1, F::HasKind);
      same_ctx(0);
      same_ctx(1);
      const Term& rt = el_record(p(0).k1, slot(0));
      tag_is(c_.t1, TermTag::Sel, "conclusion", "r.l'");
      const Label& l2 = c_.t1.label();
      term_is(c_.t1.rec(), p(0).t1, "conclusion", "r");
      term_is(p(1).t1, sel(restr(p(0).t1), l2), slot(1), "[r].l'");
      kind_is(c_.k1, p(1).k1, "conclusion", "kind");
      if (rt.label() == l2) fail("side condition", "l ≠ l' violated");
      return;
    }
    case DeclRule::COMP_RESTR:
    case DeclRule::COMP_SEL: {
      concl(F::TermEq);
      prem(0, F::HasKind);
      same_ctx(0);
      const Term& pr = p(0).t1;
      tag_is(pr, TermTag::RecExt, slot(0), "<r, l = a : A>");
      const Term& rt = el_record(p(0).k1, slot(0));
      if (rt.label() != pr.label()) fail(slot(0), "labels of record and record type differ");
      term_is(rt.fam(), pr.fam(), slot(0), "A");
      if (d_.rule == DeclRule::COMP_RESTR) {
        term_is(c_.t1, restr(pr), "conclusion", "[<r, l = a : A>]");
        term_is(c_.t2, pr.rec(), "conclusion", "r");
        kind_is(c_.k1, el(rt.rec()), "conclusion", "kind El(R)");
      } else {
        term_is(c_.t1, sel(pr, pr.label()), "conclusion", "<r, l = a : A>.l");
        term_is(c_.t2, pr.val(), "conclusion", "a");
        kind_is(c_.k1, el(app(pr.fam(), pr.rec())), "conclusion", "kind El(A(r))");
      }
      return;
    }
    case DeclRule::COMP_SEL2: {
      concl(F::TermEq);
      prem(0, F::HasKind);
      prem(1, F::HasKind);
      same_ctx(0);
      same_ctx(1);
      const Term& rt = el_record(p(0).k1, slot(0));
      tag_is(c_.t1, TermTag::Sel, "conclusion", "r.l'");
      const Label& l2 = c_.t1.label();
      term_is(c_.t1.rec(), p(0).t1, "conclusion", "r");
      Term rhs = sel(restr(p(0).t1), l2);
      term_is(p(1).t1, rhs, slot(1), "[r].l'");
      term_is(c_.t2, rhs, "conclusion", "[r].l'");
      kind_is(c_.k1, p(1).k1, "conclusion", "kind");
      if (rt.label() == l2) fail("side condition", "l ≠ l' violated");
      return;
    }
    case DeclRule::RCDT_EQ_EMPTY:
    case DeclRule::RCD_EQ_EMPTY:
      concl(F::TermEq);
      prem(0, F::CtxValid);
      same_ctx(0);
      tag_is(c_.t1, TermTag::EmptyRec, "conclusion", "<>");
      tag_is(c_.t2, TermTag::EmptyRec, "conclusion", "<>");
      kind_is(c_.k1, d_.rule == DeclRule::RCDT_EQ_EMPTY ? rtype(LabelSet{}) : el(empty_rec()), "conclusion",
              "kind");
      return;
    case DeclRule::RCDT_EQ_EXT: {
      concl(F::TermEq);
      prem(0, F::TermEq);
      prem(1, F::TermEq);
      same_ctx(0);
      same_ctx(1);
      kind_tag_is(p(0).k1, KindTag::RTypeL, slot(0), "RType[L]");
      tag_is(c_.t1, TermTag::RecTypeExt, "conclusion", "<R, l : A> on the left");
      tag_is(c_.t2, TermTag::RecTypeExt, "conclusion", "<R', l : A'> on the right");
      if (c_.t1.label() != c_.t2.label()) fail("conclusion", "labels differ");
      term_is(c_.t1.rec(), p(0).t1, "conclusion", "R");
      term_is(c_.t2.rec(), p(0).t2, "conclusion", "R'");
      term_is(c_.t1.fam(), p(1).t1, "conclusion", "A");
      term_is(c_.t2.fam(), p(1).t2, "conclusion", "A'");
      family_kind(p(1).k1, p(0).t1, slot(1));
      no_label(p(0).k1.labels(), c_.t1.label());
      LabelSet out = p(0).k1.labels();
      out.insert(c_.t1.label());
      kind_is(c_.k1, rtype(out), "conclusion", "kind RType[L ∪ {l}]");
      return;
    }
    case DeclRule::RCD_EQ_EXT: {
      concl(F::TermEq);
      prem(0, F::HasKind);
      for (std::size_t i = 1; i < 4; ++i) prem(i, F::TermEq);
      for (std::size_t i = 0; i < 4; ++i) same_ctx(i);
      kind_tag_is(p(0).k1, KindTag::RTypeL, slot(0), "RType[L]");
      const Term& R = p(0).t1;
      tag_is(c_.t1, TermTag::RecExt, "conclusion", "<r, l = a : A> on the left");
      tag_is(c_.t2, TermTag::RecExt, "conclusion", "<r', l = a' : A'> on the right");
      if (c_.t1.label() != c_.t2.label()) fail("conclusion", "labels differ");
      term_is(p(1).t1, c_.t1.rec(), slot(1), "r");
      term_is(p(1).t2, c_.t2.rec(), slot(1), "r'");
      kind_is(p(1).k1, el(R), slot(1), "kind El(R)");
      term_is(p(2).t1, c_.t1.val(), slot(2), "a");
      term_is(p(2).t2, c_.t2.val(), slot(2), "a'");
      kind_is(p(2).k1, el(app(c_.t1.fam(), c_.t1.rec())), slot(2), "kind El(A(r))");
      term_is(p(3).t1, c_.t1.fam(), slot(3), "A");
      term_is(p(3).t2, c_.t2.fam(), slot(3), "A'");
      family_kind(p(3).k1, R, slot(3));
      no_label(p(0).k1.labels(), c_.t1.label());
      kind_is(c_.k1, el(rec_type(R, c_.t1.label(), c_.t1.fam())), "conclusion", "kind El(<R, l : A>)");
      return;
    }
    case DeclRule::RESTR_EQ: {
      concl(F::TermEq);
      prem(0, F::TermEq);
      same_ctx(0);
      const Term& rt = el_record(p(0).k1, slot(0));
      term_is(c_.t1, restr(p(0).t1), "conclusion", "[r]");
      term_is(c_.t2, restr(p(0).t2), "conclusion", "[r']");
      kind_is(c_.k1, el(rt.rec()), "conclusion", "kind El(R)");
      return;
    }
    case DeclRule::SEL_EQ: {
      concl(F::TermEq);
      prem(0, F::TermEq);
      same_ctx(0);
      const Term& rt = el_record(p(0).k1, slot(0));
      term_is(c_.t1, sel(p(0).t1, rt.label()), "conclusion", "r.l");
      term_is(c_.t2, sel(p(0).t2, rt.label()), "conclusion", "r'.l");
      kind_is(c_.k1, el(app(rt.fam(), restr(p(0).t1))), "conclusion", "kind El(A([r]))");
      return;
    }
  }
  fail("rule", "unknown rule");
}

}  // namespace

std::optional<DeclDiagnostic> check_node(const DeclDerivation& d, SystemVariant v) {
  try {
    NodeCheck(d).run(v);
    return std::nullopt;
  } catch (const NodeError& e) {
    return DeclDiagnostic{{}, std::string(rule_name(d.rule)), e.slot, e.message};
  }
}

DeclCheckResult check_derivation(const DeclDerivation& root, SystemVariant v) {
  DeclCheckResult res;
  // Post-order over the DAG; the first failure in that order is reported.
  struct Frame {
    const DeclDerivation* node;
    std::vector<std::size_t> path;
    std::size_t next = 0;
  };
  std::unordered_map<const DeclDerivation*, bool> done;
  std::vector<Frame> stack;
  stack.push_back({&root, {}, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (done.contains(f.node)) {
      stack.pop_back();
      continue;
    }
    if (f.next < f.node->premises.size()) {
      std::size_t i = f.next++;
      const DeclDerivation* child = f.node->premises[i].get();
      if (child && !done.contains(child)) {
        std::vector<std::size_t> path = f.path;
        path.push_back(i);
        stack.push_back({child, std::move(path), 0});
      }
      continue;
    }
    if (auto diag = check_node(*f.node, v)) {
      diag->path = f.path;
      res.diagnostic = std::move(diag);
      return res;
    }
    ++res.rule_counts[static_cast<std::size_t>(f.node->rule)];
    ++res.nodes_checked;
    done.emplace(f.node, true);
    stack.pop_back();
  }
  res.ok = true;
  return res;
}

std::size_t derivation_height_sans_context(const DeclDerivation& d) {
  std::unordered_map<const DeclDerivation*, std::size_t> memo;
  auto go = [&](auto&& self, const DeclDerivation& n) -> std::size_t {
    if (n.conclusion.form == JudgementForm::CtxValid) return 0;
    if (auto it = memo.find(&n); it != memo.end()) return it->second;
    std::size_t m = 0;
    for (const auto& p : n.premises) {
      if (p) m = std::max(m, self(self, *p));
    }
    memo.emplace(&n, m + 1);
    return m + 1;
  };
  return go(go, d);
}

}  // namespace idrt
