#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "idrt/declarative.hpp"
#include "idrt/frontend.hpp"
#include "idrt/reduction.hpp"

// derive_auto: each TOS rule instance is translated into declarative rules,
// following the completeness argument. For an evaluation G |= M -> N -> P : A
// the translator produces G |- M : K, G |- M = N : K and G |- M = P : K for a
// "natural" kind K convertible to A; callers convert to the kind they need.

namespace idrt {

namespace {

class Gap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using J = Judgement;
using R = DeclRule;

class Deriver {
 public:
  Deriver(const DeriveOptions& o) : opts_(o), eng_(EngineOptions{o.fuel, false, false}) {}

  DerivPtr judgement(const Judgement& j) {
    const Context& g = j.ctx;
    eng_.eval_context(g);
    switch (j.form) {
      case JudgementForm::CtxValid:
        return ctx(g);
      case JudgementForm::KindWf:
        eng_.eval_kind(g, j.k1);
        return kw(g, j.k1);
      case JudgementForm::KindEq:
        return keq(g, j.k1, j.k2);
      case JudgementForm::HasKind: {
        Kind want = eng_.eval_kind(g, j.k1);
        return coerce(g, d1(g, j.t1, demand_of(want)), j.k1);
      }
      case JudgementForm::TermEq: {
        Kind want = eng_.eval_kind(g, j.k1);
        Demand dm = demand_of(want);
        if (alpha_eq(j.t1, j.t2)) return mk(R::EQ_REFL, J::term_eq(g, j.t1, j.t1, j.k1), {coerce(g, d1(g, j.t1, dm), j.k1)});
        EvalResult r = eng_.eval_term(g, j.t1, dm);
        DerivPtr d;
        if (alpha_eq(j.t2, r.whnf)) {
          d = d2(g, j.t1, dm);
        } else if (alpha_eq(j.t2, r.nf)) {
          d = d3(g, j.t1, dm);
        } else {
          DerivPtr left = coerce_eq(g, d3(g, j.t1, dm), want);
          DerivPtr right = coerce_eq(g, d3(g, j.t2, dm), want);
          if (!alpha_eq(left->conclusion.t2, right->conclusion.t2)) throw Gap("normal forms differ");
          d = trans(g, left, sym(right));
        }
        return coerce_eq(g, d, j.k1);
      }
    }
    throw Gap("unknown judgement form");
  }

 private:
  DeriveOptions opts_;
  Engine eng_;
  std::unordered_map<std::size_t, std::vector<std::pair<Context, DerivPtr>>> ctx_cache_;

 public:
  // Context derivations are kept for the lifetime of the deriver.
  bool cached_context(const DerivPtr& d) const {
    if (d->rule != R::CTX_EMPTY && d->rule != R::CTX_EXT) return false;
    auto it = ctx_cache_.find(ctx_hash(d->conclusion.ctx));
    if (it == ctx_cache_.end()) return false;
    for (const auto& e : it->second) {
      if (e.second == d) return true;
    }
    return false;
  }

 private:
  static std::size_t ctx_hash(const Context& g) {
    std::size_t h = g.size();
    for (const auto& e : g.entries()) h = h * 1000003u ^ std::hash<std::string>{}(e.name) ^ (e.kind.hash() << 1);
    return h;
  }

  static DerivPtr mk(R rule, Judgement j, std::vector<DerivPtr> ps = {}) {
    return make_deriv(rule, std::move(j), std::move(ps));
  }

  static const Kind& kind_of(const DerivPtr& d) { return d->conclusion.k1; }

  static Name fresh(const Context& g, const Name& hint, const Term* t, const Kind* k) {
    NameSet avoid = g.domain();
    for (const auto& n : free_vars(g)) avoid.insert(n);
    if (t) collect_free_vars(*t, avoid);
    if (k) collect_free_vars(*k, avoid);
    return fresh_name(hint, avoid);
  }

  Kind nf_kind(const Context& g, const Kind& k) { return eng_.eval_kind(g, k); }
  EvalResult eval(const Context& g, const Term& m, Demand d) { return eng_.eval_term(g, m, d); }

  // ---- contexts and kinds ----

  DerivPtr ctx(const Context& g) {
    auto& bucket = ctx_cache_[ctx_hash(g)];
    for (const auto& [c, d] : bucket) {
      if (alpha_eq(c, g)) return d;
    }
    DerivPtr d;
    if (g.empty()) {
      d = mk(R::CTX_EMPTY, J::ctx_valid(g));
    } else {
      Context pre = g.prefix(g.size() - 1);
      d = mk(R::CTX_EXT, J::ctx_valid(g), {kw(pre, g[g.size() - 1].kind)});
    }
    ctx_cache_[ctx_hash(g)].emplace_back(g, d);
    return d;
  }

  DerivPtr kw(const Context& g, const Kind& k) {
    switch (k.tag()) {
      case KindTag::Type:
        return mk(R::TYPE_KIND, J::kind_wf(g, k), {ctx(g)});
      case KindTag::RType:
        return mk(R::RTYPE_KIND, J::kind_wf(g, k), {ctx(g)});
      case KindTag::RTypeL:
        return mk(R::RTYPEL_KIND, J::kind_wf(g, k), {ctx(g)});
      case KindTag::El:
        return mk(R::EL_KIND, J::kind_wf(g, k), {coerce(g, d1(g, k.term(), Demand::RecordType), type_kind())});
      case KindTag::Prod: {
        Name x = fresh(g, k.binder(), nullptr, &k);
        Context gx = g.extended(x, k.dom());
        return mk(R::PI_KIND, J::kind_wf(g, k), {kw(g, k.dom()), kw(gx, instantiate(k.cod(), var(x)))});
      }
    }
    throw Gap("unknown kind");
  }

  // G |- K = nf(K)
  DerivPtr ke(const Context& g, const Kind& k) {
    Kind b = nf_kind(g, k);
    if (alpha_eq(k, b)) return mk(R::KEQ_REFL, J::kind_eq(g, k, k), {kw(g, k)});
    switch (k.tag()) {
      case KindTag::El: {
        DerivPtr e = coerce_eq(g, d3(g, k.term(), Demand::RecordType), type_kind());
        return mk(R::EL_EQ, J::kind_eq(g, k, el(e->conclusion.t2)), {e});
      }
      case KindTag::Prod: {
        Name x = fresh(g, k.binder(), nullptr, &k);
        Context gx = g.extended(x, k.dom());
        DerivPtr dom = ke(g, k.dom());
        DerivPtr cod = ke(gx, instantiate(k.cod(), var(x)));
        Kind rhs = prod(k.binder(), dom->conclusion.k2, abstract(cod->conclusion.k2, x));
        return mk(R::PI_EQ, J::kind_eq(g, k, rhs), {dom, cod});
      }
      default:
        return mk(R::KEQ_REFL, J::kind_eq(g, k, k), {kw(g, k)});
    }
  }

  DerivPtr sym_k(const Context& g, const DerivPtr& d) {
    return mk(R::KEQ_SYM, J::kind_eq(g, d->conclusion.k2, d->conclusion.k1), {d});
  }

  // G |- a = b for kinds with equal normal forms.
  DerivPtr keq(const Context& g, const Kind& a, const Kind& b) {
    if (alpha_eq(a, b)) return mk(R::KEQ_REFL, J::kind_eq(g, a, a), {kw(g, a)});
    Kind na = nf_kind(g, a);
    Kind nb = nf_kind(g, b);
    if (!alpha_eq(na, nb)) {
      throw Gap("kinds " + print_kind(a, g.domain()) + " and " + print_kind(b, g.domain()) + " are not convertible");
    }
    DerivPtr left = alpha_eq(a, na) ? nullptr : ke(g, a);
    DerivPtr right = alpha_eq(b, nb) ? nullptr : sym_k(g, ke(g, b));
    if (left && right) return mk(R::KEQ_TRANS, J::kind_eq(g, a, b), {left, right});
    return left ? left : right;
  }

  // ---- conversions ----

  DerivPtr coerce(const Context& g, const DerivPtr& d, const Kind& want) {
    const Kind& have = kind_of(d);
    if (alpha_eq(have, want)) return d;
    const Term& m = d->conclusion.t1;
    if (have.tag() == KindTag::RTypeL) {
      if (want.tag() == KindTag::RTypeL && is_subset(have.labels(), want.labels())) {
        return mk(R::RTYPE_SUB, J::has_kind(g, m, want), {d});
      }
      if (want.tag() == KindTag::RType || want.tag() == KindTag::Type) {
        DerivPtr f = mk(R::RTYPE_FORGET, J::has_kind(g, m, rtype()), {d});
        return want.tag() == KindTag::RType ? f : mk(R::RTYPE_TYPE, J::has_kind(g, m, want), {f});
      }
    }
    if (have.tag() == KindTag::RType && want.tag() == KindTag::Type) {
      return mk(R::RTYPE_TYPE, J::has_kind(g, m, want), {d});
    }
    return mk(R::CONV, J::has_kind(g, m, want), {d, keq(g, have, want)});
  }

  static bool record_kind_below(const Kind& have, const Kind& want) {
    if (have.tag() == KindTag::RTypeL) {
      return (want.tag() == KindTag::RTypeL && is_subset(have.labels(), want.labels())) ||
             want.tag() == KindTag::RType || want.tag() == KindTag::Type;
    }
    return have.tag() == KindTag::RType && want.tag() == KindTag::Type;
  }

  DerivPtr coerce_eq(const Context& g, const DerivPtr& d, const Kind& want) {
    const Kind& have = kind_of(d);
    if (alpha_eq(have, want)) return d;
    if (record_kind_below(have, want)) {
      const Term& a = d->conclusion.t1;
      const Term& b = d->conclusion.t2;
      Name z = fresh(g, "z", &a, &want);
      if (occurs_free(b, z)) z = fresh(g, z, &b, &want);
      Context gz = g.extended(z, have);
      // G, z:have |- z : want
      DerivPtr v = coerce(gz, mk(R::VAR, J::has_kind(gz, var(z), have), {ctx(gz)}), want);
      if (opts_.variant == SystemVariant::Full) {
        return mk(R::SUBST_TERM_EQARG, J::term_eq(g, a, b, want), {v, d});
      }
      // Without substitution: a = f(a) = f(b) = b for f = [z:have]z.
      Term f = lam(z, have, bvar(0));
      DerivPtr fd = mk(R::LAM, J::has_kind(g, f, prod(z, have, want)), {v});
      DerivPtr mid = mk(R::APP_EQ, J::term_eq(g, app(f, a), app(f, b), want), {refl(g, fd), d});
      DerivPtr ba = mk(R::BETA, J::term_eq(g, app(f, a), a, want),
                       {v, coerce(g, d1(g, a, Demand::RecordType), have)});
      DerivPtr bb = mk(R::BETA, J::term_eq(g, app(f, b), b, want),
                       {v, coerce(g, d1(g, b, Demand::RecordType), have)});
      return trans(g, trans(g, sym(ba), mid), bb);
    }
    return mk(R::CONV_EQ, J::term_eq(g, d->conclusion.t1, d->conclusion.t2, want), {d, keq(g, have, want)});
  }

  DerivPtr refl(const Context& g, const DerivPtr& t) {
    return mk(R::EQ_REFL, J::term_eq(g, t->conclusion.t1, t->conclusion.t1, kind_of(t)), {t});
  }
  DerivPtr sym(const DerivPtr& d) {
    const Judgement& c = d->conclusion;
    return mk(R::EQ_SYM, J::term_eq(c.ctx, c.t2, c.t1, c.k1), {d});
  }
  DerivPtr trans(const Context& g, const DerivPtr& a, const DerivPtr& b) {
    return mk(R::EQ_TRANS, J::term_eq(g, a->conclusion.t1, b->conclusion.t2, kind_of(a)), {a, b});
  }

  // Joins equalities end to end at kind `want`.
  DerivPtr chain(const Context& g, const std::vector<DerivPtr>& parts, const Kind& want) {
    DerivPtr acc;
    for (const auto& p : parts) {
      if (!p) continue;
      DerivPtr q = coerce_eq(g, p, want);
      acc = acc ? trans(g, acc, q) : q;
    }
    return acc;
  }

  // A typing or equality derivation whose kind is El(<R, l : A>).
  DerivPtr as_record(const Context& g, const DerivPtr& d, bool equality) {
    const Kind& k = kind_of(d);
    if (k.tag() == KindTag::El && k.term().tag() == TermTag::RecTypeExt) return d;
    Kind want = eval(g, d->conclusion.t1, Demand::Value).kind;
    return equality ? coerce_eq(g, d, want) : coerce(g, d, want);
  }

  // ---- G |- M : K ----

  DerivPtr d1(const Context& g, const Term& m, Demand dm) {
    switch (m.tag()) {
      case TermTag::Free: {
        const Decl* decl = g.find(m.name());
        if (!decl) throw Gap("unbound variable " + m.name());
        return mk(R::VAR, J::has_kind(g, m, decl->kind), {ctx(g)});
      }
      case TermTag::Lam: {
        Name x = fresh(g, m.name(), &m, nullptr);
        Context gx = g.extended(x, m.dom());
        DerivPtr b = d1(gx, instantiate(m.body(), var(x)), dm);
        Kind k = prod(m.name(), m.dom(), abstract(kind_of(b), x));
        return mk(R::LAM, J::has_kind(g, m, k), {b});
      }
      case TermTag::App: {
        DerivPtr f = d1(g, m.fun(), dm);
        const Kind& fk = kind_of(f);
        if (fk.tag() != KindTag::Prod) throw Gap("function without a product kind");
        DerivPtr a = coerce(g, d1(g, m.arg(), demand_of(fk.dom())), fk.dom());
        return mk(R::APP, J::has_kind(g, m, instantiate(fk.cod(), m.arg())), {f, a});
      }
      case TermTag::EmptyRec:
        if (dm == Demand::RecordType) return mk(R::FORM_EMPTY, J::has_kind(g, m, rtype(LabelSet{})), {ctx(g)});
        return mk(R::INTRO_EMPTY, J::has_kind(g, m, el(empty_rec())), {ctx(g)});
      case TermTag::RecTypeExt: {
        Kind lk = eval(g, m.rec(), Demand::RecordType).kind;
        if (lk.tag() != KindTag::RTypeL) throw Gap("record type without label set");
        DerivPtr r = coerce(g, d1(g, m.rec(), Demand::RecordType), lk);
        DerivPtr a = coerce(g, d1(g, m.fam(), Demand::RecordType), arrow(el(m.rec()), type_kind()));
        LabelSet out = lk.labels();
        out.insert(m.label());
        return mk(R::FORM_EXT, J::has_kind(g, m, rtype(out)), {r, a});
      }
      case TermTag::RecExt: {
        Kind rk = eval(g, m.rec(), Demand::Value).kind;
        if (rk.tag() != KindTag::El) throw Gap("record without a record type");
        const Term& p = rk.term();
        Term rt = rec_type(p, m.label(), m.fam());
        DerivPtr t = coerce(g, d1(g, rt, Demand::RecordType), rtype());
        DerivPtr r = coerce(g, d1(g, m.rec(), Demand::Value), el(p));
        DerivPtr a = coerce(g, d1(g, m.val(), Demand::Value), el(app(m.fam(), m.rec())));
        return mk(R::INTRO_EXT, J::has_kind(g, m, el(rt)), {t, r, a});
      }
      case TermTag::Restr: {
        DerivPtr r = as_record(g, d1(g, m.rec(), Demand::Value), false);
        return mk(R::ELIM_RESTR, J::has_kind(g, m, el(kind_of(r).term().rec())), {r});
      }
      case TermTag::Sel: {
        DerivPtr r = as_record(g, d1(g, m.rec(), Demand::Value), false);
        const Term& rt = kind_of(r).term();
        if (rt.label() == m.label()) {
          return mk(R::ELIM_SEL, J::has_kind(g, m, el(app(rt.fam(), restr(m.rec())))), {r});
        }
        DerivPtr s = d1(g, sel(restr(m.rec()), m.label()), dm);
        return mk(R::ELIM_SEL2, J::has_kind(g, m, kind_of(s)), {r, s});
      }
      case TermTag::Bound:
      case TermTag::Hole:
        break;
    }
    throw Gap("term outside the core syntax");
  }

  // G |- M = M : K, with the dedicated axioms for <>.
  DerivPtr same_eq(const Context& g, const Term& m, Demand dm) {
    if (m.tag() == TermTag::EmptyRec) {
      if (dm == Demand::RecordType) return mk(R::RCDT_EQ_EMPTY, J::term_eq(g, m, m, rtype(LabelSet{})), {ctx(g)});
      return mk(R::RCD_EQ_EMPTY, J::term_eq(g, m, m, el(m)), {ctx(g)});
    }
    return refl(g, d1(g, m, dm));
  }

  // ---- G |- M = whnf(M) : K ----

  DerivPtr d2(const Context& g, const Term& m, Demand dm) {
    EvalResult r = eval(g, m, dm);
    if (alpha_eq(r.whnf, m)) return same_eq(g, m, dm);
    switch (m.tag()) {
      case TermTag::Lam:
        return d3(g, m, dm);  // eta: whnf and nf coincide
      case TermTag::App:
        return app_eq(g, m, dm, r, false);
      case TermTag::Restr:
        return restr_eq(g, m, r, false);
      case TermTag::Sel:
        return sel_eq(g, m, dm, r, false);
      default:
        break;
    }
    throw Gap("unexpected weak-head step for " + print_term(m, g.domain()));
  }

  // ---- G |- M = nf(M) : K ----

  DerivPtr d3(const Context& g, const Term& m, Demand dm) {
    EvalResult r = eval(g, m, dm);
    if (alpha_eq(r.nf, m)) return same_eq(g, m, dm);
    switch (m.tag()) {
      case TermTag::Lam:
        return lam_eq(g, m, dm, r);
      case TermTag::App:
        return app_eq(g, m, dm, r, true);
      case TermTag::RecTypeExt: {
        Kind lk = eval(g, m.rec(), Demand::RecordType).kind;
        DerivPtr rr = coerce_eq(g, d3(g, m.rec(), Demand::RecordType), lk);
        DerivPtr aa = coerce_eq(g, d3(g, m.fam(), Demand::RecordType), arrow(el(m.rec()), type_kind()));
        LabelSet out = lk.labels();
        out.insert(m.label());
        Term rhs = rec_type(rr->conclusion.t2, m.label(), aa->conclusion.t2);
        return mk(R::RCDT_EQ_EXT, J::term_eq(g, m, rhs, rtype(out)), {rr, aa});
      }
      case TermTag::RecExt:
        return rcd_eq(g, m, r);
      case TermTag::Restr:
        return restr_eq(g, m, r, true);
      case TermTag::Sel:
        return sel_eq(g, m, dm, r, true);
      default:
        break;
    }
    throw Gap("unexpected normalisation step for " + print_term(m, g.domain()));
  }

  DerivPtr lam_eq(const Context& g, const Term& m, Demand dm, const EvalResult& r) {
    Name x = fresh(g, m.name(), &m, nullptr);
    Context gx = g.extended(x, m.dom());
    DerivPtr dom = ke(g, m.dom());
    DerivPtr body = d3(gx, instantiate(m.body(), var(x)), dm);
    Term rhs = lam(m.name(), dom->conclusion.k2, abstract(body->conclusion.t2, x));
    Kind k = prod(m.name(), m.dom(), abstract(kind_of(body), x));
    DerivPtr step = mk(R::LAM_EQ, J::term_eq(g, m, rhs, k), {dom, body});
    if (alpha_eq(rhs, r.nf)) return step;
    // eta: rhs is [x:B]p(x) and p is the result
    if (!is_eta_redex(rhs)) throw Gap("abstraction normal form mismatch");
    const Term& p = r.nf;
    DerivPtr pd = coerce(g, d1(g, p, dm), r.kind);
    DerivPtr eta = mk(R::ETA, J::term_eq(g, rhs, p, r.kind), {pd});
    return chain(g, {step, eta}, r.kind);
  }

  DerivPtr app_eq(const Context& g, const Term& m, Demand dm, const EvalResult& r, bool full) {
    EvalResult rf = eval(g, m.fun(), dm);
    if (rf.whnf.tag() != TermTag::Lam) {
      DerivPtr f = full ? d3(g, m.fun(), dm) : d2(g, m.fun(), dm);
      const Kind& fk = kind_of(f);
      if (fk.tag() != KindTag::Prod) throw Gap("function without a product kind");
      Demand ad = demand_of(fk.dom());
      DerivPtr a = full ? coerce_eq(g, d3(g, m.arg(), ad), fk.dom())
                        : refl(g, coerce(g, d1(g, m.arg(), ad), fk.dom()));
      Term rhs = app(f->conclusion.t2, a->conclusion.t2);
      return mk(R::APP_EQ, J::term_eq(g, m, rhs, instantiate(fk.cod(), m.arg())), {f, a});
    }
    // beta
    std::vector<DerivPtr> parts;
    DerivPtr f = d2(g, m.fun(), dm);
    const Kind& fk = kind_of(f);
    if (fk.tag() != KindTag::Prod) throw Gap("function without a product kind");
    Demand ad = demand_of(fk.dom());
    const Term& abs = rf.whnf;
    if (!alpha_eq(f->conclusion.t1, f->conclusion.t2)) {
      DerivPtr a = refl(g, coerce(g, d1(g, m.arg(), ad), fk.dom()));
      parts.push_back(
          mk(R::APP_EQ, J::term_eq(g, m, app(abs, m.arg()), instantiate(fk.cod(), m.arg())), {f, a}));
    }
    Name x = fresh(g, abs.name(), &abs, nullptr);
    Context gx = g.extended(x, abs.dom());
    DerivPtr body = d1(gx, instantiate(abs.body(), var(x)), dm);
    DerivPtr arg = coerce(g, d1(g, m.arg(), ad), abs.dom());
    Term contractum = instantiate(abs.body(), m.arg());
    parts.push_back(mk(R::BETA, J::term_eq(g, app(abs, m.arg()), contractum, substitute(kind_of(body), x, m.arg())),
                       {body, arg}));
    Demand cd = demand_of(r.kind);
    parts.push_back(full ? d3(g, contractum, cd) : d2(g, contractum, cd));
    return chain(g, parts, r.kind);
  }

  DerivPtr rcd_eq(const Context& g, const Term& m, const EvalResult& r) {
    // Built right to left so that the conclusion's kind mentions the normal family.
    Kind rk = eval(g, m.rec(), Demand::Value).kind;
    const Term& p_ty = rk.term();
    Kind lk = eval(g, p_ty, Demand::RecordType).kind;
    const Term& nf = r.nf;  // <p, l = b : B>
    DerivPtr big_r = coerce(g, d1(g, p_ty, Demand::RecordType), lk);
    DerivPtr rr = sym(coerce_eq(g, d3(g, m.rec(), Demand::Value), el(p_ty)));
    DerivPtr aa = sym(coerce_eq(g, d3(g, m.val(), Demand::Value), el(app(nf.fam(), nf.rec()))));
    DerivPtr ff = sym(coerce_eq(g, d3(g, m.fam(), Demand::RecordType), arrow(el(p_ty), type_kind())));
    DerivPtr back = mk(R::RCD_EQ_EXT, J::term_eq(g, nf, m, el(rec_type(p_ty, m.label(), nf.fam()))),
                       {big_r, rr, aa, ff});
    return sym(back);
  }

  DerivPtr restr_eq(const Context& g, const Term& m, const EvalResult& r, bool full) {
    EvalResult rr = eval(g, m.rec(), Demand::Value);
    DerivPtr e = as_record(g, full ? d3(g, m.rec(), Demand::Value) : d2(g, m.rec(), Demand::Value), true);
    const Term& target = e->conclusion.t2;
    DerivPtr step = mk(R::RESTR_EQ, J::term_eq(g, m, restr(target), el(kind_of(e).term().rec())), {e});
    if (!is_pair_record(rr.whnf)) return step;
    // [<r0, l = a : A>] = r0
    DerivPtr pr = d1(g, target, Demand::Value);
    std::vector<DerivPtr> parts{step, mk(R::COMP_RESTR, J::term_eq(g, restr(target), target.rec(),
                                                                   el(kind_of(pr).term().rec())),
                                         {pr})};
    if (!full) parts.push_back(d2(g, target.rec(), Demand::Value));
    return chain(g, parts, r.kind);
  }

  DerivPtr sel_eq(const Context& g, const Term& m, Demand dm, const EvalResult& r, bool full) {
    EvalResult rr = eval(g, m.rec(), Demand::Value);
    if (rr.kind.term().label() != m.label()) {
      // r.l' = [r].l'
      DerivPtr rd = as_record(g, d1(g, m.rec(), Demand::Value), false);
      Term moved = sel(restr(m.rec()), m.label());
      DerivPtr s = d1(g, moved, dm);
      DerivPtr step = mk(R::COMP_SEL2, J::term_eq(g, m, moved, kind_of(s)), {rd, s});
      DerivPtr rest = full ? d3(g, moved, dm) : d2(g, moved, dm);
      return chain(g, {step, alpha_eq(rest->conclusion.t1, rest->conclusion.t2) ? nullptr : rest}, r.kind);
    }
    DerivPtr e = as_record(g, full ? d3(g, m.rec(), Demand::Value) : d2(g, m.rec(), Demand::Value), true);
    const Term& target = e->conclusion.t2;
    const Term& rt = kind_of(e).term();
    DerivPtr step = mk(R::SEL_EQ, J::term_eq(g, m, sel(target, m.label()), el(app(rt.fam(), restr(m.rec())))), {e});
    if (!is_pair_record(rr.whnf)) return chain(g, {step}, r.kind);
    // <r0, l = a : A>.l = a
    DerivPtr pr = d1(g, target, Demand::Value);
    std::vector<DerivPtr> parts{
        step, mk(R::COMP_SEL, J::term_eq(g, sel(target, m.label()), target.val(), el(app(target.fam(), target.rec()))),
                 {pr})};
    if (!full) parts.push_back(d2(g, target.val(), Demand::Value));
    return chain(g, parts, r.kind);
  }
};

}  // namespace

struct DeriveSession::Impl {
  DeriveOptions opts;
  Deriver dv;
  // Nodes already validated that stay alive in the deriver's caches.
  std::unordered_set<const DeclDerivation*> trusted;

  explicit Impl(const DeriveOptions& o) : opts(o), dv(o) {}

  std::optional<DeclDiagnostic> validate(const DerivPtr& root) {
    std::unordered_set<const DeclDerivation*> seen;
    std::vector<std::pair<const DeclDerivation*, std::vector<std::size_t>>> stack{{root.get(), {}}};
    while (!stack.empty()) {
      auto [d, path] = std::move(stack.back());
      stack.pop_back();
      if (trusted.contains(d) || !seen.insert(d).second) continue;
      if (auto diag = check_node(*d, opts.variant)) {
        diag->path = path;
        return diag;
      }
      for (std::size_t i = 0; i < d->premises.size(); ++i) {
        std::vector<std::size_t> p = path;
        p.push_back(i);
        stack.emplace_back(d->premises[i].get(), std::move(p));
      }
    }
    // Everything under a cached context derivation is now known good.
    std::vector<const DeclDerivation*> todo;
    for (const auto* d : seen) {
      for (const auto& p : d->premises) {
        if (dv.cached_context(p)) todo.push_back(p.get());
      }
    }
    while (!todo.empty()) {
      const DeclDerivation* d = todo.back();
      todo.pop_back();
      if (!trusted.insert(d).second) continue;
      for (const auto& p : d->premises) todo.push_back(p.get());
    }
    return std::nullopt;
  }

  DeriveResult derive(const Judgement& j) {
    DeriveResult out;
    DerivPtr d;
    try {
      d = dv.judgement(j);
    } catch (const Gap& e) {
      out.reason = e.what();
      return out;
    } catch (const NotDerivable& e) {
      out.reason = std::string("not derivable: ") + e.what();
      return out;
    } catch (const FuelExhausted& e) {
      out.reason = e.what();
      return out;
    }
    if (!alpha_eq(d->conclusion, j)) {
      out.reason = "internal: derivation concludes a different judgement";
      return out;
    }
    out.height = opts.count_context_depth ? derivation_height(*d) : derivation_height_sans_context(*d);
    if (out.height > opts.depth) {
      out.reason = "derivation height " + std::to_string(out.height) + " exceeds the bound " +
                   std::to_string(opts.depth);
      return out;
    }
    if (auto diag = validate(d)) {
      out.reason = "internal: generated derivation rejected: " + diag->to_text();
      return out;
    }
    out.deriv = std::move(d);
    return out;
  }
};

DeriveSession::DeriveSession(DeriveOptions opts) : impl_(std::make_unique<Impl>(opts)) {}
DeriveSession::~DeriveSession() = default;

DeriveResult DeriveSession::derive(const Judgement& j) { return impl_->derive(j); }

DeriveResult derive_auto(const Judgement& j, const DeriveOptions& opts) {
  DeriveSession s(opts);
  return s.derive(j);
}

}  // namespace idrt
