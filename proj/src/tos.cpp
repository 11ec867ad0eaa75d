#include "idrt/tos.hpp"

#include <cstdlib>
#include <sstream>

#include "idrt/frontend.hpp"
#include "idrt/reduction.hpp"

namespace idrt {

namespace {

constexpr std::array<std::string_view, kTosRuleCount> kTosNames{
    "EMP",      "WEAK", "TYPE",    "EL",         "PI",    "VAR",         "LAM",
    "ETA",      "BASE", "BETA",    "RTYPE",      "RTYPE[L]", "EMP_RCDT", "RCDT",
    "EMP_RCD",  "RCD",  "BASE_RESTR", "RESTR",   "BASE_FLDSEL", "FLDSEL", "FLDSL'",
};

constexpr std::size_t kMaxDepth = 20000;

}  // namespace

std::string_view tos_rule_name(TosRule r) { return kTosNames[static_cast<std::size_t>(r)]; }

std::optional<TosRule> tos_rule_from_name(std::string_view s) {
  for (std::size_t i = 0; i < kTosRuleCount; ++i) {
    if (kTosNames[i] == s) return static_cast<TosRule>(i);
  }
  return std::nullopt;
}

Demand demand_of(const Kind& k) {
  switch (k.tag()) {
    case KindTag::Type:
    case KindTag::RType:
    case KindTag::RTypeL:
      return Demand::RecordType;
    case KindTag::Prod:
      return demand_of(k.cod());
    case KindTag::El:
      return Demand::Value;
  }
  return Demand::Value;
}

std::size_t default_fuel() {
  if (const char* env = std::getenv("IDRT_FUEL")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1'000'000;
}

std::string TosTrace::conclusion() const {
  NameSet dom = ctx.domain();
  switch (form) {
    case TraceForm::Context:
      return "|= " + print_context(ctx) + " -> " + print_context(ctx_nf);
    case TraceForm::Kind:
      return print_context(ctx) + " |= " + print_kind(subject_kind, dom) + " -> " +
             print_kind(kind_nf, dom);
    case TraceForm::Term:
      return print_context(ctx) + " |= " + print_term(subject, dom) + " -> " + print_term(whnf, dom) +
             " -> " + print_term(nf, dom) + " : " + print_kind(kind_nf, dom);
  }
  return {};
}

namespace {

void trace_text(const TosTrace& t, std::ostream& out, std::size_t indent) {
  out << std::string(indent * 2, ' ') << tos_rule_name(t.rule) << "  " << t.conclusion() << "\n";
  for (const auto& p : t.premises) trace_text(p, out, indent + 1);
}

}  // namespace

std::string TosTrace::to_text() const {
  std::ostringstream out;
  trace_text(*this, out, 0);
  return out.str();
}

NotDerivable::NotDerivable(std::string subject, std::string reason, std::vector<std::string> path)
    : std::runtime_error(reason + " (at " + subject + ")"),
      subject_(std::move(subject)),
      reason_(std::move(reason)),
      path_(std::move(path)) {}

// ---------------------------------------------------------------------------

namespace {

struct Entry {
  Name name;
  Kind raw;
  Kind nf;
};

using Env = std::vector<Entry>;

// A premise slot in a trace; inert when tracing is off.
class Sub {
 public:
  explicit Sub(TosTrace* parent) : parent_(parent) {
    if (parent_) node_.emplace();
  }
  TosTrace* ptr() { return parent_ ? &*node_ : nullptr; }
  void commit() {
    if (parent_) parent_->premises.push_back(std::move(*node_));
  }

 private:
  TosTrace* parent_;
  std::optional<TosTrace> node_;
};

Context raw_context(const Env& env) {
  std::vector<Decl> ds;
  ds.reserve(env.size());
  for (const auto& e : env) ds.push_back({e.name, e.raw});
  return Context(std::move(ds));
}

const Entry* lookup(const Env& env, const Name& x) {
  for (auto it = env.rbegin(); it != env.rend(); ++it) {
    if (it->name == x) return &*it;
  }
  return nullptr;
}

std::string_view kind_group(const Kind& k) {
  switch (k.tag()) {
    case KindTag::Type:
      return "TYPE";
    case KindTag::El:
      return "EL";
    case KindTag::Prod:
      return "PI";
    case KindTag::RType:
      return "RTYPE";
    case KindTag::RTypeL:
      return "RTYPE[L]";
  }
  return "?";
}

std::string_view term_group(const Term& m, Demand d) {
  switch (m.tag()) {
    case TermTag::Free:
    case TermTag::Bound:
      return "VAR";
    case TermTag::Lam:
      return "LAM/ETA";
    case TermTag::App:
      return "BASE/BETA";
    case TermTag::EmptyRec:
      return d == Demand::RecordType ? "EMP_RCDT" : "EMP_RCD";
    case TermTag::RecTypeExt:
      return "RCDT";
    case TermTag::RecExt:
    case TermTag::Hole:
      return "RCD";
    case TermTag::Restr:
      return "BASE_RESTR/RESTR";
    case TermTag::Sel:
      return "BASE_FLDSEL/FLDSEL/FLDSL'";
  }
  return "?";
}

bool record_kind(const Kind& k) {
  return k.tag() == KindTag::Type || k.tag() == KindTag::RType || k.tag() == KindTag::RTypeL;
}

}  // namespace

struct Engine::Impl {
  EngineOptions opts;
  RuleCounts counts{};
  std::optional<TosTrace> last;
  std::size_t steps = 0;
  std::vector<Term> path;
  std::vector<Kind> kind_path;
  std::vector<std::string_view> groups;

  Context cached_ctx;
  Env cached_env;
  bool have_cache = false;

  void tick() {
    if (++steps > opts.fuel) throw FuelExhausted("evaluation fuel exhausted");
    if (path.size() + kind_path.size() > kMaxDepth) throw FuelExhausted("evaluation depth bound exceeded");
  }

  [[noreturn]] void fail(const Env& env, const std::string& subject, const std::string& reason) {
    NameSet dom;
    for (const auto& e : env) dom.insert(e.name);
    std::vector<std::string> p;
    p.reserve(path.size());
    for (const auto& t : path) p.push_back(print_term(t, dom));
    NotDerivable err(subject, reason, std::move(p));
    err.set_rule(std::string(groups.empty() ? "WEAK" : groups.back()));
    throw err;
  }

  [[noreturn]] void fail(const Env& env, const Term& m, const std::string& reason) {
    NameSet dom;
    for (const auto& e : env) dom.insert(e.name);
    fail(env, print_term(m, dom), reason);
  }

  std::string show(const Env& env, const Kind& k) const {
    NameSet dom;
    for (const auto& e : env) dom.insert(e.name);
    return print_kind(k, dom);
  }
  std::string show(const Env& env, const Term& t) const {
    NameSet dom;
    for (const auto& e : env) dom.insert(e.name);
    return print_term(t, dom);
  }

  static Name fresh_for(const Name& hint, const Env& env, const Term* t, const Kind* k) {
    NameSet avoid;
    for (const auto& e : env) avoid.insert(e.name);
    if (t) collect_free_vars(*t, avoid);
    if (k) collect_free_vars(*k, avoid);
    return fresh_name(hint, avoid);
  }

  void done(TosRule r) { ++counts[static_cast<std::size_t>(r)]; }

  // ---- contexts ----

  Env context(const Context& g, TosTrace* tr) {
    Env env;
    std::optional<TosTrace> acc;
    if (tr) {
      acc.emplace();
      acc->rule = TosRule::EMP;
      acc->form = TraceForm::Context;
    }
    done(TosRule::EMP);
    for (const auto& d : g.entries()) {
      if (lookup(env, d.name)) {
        fail(env, d.name + ":" + show(env, d.kind), "variable " + d.name + " is declared twice (x ∉ dom violated)");
      }
      std::optional<TosTrace> kt;
      if (tr) kt.emplace();
      Kind nf = kind(env, d.kind, kt ? &*kt : nullptr);
      if (tr) {
        TosTrace next;
        next.rule = TosRule::WEAK;
        next.form = TraceForm::Context;
        next.premises.push_back(std::move(*acc));
        next.premises.push_back(std::move(*kt));
        acc = std::move(next);
      }
      env.push_back({d.name, d.kind, nf});
      done(TosRule::WEAK);
      if (tr) {
        acc->ctx = raw_context(env);
        std::vector<Decl> ds;
        for (const auto& e : env) ds.push_back({e.name, e.nf});
        acc->ctx_nf = Context(std::move(ds));
      }
    }
    if (tr) *tr = std::move(*acc);
    return env;
  }

  const Env& env_for(const Context& g) {
    if (!have_cache || !alpha_eq(g, cached_ctx)) {
      have_cache = false;
      cached_env = context(g, nullptr);
      cached_ctx = g;
      have_cache = true;
    }
    return cached_env;
  }

  // ---- kinds ----

  Kind kind(const Env& env, const Kind& k, TosTrace* tr) {
    tick();
    kind_path.push_back(k);
    groups.push_back(kind_group(k));
    Kind out = kind_inner(env, k, tr);
    groups.pop_back();
    kind_path.pop_back();
    if (tr) {
      tr->form = TraceForm::Kind;
      tr->ctx = raw_context(env);
      tr->subject_kind = k;
      tr->kind_nf = out;
    }
    return out;
  }

  Kind kind_inner(const Env& env, const Kind& k, TosTrace* tr) {
    switch (k.tag()) {
      case KindTag::Type:
        if (tr) tr->rule = TosRule::TYPE;
        done(TosRule::TYPE);
        return k;
      case KindTag::RType:
        if (tr) tr->rule = TosRule::RTYPE;
        done(TosRule::RTYPE);
        return k;
      case KindTag::RTypeL:
        if (tr) tr->rule = TosRule::RTYPE_L;
        done(TosRule::RTYPE_L);
        return k;
      case KindTag::El: {
        if (tr) tr->rule = TosRule::EL;
        Sub s(tr);
        EvalResult r = term(env, k.term(), Demand::RecordType, s.ptr());
        s.commit();
        if (!record_kind(r.kind)) {
          fail(env, k.term(), "El expects a term of kind Type, got kind " + show(env, r.kind));
        }
        done(TosRule::EL);
        return el(r.nf);
      }
      case KindTag::Prod: {
        if (tr) tr->rule = TosRule::PI;
        Sub s1(tr);
        Kind b1 = kind(env, k.dom(), s1.ptr());
        s1.commit();
        Name x = fresh_for(k.binder(), env, nullptr, &k.cod());
        Env inner = env;
        inner.push_back({x, k.dom(), b1});
        Sub s2(tr);
        Kind b2 = kind(inner, instantiate(k.cod(), var(x)), s2.ptr());
        s2.commit();
        done(TosRule::PI);
        return prod(k.binder(), b1, abstract(b2, x));
      }
    }
    fail(env, "kind", "unknown kind");
  }

  // ---- terms ----

  EvalResult term(const Env& env, const Term& m, Demand d, TosTrace* tr) {
    tick();
    path.push_back(m);
    groups.push_back(term_group(m, d));
    EvalResult out = term_inner(env, m, d, tr);
    groups.pop_back();
    path.pop_back();
    if (tr) {
      tr->form = TraceForm::Term;
      tr->ctx = raw_context(env);
      tr->subject = m;
      tr->whnf = out.whnf;
      tr->nf = out.nf;
      tr->kind_nf = out.kind;
    }
    return out;
  }

  void require_kind(const Env& env, const Term& m, const Kind& got, const Kind& want, const char* what) {
    if (!alpha_eq(got, want)) {
      fail(env, m, std::string(what) + ": expected kind " + show(env, want) + ", got " + show(env, got));
    }
  }

  // Splits El(<P, l : B>); fails otherwise.
  const Term& record_type_of(const Env& env, const Term& subject, const Kind& k) {
    if (k.tag() != KindTag::El || k.term().tag() != TermTag::RecTypeExt) {
      fail(env, subject, "expected a record with at least one field, got kind " + show(env, k));
    }
    return k.term();
  }

  EvalResult term_inner(const Env& env, const Term& m, Demand d, TosTrace* tr) {
    auto set_rule = [&](TosRule r) {
      if (tr) tr->rule = r;
    };
    switch (m.tag()) {
      case TermTag::Free: {
        set_rule(TosRule::VAR);
        const Entry* e = lookup(env, m.name());
        if (!e) fail(env, m, "unbound variable " + m.name());
        if (tr) {
          // Premise G |= A -> B, recomputed so the trace is complete.
          Sub s(tr);
          kind(env, e->raw, s.ptr());
          s.commit();
        }
        done(TosRule::VAR);
        return {m, m, e->nf};
      }
      case TermTag::Bound:
        fail(env, m, "loose bound variable");
      case TermTag::Hole:
        fail(env, m, "omitted field family: no expected record type to take it from");
      case TermTag::Lam:
        return lam_rule(env, m, d, tr);
      case TermTag::App:
        return app_rule(env, m, d, tr);
      case TermTag::EmptyRec:
        if (d == Demand::RecordType) {
          set_rule(TosRule::EMP_RCDT);
          done(TosRule::EMP_RCDT);
          return {m, m, rtype(LabelSet{})};
        }
        set_rule(TosRule::EMP_RCD);
        done(TosRule::EMP_RCD);
        return {m, m, el(empty_rec())};
      case TermTag::RecTypeExt:
        return rcdt_rule(env, m, tr);
      case TermTag::RecExt:
        return rcd_rule(env, m, tr);
      case TermTag::Restr:
        return restr_rule(env, m, tr);
      case TermTag::Sel:
        return sel_rule(env, m, d, tr);
    }
    fail(env, m, "unknown term");
  }

  EvalResult lam_rule(const Env& env, const Term& m, Demand d, TosTrace* tr) {
    Sub s1(tr);
    Kind b1 = kind(env, m.dom(), s1.ptr());
    s1.commit();
    Name x = fresh_for(m.name(), env, &m.body(), nullptr);
    Env inner = env;
    inner.push_back({x, m.dom(), b1});
    Sub s2(tr);
    EvalResult rb = term(inner, instantiate(m.body(), var(x)), d, s2.ptr());
    s2.commit();
    Kind k = prod(m.name(), b1, abstract(rb.kind, x));
    Term p0 = abstract(rb.nf, x);
    Term candidate = lam(m.name(), b1, p0);
    if (!is_eta_redex(candidate)) {
      if (tr) tr->rule = TosRule::LAM;
      done(TosRule::LAM);
      return {m, candidate, k};
    }
    if (tr) tr->rule = TosRule::ETA;
    Term p = shift(p0.fun(), -1);
    Sub s3(tr);
    EvalResult rp = term(env, p, d, s3.ptr());
    s3.commit();
    if (!alpha_eq(rp.whnf, p) || !alpha_eq(rp.nf, p) || !alpha_eq(rp.kind, k)) {
      fail(env, m, "eta: contracted function " + show(env, p) + " does not evaluate to itself at kind " +
                       show(env, k));
    }
    done(TosRule::ETA);
    return {m, p, k};
  }

  EvalResult app_rule(const Env& env, const Term& m, Demand d, TosTrace* tr) {
    Sub s1(tr);
    EvalResult r1 = term(env, m.fun(), d, s1.ptr());
    s1.commit();
    if (r1.kind.tag() != KindTag::Prod) {
      fail(env, m, "application of a term of non-product kind " + show(env, r1.kind));
    }
    const Kind& b1 = r1.kind.dom();
    Sub s2(tr);
    EvalResult r2 = term(env, m.arg(), demand_of(b1), s2.ptr());
    s2.commit();
    require_kind(env, m.arg(), r2.kind, b1, "argument does not match the domain");
    Kind c_raw = instantiate(r1.kind.cod(), m.arg());
    if (r1.whnf.tag() == TermTag::Lam) {
      if (tr) tr->rule = TosRule::BETA;
      Sub s4(tr);
      Kind c = kind(env, c_raw, s4.ptr());
      Sub s3(tr);
      EvalResult r3 = term(env, instantiate(r1.whnf.body(), m.arg()), demand_of(c), s3.ptr());
      s3.commit();
      s4.commit();
      require_kind(env, m, r3.kind, c, "beta: contractum kind mismatch");
      done(TosRule::BETA);
      return {r3.whnf, r3.nf, c};
    }
    if (tr) tr->rule = TosRule::BASE;
    Sub s3(tr);
    Kind c = kind(env, c_raw, s3.ptr());
    s3.commit();
    done(TosRule::BASE);
    return {app(r1.whnf, m.arg()), app(r1.nf, r2.nf), c};
  }

  EvalResult rcdt_rule(const Env& env, const Term& m, TosTrace* tr) {
    if (tr) tr->rule = TosRule::RCDT;
    Sub s1(tr);
    EvalResult rr = term(env, m.rec(), Demand::RecordType, s1.ptr());
    s1.commit();
    if (rr.kind.tag() != KindTag::RTypeL) {
      fail(env, m.rec(), "expected a record type of kind RType[L], got kind " + show(env, rr.kind));
    }
    const LabelSet& labels = rr.kind.labels();
    if (labels.contains(m.label())) {
      fail(env, m, "duplicate label " + m.label().name() + ": side condition l ∉ L violated");
    }
    Sub s2(tr);
    EvalResult ra = term(env, m.fam(), Demand::RecordType, s2.ptr());
    s2.commit();
    require_kind(env, m.fam(), ra.kind, arrow(el(rr.nf), type_kind()), "field family");
    LabelSet out = labels;
    out.insert(m.label());
    done(TosRule::RCDT);
    return {m, rec_type(rr.nf, m.label(), ra.nf), rtype(std::move(out))};
  }

  EvalResult rcd_rule(const Env& env, const Term& m, TosTrace* tr) {
    if (tr) tr->rule = TosRule::RCD;
    if (m.fam().tag() == TermTag::Hole) {
      fail(env, m, "omitted field family: no expected record type to take it from");
    }
    // The record type <R, l : A> is not part of the term; R is the type of r.
    Sub s_r(tr);
    EvalResult rr = term(env, m.rec(), Demand::Value, s_r.ptr());
    if (rr.kind.tag() != KindTag::El) {
      fail(env, m.rec(), "expected a record, got a term of kind " + show(env, rr.kind));
    }
    const Term& p = rr.kind.term();
    Sub s_t(tr);
    EvalResult rt = term(env, rec_type(p, m.label(), m.fam()), Demand::RecordType, s_t.ptr());
    s_t.commit();
    s_r.commit();
    if (rt.kind.tag() != KindTag::RTypeL || rt.nf.tag() != TermTag::RecTypeExt ||
        !alpha_eq(rt.nf.rec(), p)) {
      fail(env, m, "record type of the extension does not normalise consistently");
    }
    Sub s_c(tr);
    EvalResult rc = term(env, app(m.fam(), m.rec()), Demand::RecordType, s_c.ptr());
    s_c.commit();
    require_kind(env, m, rc.kind, type_kind(), "field family applied to the record");
    Sub s_a(tr);
    EvalResult ra = term(env, m.val(), Demand::Value, s_a.ptr());
    s_a.commit();
    require_kind(env, m.val(), ra.kind, el(rc.nf), "field value");
    done(TosRule::RCD);
    return {m, rec(rr.nf, m.label(), ra.nf, rt.nf.fam()), el(rt.nf)};
  }

  EvalResult restr_rule(const Env& env, const Term& m, TosTrace* tr) {
    Sub s1(tr);
    EvalResult rr = term(env, m.rec(), Demand::Value, s1.ptr());
    s1.commit();
    const Term& rt = record_type_of(env, m.rec(), rr.kind);
    Kind result_kind = el(rt.rec());
    if (is_pair_record(rr.whnf)) {
      if (tr) tr->rule = TosRule::RESTR;
      Sub s2(tr);
      EvalResult rp = term(env, rr.whnf.rec(), Demand::Value, s2.ptr());
      s2.commit();
      require_kind(env, rr.whnf.rec(), rp.kind, result_kind, "restriction");
      done(TosRule::RESTR);
      return {rp.whnf, rp.nf, result_kind};
    }
    if (tr) tr->rule = TosRule::BASE_RESTR;
    if (is_pair_record(rr.nf)) fail(env, m, "normal form of a neutral record is a pair-record");
    done(TosRule::BASE_RESTR);
    return {restr(rr.whnf), restr(rr.nf), result_kind};
  }

  EvalResult sel_rule(const Env& env, const Term& m, Demand d, TosTrace* tr) {
    Sub s1(tr);
    EvalResult rr = term(env, m.rec(), Demand::Value, s1.ptr());
    s1.commit();
    const Term& rt = record_type_of(env, m.rec(), rr.kind);
    if (rt.label() != m.label()) {
      if (tr) tr->rule = TosRule::FLDSL_PRIME;
      Sub s2(tr);
      EvalResult rs = term(env, sel(restr(m.rec()), m.label()), d, s2.ptr());
      s2.commit();
      done(TosRule::FLDSL_PRIME);
      return rs;
    }
    if (is_pair_record(rr.whnf)) {
      if (tr) tr->rule = TosRule::FLDSEL;
      const Term& pr = rr.whnf;
      if (pr.label() != m.label()) fail(env, m, "pair-record label disagrees with its type");
      Sub s2(tr);
      EvalResult rb = term(env, pr.val(), Demand::Value, s2.ptr());
      s2.commit();
      Sub s3(tr);
      EvalResult rc = term(env, app(pr.fam(), pr.rec()), Demand::RecordType, s3.ptr());
      s3.commit();
      require_kind(env, m, rc.kind, type_kind(), "field family applied to the record");
      require_kind(env, pr.val(), rb.kind, el(rc.nf), "selected field");
      done(TosRule::FLDSEL);
      return {rb.whnf, rb.nf, el(rc.nf)};
    }
    if (tr) tr->rule = TosRule::BASE_FLDSEL;
    if (is_pair_record(rr.nf)) fail(env, m, "normal form of a neutral record is a pair-record");
    Sub s2(tr);
    EvalResult rc = term(env, app(rt.fam(), restr(m.rec())), Demand::RecordType, s2.ptr());
    s2.commit();
    require_kind(env, m, rc.kind, type_kind(), "field family applied to the restriction");
    done(TosRule::BASE_FLDSEL);
    return {sel(rr.whnf, m.label()), sel(rr.nf, m.label()), el(rc.nf)};
  }
};

Engine::Engine(EngineOptions opts) : impl_(std::make_unique<Impl>()) { impl_->opts = opts; }
Engine::~Engine() = default;

Context Engine::eval_context(const Context& g) {
  auto& im = *impl_;
  im.steps = 0;
  im.path.clear();
  im.kind_path.clear();
  im.groups.clear();
  im.last.reset();
  std::optional<TosTrace> tr;
  if (im.opts.trace) tr.emplace();
  Env env = im.context(g, tr ? &*tr : nullptr);
  if (tr) im.last = std::move(tr);
  std::vector<Decl> ds;
  for (const auto& e : env) ds.push_back({e.name, e.nf});
  return Context(std::move(ds));
}

Kind Engine::eval_kind(const Context& g, const Kind& k) {
  auto& im = *impl_;
  im.steps = 0;
  im.path.clear();
  im.kind_path.clear();
  im.groups.clear();
  im.last.reset();
  const Env& env = im.env_for(g);
  std::optional<TosTrace> tr;
  if (im.opts.trace) tr.emplace();
  Kind out = im.kind(env, k, tr ? &*tr : nullptr);
  if (tr) im.last = std::move(tr);
  return out;
}

EvalResult Engine::eval_term(const Context& g, const Term& m, Demand d) {
  auto& im = *impl_;
  im.steps = 0;
  im.path.clear();
  im.kind_path.clear();
  im.groups.clear();
  im.last.reset();
  const Env& env = im.env_for(g);
  std::optional<TosTrace> tr;
  if (im.opts.trace) tr.emplace();
  EvalResult out = im.term(env, m, d, tr ? &*tr : nullptr);
  if (tr) im.last = std::move(tr);
  return out;
}

const std::optional<TosTrace>& Engine::last_trace() const { return impl_->last; }
const RuleCounts& Engine::counts() const { return impl_->counts; }
void Engine::reset_counts() { impl_->counts.fill(0); }
const EngineOptions& Engine::options() const { return impl_->opts; }
void Engine::set_trace(bool on) { impl_->opts.trace = on; }

}  // namespace idrt
