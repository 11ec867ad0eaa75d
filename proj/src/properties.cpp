#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <unordered_set>

#include "idrt/checker.hpp"
#include "idrt/frontend.hpp"
#include "idrt/oracle.hpp"
#include "idrt/reduction.hpp"

namespace idrt {

namespace {

constexpr std::array<std::string_view, kPropertyCount> kNames{
    "Determinacy",       "AdequacyReduction", "AdequacyForms",      "PSR",
    "SubjectReduction",  "ChurchRosser",      "StrongNormalization", "SoundnessBridge",
    "CompletenessBridge", "Weakening",        "Strengthening",      "ContextValidity",
};

std::size_t idx(Property p) { return static_cast<std::size_t>(p); }

std::string show(const Context& g, const Term& m) {
  return print_context(g) + " |- " + print_term(m, g.domain());
}

std::string show(const Context& g, const Term& m, Demand d) {
  return show(g, m) + (d == Demand::RecordType ? "  (as a record type)" : "");
}

std::string show_result(const Context& g, const EvalResult& r) {
  NameSet avoid = g.domain();
  return "whnf " + print_term(r.whnf, avoid) + ", nf " + print_term(r.nf, avoid) + ", kind " + print_kind(r.kind, avoid);
}

bool only_beta_r(StepKind k) { return is_beta_r(k); }
bool only_eta(StepKind k) { return k == StepKind::Eta; }

bool same(const EvalResult& a, const EvalResult& b) {
  return alpha_eq(a.whnf, b.whnf) && alpha_eq(a.nf, b.nf) && alpha_eq(a.kind, b.kind);
}

// Runs f, turning evaluation errors into a message.
template <class F>
std::optional<std::string> attempt(F&& f) {
  try {
    f();
    return std::nullopt;
  } catch (const NotDerivable& e) {
    return std::string("rejected: ") + e.what();
  } catch (const FuelExhausted& e) {
    return std::string("fuel exhausted: ") + e.what();
  } catch (const std::exception& e) {
    return std::string("error: ") + e.what();
  }
}

void count_rules(const DerivPtr& root, DeclRuleCounts& counts) {
  std::unordered_set<const DeclDerivation*> seen;
  std::vector<const DeclDerivation*> stack{root.get()};
  while (!stack.empty()) {
    const DeclDerivation* d = stack.back();
    stack.pop_back();
    if (!seen.insert(d).second) continue;
    ++counts[static_cast<std::size_t>(d->rule)];
    for (const auto& p : d->premises) stack.push_back(p.get());
  }
}

}  // namespace

std::string_view property_name(Property p) { return kNames[idx(p)]; }

std::optional<Property> property_from_name(std::string_view s) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == s) return static_cast<Property>(i);
  }
  return std::nullopt;
}

std::vector<Property> all_properties() {
  std::vector<Property> out;
  for (std::size_t i = 0; i < kPropertyCount; ++i) out.push_back(static_cast<Property>(i));
  return out;
}

std::string report_table(const std::vector<PropertyReport>& rs) {
  std::ostringstream os;
  std::size_t w = 8;
  for (const auto& r : rs) w = std::max(w, r.property.size());
  os << "property" << std::string(w - 8 + 2, ' ') << "instances  failures  status\n";
  for (const auto& r : rs) {
    std::string inst = std::to_string(r.instances_checked);
    std::string fail = std::to_string(r.failures.size());
    os << r.property << std::string(w - r.property.size() + 2, ' ') << std::string(9 - std::min<std::size_t>(9, inst.size()), ' ')
       << inst << "  " << std::string(8 - std::min<std::size_t>(8, fail.size()), ' ') << fail << "  "
       << (r.passed() ? "pass" : "FAIL") << "\n";
  }
  for (const auto& r : rs) {
    if (r.passed()) continue;
    const auto& f = r.failures.front();
    os << "\n" << r.property << ": first failure of " << r.failures.size() << "\n"
       << "  input:    " << f.input << "\n"
       << "  expected: " << f.expected << "\n"
       << "  got:      " << f.got << "\n";
  }
  return os.str();
}

Oracle::Oracle(EnumConfig cfg) : cfg_(std::move(cfg)), reports_(kPropertyCount) { cfg_.validate(); }

const Corpus& Oracle::corpus() {
  if (!corpus_) corpus_ = build_corpus(cfg_);
  return *corpus_;
}

PropertyReport Oracle::run(Property p) {
  if (!reports_[idx(p)]) {
    switch (p) {
      case Property::SoundnessBridge:
      case Property::CompletenessBridge:
        run_bridges();
        break;
      case Property::Weakening:
      case Property::Strengthening:
      case Property::ContextValidity:
        structural_pass();
        break;
      default:
        graph_pass();
        break;
    }
  }
  return *reports_[idx(p)];
}

std::vector<PropertyReport> Oracle::structural_suite() {
  return {run(Property::Weakening), run(Property::Strengthening), run(Property::ContextValidity)};
}

// Every property read off an item's reduction graph, in one sweep.
void Oracle::graph_pass() {
  const Corpus& c = corpus();
  const Property props[] = {Property::Determinacy,      Property::AdequacyReduction, Property::AdequacyForms,
                            Property::PSR,              Property::SubjectReduction,  Property::ChurchRosser,
                            Property::StrongNormalization};
  std::array<PropertyReport, 7> rs;
  for (std::size_t i = 0; i < 7; ++i) rs[i].property = std::string(property_name(props[i]));
  auto& det = rs[0];
  auto& adr = rs[1];
  auto& adf = rs[2];
  auto& psr = rs[3];
  auto& sr = rs[4];
  auto& cr = rs[5];
  auto& sn = rs[6];

  Engine eng(EngineOptions{cfg_.eval_fuel, false, false});
  Checker chk(EngineOptions{cfg_.eval_fuel, false, false});

  for (const auto& it : c.items) {
    const Context& g = it.ctx;
    const Term& m = it.term;
    const EvalResult& res = it.result;
    std::string in = show(g, m, it.demand);
    // Reducts are classified by the same kind, which fixes how <> is read.
    const Demand rd = demand_of(res.kind);
    ReductionGraph gr = reduction_graph(m, cfg_.graph_fuel);

    // Strong normalisation and confluence of the untyped graph.
    ++sn.instances_checked;
    if (gr.truncated || !gr.acyclic()) {
      sn.failures.push_back({in, "finite acyclic reduction graph",
                             gr.truncated ? "graph truncated at " + std::to_string(gr.nodes.size()) + " nodes"
                                          : "cycle in reduction graph"});
    }
    ++cr.instances_checked;
    if (!gr.truncated && !gr.joinable()) {
      cr.failures.push_back({in, "every pair of reducts joinable", "a pair without common reduct"});
    }

    // Determinacy: the two strategies agree, and every reduct evaluates to the same normal form.
    ++det.instances_checked;
    NormalizeResult lo = normalize_untyped(m, cfg_.eval_fuel, Strategy::LeftmostOutermost);
    NormalizeResult ri = normalize_untyped(m, cfg_.eval_fuel, Strategy::RightmostInnermost);
    if (lo.exhausted || ri.exhausted || !alpha_eq(lo.term, ri.term)) {
      det.failures.push_back({in, "leftmost-outermost " + print_term(lo.term, g.domain()),
                              "rightmost-innermost " + print_term(ri.term, g.domain())});
    } else {
      for (std::size_t n = 1; n < gr.nodes.size(); ++n) {
        EvalResult r;
        auto err = attempt([&] { r = eng.eval_term(g, gr.nodes[n], rd); });
        if (err || !alpha_eq(r.nf, res.nf)) {
          det.failures.push_back({in, "reduct " + print_term(gr.nodes[n], g.domain()) + " has nf " +
                                          print_term(res.nf, g.domain()),
                                  err ? *err : "nf " + print_term(r.nf, g.domain())});
          break;
        }
      }
    }

    // Adequacy of forms.
    ++adf.instances_checked;
    if (!is_whnf(res.whnf) || !is_normal(res.nf) || !is_normal(res.kind)) {
      adf.failures.push_back({in, "whnf in weak-head normal form, nf and kind normal", show_result(g, res)});
    }

    // Adequacy w.r.t. untyped reduction: M ->>βR N ->>βR ·->>η P.
    ++adr.instances_checked;
    if (!gr.truncated) {
      auto n_at = gr.find(res.whnf);
      auto p_at = gr.find(res.nf);
      std::vector<bool> from_m = gr.reachable(gr.root(), only_beta_r);
      if (!n_at || !from_m[*n_at]) {
        adr.failures.push_back({in, "whnf " + print_term(res.whnf, g.domain()) + " reachable by βR steps",
                                n_at ? "only reachable using η steps" : "not a reduct"});
      } else {
        bool ok = false;
        if (p_at) {
          std::vector<bool> from_n = gr.reachable(*n_at, only_beta_r);
          for (std::size_t s = 0; s < gr.nodes.size() && !ok; ++s) {
            if (from_n[s] && gr.reachable(s, only_eta)[*p_at]) ok = true;
          }
        }
        if (!ok) {
          adr.failures.push_back({in, "nf " + print_term(res.nf, g.domain()) + " reachable by βR steps then η steps",
                                  p_at ? "phase order violated" : "not a reduct"});
        }
      }
    }

    // Subject reduction at the declarative level, via the checker.
    ++sr.instances_checked;
    for (const auto& st : one_step(m)) {
      CheckReport rep = chk.check(g, st.result, res.kind);
      if (!rep.accepted()) {
        sr.failures.push_back({in, print_term(st.result, g.domain()) + " : " + print_kind(res.kind, g.domain()),
                               rep.failure ? rep.failure->reason : "rejected"});
        break;
      }
    }

    // Parallel subject reduction.
    ++psr.instances_checked;
    for (const auto& red : parallel_reducts(m)) {
      EvalResult r;
      auto err = attempt([&] { r = eng.eval_term(g, red, rd); });
      if (err || !alpha_eq(r.nf, res.nf) || !alpha_eq(r.kind, res.kind)) {
        psr.failures.push_back({in + "  ⇒  " + print_term(red, g.domain()),
                                "nf " + print_term(res.nf, g.domain()) + ", kind " + print_kind(res.kind, g.domain()),
                                err ? *err : show_result(g, r)});
        break;
      }
    }
  }
  for (std::size_t i = 0; i < 7; ++i) reports_[idx(props[i])] = std::move(rs[i]);
}

namespace {

// Substitution-rule instances built from derivations found by derive_auto:
// G = (T:Type, F:(El(T))Type, c:El(T)) and x:El(T) substituted by c (or c = I(c)).
std::vector<DerivPtr> substitution_instances(const EnumConfig& cfg, PropertyReport& complete) {
  using R = DeclRule;
  using J = Judgement;
  DeriveOptions full;
  full.variant = SystemVariant::Full;
  DeriveSession session(full);
  std::vector<DerivPtr> out;
  auto need = [&](const Judgement& j) -> DerivPtr {
    ++complete.instances_checked;
    DeriveResult r = session.derive(j);
    if (!r.deriv) complete.failures.push_back({print_judgement(j), "a derivation (full system)", r.reason});
    return r.deriv;
  };

  Context g = parse_context("T : Type, F : (El(T))Type, c : El(T)");
  Kind k = parse_kind("El(T)");
  Term n = parse_term("c");
  Term n2 = parse_term("([y : El(T)]y)(c)");
  DerivPtr arg = need(J::has_kind(g, n, k));
  DerivPtr arg_eq = need(J::term_eq(g, n, n2, k));
  if (!arg || !arg_eq) return out;

  const Name x = "x";
  Context gx = g.extended(x, k);
  // The context (G, x:El(T), F:(El(T))Type, v:El(F(x))) for SUBST_CTX.
  Context big = parse_context("T : Type, F : (El(T))Type, c : El(T), x : El(T), v : El(F(x))");
  if (DerivPtr d = need(J::ctx_valid(big))) {
    Context rest = parse_context("v : El(F(x))");
    std::vector<Decl> ds = g.entries();
    Context moved = substitute(rest, x, n);
    for (const auto& e : moved.entries()) ds.push_back(e);
    out.push_back(make_deriv(R::SUBST_CTX, J::ctx_valid(Context(ds)), {d, arg}));
  }

  EnumConfig small = cfg;
  small.random_samples = 0;
  std::map<R, std::size_t> made;
  constexpr std::size_t quota = 6;
  auto want = [&](R r) { return made[r] < quota; };
  auto emit = [&](R r, Judgement j, DerivPtr d, DerivPtr a) {
    ++made[r];
    out.push_back(make_deriv(r, std::move(j), {std::move(d), std::move(a)}));
  };
  for (std::size_t size = 1; size <= 6; ++size) {
    for (const auto& it : typed_terms(small, gx, size)) {
      if (!occurs_free(it.term, x) && !occurs_free(it.result.kind, x)) continue;
      const Term& m = it.term;
      const Kind& a = it.result.kind;
      const Term& p = it.result.nf;
      bool is_type = a.tag() == KindTag::Type || a.tag() == KindTag::RType || a.tag() == KindTag::RTypeL;
      if (want(R::SUBST_TERM) || want(R::SUBST_TERM_EQARG)) {
        if (DerivPtr d = need(J::has_kind(gx, m, a))) {
          emit(R::SUBST_TERM, J::has_kind(g, substitute(m, x, n), substitute(a, x, n)), d, arg);
          emit(R::SUBST_TERM_EQARG, J::term_eq(g, substitute(m, x, n), substitute(m, x, n2), substitute(a, x, n)), d,
               arg_eq);
        }
      }
      if (!alpha_eq(m, p) && want(R::SUBST_TERMEQ)) {
        if (DerivPtr d = need(J::term_eq(gx, m, p, a))) {
          emit(R::SUBST_TERMEQ, J::term_eq(g, substitute(m, x, n), substitute(p, x, n), substitute(a, x, n)), d, arg);
        }
      }
      if (!is_type) continue;
      Kind ka = el(m);
      if (want(R::SUBST_KIND) || want(R::SUBST_KIND_EQARG)) {
        if (DerivPtr d = need(J::kind_wf(gx, ka))) {
          emit(R::SUBST_KIND, J::kind_wf(g, substitute(ka, x, n)), d, arg);
          emit(R::SUBST_KIND_EQARG, J::kind_eq(g, substitute(ka, x, n), substitute(ka, x, n2)), d, arg_eq);
        }
      }
      Kind kp = el(p);
      if (!alpha_eq(ka, kp) && want(R::SUBST_KINDEQ)) {
        if (DerivPtr d = need(J::kind_eq(gx, ka, kp))) {
          emit(R::SUBST_KINDEQ, J::kind_eq(g, substitute(ka, x, n), substitute(kp, x, n)), d, arg);
        }
      }
    }
  }
  return out;
}

}  // namespace

// Completeness: derive_auto finds IDRT⁻ derivations of G |- M : A, M = whnf
// and M = nf for every corpus item, plus subsumption instances. Soundness:
// every generated derivation passes check_derivation and the checker accepts
// its conclusion.
void Oracle::run_bridges() {
  if (reports_[idx(Property::SoundnessBridge)]) return;
  const Corpus& c = corpus();
  PropertyReport sound, complete;
  sound.property = std::string(property_name(Property::SoundnessBridge));
  complete.property = std::string(property_name(Property::CompletenessBridge));

  DeriveOptions minus;
  minus.variant = SystemVariant::Minus;
  DeriveSession session(minus);
  Checker chk(EngineOptions{cfg_.eval_fuel, false, false});

  auto agree = [&](const DerivPtr& d, SystemVariant v) {
    ++sound.instances_checked;
    DeclCheckResult dr = check_derivation(*d, v);
    CheckReport cr = chk.check_judgement(d->conclusion);
    if (!dr.ok || !cr.accepted()) {
      sound.failures.push_back({print_judgement(d->conclusion), "accepted by both checkers",
                                std::string("declarative ") + (dr.ok ? "accepted" : dr.diagnostic->to_text()) +
                                    "; algorithmic " + (cr.accepted() ? "accepted" : cr.failure->reason)});
    }
  };

  auto attempt_minus = [&](const Judgement& j) {
    ++complete.instances_checked;
    DeriveResult r = session.derive(j);
    if (!r.deriv) {
      complete.failures.push_back({print_judgement(j), "an IDRT⁻ derivation within depth " + std::to_string(minus.depth),
                                   r.reason});
      return;
    }
    count_rules(r.deriv, decl_counts_);
    // derive_auto has already run check_derivation; the checker closes the loop.
    ++sound.instances_checked;
    CheckReport cr = chk.check_judgement(j);
    if (!cr.accepted()) {
      sound.failures.push_back({print_judgement(j), "accepted by the checker",
                                cr.failure ? cr.failure->reason : "rejected"});
    }
  };

  for (const auto& it : c.items) {
    const Kind& a = it.result.kind;
    attempt_minus(Judgement::has_kind(it.ctx, it.term, a));
    attempt_minus(Judgement::term_eq(it.ctx, it.term, it.result.whnf, a));
    attempt_minus(Judgement::term_eq(it.ctx, it.term, it.result.nf, a));
    // Subsumption along the record kind lattice.
    if (a.tag() == KindTag::RTypeL && it.term.size() <= 4) {
      for (const auto& l : cfg_.base_labels) {
        if (a.labels().contains(l)) continue;
        LabelSet more = a.labels();
        more.insert(l);
        attempt_minus(Judgement::has_kind(it.ctx, it.term, rtype(more)));
        break;
      }
      attempt_minus(Judgement::has_kind(it.ctx, it.term, rtype()));
      attempt_minus(Judgement::has_kind(it.ctx, it.term, type_kind()));
    }
  }

  for (const auto& d : substitution_instances(cfg_, complete)) {
    agree(d, SystemVariant::Full);
    count_rules(d, decl_counts_);
  }

  reports_[idx(Property::SoundnessBridge)] = std::move(sound);
  reports_[idx(Property::CompletenessBridge)] = std::move(complete);
}

void Oracle::structural_pass() {
  const Corpus& c = corpus();
  PropertyReport weak, strong, valid;
  weak.property = std::string(property_name(Property::Weakening));
  strong.property = std::string(property_name(Property::Strengthening));
  valid.property = std::string(property_name(Property::ContextValidity));
  Engine eng(EngineOptions{cfg_.eval_fuel, false, false});

  for (const auto& it : c.items) {
    const Context& g = it.ctx;
    std::string in = show(g, it.term, it.demand);

    // Weakening by a fresh opaque type and, when T is declared, a fresh constant of it.
    NameSet avoid = g.domain();
    collect_free_vars(it.term, avoid);
    std::vector<Context> wider{g.extended(fresh_name("W", avoid), type_kind())};
    if (g.declares("T")) wider.push_back(g.extended(fresh_name("w", avoid), el(var("T"))));
    for (const auto& gw : wider) {
      ++weak.instances_checked;
      EvalResult r;
      auto err = attempt([&] { r = eng.eval_term(gw, it.term, it.demand); });
      if (err || !same(r, it.result)) {
        weak.failures.push_back({show(gw, it.term, it.demand), show_result(g, it.result), err ? *err : show_result(gw, r)});
      }
    }

    // Strengthening: drop each declaration that nothing else mentions.
    NameSet used = free_vars(it.term);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Name& z = g[i].name;
      bool needed = used.contains(z);
      for (std::size_t j = i + 1; j < g.size() && !needed; ++j) needed = occurs_free(g[j].kind, z);
      std::vector<Decl> ds;
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (j != i) ds.push_back(g[j]);
      }
      Context gs(std::move(ds));
      ++strong.instances_checked;
      EvalResult r;
      auto err = attempt([&] { r = eng.eval_term(gs, it.term, it.demand); });
      if (!needed && (err || !same(r, it.result))) {
        strong.failures.push_back({show(gs, it.term, it.demand), show_result(g, it.result), err ? *err : show_result(gs, r)});
      } else if (needed && used.contains(z) && !err) {
        // Negative control: the subject itself mentions z.
        strong.failures.push_back({show(gs, it.term, it.demand), "rejected, " + z + " is used", show_result(gs, r)});
      }
    }

    // Context validity: every prefix of a context that supports an evaluation is valid.
    for (std::size_t n = 0; n <= g.size(); ++n) {
      ++valid.instances_checked;
      auto err = attempt([&] { eng.eval_context(g.prefix(n)); });
      if (err) valid.failures.push_back({in, "prefix of length " + std::to_string(n) + " valid", *err});
    }
  }
  reports_[idx(Property::Weakening)] = std::move(weak);
  reports_[idx(Property::Strengthening)] = std::move(strong);
  reports_[idx(Property::ContextValidity)] = std::move(valid);
}

Oracle::Coverage Oracle::coverage() {
  Coverage cov;
  cov.tos = corpus().tos_counts;
  run_bridges();
  cov.decl = decl_counts_;
  for (std::size_t i = 0; i < kTosRuleCount; ++i) {
    if (cov.tos[i] == 0) cov.missing.push_back("TOS " + std::string(tos_rule_name(static_cast<TosRule>(i))));
  }
  for (std::size_t i = 0; i < kDeclRuleCount; ++i) {
    if (cov.decl[i] == 0) cov.missing.push_back(std::string(rule_name(static_cast<DeclRule>(i))));
  }
  return cov;
}

PropertyReport run_property(Property p, const EnumConfig& cfg) {
  Oracle o(cfg);
  return o.run(p);
}

std::vector<PropertyReport> structural_suite(const EnumConfig& cfg) {
  Oracle o(cfg);
  return o.structural_suite();
}

PropertyReport script_agreement(const std::vector<NamedScript>& scripts, SystemVariant v) {
  PropertyReport rep;
  rep.property = std::string(property_name(Property::SoundnessBridge));
  Checker chk;
  for (const auto& ns : scripts) {
    for (std::size_t i = 0; i < ns.script.entries.size(); ++i) {
      const ScriptEntry& e = ns.script.entries[i];
      ++rep.instances_checked;
      std::string where = ns.name + ":" + std::to_string(e.span.begin.line);
      DeclCheckResult dr = check_derivation(*e.deriv, v);
      if (e.expect == Expectation::Valid) {
        CheckReport cr = chk.check_judgement(e.deriv->conclusion);
        if (!dr.ok || !cr.accepted()) {
          rep.failures.push_back({where + "  " + print_judgement(e.deriv->conclusion), "accepted by both checkers",
                                  std::string("declarative ") + (dr.ok ? "accepted" : dr.diagnostic->to_text()) +
                                      "; algorithmic " + (cr.accepted() ? "accepted" : cr.failure->reason)});
        }
      } else if (dr.ok) {
        rep.failures.push_back({where + "  " + print_judgement(e.deriv->conclusion), "derivation rejected",
                                "declarative checker accepted it"});
      }
    }
  }
  return rep;
}

}  // namespace idrt
