#include "idrt/checker.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "idrt/frontend.hpp"

namespace idrt {

namespace {

CheckReport rejected(std::string reason, std::string rule, std::vector<std::string> path = {}) {
  CheckReport r;
  r.verdict = Verdict::Rejected;
  r.failure = CheckFailure{std::move(path), std::move(reason), std::move(rule)};
  return r;
}

// Runs body and turns engine errors into a rejected report.
template <class F>
CheckReport guarded(Engine& e, F&& body) {
  try {
    CheckReport r = body();
    if (r.accepted() && e.options().trace && e.last_trace()) r.trace = e.last_trace();
    return r;
  } catch (const NotDerivable& err) {
    return rejected(err.reason() + " (at " + err.subject() + ")", err.rule(), err.path());
  } catch (const FuelExhausted& err) {
    return rejected(err.what(), "fuel");
  } catch (const std::invalid_argument& err) {
    return rejected(err.what(), "elaboration");
  }
}

}  // namespace

bool subkind(const Kind& sub, const Kind& sup) {
  if (alpha_eq(sub, sup)) return true;
  switch (sub.tag()) {
    case KindTag::RTypeL:
      if (sup.tag() == KindTag::RTypeL) return is_subset(sub.labels(), sup.labels());
      return sup.tag() == KindTag::RType || sup.tag() == KindTag::Type;
    case KindTag::RType:
      return sup.tag() == KindTag::Type;
    default:
      return false;
  }
}

std::string CheckReport::to_text() const {
  std::ostringstream out;
  if (accepted()) {
    out << "accepted";
    if (nf) out << "\n  nf:   " << print_term(*nf);
    if (whnf) out << "\n  whnf: " << print_term(*whnf);
    if (kind) out << "\n  kind: " << print_kind(*kind);
    if (context && !nf && !kind) out << "\n  context: " << print_context(*context);
  } else {
    out << "rejected";
    if (failure) {
      out << "\n  reason: " << failure->reason;
      if (!failure->rule.empty()) out << "\n  rule:   " << failure->rule;
      for (const auto& p : failure->path) out << "\n  in:     " << p;
    }
  }
  if (trace) out << "\n" << trace->to_text();
  return out.str();
}

Checker::Checker(EngineOptions opts) : engine_(opts) {}

CheckReport Checker::check_context(const Context& g) {
  return guarded(engine_, [&] {
    CheckReport r;
    r.context = engine_.eval_context(g);
    r.verdict = Verdict::Accepted;
    return r;
  });
}

CheckReport Checker::check_kind(const Context& g, const Kind& k) {
  return guarded(engine_, [&] {
    CheckReport r;
    r.kind = engine_.eval_kind(g, k);
    r.verdict = Verdict::Accepted;
    return r;
  });
}

CheckReport Checker::infer(const Context& g, const Term& m, Demand d) {
  return guarded(engine_, [&] {
    EvalResult e = engine_.eval_term(g, m, d);
    CheckReport r;
    r.verdict = Verdict::Accepted;
    r.whnf = e.whnf;
    r.nf = e.nf;
    r.kind = e.kind;
    return r;
  });
}

CheckReport Checker::check(const Context& g, const Term& m, const Kind& k) {
  return guarded(engine_, [&] {
    Kind want = engine_.eval_kind(g, k);
    Term subject = contains_hole(m) ? fill_families(m, want) : m;
    EvalResult e = engine_.eval_term(g, subject, demand_of(want));
    if (!subkind(e.kind, want)) {
      NameSet dom = g.domain();
      return rejected("kind mismatch: inferred " + print_kind(e.kind, dom) + ", expected " +
                          print_kind(want, dom),
                      "CONV", {print_term(subject, dom)});
    }
    CheckReport r;
    r.verdict = Verdict::Accepted;
    r.whnf = e.whnf;
    r.nf = e.nf;
    r.kind = e.kind;
    return r;
  });
}

CheckReport Checker::equal(const Context& g, const Term& m, const Term& n, const Kind& k) {
  CheckReport a = check(g, m, k);
  if (!a.accepted()) return a;
  CheckReport b = check(g, n, k);
  if (!b.accepted()) return b;
  if (!alpha_eq(*a.nf, *b.nf)) {
    NameSet dom = g.domain();
    return rejected("normal forms differ: " + print_term(*a.nf, dom) + " vs " + print_term(*b.nf, dom),
                    "EQ");
  }
  return a;
}

CheckReport Checker::kind_equal(const Context& g, const Kind& a, const Kind& b) {
  CheckReport ra = check_kind(g, a);
  if (!ra.accepted()) return ra;
  CheckReport rb = check_kind(g, b);
  if (!rb.accepted()) return rb;
  if (!alpha_eq(*ra.kind, *rb.kind)) {
    NameSet dom = g.domain();
    return rejected("normal kinds differ: " + print_kind(*ra.kind, dom) + " vs " + print_kind(*rb.kind, dom),
                    "KEQ");
  }
  return ra;
}

CheckReport Checker::check_judgement(const Judgement& j) {
  switch (j.form) {
    case JudgementForm::CtxValid:
      return check_context(j.ctx);
    case JudgementForm::KindWf: {
      CheckReport c = check_context(j.ctx);
      return c.accepted() ? check_kind(j.ctx, j.k1) : c;
    }
    case JudgementForm::KindEq: {
      CheckReport c = check_context(j.ctx);
      return c.accepted() ? kind_equal(j.ctx, j.k1, j.k2) : c;
    }
    case JudgementForm::HasKind: {
      CheckReport c = check_context(j.ctx);
      return c.accepted() ? check(j.ctx, j.t1, j.k1) : c;
    }
    case JudgementForm::TermEq: {
      CheckReport c = check_context(j.ctx);
      return c.accepted() ? equal(j.ctx, j.t1, j.t2, j.k1) : c;
    }
  }
  return rejected("unknown judgement form", "");
}

bool FileResult::ok() const {
  return std::all_of(results.begin(), results.end(), [](const DirectiveResult& r) { return r.report.accepted(); });
}

FileResult check_file(const SourceFile& f, EngineOptions opts) {
  Checker chk(opts);
  FileResult out;
  Context g;
  for (const auto& d : f.directives) {
    DirectiveResult r{d, g, {}};
    switch (d.what) {
      case DirectiveKind::Declare: {
        Context next = g.extended(d.name, d.classifier);
        r.report = chk.check_context(next);
        if (r.report.accepted()) {
          r.report.kind = r.report.context->entries().back().kind;
          g = std::move(next);
        }
        break;
      }
      case DirectiveKind::Check:
        r.report = chk.check(g, d.lhs, d.classifier);
        break;
      case DirectiveKind::Eq:
        r.report = chk.equal(g, d.lhs, d.rhs, d.classifier);
        break;
      case DirectiveKind::Normalize:
        r.report = chk.infer(g, d.lhs);
        break;
    }
    out.results.push_back(std::move(r));
  }
  return out;
}

}  // namespace idrt
