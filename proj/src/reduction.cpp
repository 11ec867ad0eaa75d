#include "idrt/reduction.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_set>

#include "idrt/frontend.hpp"

namespace idrt {

std::string_view step_name(StepKind k) {
  switch (k) {
    case StepKind::Beta:
      return "Beta";
    case StepKind::Eta:
      return "Eta";
    case StepKind::Pi1:
      return "Pi1";
    case StepKind::Pi2:
      return "Pi2";
    case StepKind::Pi2Prime:
      return "Pi2Prime";
  }
  return "?";
}

std::optional<StepKind> step_from_name(std::string_view s) {
  for (StepKind k : {StepKind::Beta, StepKind::Eta, StepKind::Pi1, StepKind::Pi2, StepKind::Pi2Prime}) {
    if (step_name(k) == s) return k;
  }
  return std::nullopt;
}

bool is_beta_r(StepKind k) { return k != StepKind::Eta; }

bool is_eta_redex(const Term& t) {
  if (t.tag() != TermTag::Lam) return false;
  const Term& b = t.body();
  return b.tag() == TermTag::App && b.arg().tag() == TermTag::Bound && b.arg().index() == 0 &&
         !occurs_bound(b.fun(), 0);
}

std::optional<Step> root_redex(const Term& t) {
  switch (t.tag()) {
    case TermTag::App:
      if (t.fun().tag() == TermTag::Lam) {
        return Step{StepKind::Beta, instantiate(t.fun().body(), t.arg())};
      }
      return std::nullopt;
    case TermTag::Lam:
      if (is_eta_redex(t)) return Step{StepKind::Eta, shift(t.body().fun(), -1)};
      return std::nullopt;
    case TermTag::Restr:
      if (is_pair_record(t.rec())) return Step{StepKind::Pi1, t.rec().rec()};
      return std::nullopt;
    case TermTag::Sel:
      if (is_pair_record(t.rec())) {
        const Term& r = t.rec();
        if (r.label() == t.label()) return Step{StepKind::Pi2, r.val()};
        return Step{StepKind::Pi2Prime, sel(r.rec(), t.label())};
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

namespace {

void add_unique(std::vector<Step>& out, Step s) {
  for (const auto& o : out) {
    if (o.kind == s.kind && alpha_eq(o.result, s.result)) return;
  }
  out.push_back(std::move(s));
}

void add_unique(std::vector<std::pair<StepKind, Kind>>& out, StepKind k, Kind v) {
  for (const auto& o : out) {
    if (o.first == k && alpha_eq(o.second, v)) return;
  }
  out.emplace_back(k, std::move(v));
}

}  // namespace

std::vector<std::pair<StepKind, Kind>> one_step(const Kind& k) {
  std::vector<std::pair<StepKind, Kind>> out;
  switch (k.tag()) {
    case KindTag::El:
      for (auto& s : one_step(k.term())) add_unique(out, s.kind, el(s.result));
      break;
    case KindTag::Prod:
      for (auto& [sk, d] : one_step(k.dom())) add_unique(out, sk, prod(k.binder(), d, k.cod()));
      for (auto& [sk, c] : one_step(k.cod())) add_unique(out, sk, prod(k.binder(), k.dom(), c));
      break;
    default:
      break;
  }
  return out;
}

std::vector<Step> one_step(const Term& t) {
  std::vector<Step> out;
  if (auto r = root_redex(t)) out.push_back(*r);
  switch (t.tag()) {
    case TermTag::Lam:
      for (auto& [sk, d] : one_step(t.dom())) add_unique(out, {sk, lam(t.name(), d, t.body())});
      for (auto& s : one_step(t.body())) add_unique(out, {s.kind, lam(t.name(), t.dom(), s.result)});
      break;
    case TermTag::App:
      for (auto& s : one_step(t.fun())) add_unique(out, {s.kind, app(s.result, t.arg())});
      for (auto& s : one_step(t.arg())) add_unique(out, {s.kind, app(t.fun(), s.result)});
      break;
    case TermTag::RecTypeExt:
      for (auto& s : one_step(t.rec())) add_unique(out, {s.kind, rec_type(s.result, t.label(), t.fam())});
      for (auto& s : one_step(t.fam())) add_unique(out, {s.kind, rec_type(t.rec(), t.label(), s.result)});
      break;
    case TermTag::RecExt:
      for (auto& s : one_step(t.rec()))
        add_unique(out, {s.kind, rec(s.result, t.label(), t.val(), t.fam())});
      for (auto& s : one_step(t.val()))
        add_unique(out, {s.kind, rec(t.rec(), t.label(), s.result, t.fam())});
      for (auto& s : one_step(t.fam()))
        add_unique(out, {s.kind, rec(t.rec(), t.label(), t.val(), s.result)});
      break;
    case TermTag::Restr:
      for (auto& s : one_step(t.rec())) add_unique(out, {s.kind, restr(s.result)});
      break;
    case TermTag::Sel:
      for (auto& s : one_step(t.rec())) add_unique(out, {s.kind, sel(s.result, t.label())});
      break;
    default:
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic strategies

namespace {

std::optional<std::pair<StepKind, Kind>> kind_step(const Kind& k, Strategy s);

std::optional<Step> term_step(const Term& t, Strategy s) {
  const bool outer = s == Strategy::LeftmostOutermost;
  if (outer) {
    if (auto r = root_redex(t)) return r;
  }
  // Children in textual order for leftmost, reversed for rightmost.
  std::optional<Step> found;
  auto try_term = [&](const Term& child, auto rebuild) {
    if (found) return;
    if (auto r = term_step(child, s)) found = Step{r->kind, rebuild(r->result)};
  };
  auto try_kind = [&](const Kind& child, auto rebuild) {
    if (found) return;
    if (auto r = kind_step(child, s)) found = Step{r->first, rebuild(r->second)};
  };
  switch (t.tag()) {
    case TermTag::Lam: {
      auto d = [&] { try_kind(t.dom(), [&](const Kind& k) { return lam(t.name(), k, t.body()); }); };
      auto b = [&] { try_term(t.body(), [&](const Term& x) { return lam(t.name(), t.dom(), x); }); };
      if (outer) { d(); b(); } else { b(); d(); }
      break;
    }
    case TermTag::App: {
      auto f = [&] { try_term(t.fun(), [&](const Term& x) { return app(x, t.arg()); }); };
      auto a = [&] { try_term(t.arg(), [&](const Term& x) { return app(t.fun(), x); }); };
      if (outer) { f(); a(); } else { a(); f(); }
      break;
    }
    case TermTag::RecTypeExt: {
      auto r = [&] { try_term(t.rec(), [&](const Term& x) { return rec_type(x, t.label(), t.fam()); }); };
      auto a = [&] { try_term(t.fam(), [&](const Term& x) { return rec_type(t.rec(), t.label(), x); }); };
      if (outer) { r(); a(); } else { a(); r(); }
      break;
    }
    case TermTag::RecExt: {
      auto r = [&] { try_term(t.rec(), [&](const Term& x) { return rec(x, t.label(), t.val(), t.fam()); }); };
      auto v = [&] { try_term(t.val(), [&](const Term& x) { return rec(t.rec(), t.label(), x, t.fam()); }); };
      auto a = [&] { try_term(t.fam(), [&](const Term& x) { return rec(t.rec(), t.label(), t.val(), x); }); };
      if (outer) { r(); v(); a(); } else { a(); v(); r(); }
      break;
    }
    case TermTag::Restr:
      try_term(t.rec(), [&](const Term& x) { return restr(x); });
      break;
    case TermTag::Sel:
      try_term(t.rec(), [&](const Term& x) { return sel(x, t.label()); });
      break;
    default:
      break;
  }
  if (found) return found;
  if (!outer) return root_redex(t);
  return std::nullopt;
}

std::optional<std::pair<StepKind, Kind>> kind_step(const Kind& k, Strategy s) {
  switch (k.tag()) {
    case KindTag::El:
      if (auto r = term_step(k.term(), s)) return std::make_pair(r->kind, el(r->result));
      return std::nullopt;
    case KindTag::Prod: {
      bool outer = s == Strategy::LeftmostOutermost;
      for (int pass = 0; pass < 2; ++pass) {
        bool dom_first = (pass == 0) == outer;
        if (dom_first) {
          if (auto r = kind_step(k.dom(), s)) return std::make_pair(r->first, prod(k.binder(), r->second, k.cod()));
        } else {
          if (auto r = kind_step(k.cod(), s)) return std::make_pair(r->first, prod(k.binder(), k.dom(), r->second));
        }
      }
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

std::optional<Step> strategy_step(const Term& t, Strategy s) { return term_step(t, s); }

NormalizeResult normalize_untyped(const Term& t, std::size_t fuel, Strategy s) {
  NormalizeResult res{t, false, 0};
  while (auto st = term_step(res.term, s)) {
    if (res.steps == fuel) {
      res.exhausted = true;
      return res;
    }
    res.term = st->result;
    ++res.steps;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Normal-form predicates

bool is_whnf(const Term& t) {
  switch (t.tag()) {
    case TermTag::Free:
    case TermTag::Bound:
    case TermTag::Lam:
    case TermTag::EmptyRec:
    case TermTag::RecExt:
    case TermTag::RecTypeExt:
      return true;
    case TermTag::App:
      return is_whnf(t.fun()) && !is_abstraction(t.fun());
    case TermTag::Restr:
    case TermTag::Sel:
      return is_whnf(t.rec()) && !is_pair_record(t.rec());
    case TermTag::Hole:
      return false;
  }
  return false;
}

bool is_normal(const Term& t) {
  switch (t.tag()) {
    case TermTag::Free:
    case TermTag::Bound:
    case TermTag::EmptyRec:
      return true;
    case TermTag::Lam:
      return is_normal(t.dom()) && is_normal(t.body()) && !is_eta_redex(t);
    case TermTag::App:
      return is_normal(t.fun()) && !is_abstraction(t.fun()) && is_normal(t.arg());
    case TermTag::RecTypeExt:
      return is_normal(t.rec()) && is_normal(t.fam());
    case TermTag::RecExt:
      return is_normal(t.rec()) && is_normal(t.val()) && is_normal(t.fam());
    case TermTag::Restr:
    case TermTag::Sel:
      return is_normal(t.rec()) && !is_pair_record(t.rec());
    case TermTag::Hole:
      return false;
  }
  return false;
}

bool is_normal(const Kind& k) {
  switch (k.tag()) {
    case KindTag::El:
      return is_normal(k.term());
    case KindTag::Prod:
      return is_normal(k.dom()) && is_normal(k.cod());
    default:
      return true;
  }
}

// ---------------------------------------------------------------------------
// Parallel reduction

namespace {

void push_unique(std::vector<Term>& out, Term t) {
  for (const auto& o : out) {
    if (alpha_eq(o, t)) return;
  }
  out.push_back(std::move(t));
}

void push_unique(std::vector<Kind>& out, Kind k) {
  for (const auto& o : out) {
    if (alpha_eq(o, k)) return;
  }
  out.push_back(std::move(k));
}

}  // namespace

std::vector<Kind> parallel_reducts(const Kind& k) {
  std::vector<Kind> out;
  switch (k.tag()) {
    case KindTag::El:
      for (auto& t : parallel_reducts(k.term())) push_unique(out, el(t));
      break;
    case KindTag::Prod: {
      auto ds = parallel_reducts(k.dom());
      auto cs = parallel_reducts(k.cod());
      for (auto& d : ds)
        for (auto& c : cs) push_unique(out, prod(k.binder(), d, c));
      break;
    }
    default:
      out.push_back(k);
  }
  return out;
}

std::vector<Term> parallel_reducts(const Term& t) {
  std::vector<Term> out;
  switch (t.tag()) {
    case TermTag::Free:
    case TermTag::Bound:
    case TermTag::EmptyRec:
    case TermTag::Hole:
      out.push_back(t);
      break;
    case TermTag::Lam: {
      auto ds = parallel_reducts(t.dom());
      auto bs = parallel_reducts(t.body());
      for (auto& d : ds)
        for (auto& b : bs) push_unique(out, lam(t.name(), d, b));
      for (auto& b : bs) {
        if (b.tag() == TermTag::App && b.arg().tag() == TermTag::Bound && b.arg().index() == 0 &&
            !occurs_bound(b.fun(), 0)) {
          push_unique(out, shift(b.fun(), -1));
        }
      }
      break;
    }
    case TermTag::App: {
      auto fs = parallel_reducts(t.fun());
      auto as = parallel_reducts(t.arg());
      for (auto& f : fs)
        for (auto& a : as) push_unique(out, app(f, a));
      if (t.fun().tag() == TermTag::Lam) {
        auto bs = parallel_reducts(t.fun().body());
        for (auto& b : bs)
          for (auto& a : as) push_unique(out, instantiate(b, a));
      }
      break;
    }
    case TermTag::RecTypeExt: {
      auto rs = parallel_reducts(t.rec());
      auto as = parallel_reducts(t.fam());
      for (auto& r : rs)
        for (auto& a : as) push_unique(out, rec_type(r, t.label(), a));
      break;
    }
    case TermTag::RecExt: {
      auto rs = parallel_reducts(t.rec());
      auto vs = parallel_reducts(t.val());
      auto as = parallel_reducts(t.fam());
      for (auto& r : rs)
        for (auto& v : vs)
          for (auto& a : as) push_unique(out, rec(r, t.label(), v, a));
      break;
    }
    case TermTag::Restr: {
      for (auto& r : parallel_reducts(t.rec())) push_unique(out, restr(r));
      if (is_pair_record(t.rec())) {
        for (auto& r : parallel_reducts(t.rec().rec())) push_unique(out, r);
      }
      break;
    }
    case TermTag::Sel: {
      for (auto& r : parallel_reducts(t.rec())) push_unique(out, sel(r, t.label()));
      if (is_pair_record(t.rec())) {
        const Term& pr = t.rec();
        if (pr.label() == t.label()) {
          for (auto& a : parallel_reducts(pr.val())) push_unique(out, a);
        } else {
          for (auto& r : parallel_reducts(pr.rec())) push_unique(out, sel(r, t.label()));
        }
      }
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reduction graphs

std::optional<std::size_t> ReductionGraph::find(const Term& t) const {
  if (index_.size() != nodes.size()) {
    index_.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) index_.emplace(nodes[i], i);
  }
  auto it = index_.find(t);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<std::size_t>> ReductionGraph::successors() const {
  std::vector<std::vector<std::size_t>> out(nodes.size());
  for (const auto& e : edges) {
    auto& v = out[e.src];
    if (std::find(v.begin(), v.end(), e.dst) == v.end()) v.push_back(e.dst);
  }
  return out;
}

bool ReductionGraph::acyclic() const {
  auto succ = successors();
  std::vector<int> color(nodes.size(), 0);
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    if (color[s]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
    color[s] = 1;
    while (!stack.empty()) {
      auto& [n, i] = stack.back();
      if (i < succ[n].size()) {
        std::size_t m = succ[n][i++];
        if (color[m] == 1) return false;
        if (color[m] == 0) {
          color[m] = 1;
          stack.emplace_back(m, 0);
        }
      } else {
        color[n] = 2;
        stack.pop_back();
      }
    }
  }
  return true;
}

std::vector<bool> ReductionGraph::reachable(std::size_t from, bool (*filter)(StepKind)) const {
  std::vector<std::vector<std::size_t>> succ(nodes.size());
  for (const auto& e : edges) {
    if (!filter || filter(e.kind)) succ[e.src].push_back(e.dst);
  }
  std::vector<bool> seen(nodes.size(), false);
  std::vector<std::size_t> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    std::size_t n = stack.back();
    stack.pop_back();
    for (std::size_t m : succ[n]) {
      if (!seen[m]) {
        seen[m] = true;
        stack.push_back(m);
      }
    }
  }
  return seen;
}

bool ReductionGraph::joinable() const {
  const std::size_t n = nodes.size();
  std::vector<std::vector<bool>> reach;
  reach.reserve(n);
  for (std::size_t i = 0; i < n; ++i) reach.push_back(reachable(i));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      bool ok = false;
      for (std::size_t c = 0; c < n && !ok; ++c) ok = reach[a][c] && reach[b][c];
      if (!ok) return false;
    }
  }
  return true;
}

std::vector<std::size_t> ReductionGraph::normal_nodes() const {
  auto succ = successors();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (succ[i].empty()) out.push_back(i);
  }
  return out;
}

std::string ReductionGraph::to_text() const {
  std::ostringstream out;
  out << "nodes " << nodes.size() << "\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) out << i << " " << print_term(nodes[i]) << "\n";
  out << "edges " << edges.size() << "\n";
  for (const auto& e : edges) out << e.src << " " << step_name(e.kind) << " " << e.dst << "\n";
  out << "truncated " << (truncated ? "true" : "false") << "\n";
  return out.str();
}

ReductionGraph reduction_graph(const Term& t, std::size_t node_fuel) {
  ReductionGraph g;
  g.nodes.push_back(t);
  g.index_.emplace(t, 0);
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    std::size_t cur = queue.front();
    queue.pop_front();
    for (auto& s : one_step(g.nodes[cur])) {
      auto it = g.index_.find(s.result);
      std::size_t dst;
      if (it != g.index_.end()) {
        dst = it->second;
      } else {
        if (g.nodes.size() >= node_fuel) {
          g.truncated = true;
          continue;
        }
        dst = g.nodes.size();
        g.nodes.push_back(s.result);
        g.index_.emplace(s.result, dst);
        queue.push_back(dst);
      }
      g.edges.push_back({cur, s.kind, dst});
    }
  }
  return g;
}

}  // namespace idrt
