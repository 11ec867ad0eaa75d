#include <map>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "idrt/frontend.hpp"
#include "idrt/oracle.hpp"

namespace idrt {

void EnumConfig::validate() const {
  if (max_term_size == 0 || max_context_len == 0 || base_labels.empty() || base_types == 0) {
    throw std::invalid_argument("enumeration bounds must be strictly positive");
  }
  if (base_types > 2) throw std::invalid_argument("at most two opaque base types are supported");
}

std::vector<Context> base_contexts(const EnumConfig& cfg) {
  cfg.validate();
  std::vector<Label> ls(cfg.base_labels.begin(), cfg.base_labels.end());
  const std::string k = ls[0].name();
  const std::string l = ls.size() > 1 ? ls[1].name() : ls[0].name() + "2";
  std::vector<std::string> texts{
      "",
      "T : Type, c : El(T)",
      "T : Type, c : El(T), r : El(<" + k + " : T>)",
      "T : Type, c : El(T), r : El(<" + k + " : T, " + l + " : T>)",
      "T : Type, F : (El(T))Type, c : El(T), v : El(F(c))",
      "T : Type, F : (El(T))Type, s : El(<" + k + " : T, " + l + " : F(" + k + ")>)",
      "T : Type, R : RType[" + k + "], c : El(T)",
  };
  if (cfg.base_types >= 2) texts.emplace_back("T : Type, U : Type, c : El(T), d : El(U)");
  std::vector<Context> out;
  for (const auto& t : texts) {
    Context g = parse_context(t);
    if (g.size() <= cfg.max_context_len) out.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Raw enumeration over de Bruijn depth.

namespace {

std::vector<LabelSet> label_subsets(const LabelSet& ls) {
  std::vector<Label> v(ls.begin(), ls.end());
  std::vector<LabelSet> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << v.size()); ++mask) {
    LabelSet s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (mask & (std::size_t{1} << i)) s.insert(v[i]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

class RawEnum {
 public:
  RawEnum(const EnumConfig& cfg, const Context& g) : labels_(cfg.base_labels), subsets_(label_subsets(labels_)) {
    for (const auto& d : g.entries()) names_.push_back(d.name);
  }

  const std::vector<Term>& terms(std::uint32_t depth, std::size_t size) {
    auto key = std::make_pair(depth, size);
    if (auto it = terms_.find(key); it != terms_.end()) return it->second;
    std::vector<Term> out;
    if (size == 1) {
      for (const auto& n : names_) out.push_back(var(n));
      for (std::uint32_t i = 0; i < depth; ++i) out.push_back(bvar(i));
      out.push_back(empty_rec());
    } else {
      for (const auto& t : terms(depth, size - 1)) out.push_back(restr(t));
      for (const auto& l : labels_) {
        for (const auto& t : terms(depth, size - 1)) out.push_back(sel(t, l));
      }
      for (std::size_t a = 1; a + 1 < size; ++a) {
        for (const auto& f : terms(depth, a)) {
          for (const auto& x : terms(depth, size - 1 - a)) out.push_back(app(f, x));
        }
      }
      for (std::size_t a = 1; a + 1 < size; ++a) {
        for (const auto& l : labels_) {
          for (const auto& r : terms(depth, a)) {
            for (const auto& f : terms(depth, size - 1 - a)) out.push_back(rec_type(r, l, f));
          }
        }
      }
      for (std::size_t a = 1; a + 2 < size; ++a) {
        for (std::size_t b = 1; a + b + 1 < size; ++b) {
          std::size_t c = size - 1 - a - b;
          for (const auto& l : labels_) {
            for (const auto& r : terms(depth, a)) {
              for (const auto& v : terms(depth, b)) {
                for (const auto& f : terms(depth, c)) out.push_back(rec(r, l, v, f));
              }
            }
          }
        }
      }
      for (std::size_t a = 1; a + 1 < size; ++a) {
        for (const auto& k : kinds(depth, a)) {
          for (const auto& b : terms(depth + 1, size - 1 - a)) out.push_back(lam("x", k, b));
        }
      }
    }
    return terms_.emplace(key, std::move(out)).first->second;
  }

  const std::vector<Kind>& kinds(std::uint32_t depth, std::size_t size) {
    auto key = std::make_pair(depth, size);
    if (auto it = kinds_.find(key); it != kinds_.end()) return it->second;
    std::vector<Kind> out;
    if (size == 1) {
      out.push_back(type_kind());
      out.push_back(rtype());
      for (const auto& s : subsets_) out.push_back(rtype(s));
    } else {
      for (const auto& t : terms(depth, size - 1)) out.push_back(el(t));
      for (std::size_t a = 1; a + 1 < size; ++a) {
        for (const auto& k : kinds(depth, a)) {
          for (const auto& c : kinds(depth + 1, size - 1 - a)) out.push_back(prod("x", k, c));
        }
      }
    }
    return kinds_.emplace(key, std::move(out)).first->second;
  }

 private:
  LabelSet labels_;
  std::vector<LabelSet> subsets_;
  std::vector<Name> names_;
  std::map<std::pair<std::uint32_t, std::size_t>, std::vector<Term>> terms_;
  std::map<std::pair<std::uint32_t, std::size_t>, std::vector<Kind>> kinds_;
};

bool raw_ok(const EnumConfig& cfg, const NameSet& dom, const Kind& k);

bool raw_ok(const EnumConfig& cfg, const NameSet& dom, const Term& t) {
  switch (t.tag()) {
    case TermTag::Free:
      return dom.contains(t.name());
    case TermTag::Bound:
    case TermTag::EmptyRec:
      return true;
    case TermTag::Hole:
      return false;
    case TermTag::Lam:
      return raw_ok(cfg, dom, t.dom()) && raw_ok(cfg, dom, t.body());
    case TermTag::App:
      return raw_ok(cfg, dom, t.fun()) && raw_ok(cfg, dom, t.arg());
    case TermTag::RecTypeExt:
      return cfg.base_labels.contains(t.label()) && raw_ok(cfg, dom, t.rec()) && raw_ok(cfg, dom, t.fam());
    case TermTag::RecExt:
      return cfg.base_labels.contains(t.label()) && raw_ok(cfg, dom, t.rec()) && raw_ok(cfg, dom, t.val()) &&
             raw_ok(cfg, dom, t.fam());
    case TermTag::Restr:
      return raw_ok(cfg, dom, t.rec());
    case TermTag::Sel:
      return cfg.base_labels.contains(t.label()) && raw_ok(cfg, dom, t.rec());
  }
  return false;
}

bool raw_ok(const EnumConfig& cfg, const NameSet& dom, const Kind& k) {
  switch (k.tag()) {
    case KindTag::Type:
    case KindTag::RType:
      return true;
    case KindTag::RTypeL:
      return is_subset(k.labels(), cfg.base_labels);
    case KindTag::El:
      return raw_ok(cfg, dom, k.term());
    case KindTag::Prod:
      return raw_ok(cfg, dom, k.dom()) && raw_ok(cfg, dom, k.cod());
  }
  return false;
}

}  // namespace

void enumerate_raw(const EnumConfig& cfg, const Context& g, std::size_t max_size,
                   const std::function<bool(const Term&)>& yield) {
  cfg.validate();
  RawEnum e(cfg, g);
  for (std::size_t s = 1; s <= max_size; ++s) {
    for (const auto& t : e.terms(0, s)) {
      if (!yield(t)) return;
    }
  }
}

bool raw_enumerable(const EnumConfig& cfg, const Context& g, const Term& t) {
  return t.loose() == 0 && raw_ok(cfg, g.domain(), t);
}

// ---------------------------------------------------------------------------
// Type-directed enumeration.

namespace {

struct Item {
  Term term;
  Demand demand;
  bool both;  // same result under either demand
  EvalResult res;

  bool usable(Demand d) const { return both || demand == d; }
};

struct KItem {
  Kind kind;
  Kind nf;
};

bool same_result(const EvalResult& a, const EvalResult& b) {
  return alpha_eq(a.whnf, b.whnf) && alpha_eq(a.nf, b.nf) && alpha_eq(a.kind, b.kind);
}

bool is_record_value_kind(const Kind& k) {
  return k.tag() == KindTag::El && k.term().tag() == TermTag::RecTypeExt;
}

class TypedEnum {
 public:
  explicit TypedEnum(const EnumConfig& cfg)
      : cfg_(cfg), subsets_(label_subsets(cfg.base_labels)), eng_(EngineOptions{cfg.eval_fuel, false, false}) {}

  struct CtxData {
    Context g;
    std::vector<std::vector<Item>> items;  // by size, index 0 unused
    std::vector<std::vector<KItem>> kinds;
  };

  CtxData& data(const Context& g) {
    for (auto* cd : recent_) {
      if (alpha_eq(cd->g, g)) return *cd;
    }
    std::string key = print_context(g);
    auto it = ctxs_.find(key);
    if (it == ctxs_.end()) {
      it = ctxs_.emplace(key, std::make_unique<CtxData>()).first;
      it->second->g = g;
      it->second->items.resize(1);
      it->second->kinds.resize(1);
    }
    if (recent_.size() == 4) recent_.erase(recent_.begin());
    recent_.push_back(it->second.get());
    return *it->second;
  }

  const std::vector<Item>& items(const Context& g, std::size_t size) {
    CtxData& cd = data(g);
    while (cd.items.size() <= size) {
      std::size_t s = cd.items.size();
      cd.items.push_back(build_items(g, s));
    }
    return data(g).items[size];
  }

  const std::vector<KItem>& kinds(const Context& g, std::size_t size) {
    CtxData& cd = data(g);
    while (cd.kinds.size() <= size) {
      std::size_t s = cd.kinds.size();
      cd.kinds.push_back(build_kinds(g, s));
    }
    return data(g).kinds[size];
  }

  Engine& engine() { return eng_; }

  // Evaluates a candidate under both demands.
  void admit(const Context& g, const Term& t, std::vector<Item>& out) {
    std::optional<EvalResult> v, r;
    try {
      v = eng_.eval_term(g, t, Demand::Value);
    } catch (const NotDerivable&) {
    } catch (const FuelExhausted&) {
    }
    try {
      r = eng_.eval_term(g, t, Demand::RecordType);
    } catch (const NotDerivable&) {
    } catch (const FuelExhausted&) {
    }
    if (v && r && same_result(*v, *r)) {
      out.push_back({t, Demand::Value, true, *v});
      return;
    }
    if (v) out.push_back({t, Demand::Value, false, *v});
    if (r) out.push_back({t, Demand::RecordType, false, *r});
  }

 private:
  EnumConfig cfg_;
  std::vector<LabelSet> subsets_;
  Engine eng_;
  std::map<std::string, std::unique_ptr<CtxData>> ctxs_;
  std::vector<CtxData*> recent_;

  Name binder_for(const Context& g) { return fresh_name("x", g.domain()); }

  std::vector<KItem> build_kinds(const Context& g, std::size_t s) {
    std::vector<KItem> out;
    if (s == 0) return out;
    if (s == 1) {
      out.push_back({type_kind(), type_kind()});
      out.push_back({rtype(), rtype()});
      for (const auto& ls : subsets_) out.push_back({rtype(ls), rtype(ls)});
      return out;
    }
    for (const auto& it : items(g, s - 1)) {
      if (!it.usable(Demand::RecordType)) continue;
      KindTag kt = it.res.kind.tag();
      if (kt == KindTag::Type || kt == KindTag::RType || kt == KindTag::RTypeL) {
        out.push_back({el(it.term), el(it.res.nf)});
      }
    }
    for (std::size_t a = 1; a + 1 < s; ++a) {
      for (const auto& dom : kinds(g, a)) {
        Name x = binder_for(g);
        Context gx = g.extended(x, dom.kind);
        // copy: the recursive call may grow the table
        std::vector<KItem> cods = kinds(gx, s - 1 - a);
        for (const auto& cod : cods) {
          out.push_back({prod(x, dom.kind, abstract(cod.kind, x)), prod(x, dom.nf, abstract(cod.nf, x))});
        }
      }
    }
    return out;
  }

  std::vector<Item> build_items(const Context& g, std::size_t s) {
    std::vector<Item> out;
    if (s == 0) return out;
    std::vector<Term> cands;
    std::unordered_set<Term, TermHash, TermAlphaEq> seen;
    auto add = [&](Term t) {
      if (seen.insert(t).second) cands.push_back(std::move(t));
    };
    if (s == 1) {
      for (const auto& d : g.entries()) add(var(d.name));
      add(empty_rec());
    } else {
      // restriction and selection
      for (const auto& r : items(g, s - 1)) {
        if (!r.usable(Demand::Value) || !is_record_value_kind(r.res.kind)) continue;
        add(restr(r.term));
        for (const auto& l : cfg_.base_labels) add(sel(r.term, l));
      }
      // application
      for (std::size_t a = 1; a + 1 < s; ++a) {
        const std::vector<Item> fs = items(g, a);
        const std::vector<Item> xs = items(g, s - 1 - a);
        for (const auto& f : fs) {
          if (f.res.kind.tag() != KindTag::Prod) continue;
          const Kind& dom = f.res.kind.dom();
          Demand dd = demand_of(dom);
          for (const auto& x : xs) {
            if (x.usable(dd) && alpha_eq(x.res.kind, dom)) add(app(f.term, x.term));
          }
        }
      }
      // record types
      for (std::size_t a = 1; a + 1 < s; ++a) {
        const std::vector<Item> rs = items(g, a);
        const std::vector<Item> fs = items(g, s - 1 - a);
        for (const auto& r : rs) {
          if (!r.usable(Demand::RecordType) || r.res.kind.tag() != KindTag::RTypeL) continue;
          Kind want = arrow(el(r.res.nf), type_kind());
          for (const auto& f : fs) {
            if (!f.usable(Demand::RecordType) || !alpha_eq(f.res.kind, want)) continue;
            for (const auto& l : cfg_.base_labels) {
              if (!r.res.kind.labels().contains(l)) add(rec_type(r.term, l, f.term));
            }
          }
        }
      }
      // pair-records
      for (std::size_t a = 1; a + 2 < s; ++a) {
        for (std::size_t c = 1; a + c + 1 < s; ++c) {
          std::size_t b = s - 1 - a - c;  // value size
          const std::vector<Item> rs = items(g, a);
          const std::vector<Item> fs = items(g, c);
          const std::vector<Item> vs = items(g, b);
          for (const auto& r : rs) {
            if (!r.usable(Demand::Value) || r.res.kind.tag() != KindTag::El) continue;
            const Term& p = r.res.kind.term();
            std::optional<LabelSet> have;
            try {
              Kind pk = eng_.eval_term(g, p, Demand::RecordType).kind;
              if (pk.tag() == KindTag::RTypeL) have = pk.labels();
            } catch (const NotDerivable&) {
            }
            if (!have) continue;
            Kind want = arrow(el(p), type_kind());
            for (const auto& f : fs) {
              if (!f.usable(Demand::RecordType) || !alpha_eq(f.res.kind, want)) continue;
              Term fieldty;
              try {
                fieldty = eng_.eval_term(g, app(f.term, r.term), Demand::RecordType).nf;
              } catch (const NotDerivable&) {
                continue;
              }
              Kind vk = el(fieldty);
              for (const auto& v : vs) {
                if (!v.usable(Demand::Value) || !alpha_eq(v.res.kind, vk)) continue;
                for (const auto& l : cfg_.base_labels) {
                  if (!have->contains(l)) add(rec(r.term, l, v.term, f.term));
                }
              }
            }
          }
        }
      }
      // abstractions
      for (std::size_t a = 1; a + 1 < s; ++a) {
        const std::vector<KItem> doms = kinds(g, a);
        for (const auto& dom : doms) {
          Name x = binder_for(g);
          Context gx = g.extended(x, dom.kind);
          const std::vector<Item> bodies = items(gx, s - 1 - a);
          for (const auto& b : bodies) add(lam(x, dom.kind, abstract(b.term, x)));
        }
      }
    }
    for (const auto& t : cands) admit(g, t, out);
    return out;
  }
};

}  // namespace

std::vector<CorpusItem> typed_terms(const EnumConfig& cfg, const Context& g, std::size_t size) {
  cfg.validate();
  TypedEnum te(cfg);
  std::vector<CorpusItem> out;
  for (const auto& it : te.items(g, size)) out.push_back({g, it.term, it.demand, it.res});
  return out;
}

namespace {

// Random well-typed terms grown from the exhaustive pools.
void random_supplement(const EnumConfig& cfg, TypedEnum& te, const std::vector<Context>& ctxs, Corpus& c) {
  if (cfg.random_samples == 0 || ctxs.empty()) return;
  std::mt19937_64 rng(cfg.seed);
  std::unordered_set<std::string> seen;
  for (const auto& it : c.items) seen.insert(print_context(it.ctx) + " |- " + print_term(it.term));
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  std::size_t attempts = 0;
  const std::size_t max_attempts = cfg.random_samples * 50;
  while (c.sampled < cfg.random_samples && attempts++ < max_attempts) {
    const Context& g = ctxs[pick(ctxs.size())];
    std::vector<const Item*> pool;
    for (std::size_t s = 1; s <= std::min<std::size_t>(cfg.max_term_size, 5); ++s) {
      for (const auto& it : te.items(g, s)) pool.push_back(&it);
    }
    if (pool.empty()) continue;
    const Item* base = pool[pick(pool.size())];
    Term t = base->term;
    Kind k = base->res.kind;
    Demand d = base->demand;
    std::size_t steps = 1 + pick(4);
    for (std::size_t i = 0; i < steps; ++i) {
      switch (pick(6)) {
        case 0:  // identity redex
          t = app(lam("y", k, bvar(0)), t);
          break;
        case 1:  // eta expansion
          if (k.tag() == KindTag::Prod) t = lam("y", k.dom(), app(shift(t, 1), bvar(0)));
          break;
        case 2:  // apply to a matching argument
          if (k.tag() == KindTag::Prod) {
            std::vector<const Item*> args;
            for (const Item* a : pool) {
              if (alpha_eq(a->res.kind, k.dom())) args.push_back(a);
            }
            if (!args.empty()) t = app(t, args[pick(args.size())]->term);
          }
          break;
        case 3:  // project
          if (is_record_value_kind(k)) {
            if (pick(2) == 0) {
              t = restr(t);
            } else {
              auto lit = cfg.base_labels.begin();
              std::advance(lit, static_cast<std::ptrdiff_t>(pick(cfg.base_labels.size())));
              t = sel(t, *lit);
            }
          }
          break;
        case 4:  // wrap in a one-field record and select it back
          if (k.tag() == KindTag::El && k.term().loose() == 0) {
            Term fam = lam("_", el(empty_rec()), shift(k.term(), 1));
            t = sel(rec(empty_rec(), *cfg.base_labels.begin(), t, fam), *cfg.base_labels.begin());
          }
          break;
        case 5:  // a one-field record type over a type
          if (k.tag() == KindTag::Type && t.loose() == 0) {
            auto lit = cfg.base_labels.begin();
            std::advance(lit, static_cast<std::ptrdiff_t>(pick(cfg.base_labels.size())));
            t = rec_type(empty_rec(), *lit, lam("_", el(empty_rec()), shift(t, 1)));
            d = Demand::RecordType;
          }
          break;
      }
      try {
        EvalResult r = te.engine().eval_term(g, t, d);
        k = r.kind;
      } catch (const std::exception&) {
        t = Term();
        break;
      }
    }
    if (!t || t.size() <= cfg.max_term_size || t.size() > cfg.random_max_size) continue;
    std::string key = print_context(g) + " |- " + print_term(t);
    if (!seen.insert(key).second) continue;
    std::vector<Item> got;
    te.admit(g, t, got);
    for (const auto& it : got) {
      c.items.push_back({g, it.term, it.demand, it.res});
    }
    if (!got.empty()) ++c.sampled;
  }
}

}  // namespace

Corpus build_corpus(const EnumConfig& cfg) {
  cfg.validate();
  Corpus c;
  TypedEnum te(cfg);
  std::vector<Context> ctxs = base_contexts(cfg);
  for (const auto& g : ctxs) {
    for (std::size_t s = 1; s <= cfg.max_term_size; ++s) {
      for (const auto& it : te.items(g, s)) c.items.push_back({g, it.term, it.demand, it.res});
    }
  }
  c.enumerated = c.items.size();
  random_supplement(cfg, te, ctxs, c);
  c.tos_counts = te.engine().counts();
  return c;
}

}  // namespace idrt
