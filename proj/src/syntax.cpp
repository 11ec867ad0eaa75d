#include "idrt/syntax.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace idrt {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t str_hash(const std::string& s) { return std::hash<std::string>{}(s); }

std::uint32_t under_binder(std::uint32_t loose) { return loose > 0 ? loose - 1 : 0; }

}  // namespace

bool is_subset(const LabelSet& a, const LabelSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

LabelSet label_union(const LabelSet& a, const LabelSet& b) {
  LabelSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

Term make_term(TermNode&& n) {
  std::size_t h = mix(0x51ed27, static_cast<std::size_t>(n.tag));
  std::uint32_t size = 1;
  std::uint32_t loose = 0;
  switch (n.tag) {
    case TermTag::Free:
      h = mix(h, str_hash(n.text));
      break;
    case TermTag::Bound:
      h = mix(h, n.index);
      loose = n.index + 1;
      break;
    case TermTag::Lam:
      h = mix(h, n.kind.hash());
      h = mix(h, n.c0.hash());
      size += static_cast<std::uint32_t>(n.kind.size() + n.c0.size());
      loose = std::max(n.kind.loose(), under_binder(n.c0.loose()));
      break;
    default:
      break;
  }
  if (n.tag == TermTag::RecTypeExt || n.tag == TermTag::RecExt || n.tag == TermTag::Sel) {
    h = mix(h, str_hash(n.label.name()));
  }
  if (n.tag != TermTag::Lam) {
    for (const Term* c : {&n.c0, &n.c1, &n.c2}) {
      if (*c) {
        h = mix(h, c->hash());
        size += static_cast<std::uint32_t>(c->size());
        loose = std::max(loose, c->loose());
      }
    }
  }
  n.hash = h;
  n.size = size;
  n.loose = loose;
  return Term(std::make_shared<const TermNode>(std::move(n)));
}

Kind make_kind(KindNode&& n) {
  std::size_t h = mix(0x2b992ddf, static_cast<std::size_t>(n.tag));
  std::uint32_t size = 1;
  std::uint32_t loose = 0;
  switch (n.tag) {
    case KindTag::El:
      h = mix(h, n.term.hash());
      size += static_cast<std::uint32_t>(n.term.size());
      loose = n.term.loose();
      break;
    case KindTag::Prod:
      h = mix(h, n.dom.hash());
      h = mix(h, n.cod.hash());
      size += static_cast<std::uint32_t>(n.dom.size() + n.cod.size());
      loose = std::max(n.dom.loose(), under_binder(n.cod.loose()));
      break;
    case KindTag::RTypeL:
      for (const auto& l : n.labels) h = mix(h, str_hash(l.name()));
      h = mix(h, n.labels.size());
      break;
    default:
      break;
  }
  n.hash = h;
  n.size = size;
  n.loose = loose;
  return Kind(std::make_shared<const KindNode>(std::move(n)));
}

TermTag Term::tag() const { return node_->tag; }
std::size_t Term::hash() const { return node_->hash; }
std::size_t Term::size() const { return node_->size; }
std::uint32_t Term::loose() const { return node_->loose; }
const Name& Term::name() const { return node_->text; }
std::uint32_t Term::index() const { return node_->index; }
const Label& Term::label() const { return node_->label; }
const Kind& Term::dom() const { return node_->kind; }
const Term& Term::body() const { return node_->c0; }
const Term& Term::fun() const { return node_->c0; }
const Term& Term::arg() const { return node_->c1; }
const Term& Term::rec() const { return node_->c0; }
const Term& Term::val() const { return node_->c1; }
const Term& Term::fam() const {
  return node_->tag == TermTag::RecExt ? node_->c2 : node_->c1;
}

KindTag Kind::tag() const { return node_->tag; }
std::size_t Kind::hash() const { return node_->hash; }
std::size_t Kind::size() const { return node_->size; }
std::uint32_t Kind::loose() const { return node_->loose; }
const Term& Kind::term() const { return node_->term; }
const Name& Kind::binder() const { return node_->hint; }
const Kind& Kind::dom() const { return node_->dom; }
const Kind& Kind::cod() const { return node_->cod; }
const LabelSet& Kind::labels() const { return node_->labels; }

Term var(Name x) {
  TermNode n;
  n.tag = TermTag::Free;
  n.text = std::move(x);
  return make_term(std::move(n));
}

Term bvar(std::uint32_t i) {
  TermNode n;
  n.tag = TermTag::Bound;
  n.index = i;
  return make_term(std::move(n));
}

Term lam(Name hint, Kind dom, Term body) {
  TermNode n;
  n.tag = TermTag::Lam;
  n.text = std::move(hint);
  n.kind = std::move(dom);
  n.c0 = std::move(body);
  return make_term(std::move(n));
}

Term app(Term f, Term a) {
  TermNode n;
  n.tag = TermTag::App;
  n.c0 = std::move(f);
  n.c1 = std::move(a);
  return make_term(std::move(n));
}

Term empty_rec() {
  static const Term e = [] {
    TermNode n;
    n.tag = TermTag::EmptyRec;
    return make_term(std::move(n));
  }();
  return e;
}

Term rec_type(Term r, Label l, Term fam) {
  TermNode n;
  n.tag = TermTag::RecTypeExt;
  n.label = std::move(l);
  n.c0 = std::move(r);
  n.c1 = std::move(fam);
  return make_term(std::move(n));
}

Term rec(Term r, Label l, Term val, Term fam) {
  TermNode n;
  n.tag = TermTag::RecExt;
  n.label = std::move(l);
  n.c0 = std::move(r);
  n.c1 = std::move(val);
  n.c2 = std::move(fam);
  return make_term(std::move(n));
}

Term restr(Term r) {
  TermNode n;
  n.tag = TermTag::Restr;
  n.c0 = std::move(r);
  return make_term(std::move(n));
}

Term sel(Term r, Label l) {
  TermNode n;
  n.tag = TermTag::Sel;
  n.label = std::move(l);
  n.c0 = std::move(r);
  return make_term(std::move(n));
}

Term hole() {
  static const Term h = [] {
    TermNode n;
    n.tag = TermTag::Hole;
    return make_term(std::move(n));
  }();
  return h;
}

Kind type_kind() {
  static const Kind k = [] {
    KindNode n;
    n.tag = KindTag::Type;
    return make_kind(std::move(n));
  }();
  return k;
}

Kind el(Term t) {
  KindNode n;
  n.tag = KindTag::El;
  n.term = std::move(t);
  return make_kind(std::move(n));
}

Kind prod(Name hint, Kind dom, Kind cod) {
  KindNode n;
  n.tag = KindTag::Prod;
  n.hint = std::move(hint);
  n.dom = std::move(dom);
  n.cod = std::move(cod);
  return make_kind(std::move(n));
}

Kind rtype() {
  static const Kind k = [] {
    KindNode n;
    n.tag = KindTag::RType;
    return make_kind(std::move(n));
  }();
  return k;
}

Kind rtype(LabelSet labels) {
  KindNode n;
  n.tag = KindTag::RTypeL;
  n.labels = std::move(labels);
  return make_kind(std::move(n));
}

Term lam_over(const Name& x, Kind dom, const Term& body) {
  return lam(x, std::move(dom), abstract(body, x));
}

Kind prod_over(const Name& x, Kind dom, const Kind& cod) {
  return prod(x, std::move(dom), abstract(cod, x));
}

Kind arrow(Kind dom, Kind cod) { return prod("_", std::move(dom), shift(cod, 1)); }

// ---------------------------------------------------------------------------
// Alpha-equivalence

bool alpha_eq(const Term& a, const Term& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a.hash() != b.hash() || a.size() != b.size() || a.tag() != b.tag()) return false;
  switch (a.tag()) {
    case TermTag::Free:
      return a.name() == b.name();
    case TermTag::Bound:
      return a.index() == b.index();
    case TermTag::Lam:
      return alpha_eq(a.dom(), b.dom()) && alpha_eq(a.body(), b.body());
    case TermTag::App:
      return alpha_eq(a.fun(), b.fun()) && alpha_eq(a.arg(), b.arg());
    case TermTag::EmptyRec:
    case TermTag::Hole:
      return true;
    case TermTag::RecTypeExt:
      return a.label() == b.label() && alpha_eq(a.rec(), b.rec()) && alpha_eq(a.fam(), b.fam());
    case TermTag::RecExt:
      return a.label() == b.label() && alpha_eq(a.rec(), b.rec()) &&
             alpha_eq(a.val(), b.val()) && alpha_eq(a.fam(), b.fam());
    case TermTag::Restr:
      return alpha_eq(a.rec(), b.rec());
    case TermTag::Sel:
      return a.label() == b.label() && alpha_eq(a.rec(), b.rec());
  }
  return false;
}

bool alpha_eq(const Kind& a, const Kind& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a.hash() != b.hash() || a.tag() != b.tag()) return false;
  switch (a.tag()) {
    case KindTag::Type:
    case KindTag::RType:
      return true;
    case KindTag::El:
      return alpha_eq(a.term(), b.term());
    case KindTag::Prod:
      return alpha_eq(a.dom(), b.dom()) && alpha_eq(a.cod(), b.cod());
    case KindTag::RTypeL:
      return a.labels() == b.labels();
  }
  return false;
}

// ---------------------------------------------------------------------------
// Generic structural map. f handles leaves (Free/Bound) given the binder depth;
// everything else is rebuilt only when a child changed.

namespace {

template <class Leaf>
struct Mapper {
  Leaf leaf;
  // Subterms with loose() <= depth and no interesting free names can be skipped.
  std::function<bool(const Term&, std::uint32_t)> skip_term;
  std::function<bool(const Kind&, std::uint32_t)> skip_kind;

  Term term(const Term& t, std::uint32_t depth) {
    if (skip_term && skip_term(t, depth)) return t;
    switch (t.tag()) {
      case TermTag::Free:
      case TermTag::Bound:
        return leaf(t, depth);
      case TermTag::EmptyRec:
      case TermTag::Hole:
        return t;
      case TermTag::Lam: {
        Kind d = kind(t.dom(), depth);
        Term b = term(t.body(), depth + 1);
        if (d.get() == t.dom().get() && b.get() == t.body().get()) return t;
        return lam(t.name(), d, b);
      }
      case TermTag::App: {
        Term f = term(t.fun(), depth);
        Term a = term(t.arg(), depth);
        if (f.get() == t.fun().get() && a.get() == t.arg().get()) return t;
        return app(f, a);
      }
      case TermTag::RecTypeExt: {
        Term r = term(t.rec(), depth);
        Term a = term(t.fam(), depth);
        if (r.get() == t.rec().get() && a.get() == t.fam().get()) return t;
        return rec_type(r, t.label(), a);
      }
      case TermTag::RecExt: {
        Term r = term(t.rec(), depth);
        Term v = term(t.val(), depth);
        Term a = term(t.fam(), depth);
        if (r.get() == t.rec().get() && v.get() == t.val().get() && a.get() == t.fam().get())
          return t;
        return rec(r, t.label(), v, a);
      }
      case TermTag::Restr: {
        Term r = term(t.rec(), depth);
        if (r.get() == t.rec().get()) return t;
        return restr(r);
      }
      case TermTag::Sel: {
        Term r = term(t.rec(), depth);
        if (r.get() == t.rec().get()) return t;
        return sel(r, t.label());
      }
    }
    return t;
  }

  Kind kind(const Kind& k, std::uint32_t depth) {
    if (skip_kind && skip_kind(k, depth)) return k;
    switch (k.tag()) {
      case KindTag::Type:
      case KindTag::RType:
      case KindTag::RTypeL:
        return k;
      case KindTag::El: {
        Term t = term(k.term(), depth);
        if (t.get() == k.term().get()) return k;
        return el(t);
      }
      case KindTag::Prod: {
        Kind d = kind(k.dom(), depth);
        Kind c = kind(k.cod(), depth + 1);
        if (d.get() == k.dom().get() && c.get() == k.cod().get()) return k;
        return prod(k.binder(), d, c);
      }
    }
    return k;
  }
};

template <class Leaf>
Mapper<Leaf> make_mapper(Leaf leaf) {
  return Mapper<Leaf>{std::move(leaf), {}, {}};
}

}  // namespace

Term shift(const Term& t, int delta, std::uint32_t cutoff) {
  if (delta == 0 || t.loose() <= cutoff) return t;
  auto m = make_mapper([delta](const Term& leaf, std::uint32_t depth) {
    if (leaf.tag() == TermTag::Bound && leaf.index() >= depth) {
      long idx = static_cast<long>(leaf.index()) + delta;
      assert(idx >= static_cast<long>(depth));
      return bvar(static_cast<std::uint32_t>(idx));
    }
    return leaf;
  });
  m.skip_term = [](const Term& x, std::uint32_t d) { return x.loose() <= d; };
  m.skip_kind = [](const Kind& x, std::uint32_t d) { return x.loose() <= d; };
  return m.term(t, cutoff);
}

Kind shift(const Kind& k, int delta, std::uint32_t cutoff) {
  if (delta == 0 || k.loose() <= cutoff) return k;
  auto m = make_mapper([delta](const Term& leaf, std::uint32_t depth) {
    if (leaf.tag() == TermTag::Bound && leaf.index() >= depth) {
      long idx = static_cast<long>(leaf.index()) + delta;
      assert(idx >= static_cast<long>(depth));
      return bvar(static_cast<std::uint32_t>(idx));
    }
    return leaf;
  });
  m.skip_term = [](const Term& x, std::uint32_t d) { return x.loose() <= d; };
  m.skip_kind = [](const Kind& x, std::uint32_t d) { return x.loose() <= d; };
  return m.kind(k, cutoff);
}

namespace {

auto instantiate_mapper(const Term& v) {
  auto m = make_mapper([v](const Term& leaf, std::uint32_t depth) {
    if (leaf.tag() != TermTag::Bound || leaf.index() < depth) return leaf;
    if (leaf.index() == depth) return shift(v, static_cast<int>(depth));
    return bvar(leaf.index() - 1);
  });
  m.skip_term = [](const Term& x, std::uint32_t d) { return x.loose() <= d; };
  m.skip_kind = [](const Kind& x, std::uint32_t d) { return x.loose() <= d; };
  return m;
}

auto abstract_mapper(const Name& x) {
  return make_mapper([x](const Term& leaf, std::uint32_t depth) {
    if (leaf.tag() == TermTag::Free && leaf.name() == x) return bvar(depth);
    if (leaf.tag() == TermTag::Bound && leaf.index() >= depth) return bvar(leaf.index() + 1);
    return leaf;
  });
}

auto substitute_mapper(const Name& x, const Term& v) {
  auto m = make_mapper([x, v](const Term& leaf, std::uint32_t depth) {
    if (leaf.tag() == TermTag::Free && leaf.name() == x) return shift(v, static_cast<int>(depth));
    return leaf;
  });
  return m;
}

}  // namespace

Term instantiate(const Term& body, const Term& v) { return instantiate_mapper(v).term(body, 0); }
Kind instantiate(const Kind& body, const Term& v) { return instantiate_mapper(v).kind(body, 0); }
Term abstract(const Term& t, const Name& x) { return abstract_mapper(x).term(t, 0); }
Kind abstract(const Kind& k, const Name& x) { return abstract_mapper(x).kind(k, 0); }

Term substitute(const Term& body, const Name& x, const Term& v) {
  if (!occurs_free(body, x)) return body;
  return substitute_mapper(x, v).term(body, 0);
}

Kind substitute(const Kind& body, const Name& x, const Term& v) {
  if (!occurs_free(body, x)) return body;
  return substitute_mapper(x, v).kind(body, 0);
}

bool occurs_bound(const Term& t, std::uint32_t i) {
  if (t.loose() <= i) return false;
  switch (t.tag()) {
    case TermTag::Bound:
      return t.index() == i;
    case TermTag::Lam:
      return occurs_bound(t.dom(), i) || occurs_bound(t.body(), i + 1);
    case TermTag::App:
      return occurs_bound(t.fun(), i) || occurs_bound(t.arg(), i);
    case TermTag::RecTypeExt:
      return occurs_bound(t.rec(), i) || occurs_bound(t.fam(), i);
    case TermTag::RecExt:
      return occurs_bound(t.rec(), i) || occurs_bound(t.val(), i) || occurs_bound(t.fam(), i);
    case TermTag::Restr:
    case TermTag::Sel:
      return occurs_bound(t.rec(), i);
    default:
      return false;
  }
}

bool occurs_bound(const Kind& k, std::uint32_t i) {
  if (k.loose() <= i) return false;
  switch (k.tag()) {
    case KindTag::El:
      return occurs_bound(k.term(), i);
    case KindTag::Prod:
      return occurs_bound(k.dom(), i) || occurs_bound(k.cod(), i + 1);
    default:
      return false;
  }
}

void collect_free_vars(const Term& t, NameSet& out) {
  switch (t.tag()) {
    case TermTag::Free:
      out.insert(t.name());
      return;
    case TermTag::Lam:
      collect_free_vars(t.dom(), out);
      collect_free_vars(t.body(), out);
      return;
    case TermTag::App:
      collect_free_vars(t.fun(), out);
      collect_free_vars(t.arg(), out);
      return;
    case TermTag::RecTypeExt:
      collect_free_vars(t.rec(), out);
      collect_free_vars(t.fam(), out);
      return;
    case TermTag::RecExt:
      collect_free_vars(t.rec(), out);
      collect_free_vars(t.val(), out);
      collect_free_vars(t.fam(), out);
      return;
    case TermTag::Restr:
    case TermTag::Sel:
      collect_free_vars(t.rec(), out);
      return;
    default:
      return;
  }
}

void collect_free_vars(const Kind& k, NameSet& out) {
  switch (k.tag()) {
    case KindTag::El:
      collect_free_vars(k.term(), out);
      return;
    case KindTag::Prod:
      collect_free_vars(k.dom(), out);
      collect_free_vars(k.cod(), out);
      return;
    default:
      return;
  }
}

NameSet free_vars(const Term& t) {
  NameSet out;
  collect_free_vars(t, out);
  return out;
}

NameSet free_vars(const Kind& k) {
  NameSet out;
  collect_free_vars(k, out);
  return out;
}

bool occurs_free(const Term& t, const Name& x) {
  switch (t.tag()) {
    case TermTag::Free:
      return t.name() == x;
    case TermTag::Lam:
      return occurs_free(t.dom(), x) || occurs_free(t.body(), x);
    case TermTag::App:
      return occurs_free(t.fun(), x) || occurs_free(t.arg(), x);
    case TermTag::RecTypeExt:
      return occurs_free(t.rec(), x) || occurs_free(t.fam(), x);
    case TermTag::RecExt:
      return occurs_free(t.rec(), x) || occurs_free(t.val(), x) || occurs_free(t.fam(), x);
    case TermTag::Restr:
    case TermTag::Sel:
      return occurs_free(t.rec(), x);
    default:
      return false;
  }
}

bool occurs_free(const Kind& k, const Name& x) {
  switch (k.tag()) {
    case KindTag::El:
      return occurs_free(k.term(), x);
    case KindTag::Prod:
      return occurs_free(k.dom(), x) || occurs_free(k.cod(), x);
    default:
      return false;
  }
}

bool is_pair_record(const Term& t) { return t.tag() == TermTag::RecExt; }
bool is_abstraction(const Term& t) { return t.tag() == TermTag::Lam; }

bool contains_hole(const Term& t) {
  switch (t.tag()) {
    case TermTag::Hole:
      return true;
    case TermTag::Lam:
      return contains_hole(t.dom()) || contains_hole(t.body());
    case TermTag::App:
      return contains_hole(t.fun()) || contains_hole(t.arg());
    case TermTag::RecTypeExt:
      return contains_hole(t.rec()) || contains_hole(t.fam());
    case TermTag::RecExt:
      return contains_hole(t.rec()) || contains_hole(t.val()) || contains_hole(t.fam());
    case TermTag::Restr:
    case TermTag::Sel:
      return contains_hole(t.rec());
    default:
      return false;
  }
}

bool contains_hole(const Kind& k) {
  switch (k.tag()) {
    case KindTag::El:
      return contains_hole(k.term());
    case KindTag::Prod:
      return contains_hole(k.dom()) || contains_hole(k.cod());
    default:
      return false;
  }
}

LabelSet top_labels(const Term& t) {
  LabelSet out;
  const Term* cur = &t;
  while (cur->tag() == TermTag::RecTypeExt) {
    out.insert(cur->label());
    cur = &cur->rec();
  }
  if (cur->tag() != TermTag::EmptyRec) throw NotRecordType("not a syntactic record type");
  return out;
}

Name fresh_name(std::string_view hint, const NameSet& avoid) {
  std::string base = (hint.empty() || hint == "_") ? std::string("x") : std::string(hint);
  if (!avoid.contains(base)) return base;
  // Strip a trailing numeric suffix so x1 does not become x11.
  std::size_t cut = base.size();
  while (cut > 1 && std::isdigit(static_cast<unsigned char>(base[cut - 1]))) --cut;
  std::string stem = base.substr(0, cut);
  for (std::size_t i = 1;; ++i) {
    std::string cand = stem + std::to_string(i);
    if (!avoid.contains(cand)) return cand;
  }
}

// ---------------------------------------------------------------------------
// Contexts

const Decl* Context::find(const Name& x) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->name == x) return &*it;
  }
  return nullptr;
}

NameSet Context::domain() const {
  NameSet out;
  for (const auto& d : entries_) out.insert(d.name);
  return out;
}

Context Context::extended(Name x, Kind k) const {
  Context c = *this;
  c.push(std::move(x), std::move(k));
  return c;
}

Context Context::prefix(std::size_t n) const {
  return Context(std::vector<Decl>(entries_.begin(),
                                   entries_.begin() + static_cast<long>(std::min(n, size()))));
}

bool alpha_eq(const Context& a, const Context& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || !alpha_eq(a[i].kind, b[i].kind)) return false;
  }
  return true;
}

NameSet free_vars(const Context& g) {
  NameSet out;
  for (const auto& d : g.entries()) collect_free_vars(d.kind, out);
  return out;
}

Context substitute(const Context& g, const Name& x, const Term& v) {
  std::vector<Decl> out;
  out.reserve(g.size());
  for (const auto& d : g.entries()) out.push_back({d.name, substitute(d.kind, x, v)});
  return Context(std::move(out));
}

}  // namespace idrt
