#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Core syntax of IDRT: kinds, terms, contexts, labels.
//
// Terms are locally nameless. Variables bound by an abstraction or a
// dependent product are de Bruijn indices; free variables are names.
// Binders keep the user's name only as a printing hint, so alpha-equivalence
// is plain structural equality that ignores hints.

namespace idrt {

using Name = std::string;
using NameSet = std::set<Name>;

class Label {
 public:
  Label() = default;
  explicit Label(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  auto operator<=>(const Label&) const = default;
  bool operator==(const Label&) const = default;

 private:
  std::string name_;
};

using LabelSet = std::set<Label>;

bool is_subset(const LabelSet& a, const LabelSet& b);
LabelSet label_union(const LabelSet& a, const LabelSet& b);

enum class TermTag : std::uint8_t {
  Free,
  Bound,
  Lam,
  App,
  EmptyRec,
  RecTypeExt,
  RecExt,
  Restr,
  Sel,
  // Placeholder for an omitted pair-record family; only the elaborator
  // produces it and evaluation rejects it.
  Hole,
};

enum class KindTag : std::uint8_t { Type, El, Prod, RType, RTypeL };

struct TermNode;
struct KindNode;
class Kind;

class Term {
 public:
  Term() = default;

  explicit operator bool() const { return node_ != nullptr; }
  const TermNode* get() const { return node_.get(); }

  TermTag tag() const;
  std::size_t hash() const;
  std::size_t size() const;
  // One more than the largest loose de Bruijn index; zero when locally closed.
  std::uint32_t loose() const;

  // Free: the variable. Lam: the binder hint.
  const Name& name() const;
  std::uint32_t index() const;
  const Label& label() const;
  const Kind& dom() const;
  const Term& body() const;
  const Term& fun() const;
  const Term& arg() const;
  const Term& rec() const;
  const Term& val() const;
  const Term& fam() const;

 private:
  explicit Term(std::shared_ptr<const TermNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const TermNode> node_;
  friend Term make_term(TermNode&&);
};

class Kind {
 public:
  Kind() = default;

  explicit operator bool() const { return node_ != nullptr; }
  const KindNode* get() const { return node_.get(); }

  KindTag tag() const;
  std::size_t hash() const;
  std::size_t size() const;
  std::uint32_t loose() const;

  const Term& term() const;  // El
  const Name& binder() const;  // Prod hint
  const Kind& dom() const;
  const Kind& cod() const;
  const LabelSet& labels() const;  // RTypeL

 private:
  explicit Kind(std::shared_ptr<const KindNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const KindNode> node_;
  friend Kind make_kind(KindNode&&);
};

struct TermNode {
  TermTag tag{};
  Name text;
  std::uint32_t index = 0;
  Label label;
  Kind kind;
  Term c0, c1, c2;
  std::size_t hash = 0;
  std::uint32_t size = 1;
  std::uint32_t loose = 0;
};

struct KindNode {
  KindTag tag{};
  Term term;
  Name hint;
  Kind dom, cod;
  LabelSet labels;
  std::size_t hash = 0;
  std::uint32_t size = 1;
  std::uint32_t loose = 0;
};

// Constructors. Bodies passed to lam/prod are already in de Bruijn form.
Term var(Name x);
Term bvar(std::uint32_t i);
Term lam(Name hint, Kind dom, Term body);
Term app(Term f, Term a);
Term empty_rec();
Term rec_type(Term r, Label l, Term fam);
Term rec(Term r, Label l, Term val, Term fam);
Term restr(Term r);
Term sel(Term r, Label l);
Term hole();

Kind type_kind();
Kind el(Term t);
Kind prod(Name hint, Kind dom, Kind cod);
Kind rtype();
Kind rtype(LabelSet labels);

// Named-binder conveniences: abstract the free variable x out of the body.
Term lam_over(const Name& x, Kind dom, const Term& body);
Kind prod_over(const Name& x, Kind dom, const Kind& cod);
// Non-dependent product (K)K'.
Kind arrow(Kind dom, Kind cod);

bool alpha_eq(const Term& a, const Term& b);
bool alpha_eq(const Kind& a, const Kind& b);

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};
struct TermAlphaEq {
  bool operator()(const Term& a, const Term& b) const { return alpha_eq(a, b); }
};
struct KindHash {
  std::size_t operator()(const Kind& k) const { return k.hash(); }
};
struct KindAlphaEq {
  bool operator()(const Kind& a, const Kind& b) const { return alpha_eq(a, b); }
};

// de Bruijn plumbing.
Term shift(const Term& t, int delta, std::uint32_t cutoff = 0);
Kind shift(const Kind& k, int delta, std::uint32_t cutoff = 0);
// Replace loose index 0 by v and lower the other loose indices.
Term instantiate(const Term& body, const Term& v);
Kind instantiate(const Kind& body, const Term& v);
// Turn free occurrences of x into loose index 0 (raising existing ones).
Term abstract(const Term& t, const Name& x);
Kind abstract(const Kind& k, const Name& x);
bool occurs_bound(const Term& t, std::uint32_t i);
bool occurs_bound(const Kind& k, std::uint32_t i);

// [v/x]body, capture-avoiding.
Term substitute(const Term& body, const Name& x, const Term& v);
Kind substitute(const Kind& body, const Name& x, const Term& v);

NameSet free_vars(const Term& t);
NameSet free_vars(const Kind& k);
void collect_free_vars(const Term& t, NameSet& out);
void collect_free_vars(const Kind& k, NameSet& out);
bool occurs_free(const Term& t, const Name& x);
bool occurs_free(const Kind& k, const Name& x);

bool is_pair_record(const Term& t);
bool is_abstraction(const Term& t);
bool contains_hole(const Term& t);
bool contains_hole(const Kind& k);

class NotRecordType : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Labels of a term built from EmptyRec and RecTypeExt only.
LabelSet top_labels(const Term& t);

// A name based on hint that is not in avoid. "_" and empty hints become "x".
Name fresh_name(std::string_view hint, const NameSet& avoid);

struct Decl {
  Name name;
  Kind kind;
};

class Context {
 public:
  Context() = default;
  Context(std::initializer_list<Decl> ds) : entries_(ds) {}
  explicit Context(std::vector<Decl> ds) : entries_(std::move(ds)) {}

  const std::vector<Decl>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Decl& operator[](std::size_t i) const { return entries_[i]; }

  // Latest declaration of x, if any.
  const Decl* find(const Name& x) const;
  bool declares(const Name& x) const { return find(x) != nullptr; }
  NameSet domain() const;

  Context extended(Name x, Kind k) const;
  void push(Name x, Kind k) { entries_.push_back({std::move(x), std::move(k)}); }
  Context prefix(std::size_t n) const;

 private:
  std::vector<Decl> entries_;
};

bool alpha_eq(const Context& a, const Context& b);
NameSet free_vars(const Context& g);
Context substitute(const Context& g, const Name& x, const Term& v);

}  // namespace idrt
