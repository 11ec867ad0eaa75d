#include <sstream>
#include <unordered_map>

#include "idrt/frontend.hpp"

namespace idrt {

namespace {

class Printer {
 public:
  explicit Printer(NameSet avoid) : avoid_(std::move(avoid)) {}

  void term(const Term& t, std::ostream& out, bool head = false) {
    switch (t.tag()) {
      case TermTag::Free:
        out << t.name();
        return;
      case TermTag::Bound:
        if (t.index() < names_.size()) {
          out << names_[names_.size() - 1 - t.index()];
        } else {
          out << "#" << (t.index() - names_.size());
        }
        return;
      case TermTag::Lam: {
        if (head) out << "(";
        Name x = binder_name(t.name(), occurs_bound(t.body(), 0));
        out << "[" << x << ":";
        kind(t.dom(), out);
        out << "]";
        names_.push_back(x);
        term(t.body(), out);
        names_.pop_back();
        if (head) out << ")";
        return;
      }
      case TermTag::App:
        term(t.fun(), out, true);
        out << "(";
        term(t.arg(), out);
        out << ")";
        return;
      case TermTag::EmptyRec:
        out << "<>";
        return;
      case TermTag::RecTypeExt:
        out << "<";
        term(t.rec(), out);
        out << ", " << t.label().name() << " : ";
        term(t.fam(), out);
        out << ">";
        return;
      case TermTag::RecExt:
        out << "<";
        term(t.rec(), out);
        out << ", " << t.label().name() << " = ";
        term(t.val(), out);
        if (t.fam().tag() != TermTag::Hole) {
          out << " : ";
          term(t.fam(), out);
        }
        out << ">";
        return;
      case TermTag::Restr:
        out << "[";
        term(t.rec(), out);
        out << "]";
        return;
      case TermTag::Sel:
        term(t.rec(), out, true);
        out << "." << t.label().name();
        return;
      case TermTag::Hole:
        out << "?";
        return;
    }
  }

  void kind(const Kind& k, std::ostream& out) {
    switch (k.tag()) {
      case KindTag::Type:
        out << "Type";
        return;
      case KindTag::RType:
        out << "RType";
        return;
      case KindTag::RTypeL: {
        out << "RType[";
        bool first = true;
        for (const auto& l : k.labels()) {
          if (!first) out << ", ";
          first = false;
          out << l.name();
        }
        out << "]";
        return;
      }
      case KindTag::El:
        out << "El(";
        term(k.term(), out);
        out << ")";
        return;
      case KindTag::Prod: {
        bool used = occurs_bound(k.cod(), 0);
        out << "(";
        Name x = binder_name(k.binder(), used);
        if (used) out << x << ":";
        kind(k.dom(), out);
        out << ")";
        names_.push_back(x);
        kind(k.cod(), out);
        names_.pop_back();
        return;
      }
    }
  }

 private:
  Name binder_name(const Name& hint, bool used) {
    if (!used) return "_";
    NameSet taken = avoid_;
    taken.insert(names_.begin(), names_.end());
    return fresh_name(hint, taken);
  }

  NameSet avoid_;
  std::vector<Name> names_;
};

}  // namespace

std::string print_term(const Term& t, const NameSet& avoid) {
  NameSet all = avoid;
  collect_free_vars(t, all);
  Printer p(std::move(all));
  std::ostringstream out;
  p.term(t, out);
  return out.str();
}

std::string print_kind(const Kind& k, const NameSet& avoid) {
  NameSet all = avoid;
  collect_free_vars(k, all);
  Printer p(std::move(all));
  std::ostringstream out;
  p.kind(k, out);
  return out.str();
}

std::string print_term(const Term& t) { return print_term(t, {}); }
std::string print_kind(const Kind& k) { return print_kind(k, {}); }

std::string print_context(const Context& g) {
  if (g.empty()) return "()";
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += ", ";
    out += g[i].name + ":" + print_kind(g[i].kind, g.domain());
  }
  return out;
}

std::string print_judgement(const Judgement& j) {
  NameSet dom = j.ctx.domain();
  std::string out = print_context(j.ctx);
  switch (j.form) {
    case JudgementForm::CtxValid:
      return out + " valid";
    case JudgementForm::KindWf:
      return out + " |- " + print_kind(j.k1, dom) + " kind";
    case JudgementForm::KindEq:
      return out + " |- " + print_kind(j.k1, dom) + " = " + print_kind(j.k2, dom);
    case JudgementForm::HasKind:
      return out + " |- " + print_term(j.t1, dom) + " : " + print_kind(j.k1, dom);
    case JudgementForm::TermEq:
      return out + " |- " + print_term(j.t1, dom) + " = " + print_term(j.t2, dom) + " : " +
             print_kind(j.k1, dom);
  }
  return out;
}

namespace {

using Refs = std::unordered_map<const DeclDerivation*, std::string>;

void print_deriv(const DeclDerivation& d, std::ostream& out, int indent, const Refs& names, bool top) {
  out << std::string(static_cast<std::size_t>(indent) * 2, ' ');
  if (!top) {
    if (auto it = names.find(&d); it != names.end()) {
      out << "@" << it->second;
      return;
    }
  }
  out << "(" << rule_name(d.rule) << " {" << print_judgement(d.conclusion) << "}";
  for (const auto& p : d.premises) {
    out << "\n";
    print_deriv(*p, out, indent + 1, names, false);
  }
  out << ")";
}

}  // namespace

std::string print_derivation(const DeclDerivation& d) {
  std::ostringstream out;
  print_deriv(d, out, 0, {}, true);
  return out.str();
}

std::string print_derivation_script(const DeclDerivation& d) {
  // Shared subtrees become definitions, emitted before first use.
  std::unordered_map<const DeclDerivation*, int> parents;
  std::vector<const DeclDerivation*> order;
  std::vector<const DeclDerivation*> stack{&d};
  while (!stack.empty()) {
    const DeclDerivation* n = stack.back();
    stack.pop_back();
    if (parents[n]++ > 0) continue;
    for (const auto& p : n->premises) stack.push_back(p.get());
  }
  // post-order so definitions precede their users
  std::unordered_map<const DeclDerivation*, bool> done;
  std::vector<std::pair<const DeclDerivation*, std::size_t>> walk{{&d, 0}};
  while (!walk.empty()) {
    auto& [n, i] = walk.back();
    if (i < n->premises.size()) {
      const DeclDerivation* c = n->premises[i++].get();
      if (!done[c]) walk.push_back({c, 0});
      continue;
    }
    if (!done[n]) {
      done[n] = true;
      if (n != &d && parents[n] > 1 && !n->premises.empty()) order.push_back(n);
    }
    walk.pop_back();
  }
  Refs names;
  std::ostringstream out;
  for (const auto* n : order) {
    std::string name = "d" + std::to_string(names.size());
    out << "def " << name << " =\n";
    print_deriv(*n, out, 1, names, true);
    out << ";\n";
    names.emplace(n, name);
  }
  out << "derive\n";
  print_deriv(d, out, 1, names, true);
  out << ";\n";
  return out.str();
}

}  // namespace idrt
