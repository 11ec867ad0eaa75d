// idrt: command-line driver.
//
//   idrt check FILE            run the directives of a .idrt file
//   idrt eq FILE               same, reporting only eq directives
//   idrt normalize FILE|EXPR   normal forms
//   idrt whnf EXPR             weak-head normal form
//   idrt derive SCRIPT         check derivation scripts
//   idrt derive --auto JUDG    build a derivation from the TOS evaluation
//   idrt props [--all|NAME..]  property suites over the enumerated corpus
//   idrt graph EXPR            untyped reduction graph
//
// Exit status: 0 success, 1 a check or property failed, 2 parse or usage error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "idrt/checker.hpp"
#include "idrt/declarative.hpp"
#include "idrt/frontend.hpp"
#include "idrt/oracle.hpp"
#include "idrt/reduction.hpp"
#include "idrt/serialize.hpp"

using namespace idrt;

namespace {

struct Globals {
  bool trace = false;
  bool json = false;
  std::size_t fuel = 0;  // 0: default_fuel()
  std::size_t size = 0;  // 0: EnumConfig default
  std::uint64_t seed = 0;
  std::string variant = "minus";
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Named in parse error messages.
std::string current_source = "<command line>";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  current_source = path;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EngineOptions engine_options(const Globals& g) {
  return EngineOptions{g.fuel ? g.fuel : default_fuel(), g.trace, false};
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string where(const std::string& file, const SourcePos& p) {
  return file + ":" + std::to_string(p.line) + ":" + std::to_string(p.col);
}

std::string describe(const Directive& d, const Context& g) {
  NameSet dom = g.domain();
  switch (d.what) {
    case DirectiveKind::Declare:
      return d.name + " : " + print_kind(d.classifier, dom);
    case DirectiveKind::Check:
      return "check " + print_term(d.lhs, dom) + " : " + print_kind(d.classifier, dom);
    case DirectiveKind::Eq:
      return "eq " + print_term(d.lhs, dom) + " = " + print_term(d.rhs, dom) + " : " + print_kind(d.classifier, dom);
    case DirectiveKind::Normalize:
      return "normalize " + print_term(d.lhs, dom);
  }
  return {};
}

std::string_view directive_name(DirectiveKind k) {
  switch (k) {
    case DirectiveKind::Declare:
      return "declare";
    case DirectiveKind::Check:
      return "check";
    case DirectiveKind::Eq:
      return "eq";
    case DirectiveKind::Normalize:
      return "normalize";
  }
  return "";
}

enum class FileMode { Check, Eq, Normalize };

int run_file(const Globals& gl, const std::string& path, FileMode mode) {
  SourceFile f = parse_file(read_file(path));
  FileResult res = check_file(f, engine_options(gl));
  bool ok = true;
  json out = json::array();
  for (const auto& r : res.results) {
    const Directive& d = r.directive;
    bool shown = mode == FileMode::Check || d.what == DirectiveKind::Declare || !r.report.accepted() ||
                 (mode == FileMode::Eq && d.what == DirectiveKind::Eq) ||
                 (mode == FileMode::Normalize && d.what != DirectiveKind::Eq);
    if (!r.report.accepted()) ok = false;
    if (!shown) continue;
    NameSet dom = r.ctx.domain();
    if (gl.json) {
      json j = to_json(r.report);
      json e;
      e["directive"] = std::string(directive_name(d.what));
      e["line"] = d.span.begin.line;
      e["text"] = describe(d, r.ctx);
      e["context"] = print_context(r.ctx);
      e["report"] = std::move(j);
      out.push_back(std::move(e));
      continue;
    }
    if (!r.report.accepted()) {
      const CheckFailure& fl = *r.report.failure;
      std::cerr << where(path, d.span.begin) << ": error: " << describe(d, r.ctx) << "\n  " << fl.reason;
      if (!fl.rule.empty()) std::cerr << " [" << fl.rule << "]";
      std::cerr << "\n";
      for (const auto& p : fl.path) std::cerr << "  in " << p << "\n";
      std::cout << describe(d, r.ctx) << "  REJECTED\n";
      continue;
    }
    switch (d.what) {
      case DirectiveKind::Declare:
        if (mode == FileMode::Check) std::cout << d.name << " : " << print_kind(*r.report.kind, dom) << "\n";
        break;
      case DirectiveKind::Check:
        if (mode == FileMode::Normalize) {
          std::cout << print_term(d.lhs, dom) << "  ~>  " << print_term(*r.report.nf, dom) << "\n";
        } else {
          std::cout << print_term(d.lhs, dom) << " : " << print_kind(*r.report.kind, dom) << "\n";
        }
        break;
      case DirectiveKind::Eq:
        std::cout << print_term(d.lhs, dom) << " = " << print_term(d.rhs, dom) << " : "
                  << print_kind(d.classifier, dom) << "  (nf " << print_term(*r.report.nf, dom) << ")\n";
        break;
      case DirectiveKind::Normalize:
        std::cout << print_term(d.lhs, dom) << "  ~>  " << print_term(*r.report.nf, dom) << " : "
                  << print_kind(*r.report.kind, dom) << "\n";
        break;
    }
    if (gl.trace && r.report.trace) std::cout << r.report.trace->to_text();
  }
  if (gl.json) print_json(out);
  return ok ? 0 : 1;
}

int run_expr(const Globals& gl, const std::string& ctx_text, const std::string& expr, bool record_type, bool weak) {
  Context g = parse_context(ctx_text);
  Term m = parse_term(expr);
  Checker chk(engine_options(gl));
  CheckReport r = chk.check_context(g);
  if (r.accepted()) r = chk.infer(g, m, record_type ? Demand::RecordType : Demand::Value);
  if (gl.json) {
    print_json(to_json(r));
  } else if (r.accepted()) {
    NameSet dom = g.domain();
    std::cout << print_term(weak ? *r.whnf : *r.nf, dom) << " : " << print_kind(*r.kind, dom) << "\n";
    if (gl.trace && r.trace) std::cout << r.trace->to_text();
  } else {
    std::cerr << "error: " << r.failure->reason;
    if (!r.failure->rule.empty()) std::cerr << " [" << r.failure->rule << "]";
    std::cerr << "\n";
    for (const auto& p : r.failure->path) std::cerr << "  in " << p << "\n";
  }
  return r.accepted() ? 0 : 1;
}

SystemVariant variant_of(const Globals& gl) {
  auto v = variant_from_name(gl.variant);
  if (!v) throw UsageError("unknown variant " + gl.variant + " (expected full or minus)");
  return *v;
}

int run_derive(const Globals& gl, const std::vector<std::string>& files) {
  SystemVariant v = variant_of(gl);
  bool ok = true;
  json out = json::array();
  for (const auto& path : files) {
    Script s = parse_script(read_file(path));
    for (const auto& e : s.entries) {
      DeclCheckResult r = check_derivation(*e.deriv, v);
      bool expected = e.expect == Expectation::Valid ? r.ok : !r.ok;
      if (!expected) ok = false;
      std::string verb = e.expect == Expectation::Valid ? "derive" : "refute";
      if (gl.json) {
        out.push_back({{"file", path},
                       {"line", e.span.begin.line},
                       {"expect", verb},
                       {"conclusion", print_judgement(e.deriv->conclusion)},
                       {"valid", r.ok},
                       {"as_expected", expected},
                       {"nodes", r.nodes_checked},
                       {"diagnostic", r.diagnostic ? to_json(*r.diagnostic) : json(nullptr)}});
        continue;
      }
      std::cout << where(path, e.span.begin) << ": " << verb << " " << (r.ok ? "valid" : "invalid")
                << (expected ? "" : "  UNEXPECTED") << "\n";
      if (r.diagnostic && (!expected || e.expect == Expectation::Invalid)) {
        (expected ? std::cout : std::cerr) << "  " << r.diagnostic->to_text() << "\n";
      }
    }
  }
  if (gl.json) print_json(out);
  return ok ? 0 : 1;
}

int run_derive_auto(const Globals& gl, const std::string& text, std::size_t depth) {
  Judgement j = parse_judgement(text);
  DeriveOptions o;
  o.variant = variant_of(gl);
  o.depth = depth;
  if (gl.fuel) o.fuel = gl.fuel;
  DeriveResult r = derive_auto(j, o);
  if (gl.json) {
    print_json({{"judgement", print_judgement(j)},
                {"found", r.deriv != nullptr},
                {"height", r.height},
                {"reason", r.reason},
                {"derivation", r.deriv ? to_json(*r.deriv) : json(nullptr)}});
  } else if (r.deriv) {
    std::cout << "-- height " << r.height << ", " << derivation_nodes(*r.deriv) << " nodes\n"
              << print_derivation_script(*r.deriv);
  } else {
    std::cerr << "no derivation: " << r.reason << "\n";
  }
  return r.deriv ? 0 : 1;
}

int run_props(const Globals& gl, bool all, const std::vector<std::string>& names, bool coverage) {
  EnumConfig cfg;
  if (gl.size) cfg.max_term_size = gl.size;
  cfg.seed = gl.seed;
  std::vector<Property> ps;
  if (all || (names.empty() && !coverage)) ps = all_properties();
  for (const auto& n : names) {
    auto p = property_from_name(n);
    if (!p) throw UsageError("unknown property " + n);
    ps.push_back(*p);
  }
  Oracle o(cfg);
  std::vector<PropertyReport> rs;
  bool ok = true;
  for (Property p : ps) {
    rs.push_back(o.run(p));
    ok = ok && rs.back().passed();
  }
  std::optional<Oracle::Coverage> cov;
  if (coverage) {
    cov = o.coverage();
    ok = ok && cov->missing.empty();
  }
  if (gl.json) {
    json j;
    j["max_term_size"] = cfg.max_term_size;
    j["seed"] = cfg.seed;
    j["corpus"] = {{"items", o.corpus().items.size()},
                   {"enumerated", o.corpus().enumerated},
                   {"sampled", o.corpus().sampled}};
    json arr = json::array();
    for (const auto& r : rs) arr.push_back(to_json(r));
    j["reports"] = std::move(arr);
    if (cov) {
      json t, d;
      for (std::size_t i = 0; i < kTosRuleCount; ++i) t[std::string(tos_rule_name(static_cast<TosRule>(i)))] = cov->tos[i];
      for (std::size_t i = 0; i < kDeclRuleCount; ++i) d[std::string(rule_name(static_cast<DeclRule>(i)))] = cov->decl[i];
      j["coverage"] = {{"tos", t}, {"declarative", d}, {"missing", cov->missing}};
    }
    print_json(j);
  } else {
    std::cout << "corpus: " << o.corpus().items.size() << " accepted items (" << o.corpus().enumerated
              << " enumerated, " << o.corpus().sampled << " sampled), size <= " << cfg.max_term_size << ", seed "
              << cfg.seed << "\n\n";
    if (!rs.empty()) std::cout << report_table(rs);
    if (cov) {
      std::cout << "\nrule coverage: " << (cov->missing.empty() ? "complete" : "incomplete") << "\n";
      for (const auto& m : cov->missing) std::cout << "  never used: " << m << "\n";
    }
  }
  return ok ? 0 : 1;
}

int run_graph(const Globals& gl, const std::string& expr) {
  Term m = parse_term(expr);
  ReductionGraph g = reduction_graph(m, gl.fuel ? gl.fuel : 5000);
  if (gl.json) {
    print_json(to_json(g));
  } else {
    std::cout << g.to_text();
    std::cout << "nodes " << g.nodes.size() << ", edges " << g.edges.size() << (g.truncated ? ", truncated" : "")
              << (g.acyclic() ? ", acyclic" : ", cyclic") << "\n";
  }
  return g.truncated ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type checker and evaluator for LF with dependent record types"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals gl;
  app.add_flag("--trace", gl.trace, "Attach the TOS derivation to results");
  app.add_flag("--json", gl.json, "Structured output");
  app.add_option("--fuel", gl.fuel, "Evaluation fuel (default: $IDRT_FUEL or 1000000)");
  app.add_option("--size", gl.size, "Maximum term size for props");
  app.add_option("--seed", gl.seed, "Seed of the random supplement for props");
  app.add_option("--variant", gl.variant, "Declarative system: full or minus")->check(CLI::IsMember({"full", "minus"}));

  std::string file, expr, ctx_text;
  bool as_type = false;
  std::vector<std::string> files;

  auto* check = app.add_subcommand("check", "Check a .idrt file");
  check->add_option("file", file, "Source file")->required();
  auto* eq = app.add_subcommand("eq", "Decide the eq directives of a .idrt file");
  eq->add_option("file", file, "Source file")->required();

  auto* normalize = app.add_subcommand("normalize", "Normal form of a term, or of every term in a file");
  normalize->add_option("input", expr, "File or term")->required();
  normalize->add_option("--context", ctx_text, "Context for a term, e.g. \"T : Type, c : El(T)\"");
  normalize->add_flag("--record-type", as_type, "Read <> as the empty record type");

  auto* whnf = app.add_subcommand("whnf", "Weak-head normal form of a term");
  whnf->add_option("term", expr, "Term")->required();
  whnf->add_option("--context", ctx_text, "Context");
  whnf->add_flag("--record-type", as_type, "Read <> as the empty record type");

  auto* derive = app.add_subcommand("derive", "Check derivation scripts, or build one with --auto");
  std::string auto_j;
  std::size_t depth = 20;
  derive->add_option("scripts", files, "Script files");
  derive->add_option("--auto", auto_j, "Judgement to derive");
  derive->add_option("--depth", depth, "Height bound for --auto");

  auto* props = app.add_subcommand("props", "Run property suites");
  bool all = false, coverage = false;
  std::vector<std::string> names;
  props->add_flag("--all", all, "All properties");
  props->add_flag("--coverage", coverage, "Report rule coverage");
  props->add_option("names", names, "Property names");

  auto* graph = app.add_subcommand("graph", "Untyped reduction graph of a term");
  graph->add_option("term", expr, "Term")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*check) return run_file(gl, file, FileMode::Check);
    if (*eq) return run_file(gl, file, FileMode::Eq);
    if (*normalize) {
      if (std::filesystem::is_regular_file(expr)) return run_file(gl, expr, FileMode::Normalize);
      return run_expr(gl, ctx_text, expr, as_type, false);
    }
    if (*whnf) return run_expr(gl, ctx_text, expr, as_type, true);
    if (*derive) {
      if (!auto_j.empty()) return run_derive_auto(gl, auto_j, depth);
      if (files.empty()) throw UsageError("derive needs script files or --auto");
      return run_derive(gl, files);
    }
    if (*props) return run_props(gl, all, names, coverage);
    if (*graph) return run_graph(gl, expr);
  } catch (const ParseError& e) {
    std::cerr << where(current_source, e.pos()) << ": parse error: " << e.detail() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
