// Acceptance run: one PASS/FAIL line per criterion at the default
// enumeration bounds.
//
//   acceptance [--root DIR] [--size N] [--allow-fail NAME]...
//
// A criterion named with --allow-fail still prints FAIL but does not change
// the exit status.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "idrt/checker.hpp"
#include "idrt/declarative.hpp"
#include "idrt/frontend.hpp"
#include "idrt/oracle.hpp"
#include "idrt/reduction.hpp"

using namespace idrt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string counts(const PropertyReport& r) {
  std::ostringstream ss;
  ss << r.property << " " << r.failures.size() << "/" << r.instances_checked << " failed";
  if (!r.failures.empty()) ss << " (first: " << r.failures.front().input << ")";
  return ss.str();
}

Outcome from_reports(std::string name, const std::vector<PropertyReport>& rs, std::string extra = {},
                     bool extra_ok = true) {
  Outcome o{std::move(name), extra_ok, {}};
  for (const auto& r : rs) {
    o.pass = o.pass && r.passed();
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += counts(r);
  }
  if (!extra.empty()) o.detail += "; " + extra;
  return o;
}

void collect_rules(const DeclDerivation& d, std::set<DeclRule>& out) {
  out.insert(d.rule);
  for (const auto& p : d.premises) collect_rules(*p, out);
}

Outcome derivation_suite(const fs::path& dir, Oracle& o) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".drv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<NamedScript> both, subst;
  std::size_t positives = 0;
  std::set<DeclRule> used;
  for (const auto& p : files) {
    NamedScript ns{p.filename().string(), parse_script(slurp(p))};
    for (const auto& e : ns.script.entries) {
      if (e.expect == Expectation::Valid) {
        ++positives;
        collect_rules(*e.deriv, used);
      }
    }
    (ns.name.rfind("subst", 0) == 0 ? subst : both).push_back(std::move(ns));
  }
  std::vector<PropertyReport> rs{script_agreement(both, SystemVariant::Minus),
                                 script_agreement(both, SystemVariant::Full),
                                 script_agreement(subst, SystemVariant::Full)};
  rs[0].property = "scripts (minus)";
  rs[1].property = "scripts (full)";
  rs[2].property = "substitution scripts (full)";
  rs.push_back(o.run(Property::SoundnessBridge));
  rs.push_back(o.run(Property::CompletenessBridge));

  std::vector<std::string> missing;
  for (DeclRule r : all_decl_rules()) {
    if (!used.count(r)) missing.push_back(std::string(rule_name(r)));
  }
  std::ostringstream ss;
  ss << positives << " written derivations, " << used.size() << "/" << kDeclRuleCount << " rules";
  for (const auto& m : missing) ss << " -" << m;
  return from_reports("bridge", rs, ss.str(), positives >= 40 && missing.empty());
}

Outcome worked_example(const fs::path& root) {
  Outcome o{"example", true, {}};
  FileResult nv = check_file(parse_file(slurp(root / "samples" / "nat_vect.idrt")));
  std::size_t nv_ok = 0;
  for (const auto& r : nv.results) nv_ok += r.report.accepted();
  o.pass = o.pass && nv.ok();
  o.detail += "nat_vect " + std::to_string(nv_ok) + "/" + std::to_string(nv.results.size()) + " accepted";

  Checker c;
  Context g = parse_context("T:Type, c:El(T), r:El(<k : T>), s:El(<k : T, l : T>)");
  const char* lhs[] = {"[<r, l = c : [_:El(<k : T>)]T>]", "<r, l = c : [_:El(<k : T>)]T>.l", "s.k"};
  const char* rhs[] = {"r", "c", "[s].k"};
  const char* kinds[] = {"El(<k : T>)", "El(T)", "El(T)"};
  std::size_t eq_ok = 0;
  for (int i = 0; i < 3; ++i) {
    eq_ok += c.equal(g, parse_term(lhs[i]), parse_term(rhs[i]), parse_kind(kinds[i])).accepted();
  }
  o.pass = o.pass && eq_ok == 3;
  o.detail += "; golden equalities " + std::to_string(eq_ok) + "/3";

  FileResult dup = check_file(parse_file(slurp(root / "samples" / "dup_label.idrt")));
  bool cited = false;
  for (const auto& r : dup.results) {
    if (r.report.failure && r.report.failure->reason.find("l ∉ L") != std::string::npos) cited = true;
  }
  o.pass = o.pass && !dup.ok() && cited;
  o.detail += std::string("; dup_label ") + (dup.ok() ? "accepted" : "rejected") +
              (cited ? " citing l ∉ L" : " without citing l ∉ L");
  return o;
}

// The shape <[r], l = r.l : A> = r would need record eta.
std::string record_eta_absent(bool& ok) {
  Term t = parse_term("<[r], l = r.l : [_:El(<k : T>)]T>");
  auto steps = one_step(t);
  bool step = std::any_of(steps.begin(), steps.end(), [](const Step& s) { return alpha_eq(s.result, var("r")); });
  Checker c;
  bool eq = c.equal(parse_context("T:Type, r:El(<k : T, l : T>)"), t, var("r"), parse_kind("El(<k : T, l : T>)"))
                .accepted();
  ok = !step && !eq;
  return std::string("record eta ") + (ok ? "absent" : "present");
}

std::string omega_control(bool& ok) {
  Term omega = parse_term("([x:Type]x(x))([x:Type]x(x))");
  bool rejected = !Checker().infer({}, omega).accepted();
  ReductionGraph g = reduction_graph(omega, 5000);
  bool closes = !g.truncated && g.acyclic();
  ok = rejected && !closes;
  std::string shape = g.truncated ? "truncated" : (g.acyclic() ? "closed" : "cyclic");
  return std::string("omega ") + (rejected ? "rejected" : "accepted") + ", graph " + shape;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string root = IDRT_SOURCE_DIR;
  std::size_t size = 0;
  std::vector<std::string> allowed;
  app.add_option("--root", root, "Source tree with samples/ and tests/derivations/");
  app.add_option("--size", size, "Override the term size bound");
  app.add_option("--allow-fail", allowed, "Criteria whose failure does not fail the run");
  CLI11_PARSE(app, argc, argv);

  EnumConfig cfg;
  if (size) cfg.max_term_size = size;
  Oracle o(cfg);
  std::vector<Outcome> out;

  try {
    auto t0 = std::chrono::steady_clock::now();
    auto cov = o.coverage();
    for (Property p : all_properties()) o.run(p);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
      Outcome c{"coverage", cov.missing.empty() && secs <= 300, {}};
      std::ostringstream ss;
      ss << o.corpus().items.size() << " items, size <= " << cfg.max_term_size << ", " << static_cast<int>(secs)
         << "s";
      if (cov.missing.empty()) ss << ", every rule used";
      for (const auto& m : cov.missing) ss << ", never used " << m;
      c.detail = ss.str();
      out.push_back(c);
    }
    out.push_back(from_reports("determinacy", {o.run(Property::Determinacy)}));
    out.push_back(from_reports("adequacy", {o.run(Property::AdequacyReduction), o.run(Property::AdequacyForms)}));
    out.push_back(from_reports("subject-reduction", {o.run(Property::SubjectReduction)}));
    bool eta_ok = false;
    std::string eta = record_eta_absent(eta_ok);
    out.push_back(from_reports("church-rosser", {o.run(Property::ChurchRosser)}, eta, eta_ok));
    bool omega_ok = false;
    std::string om = omega_control(omega_ok);
    out.push_back(from_reports("strong-normalisation", {o.run(Property::StrongNormalization)}, om, omega_ok));
    out.push_back(from_reports("parallel-subject-reduction", {o.run(Property::PSR)}));
    out.push_back(derivation_suite(fs::path(root) / "tests" / "derivations", o));
    out.push_back(worked_example(fs::path(root)));
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << "\n";
    return 2;
  }

  int status = 0;
  for (const auto& c : out) {
    bool excused = std::find(allowed.begin(), allowed.end(), c.name) != allowed.end();
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail;
    if (!c.pass && excused) std::cout << " [allowed]";
    std::cout << "\n";
    if (!c.pass && !excused) status = 1;
  }
  return status;
}
