#include "idrt/serialize.hpp"

#include <stdexcept>

#include "idrt/frontend.hpp"

namespace idrt {

namespace {

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw std::invalid_argument(std::string("missing field ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad field ") + key + ": " + e.what());
  }
}

std::optional<std::string> opt_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return field<std::string>(j, key);
}

std::string_view form_name(TraceForm f) {
  switch (f) {
    case TraceForm::Context:
      return "context";
    case TraceForm::Kind:
      return "kind";
    case TraceForm::Term:
      return "term";
  }
  return "term";
}

TraceForm form_from(const std::string& s) {
  if (s == "context") return TraceForm::Context;
  if (s == "kind") return TraceForm::Kind;
  if (s == "term") return TraceForm::Term;
  throw std::invalid_argument("unknown trace form " + s);
}

}  // namespace

json to_json(const TosTrace& t) {
  json j;
  j["rule"] = std::string(tos_rule_name(t.rule));
  j["form"] = std::string(form_name(t.form));
  j["context"] = print_context(t.ctx);
  NameSet dom = t.ctx.domain();
  switch (t.form) {
    case TraceForm::Context:
      j["context_nf"] = print_context(t.ctx_nf);
      break;
    case TraceForm::Kind:
      j["subject"] = print_kind(t.subject_kind, dom);
      j["kind_nf"] = print_kind(t.kind_nf, dom);
      break;
    case TraceForm::Term:
      j["subject"] = print_term(t.subject, dom);
      j["whnf"] = print_term(t.whnf, dom);
      j["nf"] = print_term(t.nf, dom);
      j["kind"] = print_kind(t.kind_nf, dom);
      break;
  }
  j["conclusion"] = t.conclusion();
  json ps = json::array();
  for (const auto& p : t.premises) ps.push_back(to_json(p));
  j["premises"] = std::move(ps);
  return j;
}

TosTrace trace_from_json(const json& j) {
  TosTrace t;
  auto rule = tos_rule_from_name(field<std::string>(j, "rule"));
  if (!rule) throw std::invalid_argument("unknown TOS rule " + field<std::string>(j, "rule"));
  t.rule = *rule;
  t.form = form_from(field<std::string>(j, "form"));
  try {
    t.ctx = parse_context(field<std::string>(j, "context"));
    switch (t.form) {
      case TraceForm::Context:
        t.ctx_nf = parse_context(field<std::string>(j, "context_nf"));
        break;
      case TraceForm::Kind:
        t.subject_kind = parse_kind(field<std::string>(j, "subject"));
        t.kind_nf = parse_kind(field<std::string>(j, "kind_nf"));
        break;
      case TraceForm::Term:
        t.subject = parse_term(field<std::string>(j, "subject"));
        t.whnf = parse_term(field<std::string>(j, "whnf"));
        t.nf = parse_term(field<std::string>(j, "nf"));
        t.kind_nf = parse_kind(field<std::string>(j, "kind"));
        break;
    }
  } catch (const ParseError& e) {
    throw std::invalid_argument(std::string("bad syntax in trace: ") + e.what());
  }
  for (const auto& p : field<json>(j, "premises")) t.premises.push_back(trace_from_json(p));
  return t;
}

json to_json(const CheckReport& r) {
  json j;
  j["verdict"] = r.accepted() ? "accepted" : "rejected";
  NameSet dom = r.context ? r.context->domain() : NameSet{};
  j["context"] = r.context ? json(print_context(*r.context)) : json(nullptr);
  j["kind"] = r.kind ? json(print_kind(*r.kind, dom)) : json(nullptr);
  j["whnf"] = r.whnf ? json(print_term(*r.whnf, dom)) : json(nullptr);
  j["nf"] = r.nf ? json(print_term(*r.nf, dom)) : json(nullptr);
  if (r.failure) {
    j["failure"] = {{"rule", r.failure->rule}, {"reason", r.failure->reason}, {"path", r.failure->path}};
  } else {
    j["failure"] = nullptr;
  }
  if (r.trace) j["trace"] = to_json(*r.trace);
  return j;
}

CheckReport check_report_from_json(const json& j) {
  CheckReport r;
  std::string v = field<std::string>(j, "verdict");
  if (v != "accepted" && v != "rejected") throw std::invalid_argument("unknown verdict " + v);
  r.verdict = v == "accepted" ? Verdict::Accepted : Verdict::Rejected;
  try {
    if (auto s = opt_field(j, "context")) r.context = parse_context(*s);
    if (auto s = opt_field(j, "kind")) r.kind = parse_kind(*s);
    if (auto s = opt_field(j, "whnf")) r.whnf = parse_term(*s);
    if (auto s = opt_field(j, "nf")) r.nf = parse_term(*s);
  } catch (const ParseError& e) {
    throw std::invalid_argument(std::string("bad syntax in report: ") + e.what());
  }
  if (j.contains("failure") && !j.at("failure").is_null()) {
    const json& f = j.at("failure");
    r.failure = CheckFailure{field<std::vector<std::string>>(f, "path"), field<std::string>(f, "reason"),
                             field<std::string>(f, "rule")};
  }
  if (j.contains("trace")) r.trace = trace_from_json(j.at("trace"));
  return r;
}

json to_json(const PropertyReport& r) {
  json fs = json::array();
  for (const auto& f : r.failures) fs.push_back({{"input", f.input}, {"expected", f.expected}, {"got", f.got}});
  return {{"property", r.property},
          {"instances_checked", r.instances_checked},
          {"passed", r.passed()},
          {"failures", std::move(fs)}};
}

PropertyReport property_report_from_json(const json& j) {
  PropertyReport r;
  r.property = field<std::string>(j, "property");
  r.instances_checked = field<std::size_t>(j, "instances_checked");
  for (const auto& f : field<json>(j, "failures")) {
    r.failures.push_back({field<std::string>(f, "input"), field<std::string>(f, "expected"), field<std::string>(f, "got")});
  }
  return r;
}

json to_json(const ReductionGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) nodes.push_back(print_term(n));
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back({{"src", e.src}, {"step", std::string(step_name(e.kind))}, {"dst", e.dst}});
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}, {"truncated", g.truncated}};
}

ReductionGraph graph_from_json(const json& j) {
  ReductionGraph g;
  try {
    for (const auto& n : field<json>(j, "nodes")) g.nodes.push_back(parse_term(n.get<std::string>()));
  } catch (const ParseError& e) {
    throw std::invalid_argument(std::string("bad syntax in graph: ") + e.what());
  }
  for (const auto& e : field<json>(j, "edges")) {
    auto k = step_from_name(field<std::string>(e, "step"));
    if (!k) throw std::invalid_argument("unknown step " + field<std::string>(e, "step"));
    GraphEdge ge{field<std::size_t>(e, "src"), *k, field<std::size_t>(e, "dst")};
    if (ge.src >= g.nodes.size() || ge.dst >= g.nodes.size()) throw std::invalid_argument("edge out of range");
    g.edges.push_back(ge);
  }
  g.truncated = field<bool>(j, "truncated");
  return g;
}

json to_json(const DeclDiagnostic& d) {
  return {{"path", d.path}, {"rule", d.rule}, {"slot", d.slot}, {"message", d.message}};
}

DeclDiagnostic diagnostic_from_json(const json& j) {
  return {field<std::vector<std::size_t>>(j, "path"), field<std::string>(j, "rule"), field<std::string>(j, "slot"),
          field<std::string>(j, "message")};
}

json to_json(const DeclDerivation& d) {
  return {{"conclusion", print_judgement(d.conclusion)},
          {"height", derivation_height(d)},
          {"nodes", derivation_nodes(d)},
          {"script", print_derivation_script(d)}};
}

DerivPtr derivation_from_json(const json& j) {
  Script s;
  try {
    s = parse_script(field<std::string>(j, "script"));
  } catch (const ParseError& e) {
    throw std::invalid_argument(std::string("bad derivation script: ") + e.what());
  }
  if (s.entries.size() != 1) throw std::invalid_argument("expected exactly one derivation");
  return s.entries.front().deriv;
}

}  // namespace idrt
