#pragma once

#include <json.hpp>

#include "idrt/checker.hpp"
#include "idrt/declarative.hpp"
#include "idrt/oracle.hpp"
#include "idrt/reduction.hpp"
#include "idrt/tos.hpp"

// Structured dumps. Terms, kinds and contexts are stored in concrete syntax
// and parsed back on load, so every *_from_json inverts the matching to_json
// up to alpha-equivalence. Loaders throw std::invalid_argument on bad input.

namespace idrt {

using json = nlohmann::ordered_json;

json to_json(const TosTrace& t);
TosTrace trace_from_json(const json& j);

json to_json(const CheckReport& r);
CheckReport check_report_from_json(const json& j);

json to_json(const PropertyReport& r);
PropertyReport property_report_from_json(const json& j);

json to_json(const ReductionGraph& g);
ReductionGraph graph_from_json(const json& j);

json to_json(const DeclDiagnostic& d);
DeclDiagnostic diagnostic_from_json(const json& j);

// A derivation is stored as its script text.
json to_json(const DeclDerivation& d);
DerivPtr derivation_from_json(const json& j);

}  // namespace idrt
