#pragma once

#include <string>

#include "json.hpp"
#include "qtester/ncomb.hpp"
#include "qtester/robustness.hpp"

namespace qtester::io {

using Json = nlohmann::json;

/// {"dims": [d1, d0, ...], "entries": [[re, im], ...]} with entries row-major.
/// Serialization round-trips bit-exactly.
Json operator_to_json(const ComplexOperator& op);
ComplexOperator operator_from_json(const Json& j);

Json state_to_json(const DensityOperator& rho);
DensityOperator state_from_json(const Json& j);

/// {"kind": "povm"|"tester", "outcomes": [...], "dims": [...], "elements": [...]}
Json povm_to_json(const Povm& p);
Povm povm_from_json(const Json& j);

Json tester_to_json(const Tester& t);
Tester tester_from_json(const Json& j);

/// N-combs and N-testers carry "steps" and the full interleaved dims list.
Json ncomb_to_json(const NComb& c);
NComb ncomb_from_json(const Json& j);

Json ntester_to_json(const NTester& t);
NTester ntester_from_json(const Json& j);

Json verdict_to_json(const CompatibilityVerdict& v);
Json robustness_to_json(const RobustnessResult& r);
Json bounds_to_json(const BoundReport& b);
Json flags_to_json(const StructuralFlags& f);

/// Loads any of the known kinds; "kind" defaults to "state" for a bare
/// operator object.
struct LoadedObject {
  std::string kind;
  std::optional<DensityOperator> state;
  std::optional<Povm> povm;
  std::optional<Tester> tester;
  std::optional<NComb> comb;
  std::optional<NTester> ntester;
};

LoadedObject load_object(const Json& j);
LoadedObject load_object_file(const std::string& path);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace qtester::io
