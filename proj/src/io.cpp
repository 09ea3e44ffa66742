#include "qtester/io.hpp"

#include <fstream>

namespace qtester::io {

namespace {

Json dims_json(const DimSignature& sig) {
  Json out = Json::array();
  for (int d : sig.dims()) out.push_back(d);
  return out;
}

DimSignature dims_from_json(const Json& j) {
  std::vector<int> dims;
  for (const auto& d : j) dims.push_back(d.get<int>());
  return DimSignature(dims);
}

Json elements_json(const std::vector<ComplexOperator>& elements) {
  Json out = Json::array();
  for (const auto& e : elements) out.push_back(operator_to_json(e));
  return out;
}

std::vector<ComplexOperator> elements_from_json(const Json& j, const DimSignature& sig) {
  std::vector<ComplexOperator> out;
  for (const auto& e : j) out.push_back(operator_from_json(e).with_signature(sig));
  return out;
}

std::vector<std::string> outcomes_from_json(const Json& j, std::size_t n) {
  if (!j.is_array()) return default_outcomes(n);
  std::vector<std::string> out;
  for (const auto& o : j)
    out.push_back(o.is_string() ? o.get<std::string>() : o.dump());
  return out;
}

}  // namespace

Json operator_to_json(const ComplexOperator& op) {
  Json j;
  j["dims"] = dims_json(op.signature());
  Json entries = Json::array();
  const Matrix& m = op.matrix();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      entries.push_back({m(r, c).real(), m(r, c).imag()});
  j["entries"] = std::move(entries);
  return j;
}

ComplexOperator operator_from_json(const Json& j) {
  DimSignature sig = dims_from_json(j.at("dims"));
  const int n = sig.total();
  const auto& entries = j.at("entries");
  if (static_cast<int>(entries.size()) != n * n)
    throw Error("operator entries count " + std::to_string(entries.size()) +
                " does not match dims (expected " + std::to_string(n * n) + ")");
  Matrix m(n, n);
  int k = 0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const auto& e = entries[k++];
      m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  return ComplexOperator(sig, std::move(m));
}

Json state_to_json(const DensityOperator& rho) {
  Json j = operator_to_json(rho.op());
  j["kind"] = "state";
  return j;
}

DensityOperator state_from_json(const Json& j) {
  return DensityOperator(operator_from_json(j));
}

Json povm_to_json(const Povm& p) {
  Json j;
  j["kind"] = "povm";
  j["outcomes"] = p.outcomes();
  j["dims"] = dims_json(p.element(0).signature());
  j["elements"] = elements_json(p.elements());
  return j;
}

Povm povm_from_json(const Json& j) {
  DimSignature sig = dims_from_json(j.at("dims"));
  auto elements = elements_from_json(j.at("elements"), sig);
  auto outcomes = outcomes_from_json(j.value("outcomes", Json()), elements.size());
  return Povm(std::move(outcomes), std::move(elements));
}

Json tester_to_json(const Tester& t) {
  Json j;
  j["kind"] = "tester";
  j["outcomes"] = t.outcomes();
  j["dims"] = {t.d1(), t.d0()};
  j["elements"] = elements_json(t.elements());
  return j;
}

Tester tester_from_json(const Json& j) {
  DimSignature sig = dims_from_json(j.at("dims"));
  if (sig.num_factors() != 2) throw Error("tester dims must be [d1, d0]");
  auto elements = elements_from_json(j.at("elements"), sig);
  auto outcomes = outcomes_from_json(j.value("outcomes", Json()), elements.size());
  return tester_from_elements(std::move(elements), std::move(outcomes));
}

Json ncomb_to_json(const NComb& c) {
  Json j = operator_to_json(c.op);
  j["kind"] = "comb";
  j["steps"] = c.steps;
  return j;
}

NComb ncomb_from_json(const Json& j) {
  int steps = j.at("steps").get<int>();
  return validate_ncomb(operator_from_json(j), steps);
}

Json ntester_to_json(const NTester& t) {
  Json j;
  j["kind"] = "ntester";
  j["steps"] = t.steps;
  j["outcomes"] = t.outcomes;
  j["dims"] = dims_json(t.elements.front().signature());
  j["elements"] = elements_json(t.elements);
  return j;
}

NTester ntester_from_json(const Json& j) {
  int steps = j.at("steps").get<int>();
  DimSignature sig = dims_from_json(j.at("dims"));
  auto elements = elements_from_json(j.at("elements"), sig);
  auto outcomes = outcomes_from_json(j.value("outcomes", Json()), elements.size());
  return validate_ntester(std::move(elements), steps, std::move(outcomes)).first;
}

Json verdict_to_json(const CompatibilityVerdict& v) {
  Json j;
  j["compatible"] = v.compatible;
  if (!v.compatible) j["reason"] = to_string(v.reason);
  if (v.reason == IncompatibilityReason::NormalizationMismatch)
    j["normalization_distance"] = v.normalization_distance;
  if (v.margin) j["margin"] = *v.margin;
  if (!v.certificate.empty()) j["certificate"] = v.certificate;
  if (v.joint_povm) j["joint"] = povm_to_json(*v.joint_povm);
  if (v.joint_tester) j["joint"] = tester_to_json(*v.joint_tester);
  return j;
}

Json robustness_to_json(const RobustnessResult& r) {
  Json j;
  j["lambda"] = r.lambda;
  j["method"] = to_string(r.method);
  if (!r.noise_states.empty()) {
    j["noise_states"] = Json::array();
    for (const auto& s : r.noise_states) j["noise_states"].push_back(operator_to_json(s));
  }
  if (!r.noise_povms.empty()) {
    j["noise_povms"] = Json::array();
    for (const auto& p : r.noise_povms) j["noise_povms"].push_back(povm_to_json(p));
  }
  if (!r.noise_testers.empty()) {
    j["noise_testers"] = Json::array();
    for (const auto& t : r.noise_testers) j["noise_testers"].push_back(tester_to_json(t));
  }
  if (r.joint_povm) j["joint"] = povm_to_json(*r.joint_povm);
  if (r.joint_tester) j["joint"] = tester_to_json(*r.joint_tester);
  if (r.omega) j["omega"] = operator_to_json(*r.omega);
  return j;
}

Json bounds_to_json(const BoundReport& b) {
  Json j;
  j["state_lower"] = b.state_lower;
  j["trivial_upper"] = b.trivial_upper;
  if (b.measurement_upper) j["measurement_upper"] = *b.measurement_upper;
  if (b.discrimination_lower) j["discrimination_lower"] = *b.discrimination_lower;
  return j;
}

Json flags_to_json(const StructuralFlags& f) {
  return Json{{"commuting", f.commuting},
              {"orthogonal", f.orthogonal},
              {"jointly_diagonal", f.jointly_diagonal},
              {"comparable", f.comparable}};
}

LoadedObject load_object(const Json& j) {
  LoadedObject obj;
  obj.kind = j.value("kind", "state");
  if (obj.kind == "state")
    obj.state = state_from_json(j);
  else if (obj.kind == "povm")
    obj.povm = povm_from_json(j);
  else if (obj.kind == "tester")
    obj.tester = tester_from_json(j);
  else if (obj.kind == "comb")
    obj.comb = ncomb_from_json(j);
  else if (obj.kind == "ntester")
    obj.ntester = ntester_from_json(j);
  else
    throw Error("unknown object kind '" + obj.kind + "'");
  return obj;
}

LoadedObject load_object_file(const std::string& path) {
  return load_object(read_json_file(path));
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return Json::parse(in);  // parse errors carry byte/line info
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

}  // namespace qtester::io
