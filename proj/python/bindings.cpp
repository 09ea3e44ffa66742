#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qtester/io.hpp"
#include "qtester/robustness.hpp"
#include "qtester/scenarios.hpp"
#include "qtester/spectral.hpp"

namespace py = pybind11;
using namespace qtester;

namespace {

DimSignature sig_from(const std::vector<int>& dims) { return DimSignature(dims); }

ComplexOperator op_from(const Matrix& m, const std::vector<int>& dims) {
  if (dims.empty()) return ComplexOperator(DimSignature({static_cast<int>(m.rows())}), m);
  return ComplexOperator(sig_from(dims), m);
}

Tester tester_from_matrices(const std::vector<Matrix>& elements, int d1, int d0,
                            const std::vector<std::string>& outcomes) {
  std::vector<ComplexOperator> ops;
  ops.reserve(elements.size());
  for (const auto& m : elements) ops.push_back(op_from(m, {d1, d0}));
  return tester_from_elements(std::move(ops), outcomes);
}

Povm povm_from_matrices(const std::vector<Matrix>& elements,
                        const std::vector<std::string>& outcomes) {
  std::vector<ComplexOperator> ops;
  ops.reserve(elements.size());
  for (const auto& m : elements) ops.push_back(op_from(m, {}));
  if (outcomes.empty()) return Povm::from_elements(std::move(ops));
  return Povm(outcomes, std::move(ops));
}

std::vector<Matrix> matrices_of(const std::vector<ComplexOperator>& ops) {
  std::vector<Matrix> out;
  out.reserve(ops.size());
  for (const auto& o : ops) out.push_back(o.matrix());
  return out;
}

py::dict verdict_dict(const CompatibilityVerdict& v) {
  py::dict d;
  d["compatible"] = v.compatible;
  d["reason"] = to_string(v.reason);
  d["normalization_distance"] = v.normalization_distance;
  if (v.margin) d["margin"] = *v.margin;
  d["joint_outcomes"] = v.joint_outcomes;
  if (v.joint_povm) d["joint_povm"] = matrices_of(v.joint_povm->elements());
  if (v.joint_tester) d["joint_tester"] = matrices_of(v.joint_tester->elements());
  if (!v.certificate.empty()) d["certificate"] = v.certificate;
  return d;
}

py::dict robustness_dict(const RobustnessResult& r) {
  py::dict d;
  d["lambda"] = r.lambda;
  d["method"] = to_string(r.method);
  if (!r.noise_states.empty()) d["noise_states"] = matrices_of(r.noise_states);
  if (!r.noise_povms.empty()) {
    py::list noise;
    for (const auto& p : r.noise_povms) noise.append(matrices_of(p.elements()));
    d["noise_povms"] = noise;
  }
  if (!r.noise_testers.empty()) {
    py::list noise;
    for (const auto& t : r.noise_testers) noise.append(t);
    d["noise_testers"] = noise;
  }
  if (r.joint_povm) d["joint_povm"] = matrices_of(r.joint_povm->elements());
  if (r.joint_tester) d["joint_tester"] = *r.joint_tester;
  if (r.omega) d["omega"] = r.omega->matrix();
  return d;
}

py::dict row_dict(const scenarios::SweepRow& r) {
  py::dict d;
  d["theta"] = r.theta;
  d["phi"] = r.phi;
  d["in_m"] = r.in_m;
  d["lambda_state_bound"] = r.lambda_state_bound;
  d["lambda_closed_form"] = r.lambda_closed_form ? py::object(py::float_(*r.lambda_closed_form))
                                                 : py::object(py::none());
  d["lambda_sdp"] =
      r.lambda_sdp ? py::object(py::float_(*r.lambda_sdp)) : py::object(py::none());
  d["lambda_measurement_upper"] = r.lambda_measurement_upper
                                      ? py::object(py::float_(*r.lambda_measurement_upper))
                                      : py::object(py::none());
  if (!r.error.empty()) d["error"] = r.error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "compatibility and robustness of quantum process testers";

  // translators run newest-first: register the base before the derived type
  auto base = py::register_exception<Error>(m, "QtesterError");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

  // ---- operator layer -----------------------------------------------------
  m.def(
      "tensor", [](const Matrix& a, const Matrix& b) {
        return tensor(op_from(a, {}), op_from(b, {})).matrix();
      },
      py::arg("a"), py::arg("b"), "Kronecker product");
  m.def(
      "partial_trace",
      [](const Matrix& a, const std::vector<int>& dims, std::size_t factor) {
        return partial_trace(op_from(a, dims), factor).matrix();
      },
      py::arg("m"), py::arg("dims"), py::arg("factor"));
  m.def(
      "partial_transpose",
      [](const Matrix& a, const std::vector<int>& dims, std::size_t factor) {
        return partial_transpose(op_from(a, dims), factor).matrix();
      },
      py::arg("m"), py::arg("dims"), py::arg("factor"));
  m.def(
      "swap_operator", [](int d) { return swap_operator(d, d).matrix(); }, py::arg("d"));
  m.def(
      "spectral_decompose",
      [](const Matrix& a) {
        auto s = spectral_decompose(op_from(a, {}));
        return py::make_tuple(s.eigenvalues, s.eigenvectors);
      },
      py::arg("m"), "eigenvalues (descending) and orthonormal eigenvector columns");
  m.def(
      "psd_sqrt", [](const Matrix& a) { return psd_sqrt(op_from(a, {})).matrix(); }, py::arg("m"));
  m.def(
      "psd_pinv_sqrt", [](const Matrix& a) { return psd_pinv_sqrt(op_from(a, {})).matrix(); },
      py::arg("m"));
  m.def(
      "trace_norm", [](const Matrix& a) { return trace_norm(op_from(a, {})); }, py::arg("m"));
  m.def(
      "embed_complex", [](const Matrix& a) { return sdp::embed_complex(a); }, py::arg("m"));

  // ---- quantum objects ----------------------------------------------------
  py::class_<Tester>(m, "Tester")
      .def_property_readonly("outcomes", &Tester::outcomes)
      .def_property_readonly("elements",
                             [](const Tester& t) { return matrices_of(t.elements()); })
      .def_property_readonly("normalization",
                             [](const Tester& t) { return t.normalization().op().matrix(); })
      .def_property_readonly("d0", &Tester::d0)
      .def_property_readonly("d1", &Tester::d1)
      .def("__repr__", [](const Tester& t) {
        return "<Tester with " + std::to_string(t.num_outcomes()) + " outcomes on [" +
               std::to_string(t.d1()) + "," + std::to_string(t.d0()) + "]>";
      });

  m.def("make_tester", &tester_from_matrices, py::arg("elements"), py::arg("d1"), py::arg("d0"),
        py::arg("outcomes") = std::vector<std::string>{},
        "validate tester elements on H1 (x) H0 and extract the normalization state");
  m.def(
      "tester_from_setup",
      [](int anc_dim, const Matrix& input_state, const std::vector<Matrix>& povm, int d0,
         int d1) {
        TesterSetup setup{anc_dim,
                          DensityOperator(op_from(input_state, {d0, anc_dim})),
                          povm_from_matrices(povm, {})};
        return tester_from_setup(setup, d0, d1);
      },
      py::arg("anc_dim"), py::arg("input_state"), py::arg("measurement"), py::arg("d0"),
      py::arg("d1"));
  m.def(
      "canonical_implementation",
      [](const Tester& t) {
        auto setup = canonical_implementation(t);
        py::dict d;
        d["anc_dim"] = setup.anc_dim;
        d["input_state"] = setup.input_state.op().matrix();
        d["measurement"] = matrices_of(setup.measurement.elements());
        return d;
      },
      py::arg("tester"));
  m.def(
      "canonical_povm",
      [](const Tester& t) { return matrices_of(canonical_povm_on_support(t).elements()); },
      py::arg("tester"), "canonical POVM restricted to the support of the normalization");
  m.def(
      "born_probabilities",
      [](const Tester& t, const Matrix& choi, bool deterministic) {
        return born_probabilities(
            t, ChoiOperator(op_from(choi, {t.d1(), t.d0()}), deterministic));
      },
      py::arg("tester"), py::arg("choi"), py::arg("deterministic") = true);
  m.def(
      "choi_from_kraus",
      [](const std::vector<Matrix>& kraus, int d0, int d1) {
        return ChoiOperator::from_kraus(kraus, d0, d1).op().matrix();
      },
      py::arg("kraus"), py::arg("d0"), py::arg("d1"));
  m.def(
      "identity_channel", [](int d) { return ChoiOperator::identity_channel(d).op().matrix(); },
      py::arg("d"));
  m.def(
      "ancilla_free_decomposition",
      [](const Tester& t) -> py::object {
        auto dec = ancilla_free_decomposition(t);
        if (!dec) return py::none();
        py::dict d;
        d["povm"] = matrices_of(dec->first.elements());
        d["state"] = dec->second.op().matrix();
        return d;
      },
      py::arg("tester"));
  m.def(
      "validate_ncomb",
      [](const Matrix& op, const std::vector<int>& dims, int steps) {
        validate_ncomb(op_from(op, dims), steps);
        return true;
      },
      py::arg("op"), py::arg("dims"), py::arg("steps"));
  m.def(
      "validate_ntester",
      [](const std::vector<Matrix>& elements, const std::vector<int>& dims, int steps) {
        std::vector<ComplexOperator> ops;
        for (const auto& e : elements) ops.push_back(op_from(e, dims));
        auto [t, theta] = validate_ntester(std::move(ops), steps);
        return theta.matrix();
      },
      py::arg("elements"), py::arg("dims"), py::arg("steps"),
      "returns the normalization Theta of a valid N-tester");

  // ---- compatibility ------------------------------------------------------
  m.def(
      "povm_compatibility",
      [](const std::vector<std::vector<Matrix>>& povms) {
        std::vector<Povm> objs;
        for (const auto& p : povms) objs.push_back(povm_from_matrices(p, {}));
        return verdict_dict(povm_compatibility(objs));
      },
      py::arg("povms"));
  m.def(
      "tester_compatibility",
      [](const std::vector<Tester>& testers) { return verdict_dict(tester_compatibility(testers)); },
      py::arg("testers"));
  m.def(
      "two_outcome_tester_compatibility",
      [](const Tester& a, const Tester& b) {
        return verdict_dict(two_outcome_tester_compatibility(a, b));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "structural_predicates",
      [](const Tester& a, const Tester& b) {
        auto f = structural_predicates(a, b);
        py::dict d;
        d["commuting"] = f.commuting;
        d["orthogonal"] = f.orthogonal;
        d["jointly_diagonal"] = f.jointly_diagonal;
        d["comparable"] = f.comparable;
        return d;
      },
      py::arg("a"), py::arg("b"));

  // ---- robustness ---------------------------------------------------------
  m.def(
      "state_robustness",
      [](const Matrix& rho, const Matrix& sigma) {
        return robustness_dict(
            state_robustness(DensityOperator(op_from(rho, {})), DensityOperator(op_from(sigma, {}))));
      },
      py::arg("rho"), py::arg("sigma"));
  m.def(
      "measurement_robustness",
      [](const std::vector<Matrix>& p, const std::vector<Matrix>& q) {
        return robustness_dict(
            measurement_robustness(povm_from_matrices(p, {}), povm_from_matrices(q, {})));
      },
      py::arg("p"), py::arg("q"));
  m.def(
      "tester_robustness",
      [](const Tester& a, const Tester& b) {
        return robustness_dict(tester_robustness_two_outcome(a, b));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "tester_robustness_bisection",
      [](const Tester& a, const Tester& b, double tol) {
        return robustness_dict(tester_robustness_bisection(a, b, tol));
      },
      py::arg("a"), py::arg("b"), py::arg("tol") = 1e-6);
  m.def(
      "bounds",
      [](const Tester& a, const Tester& b) {
        auto rep = bounds(a, b);
        py::dict d;
        d["state_lower"] = rep.state_lower;
        d["trivial_upper"] = rep.trivial_upper;
        d["measurement_upper"] = rep.measurement_upper
                                     ? py::object(py::float_(*rep.measurement_upper))
                                     : py::object(py::none());
        d["discrimination_lower"] = rep.discrimination_lower
                                        ? py::object(py::float_(*rep.discrimination_lower))
                                        : py::object(py::none());
        return d;
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "helstrom_success",
      [](const Matrix& t1, const Matrix& t2) {
        return helstrom_success(op_from(t1, {}), op_from(t2, {}));
      },
      py::arg("theta1"), py::arg("theta2"));
  m.def(
      "discrimination_bound",
      [](const Tester& a, const Tester& b) {
        return ntester_discrimination_bound({ntester_from_tester(a), ntester_from_tester(b)});
      },
      py::arg("a"), py::arg("b"),
      "1 - 1/(2 p_succ) with the Helstrom success probability of the normalizations");

  // ---- scenarios ----------------------------------------------------------
  m.def(
      "polarization_pair",
      [](double theta, double phi) {
        auto pair = scenarios::polarization_pair(theta, phi);
        return py::make_tuple(pair.a, pair.b);
      },
      py::arg("theta"), py::arg("phi"));
  m.def(
      "region_m",
      [](double theta, double phi) {
        auto q = scenarios::region_m(theta, phi);
        py::dict d;
        d["member"] = q.member;
        d["closed_form_lambda"] = q.closed_form_lambda
                                      ? py::object(py::float_(*q.closed_form_lambda))
                                      : py::object(py::none());
        return d;
      },
      py::arg("theta"), py::arg("phi"));
  m.def(
      "region_m_witness",
      [](double theta, double phi) {
        auto w = scenarios::region_m_witness(theta, phi);
        py::dict d;
        d["lambda"] = w.lambda;
        d["delta"] = w.delta;
        d["all_checks_pass"] = w.all_checks_pass;
        d["joint"] = matrices_of(w.joint);
        d["joint_min_eig"] = w.joint_min_eig;
        d["w_min_eig"] = w.w_min_eig;
        d["split_residual"] = w.split_residual;
        return d;
      },
      py::arg("theta"), py::arg("phi"));
  m.def(
      "extremal_povm_decomposition",
      [](const Matrix& effect) {
        auto dec = scenarios::extremal_povm_decomposition(op_from(effect, {}));
        py::dict d;
        d["coeffs"] = dec.coeffs;
        d["u1"] = dec.u1;
        d["u2"] = dec.u2;
        return d;
      },
      py::arg("effect"));
  m.def(
      "named_testers",
      [](const std::string& name, double p, double q, int d0, int d1) {
        auto objs = scenarios::named_testers(name, {p, q, d0, d1});
        py::dict d;
        d["description"] = objs.description;
        py::list testers;
        for (const auto& t : objs.testers) testers.append(t);
        d["testers"] = testers;
        py::list povms;
        for (const auto& pv : objs.povms) povms.append(matrices_of(pv.elements()));
        d["povms"] = povms;
        return d;
      },
      py::arg("name"), py::arg("p") = 0.8, py::arg("q") = 0.8, py::arg("d0") = 2,
      py::arg("d1") = 2);
  m.def(
      "sweep",
      [](const std::vector<double>& theta_grid, const std::vector<double>& phi_grid) {
        py::list rows;
        for (const auto& r : scenarios::sweep(theta_grid, phi_grid)) rows.append(row_dict(r));
        return rows;
      },
      py::arg("theta_grid"), py::arg("phi_grid"));
  m.def(
      "sweep_csv",
      [](const std::vector<double>& theta_grid, const std::vector<double>& phi_grid) {
        return scenarios::sweep_csv(scenarios::sweep(theta_grid, phi_grid));
      },
      py::arg("theta_grid"), py::arg("phi_grid"));
  m.def("angle_grid", &scenarios::angle_grid, py::arg("steps"));

  // ---- JSON bridge --------------------------------------------------------
  m.def(
      "tester_to_json", [](const Tester& t) { return io::tester_to_json(t).dump(); },
      py::arg("tester"));
  m.def(
      "tester_from_json",
      [](const std::string& text) { return io::tester_from_json(io::Json::parse(text)); },
      py::arg("text"));

  m.attr("__version__") = "0.1.0";
}
