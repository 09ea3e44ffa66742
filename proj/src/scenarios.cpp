#include "qtester/scenarios.hpp"

#include <cmath>
#include <cstdio>

#include "qtester/spectral.hpp"

namespace qtester::scenarios {

namespace {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexOperator qubit(const Matrix& m) { return ComplexOperator(DimSignature({2}), m); }

}  // namespace

ComplexOperator p_alpha(double alpha) {
  Matrix m = 0.5 * (Matrix::Identity(2, 2) + std::sin(alpha) * pauli_x() +
                    std::cos(alpha) * pauli_z());
  return qubit(m);
}

Eigen::Vector2cd beta_ket(double beta) {
  Eigen::Vector2cd v;
  v << std::cos(beta / 2), std::sin(beta / 2);
  return v;
}

PolarizationPair polarization_pair(double theta, double phi) {
  if (theta < 0 || theta > M_PI || phi < 0 || phi > M_PI)
    throw Error("polarization angles must lie in [0, pi]");
  auto a1 = tensor(p_alpha(-phi / 2), p_alpha(-theta / 2));
  auto a2 = tensor(p_alpha(M_PI - phi / 2), p_alpha(-theta / 2));
  auto b1 = tensor(p_alpha(phi / 2), p_alpha(theta / 2));
  auto b2 = tensor(p_alpha(phi / 2 - M_PI), p_alpha(theta / 2));
  return PolarizationPair{theta, phi, tester_from_elements({a1, a2}),
                          tester_from_elements({b1, b2})};
}

RegionMQuery region_m(double theta, double phi) {
  if (theta < 0 || theta > M_PI || phi < 0 || phi > M_PI)
    throw Error("polarization angles must lie in [0, pi]");
  RegionMQuery q;
  double s = std::sin(theta / 2);
  q.member = s >= std::sin(phi) / (2.0 + std::sin(phi)) - 1e-12;
  if (q.member) q.closed_form_lambda = s / (1.0 + s);
  return q;
}

RegionMWitness region_m_witness(double theta, double phi, double tol) {
  auto query = region_m(theta, phi);
  if (!query.member) throw Error("region_m_witness called outside region M");
  PolarizationPair pair = polarization_pair(theta, phi);

  const double s = std::sin(theta / 2);
  const double lam = s / (1.0 + s);
  // delta = -(sin phi / 2)(1 - s)/s; at s = 0 membership forces sin phi = 0.
  const double delta = s > 1e-12 ? -(std::sin(phi) / 2.0) * (1.0 - s) / s : 0.0;

  auto noise_effect_a = (1.0 - delta) / 2.0 * p_alpha((phi + M_PI) / 2) +
                        (1.0 + delta) / 2.0 * p_alpha((phi - M_PI) / 2);
  auto noise_effect_b = (1.0 - delta) / 2.0 * p_alpha(-(phi + M_PI) / 2) +
                        (1.0 + delta) / 2.0 * p_alpha(-(phi - M_PI) / 2);
  auto rho_t = p_alpha(M_PI / 2);
  auto sigma_t = p_alpha(-M_PI / 2);
  auto i2 = ComplexOperator::identity(DimSignature({2}));
  auto n1a = tensor(noise_effect_a, rho_t);
  auto n1b = tensor(noise_effect_b, sigma_t);

  RegionMWitness w{lam,
                   delta,
                   tester_from_elements({n1a, tensor(i2, rho_t) - n1a}, pair.a.outcomes()),
                   tester_from_elements({n1b, tensor(i2, sigma_t) - n1b}, pair.b.outcomes()),
                   ComplexOperator(),
                   ComplexOperator(),
                   {}};

  auto rho = p_alpha(-theta / 2);
  auto sigma = p_alpha(theta / 2);
  w.omega = ((1 - lam) * 0.5) * (rho + sigma) + (lam * 0.5) * i2;

  // C from the printed 2x2 seed on span{v1, v2}.
  const double a_coef = std::pow(std::cos(phi / 2), 2) + std::pow(std::sin(phi / 2), 2) * s;
  const double b_coef = std::cos(phi / 2) * std::cos(theta / 2);
  Eigen::Vector4cd v1 = Eigen::Vector4cd::Zero(), v2 = Eigen::Vector4cd::Zero();
  {
    auto k1 = beta_ket(phi / 2), k2 = beta_ket(M_PI / 2);
    auto k3 = beta_ket(-phi / 2), k4 = beta_ket(-M_PI / 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        v1(i * 2 + j) = k1(i) * k2(j);
        v2(i * 2 + j) = k3(i) * k4(j);
      }
  }
  Matrix c = 0.5 * (1 - lam) *
             (a_coef * (v1 * v1.adjoint() + v2 * v2.adjoint()) +
              b_coef * (v1 * v2.adjoint() + v2 * v1.adjoint()));
  w.c_op = ComplexOperator(DimSignature({2, 2}), c);
  w.matg_min_eig = 0.5 * (1 - lam) * (a_coef - b_coef);

  auto abar1 = (1 - lam) * pair.a.element(0) + lam * n1a;
  auto bbar1 = (1 - lam) * pair.b.element(0) + lam * n1b;
  auto iw = tensor(i2, w.omega);
  w.joint = {w.c_op, abar1 - w.c_op, bbar1 - w.c_op, iw + w.c_op - abar1 - bbar1};

  w.joint_min_eig = std::numeric_limits<double>::infinity();
  for (const auto& cjk : w.joint)
    w.joint_min_eig = std::min(w.joint_min_eig, min_eigenvalue(cjk));

  // Reduced matrix W: A1bar - C vanishes outside the middle 2x2 block in the
  // basis {v1, v2, v3, v4}. The (v3, v3) entry evaluates to
  // [sin^2(phi/2)(1 - s) + s] / (2(1 + s)). A looser variant,
  // (1/2)(1 - sin^2(phi/2) s/(1+s)), exceeds it by cos^2(phi/2)/(2(1+s));
  // positivity of both is checked.
  const double denom = 1.0 + s;
  const double z_entry = (std::pow(std::sin(phi / 2), 2) * (1.0 - s) + s) / (2.0 * denom);
  const double z_quoted = 0.5 * (1.0 - std::pow(std::sin(phi / 2), 2) * s / denom);
  w.w_xyz = {0.5 * (1.0 - a_coef / denom),
             std::sin(phi / 2) * std::cos(theta / 2) / (2.0 * denom), z_entry};
  {
    auto min_eig2 = [](double x, double y, double z) {
      double tr = x + z, det = x * z - y * y;
      return tr / 2 - std::sqrt(std::max(0.0, tr * tr / 4 - det));
    };
    w.w_min_eig = std::min(min_eig2(w.w_xyz[0], w.w_xyz[1], w.w_xyz[2]),
                           min_eig2(w.w_xyz[0], w.w_xyz[1], z_quoted));
  }
  {
    Eigen::Vector4cd v3 = Eigen::Vector4cd::Zero(), v4 = Eigen::Vector4cd::Zero();
    auto k1 = beta_ket(phi / 2 - M_PI), k2 = beta_ket(M_PI / 2);
    auto k3 = beta_ket(M_PI - phi / 2), k4 = beta_ket(-M_PI / 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        v3(i * 2 + j) = k1(i) * k2(j);
        v4(i * 2 + j) = k3(i) * k4(j);
      }
    Matrix basis(4, 4);
    basis.col(0) = v1;
    basis.col(1) = v2;
    basis.col(2) = v3;
    basis.col(3) = v4;
    Matrix gap = basis.adjoint() * (abar1 - w.c_op).matrix() * basis;
    Matrix expect = Matrix::Zero(4, 4);
    expect(1, 1) = w.w_xyz[0];
    expect(2, 2) = w.w_xyz[2];
    expect(1, 2) = w.w_xyz[1];
    expect(2, 1) = w.w_xyz[1];
    w.reduced_entry_residual = max_abs(gap - expect);
  }

  // D = A1bar + B1bar - I(x)omega must equal C - SCS.
  {
    ComplexOperator d = abar1 + bbar1 - iw;
    ComplexOperator s_op(DimSignature({2, 2}),
                         tensor(qubit(pauli_x()), qubit(pauli_z())).matrix());
    ComplexOperator scs = s_op * w.c_op * s_op;
    w.split_residual = max_abs_diff(d, w.c_op - scs);
  }

  w.all_checks_pass = w.joint_min_eig >= -tol && w.matg_min_eig >= -tol &&
                      w.w_min_eig >= -tol && w.reduced_entry_residual <= 1e-8 &&
                      w.split_residual <= 1e-9;
  if (!w.all_checks_pass)
    throw Error("region-M analytic witness failed verification at theta=" +
                std::to_string(theta) + ", phi=" + std::to_string(phi));
  return w;
}

ExtremalDecomposition extremal_povm_decomposition(const ComplexOperator& effect, double tol) {
  if (effect.side() != 2) throw Error("extremal decomposition defined for qubit effects");
  Spectrum spec = spectral_decompose(effect);
  double ea = spec.eigenvalues(0), eb = spec.eigenvalues(1);
  if (eb < -tol || ea > 1.0 + tol) throw Error("effect out of the [0, I] interval");
  ea = std::clamp(ea, 0.0, 1.0);
  eb = std::clamp(eb, 0.0, 1.0);
  ExtremalDecomposition dec;
  dec.u1 = spec.eigenvectors.col(0) * spec.eigenvectors.col(0).adjoint();
  dec.u2 = spec.eigenvectors.col(1) * spec.eigenvectors.col(1).adjoint();
  dec.coeffs[3] = eb;        // identity share
  dec.coeffs[1] = ea - eb;   // larger-eigenvalue projector
  dec.coeffs[2] = 0.0;
  dec.coeffs[0] = 1.0 - dec.coeffs[1] - dec.coeffs[3];
  return dec;
}

namespace {

ScenarioObjects make_tv(bool horizontal) {
  Matrix vv = Matrix::Zero(2, 2), hh = Matrix::Zero(2, 2);
  vv(0, 0) = 1;
  hh(1, 1) = 1;
  const Matrix& pass = horizontal ? hh : vv;
  const Matrix& fail = horizontal ? vv : hh;
  ScenarioObjects s;
  s.testers.push_back(tester_from_elements(
      {tensor(qubit(pass), qubit(pass)), tensor(qubit(fail), qubit(pass))},
      {"pass", "fail"}));
  s.description = horizontal ? "probe of horizontal-polarization preservation"
                             : "probe of vertical-polarization preservation";
  return s;
}

ScenarioObjects make_unitality() {
  double r = 1 / std::sqrt(2.0);
  std::vector<Eigen::Vector2cd> kets(6);
  kets[0] << 1, 0;
  kets[1] << 0, 1;
  kets[2] << r, r;
  kets[3] << r, -r;
  kets[4] << r, Complex(0, 1) * r;
  kets[5] << r, Complex(0, -1) * r;
  std::vector<ComplexOperator> elements;
  std::vector<std::string> labels = {"V", "H", "D", "A", "R", "L"};
  for (const auto& k : kets) {
    Matrix p = (1.0 / 3.0) * (k * k.adjoint());
    elements.push_back(tensor(qubit(p), qubit(0.5 * Matrix::Identity(2, 2))));
  }
  ScenarioObjects s;
  s.testers.push_back(tester_from_elements(std::move(elements), labels));
  s.description = "six-outcome unitality probe with maximally mixed input";
  return s;
}

ScenarioObjects make_entangled() {
  Eigen::VectorXcd phip = omega_vector(2) / std::sqrt(2.0);
  Matrix proj = phip * phip.adjoint();
  ScenarioObjects s;
  s.testers.push_back(tester_from_elements(
      {ComplexOperator(DimSignature({2, 2}), 0.5 * proj),
       ComplexOperator(DimSignature({2, 2}), 0.5 * (Matrix::Identity(4, 4) - proj))},
      {"pass", "fail"}));
  s.description = "probe of maximal-entanglement preservation (quantum ancilla)";
  return s;
}

ScenarioObjects make_classical_ancilla() {
  Matrix vv = Matrix::Zero(2, 2), hh = Matrix::Zero(2, 2);
  vv(0, 0) = 1;
  hh(1, 1) = 1;
  double r = 1 / std::sqrt(2.0);
  Eigen::Vector2cd dket, aket;
  dket << r, r;
  aket << r, -r;
  Matrix dd = dket * dket.adjoint(), aa = aket * aket.adjoint();
  ScenarioObjects s;
  s.testers.push_back(tester_from_elements({0.5 * tensor(qubit(vv), qubit(vv)),
                                            0.5 * tensor(qubit(hh), qubit(vv)),
                                            0.5 * tensor(qubit(dd), qubit(hh)),
                                            0.5 * tensor(qubit(aa), qubit(hh))},
                                           {"V|1", "H|1", "D|2", "A|2"}));
  s.description = "classical ancilla: random choice between two probe states";
  return s;
}

ScenarioObjects make_mub(int d0, int d1) {
  if (d0 < 2 || d1 < 2) throw Error("mub_testers needs d0, d1 >= 2");
  const int d = d0 * d1;
  std::vector<ComplexOperator> a, b;
  DimSignature sig({d1, d0});
  for (int j = 0; j < d; ++j) {
    Matrix m = Matrix::Zero(d, d);
    m(j, j) = 1.0 / d0;
    a.emplace_back(sig, m);
  }
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXcd e(d);
    for (int j = 0; j < d; ++j)
      e(j) = std::polar(1.0 / std::sqrt(double(d)), 2 * M_PI * j * k / d);
    b.emplace_back(sig, Matrix((1.0 / d0) * (e * e.adjoint())));
  }
  ScenarioObjects s;
  s.testers.push_back(tester_from_elements(std::move(a)));
  s.testers.push_back(tester_from_elements(std::move(b)));
  s.description = "computational/Fourier tester pair with normalization I/d0";
  return s;
}

ScenarioObjects make_busch(double p, double q) {
  if (p < 0 || p > 1 || q < 0 || q > 1) throw Error("busch sharpness must lie in [0, 1]");
  Matrix vv = Matrix::Zero(2, 2), hh = Matrix::Zero(2, 2);
  vv(0, 0) = 1;
  hh(1, 1) = 1;
  double r = 1 / std::sqrt(2.0);
  Eigen::Vector2cd dket, aket;
  dket << r, r;
  aket << r, -r;
  Matrix p1 = (1 + p) / 2 * vv + (1 - p) / 2 * hh;
  Matrix q1 = (1 + q) / 2 * (dket * dket.adjoint()) + (1 - q) / 2 * (aket * aket.adjoint());
  ScenarioObjects s;
  s.povms.push_back(Povm({"+", "-"}, {qubit(p1), qubit(Matrix::Identity(2, 2) - p1)}));
  s.povms.push_back(Povm({"+", "-"}, {qubit(q1), qubit(Matrix::Identity(2, 2) - q1)}));
  s.description = "unsharp vertical/diagonal polarization pair";
  return s;
}

}  // namespace

ScenarioObjects named_testers(const std::string& name, const NamedParams& params) {
  if (name == "t_v") return make_tv(false);
  if (name == "t_h") return make_tv(true);
  if (name == "unitality") return make_unitality();
  if (name == "entangled") return make_entangled();
  if (name == "classical_ancilla_example") return make_classical_ancilla();
  if (name == "mub_testers") return make_mub(params.d0, params.d1);
  if (name == "busch") return make_busch(params.p, params.q);
  throw Error("unknown scenario name '" + name + "'");
}

std::vector<std::string> known_scenario_names() {
  return {"t_v", "t_h", "unitality", "entangled", "classical_ancilla_example",
          "mub_testers", "busch"};
}

std::vector<double> angle_grid(int steps) {
  if (steps < 1) throw Error("grid needs at least one step");
  std::vector<double> grid;
  grid.reserve(steps + 1);
  for (int i = 0; i <= steps; ++i) grid.push_back(M_PI * i / steps);
  return grid;
}

std::vector<SweepRow> sweep(const std::vector<double>& theta_grid,
                            const std::vector<double>& phi_grid,
                            const sdp::SolveOptions& options) {
  std::vector<SweepRow> rows;
  rows.reserve(theta_grid.size() * phi_grid.size());
  for (double theta : theta_grid) {
    for (double phi : phi_grid) {
      SweepRow row;
      row.theta = theta;
      row.phi = phi;
      auto query = region_m(theta, phi);
      row.in_m = query.member;
      row.lambda_closed_form = query.closed_form_lambda;
      PolarizationPair pair = polarization_pair(theta, phi);
      row.lambda_state_bound =
          state_robustness(pair.a.normalization(), pair.b.normalization()).lambda;
      try {
        row.lambda_sdp = tester_robustness_two_outcome(pair.a, pair.b, options).lambda;
      } catch (const Error& e) {
        row.error = e.what();
      }
      if (trace_norm(pair.a.normalization().op() - pair.b.normalization().op()) <= 1e-8) {
        try {
          row.lambda_measurement_upper =
              measurement_robustness(canonical_povm_on_support(pair.a),
                                     canonical_povm_on_support(pair.b), options)
                  .lambda;
        } catch (const Error&) {
          // leave the column empty; the sweep keeps going
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  // avoid the negative-zero artifact
  if (std::string(buf) == "-0.000000") return "0.000000";
  return buf;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "theta,phi,in_m,lambda_state_bound,lambda_closed_form,lambda_sdp,"
      "lambda_measurement_upper\n";
  for (const auto& r : rows) {
    out += format_fixed6(r.theta) + "," + format_fixed6(r.phi) + ",";
    out += r.in_m ? "1" : "0";
    out += "," + format_fixed6(r.lambda_state_bound) + ",";
    if (r.lambda_closed_form) out += format_fixed6(*r.lambda_closed_form);
    out += ",";
    if (r.lambda_sdp) out += format_fixed6(*r.lambda_sdp);
    out += ",";
    if (r.lambda_measurement_upper) out += format_fixed6(*r.lambda_measurement_upper);
    out += "\n";
  }
  return out;
}

}  // namespace qtester::scenarios
