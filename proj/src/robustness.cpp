#include "qtester/robustness.hpp"

#include <cmath>

#include "qtester/spectral.hpp"

namespace qtester {

std::string to_string(RobustnessMethod m) {
  switch (m) {
    case RobustnessMethod::ClosedForm: return "closed-form";
    case RobustnessMethod::Sdp: return "sdp";
    case RobustnessMethod::Bisection: return "bisection";
  }
  return "unknown";
}

namespace {

ComplexOperator clip_psd(const ComplexOperator& m) {
  auto [pos, neg] = jordan_split(m.hermitized());
  return pos;
}

// Witness objects carry the solver's feasibility slack; validate them with
// tolerances one order looser than the solve.
Tester lenient_tester(std::vector<ComplexOperator> elements, std::vector<std::string> outcomes) {
  return validate_tester(std::move(elements), std::move(outcomes), 1e-6, 1e-5).first;
}

bool data_real(std::initializer_list<const ComplexOperator*> ops) {
  for (const auto* op : ops)
    if (op->matrix().imag().cwiseAbs().maxCoeff() > 1e-13) return false;
  return true;
}

Matrix identity_m(int n) { return Matrix::Identity(n, n); }

}  // namespace

RobustnessResult state_robustness(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("state dimensions differ");
  RobustnessResult r;
  r.method = RobustnessMethod::ClosedForm;
  ComplexOperator diff = sigma.op() - rho.op();
  double dist = trace_norm(diff);
  if (dist <= 1e-12) {
    r.lambda = 0.0;
    r.noise_states = {rho.op(), rho.op()};
    r.omega = rho.op();
    return r;
  }
  ComplexOperator delta = (1.0 / dist) * diff;
  auto [pos, neg] = jordan_split(delta);
  ComplexOperator rho_t = 2.0 * pos;
  ComplexOperator sigma_t = 2.0 * neg;
  r.lambda = dist / (dist + 2.0);
  ComplexOperator omega = (1 - r.lambda) * rho.op() + r.lambda * rho_t;
  ComplexOperator omega2 = (1 - r.lambda) * sigma.op() + r.lambda * sigma_t;
  if (max_abs_diff(omega, omega2) > 1e-9)
    throw Error("state robustness witnesses failed to meet at a common state");
  r.noise_states = {rho_t, sigma_t};
  r.omega = omega;
  return r;
}

namespace {

std::string h_name(std::size_t j, std::size_t k) {
  return "H_" + std::to_string(j) + "_" + std::to_string(k);
}

RobustnessResult measurement_lambda_zero(const Povm& p, const Povm& q,
                                         const CompatibilityVerdict& v) {
  RobustnessResult r;
  r.lambda = 0.0;
  r.method = RobustnessMethod::Sdp;
  r.noise_povms = {q, p};  // uniform cross mixing makes any pair compatible
  r.joint_povm = v.joint_povm;
  return r;
}

}  // namespace

RobustnessResult measurement_robustness(const Povm& p, const Povm& q,
                                        const sdp::SolveOptions& options) {
  if (p.dim() != q.dim()) throw DimensionError("POVMs act on different spaces");
  const int d = p.dim();
  auto compat = povm_compatibility({p, q}, options);
  if (compat.compatible) return measurement_lambda_zero(p, q, compat);

  std::vector<const ComplexOperator*> data;
  for (const auto& e : p.elements()) data.push_back(&e);
  for (const auto& e : q.elements()) data.push_back(&e);
  bool real = true;
  for (const auto* op : data)
    if (op->matrix().imag().cwiseAbs().maxCoeff() > 1e-13) real = false;
  sdp::BlockField field = real ? sdp::BlockField::RealSymmetric : sdp::BlockField::ComplexHermitian;

  sdp::SdpProblem prob;
  const std::size_t np = p.num_outcomes(), nq = q.num_outcomes();
  for (std::size_t j = 0; j < np; ++j)
    for (std::size_t k = 0; k < nq; ++k) prob.add_block(h_name(j, k), d, field);
  prob.add_scalar("mu");
  for (std::size_t j = 0; j < np; ++j) {
    sdp::Constraint c;
    c.name = "rowP" + std::to_string(j);
    c.side = d;
    for (std::size_t k = 0; k < nq; ++k) c.block_terms.push_back(sdp::on_block(h_name(j, k)));
    c.scalar_terms.push_back({"mu", -p.element(j).matrix()});
    prob.add_constraint(std::move(c));
  }
  for (std::size_t k = 0; k < nq; ++k) {
    sdp::Constraint c;
    c.name = "colQ" + std::to_string(k);
    c.side = d;
    for (std::size_t j = 0; j < np; ++j) c.block_terms.push_back(sdp::on_block(h_name(j, k)));
    c.scalar_terms.push_back({"mu", -q.element(k).matrix()});
    prob.add_constraint(std::move(c));
  }
  {
    sdp::Constraint c;
    c.name = "total";
    c.kind = sdp::ConstraintKind::Zero;
    c.side = d;
    c.constant = -identity_m(d);
    for (std::size_t j = 0; j < np; ++j)
      for (std::size_t k = 0; k < nq; ++k) c.block_terms.push_back(sdp::on_block(h_name(j, k)));
    c.scalar_terms.push_back({"mu", -identity_m(d)});
    prob.add_constraint(std::move(c));
  }
  prob.maximize_scalar("mu");

  auto sol = sdp::solve(prob, options);
  if (sol.status != sdp::SolveStatus::Optimal)
    throw sdp::SolverError("measurement robustness SDP failed: " + sol.message);
  double mu = sol.objective_value;
  RobustnessResult r;
  r.lambda = 1.0 / (1.0 + mu);
  r.method = RobustnessMethod::Sdp;

  // Noise POVMs J_j = sum_k H_jk - mu P_j and the joint for the mixtures.
  DimSignature sig({d});
  std::vector<ComplexOperator> jp, jq, joint;
  for (std::size_t j = 0; j < np; ++j) {
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t k = 0; k < nq; ++k) sum += sol.block_values[h_name(j, k)];
    jp.push_back(clip_psd(ComplexOperator(sig, sum - mu * p.element(j).matrix())));
  }
  for (std::size_t k = 0; k < nq; ++k) {
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t j = 0; j < np; ++j) sum += sol.block_values[h_name(j, k)];
    jq.push_back(clip_psd(ComplexOperator(sig, sum - mu * q.element(k).matrix())));
  }
  for (std::size_t j = 0; j < np; ++j)
    for (std::size_t k = 0; k < nq; ++k)
      joint.push_back(
          clip_psd(ComplexOperator(sig, r.lambda * sol.block_values[h_name(j, k)])));
  r.noise_povms = {Povm(p.outcomes(), std::move(jp), 1e-5),
                   Povm(q.outcomes(), std::move(jq), 1e-5)};
  r.joint_povm =
      Povm(product_outcome_labels({p.outcomes(), q.outcomes()}), std::move(joint), 1e-5);

  double cloning_bound = 0.5 * (1.0 - 1.0 / (1.0 + d));
  if (r.lambda > cloning_bound + 1e-5)
    throw Error("measurement robustness exceeded the cloning bound; solver inconsistency");
  return r;
}

sdp::SdpProblem build_lambda_compatibility(const Tester& a, const Tester& b, double lambda,
                                           bool shared_noise) {
  if (a.num_outcomes() != 2 || b.num_outcomes() != 2)
    throw Error("fixed-lambda program requires two-outcome testers");
  const auto sig = a.element(0).signature();
  const int d = sig.total();
  const int d1 = sig.factor(0);
  const int d0 = sig.factor(1);
  const Matrix& a1 = a.element(0).matrix();
  const Matrix& b1 = b.element(0).matrix();
  const Matrix rho = a.normalization().op().matrix();
  const Matrix sigma = b.normalization().op().matrix();
  sdp::BlockField field =
      data_real({&a.element(0), &b.element(0)}) ? sdp::BlockField::RealSymmetric
                                                : sdp::BlockField::ComplexHermitian;

  sdp::SdpProblem prob;
  prob.add_block("C", d, field);
  prob.add_block("At", d, field);
  prob.add_block("rhot", d0, field);
  const std::string bt = shared_noise ? "At" : "Bt";
  const std::string sigmat = shared_noise ? "rhot" : "sigmat";
  if (!shared_noise) {
    prob.add_block("Bt", d, field);
    prob.add_block("sigmat", d0, field);
  }
  const double w = lambda, v = 1.0 - lambda;

  {
    sdp::Constraint c;  // (1-l) A1 + l At - C >= 0
    c.name = "CleqA";
    c.side = d;
    c.constant = v * a1;
    c.block_terms.push_back(sdp::on_block("At", w));
    c.block_terms.push_back(sdp::on_block("C", -1.0));
    prob.add_constraint(std::move(c));
  }
  {
    sdp::Constraint c;
    c.name = "CleqB";
    c.side = d;
    c.constant = v * b1;
    c.block_terms.push_back(sdp::on_block(bt, w));
    c.block_terms.push_back(sdp::on_block("C", -1.0));
    prob.add_constraint(std::move(c));
  }
  {
    sdp::Constraint c;  // C + I(x)omega - Abar1 - Bbar1 >= 0
    c.name = "cover";
    c.side = d;
    c.constant = v * tensor(ComplexOperator::identity(DimSignature({d1})),
                            ComplexOperator(DimSignature({d0}), sigma))
                         .matrix() -
                 v * (a1 + b1);
    c.block_terms.push_back(sdp::on_block("C"));
    c.block_terms.push_back(sdp::kron_left(sigmat, d1, d0, w));
    c.block_terms.push_back(sdp::on_block("At", -w));
    c.block_terms.push_back(sdp::on_block(bt, -w));
    prob.add_constraint(std::move(c));
  }
  {
    sdp::Constraint c;  // (1-l)(rho - sigma) = l (sigmat - rhot)
    c.name = "norm_match";
    c.kind = sdp::ConstraintKind::Zero;
    c.side = d0;
    c.constant = v * (rho - sigma);
    c.block_terms.push_back(sdp::on_block(sigmat, -w));
    c.block_terms.push_back(sdp::on_block("rhot", w));
    prob.add_constraint(std::move(c));
  }
  {
    sdp::Constraint c;  // At <= I (x) rhot
    c.name = "noiseA_norm";
    c.side = d;
    c.block_terms.push_back(sdp::kron_left("rhot", d1, d0));
    c.block_terms.push_back(sdp::on_block("At", -1.0));
    prob.add_constraint(std::move(c));
  }
  if (!shared_noise) {
    sdp::Constraint c;
    c.name = "noiseB_norm";
    c.side = d;
    c.block_terms.push_back(sdp::kron_left("sigmat", d1, d0));
    c.block_terms.push_back(sdp::on_block("Bt", -1.0));
    prob.add_constraint(std::move(c));
  }
  for (const std::string& st : {std::string("rhot"), sigmat}) {
    sdp::Constraint c;
    c.name = "trace_" + st;
    c.kind = sdp::ConstraintKind::Zero;
    c.side = 1;
    c.constant = -Matrix::Identity(1, 1);
    for (int i = 0; i < d0; ++i) {
      Matrix e = Matrix::Zero(1, d0);
      e(0, i) = 1.0;
      c.block_terms.push_back(sdp::sandwich(st, e));
    }
    prob.add_constraint(std::move(c));
    if (shared_noise) break;
  }
  return prob;
}

namespace {

struct TesterPairData {
  DimSignature sig;
  int d, d0, d1;
  Matrix a1, a2, b1, b2, rho, sigma;
};

TesterPairData pair_data(const Tester& a, const Tester& b) {
  TesterPairData pd{a.element(0).signature(), 0, 0, 0, {}, {}, {}, {}, {}, {}};
  pd.d = pd.sig.total();
  pd.d1 = pd.sig.factor(0);
  pd.d0 = pd.sig.factor(1);
  pd.a1 = a.element(0).matrix();
  pd.a2 = a.element(1).matrix();
  pd.b1 = b.element(0).matrix();
  pd.b2 = b.element(1).matrix();
  pd.rho = a.normalization().op().matrix();
  pd.sigma = b.normalization().op().matrix();
  return pd;
}

// Assembles the full witness set from the fixed-lambda feasibility blocks.
void extract_pair_witnesses(const Tester& a, const Tester& b, double lambda,
                            std::map<std::string, Matrix>& blocks, RobustnessResult& r) {
  const auto pd = pair_data(a, b);
  DimSignature sig = pd.sig;
  DimSignature s0({pd.d0});
  ComplexOperator at(sig, blocks["At"]);
  ComplexOperator btil(sig, blocks.count("Bt") ? blocks["Bt"] : blocks["At"]);
  ComplexOperator rhot(s0, blocks["rhot"]);
  ComplexOperator sigmat(s0, blocks.count("sigmat") ? blocks["sigmat"] : blocks["rhot"]);
  ComplexOperator c(sig, blocks["C"]);
  at = clip_psd(at);
  btil = clip_psd(btil);
  rhot = (1.0 / std::max(1e-12, clip_psd(rhot).trace().real())) * clip_psd(rhot);
  sigmat = (1.0 / std::max(1e-12, clip_psd(sigmat).trace().real())) * clip_psd(sigmat);
  auto i1 = ComplexOperator::identity(DimSignature({pd.d1}));

  auto noise_a_2 = clip_psd(tensor(i1, rhot) - at);
  auto noise_b_2 = clip_psd(tensor(i1, sigmat) - btil);
  r.noise_testers = {
      lenient_tester({at, noise_a_2}, a.outcomes()),
      lenient_tester({btil, noise_b_2}, b.outcomes()),
  };
  ComplexOperator abar1 = (1 - lambda) * a.element(0) + lambda * at;
  ComplexOperator bbar1 = (1 - lambda) * b.element(0) + lambda * btil;
  ComplexOperator rho_op(s0, pd.rho);
  ComplexOperator omega = (1 - lambda) * rho_op + lambda * rhot;
  r.omega = omega;
  auto cover = tensor(i1, omega) + c - abar1 - bbar1;
  std::vector<ComplexOperator> joint = {clip_psd(c), clip_psd(abar1 - c), clip_psd(bbar1 - c),
                                        clip_psd(cover)};
  r.joint_tester =
      lenient_tester(std::move(joint), product_outcome_labels({a.outcomes(), b.outcomes()}));
}

RobustnessResult pair_result_at_lambda(const Tester& a, const Tester& b, double lambda,
                                       RobustnessMethod method,
                                       const sdp::SolveOptions& options) {
  RobustnessResult r;
  r.lambda = lambda;
  r.method = method;
  auto prob = build_lambda_compatibility(a, b, lambda);
  auto rep = sdp::feasibility(prob, options);
  if (!rep.feasible) {
    // The exact optimum sits on the feasibility boundary; nudge inward.
    prob = build_lambda_compatibility(a, b, std::min(0.5, lambda + 1e-6));
    rep = sdp::feasibility(prob, options);
  }
  if (!rep.feasible)
    throw sdp::SolverError("failed to reconstruct witnesses at lambda = " + std::to_string(lambda));
  extract_pair_witnesses(a, b, lambda, rep.witness_blocks, r);
  return r;
}

RobustnessResult tester_lambda_zero(const Tester& a, const Tester& b,
                                    const CompatibilityVerdict& v, RobustnessMethod method) {
  RobustnessResult r;
  r.lambda = 0.0;
  r.method = method;
  r.noise_testers = {b, a};  // the uniform cross pair of the trivial upper bound
  r.joint_tester = v.joint_tester;
  r.omega = a.normalization().op();
  return r;
}

bool shared_pure_normalization(const Tester& a, const Tester& b, double tol) {
  if (trace_norm(a.normalization().op() - b.normalization().op()) > tol) return false;
  auto spec = spectral_decompose(a.normalization().op());
  return spec.eigenvalues(0) >= 1.0 - 1e-8;
}

}  // namespace

RobustnessResult tester_robustness_two_outcome(const Tester& a, const Tester& b,
                                               const sdp::SolveOptions& options) {
  if (a.num_outcomes() != 2 || b.num_outcomes() != 2)
    throw Error("tester robustness requires two-outcome testers");
  if (!(a.element(0).signature() == b.element(0).signature()))
    throw DimensionError("tester signature mismatch");
  const auto pd = pair_data(a, b);

  bool identical = max_abs_diff(a.element(0), b.element(0)) <= 1e-10 &&
                   max_abs_diff(a.element(1), b.element(1)) <= 1e-10;
  if (identical) {
    auto v = two_outcome_tester_compatibility(a, b, options);
    return tester_lambda_zero(a, b, v, RobustnessMethod::ClosedForm);
  }

  DensityOperator rho = a.normalization();
  DensityOperator sigma = b.normalization();
  double state_lower = state_robustness(rho, sigma).lambda;

  StructuralFlags flags = structural_predicates(a, b);
  if (flags.jointly_diagonal || flags.comparable) {
    if (state_lower == 0.0) {
      auto v = two_outcome_tester_compatibility(a, b, options);
      if (v.compatible) return tester_lambda_zero(a, b, v, RobustnessMethod::ClosedForm);
    }
    return pair_result_at_lambda(a, b, state_lower, RobustnessMethod::ClosedForm, options);
  }

  if (shared_pure_normalization(a, b, 1e-8)) {
    // Prop: for a shared pure normalization the tester robustness equals the
    // measurement robustness of the canonical POVMs.
    Povm pa = canonical_povm_on_support(a);
    Povm pb = canonical_povm_on_support(b);
    auto meas = measurement_robustness(pa, pb, options);
    RobustnessResult r;
    r.lambda = meas.lambda;
    r.method = RobustnessMethod::Sdp;
    auto spec = spectral_decompose(a.normalization().op());
    Matrix psi = spec.eigenvectors.col(0) * spec.eigenvectors.col(0).adjoint();
    ComplexOperator pure(DimSignature({pd.d0}), psi);
    auto lift_povm = [&](const Povm& p, const std::vector<std::string>& outcomes) {
      std::vector<ComplexOperator> elems;
      for (const auto& e : p.elements())
        elems.push_back(tensor(clip_psd(e.with_signature(DimSignature({pd.d1}))), pure));
      return lenient_tester(std::move(elems), outcomes);
    };
    if (!meas.noise_povms.empty()) {
      r.noise_testers = {lift_povm(meas.noise_povms[0], a.outcomes()),
                         lift_povm(meas.noise_povms[1], b.outcomes())};
    } else {
      r.noise_testers = {b, a};
    }
    if (meas.joint_povm)
      r.joint_tester = lift_povm(*meas.joint_povm, meas.joint_povm->outcomes());
    r.omega = pure;
    return r;
  }

  {
    auto v = two_outcome_tester_compatibility(a, b, options);
    if (v.compatible) return tester_lambda_zero(a, b, v, RobustnessMethod::Sdp);
  }

  // Rescaled linear program: sup mu over H, At, Bt, rhot, sigmat.
  sdp::BlockField field = data_real({&a.element(0), &b.element(0)})
                              ? sdp::BlockField::RealSymmetric
                              : sdp::BlockField::ComplexHermitian;
  sdp::SdpProblem prob;
  prob.add_block("H", pd.d, field);
  prob.add_block("At", pd.d, field);
  prob.add_block("Bt", pd.d, field);
  prob.add_block("rhot", pd.d0, field);
  prob.add_block("sigmat", pd.d0, field);
  prob.add_scalar("mu");
  {
    sdp::Constraint c;  // mu A1 + At - H >= 0
    c.name = "HleqA";
    c.side = pd.d;
    c.scalar_terms.push_back({"mu", pd.a1});
    c.block_terms.push_back(sdp::on_block("At"));
    c.block_terms.push_back(sdp::on_block("H", -1.0));
    prob.add_constraint(std::move(c));
  }
  {
    sdp::Constraint c;
    c.name = "HleqB";
    c.side = pd.d;
    c.scalar_terms.push_back({"mu", pd.b1});
    c.block_terms.push_back(sdp::on_block("Bt"));
    c.block_terms.push_back(sdp::on_block("H", -1.0));
    prob.add_constraint(std::move(c));
  }
  {
    // H + I(x)sigmat - mu (A1 + B1 - I(x)sigma) - At - Bt >= 0
    sdp::Constraint c;
    c.name = "cover";
    c.side = pd.d;
    Matrix isigma = tensor(ComplexOperator::identity(DimSignature({pd.d1})),
                           ComplexOperator(DimSignature({pd.d0}), pd.sigma))
                        .matrix();
    c.scalar_terms.push_back({"mu", isigma - pd.a1 - pd.b1});
    c.block_terms.push_back(sdp::on_block("H"));
    c.block_terms.push_back(sdp::kron_left("sigmat", pd.d1, pd.d0));
    c.block_terms.push_back(sdp::on_block("At", -1.0));
    c.block_terms.push_back(sdp::on_block("Bt", -1.0));
    prob.add_constraint(std::move(c));
  }
  {
    sdp::Constraint c;  // sigmat - rhot - mu (rho - sigma) = 0
    c.name = "norm_match";
    c.kind = sdp::ConstraintKind::Zero;
    c.side = pd.d0;
    c.scalar_terms.push_back({"mu", -(pd.rho - pd.sigma)});
    c.block_terms.push_back(sdp::on_block("sigmat"));
    c.block_terms.push_back(sdp::on_block("rhot", -1.0));
    prob.add_constraint(std::move(c));
  }
  {
    sdp::Constraint c;
    c.name = "noiseA_norm";
    c.side = pd.d;
    c.block_terms.push_back(sdp::kron_left("rhot", pd.d1, pd.d0));
    c.block_terms.push_back(sdp::on_block("At", -1.0));
    prob.add_constraint(std::move(c));
  }
  {
    sdp::Constraint c;
    c.name = "noiseB_norm";
    c.side = pd.d;
    c.block_terms.push_back(sdp::kron_left("sigmat", pd.d1, pd.d0));
    c.block_terms.push_back(sdp::on_block("Bt", -1.0));
    prob.add_constraint(std::move(c));
  }
  for (const char* st : {"rhot", "sigmat"}) {
    sdp::Constraint c;
    c.name = std::string("trace_") + st;
    c.kind = sdp::ConstraintKind::Zero;
    c.side = 1;
    c.constant = -Matrix::Identity(1, 1);
    for (int i = 0; i < pd.d0; ++i) {
      Matrix e = Matrix::Zero(1, pd.d0);
      e(0, i) = 1.0;
      c.block_terms.push_back(sdp::sandwich(st, e));
    }
    prob.add_constraint(std::move(c));
  }
  prob.maximize_scalar("mu");

  auto sol = sdp::solve(prob, options);
  if (sol.status != sdp::SolveStatus::Optimal)
    throw sdp::SolverError("tester robustness SDP failed: " + sol.message);
  double mu = sol.objective_value;
  RobustnessResult r;
  r.lambda = 1.0 / (1.0 + mu);
  r.method = RobustnessMethod::Sdp;
  if (r.lambda < state_lower - 1e-6 || r.lambda > 0.5 + 1e-6)
    throw Error("tester robustness left the [state bound, 1/2] sandwich: " +
                std::to_string(r.lambda));

  // Recover witnesses from the rescaled variables: the noise elements are
  // unrescaled, the joint block is C = lambda H.
  std::map<std::string, Matrix> blocks;
  blocks["At"] = sol.block_values["At"];
  blocks["Bt"] = sol.block_values["Bt"];
  blocks["rhot"] = sol.block_values["rhot"];
  blocks["sigmat"] = sol.block_values["sigmat"];
  blocks["C"] = Matrix(r.lambda * sol.block_values["H"]);
  extract_pair_witnesses(a, b, r.lambda, blocks, r);
  return r;
}

RobustnessResult tester_robustness_bisection(const Tester& a, const Tester& b, double tol,
                                             const sdp::SolveOptions& options) {
  if (tol < 1e-6) throw Error("bisection tolerance must be at least 1e-6");
  double lo = state_robustness(a.normalization(), b.normalization()).lambda;
  double hi = 0.5;
  auto feasible_at = [&](double lam) {
    auto rep = sdp::feasibility(build_lambda_compatibility(a, b, lam), options);
    return rep.feasible;
  };
  if (feasible_at(lo)) {
    auto r = pair_result_at_lambda(a, b, lo, RobustnessMethod::Bisection, options);
    return r;
  }
  // invariant: infeasible at lo, feasible at hi (the uniform cross mixture)
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (feasible_at(mid))
      hi = mid;
    else
      lo = mid;
  }
  return pair_result_at_lambda(a, b, hi, RobustnessMethod::Bisection, options);
}

BoundReport bounds(const Tester& a, const Tester& b, const sdp::SolveOptions& options) {
  if (!(a.element(0).signature() == b.element(0).signature()))
    throw DimensionError("tester signature mismatch");
  const ComplexOperator& rho = a.normalization().op();
  const ComplexOperator& sigma = b.normalization().op();
  BoundReport rep;
  rep.state_lower = state_robustness(a.normalization(), b.normalization()).lambda;
  rep.trivial_upper = 0.5;
  double p_succ = helstrom_success(rho, sigma);
  rep.discrimination_lower = std::clamp(1.0 - 1.0 / (2.0 * p_succ), 0.0, 0.5);
  if (trace_norm(rho - sigma) <= 1e-8) {
    Povm pa = canonical_povm_on_support(a);
    Povm pb = canonical_povm_on_support(b);
    rep.measurement_upper = measurement_robustness(pa, pb, options).lambda;
  }
  return rep;
}

double helstrom_success(const ComplexOperator& theta1, const ComplexOperator& theta2) {
  return 0.5 * (1.0 + 0.5 * trace_norm(theta1 - theta2));
}

double ntester_discrimination_bound(const std::vector<NTester>& testers,
                                    std::optional<double> p_succ) {
  if (testers.size() < 2) throw Error("discrimination bound needs at least two testers");
  const auto sig = testers.front().elements.front().signature();
  const int steps = testers.front().steps;
  for (const auto& t : testers)
    if (t.steps != steps || !(t.elements.front().signature() == sig))
      throw DimensionError("testers are not of the same type");
  double p;
  if (p_succ) {
    p = *p_succ;
  } else {
    if (steps != 1 || testers.size() != 2)
      throw Error("p_succ must be supplied beyond a pair of 1-testers");
    p = helstrom_success(testers[0].theta, testers[1].theta);
  }
  if (p <= 0.0 || p > 1.0) throw Error("p_succ must lie in (0, 1]");
  const double k = static_cast<double>(testers.size());
  return std::clamp(1.0 - 1.0 / (k * p), 0.0, 1.0 - 1.0 / k);
}

RobustnessResult tester_robustness_set(const std::vector<Tester>& testers, double tol,
                                       const sdp::SolveOptions& options) {
  if (testers.size() < 2) throw Error("set robustness needs at least two testers");
  if (testers.size() == 2 && testers[0].num_outcomes() == 2 && testers[1].num_outcomes() == 2)
    return tester_robustness_bisection(testers[0], testers[1], std::max(tol, 1e-6), options);

  const auto sig = testers.front().element(0).signature();
  const int d = sig.total();
  const int d1 = sig.factor(0);
  const int d0 = sig.factor(1);
  for (const auto& t : testers)
    if (!(t.element(0).signature() == sig)) throw DimensionError("tester signature mismatch");

  std::vector<std::size_t> sizes;
  std::vector<std::vector<std::string>> outcome_sets;
  std::size_t total = 1;
  for (const auto& t : testers) {
    sizes.push_back(t.num_outcomes());
    outcome_sets.push_back(t.outcomes());
    total *= t.num_outcomes();
  }
  if (total > 4096) throw Error("joint outcome count exceeds cap 4096");
  auto component = [&](std::size_t flat, std::size_t x) {
    for (std::size_t i = sizes.size(); i-- > x + 1;) flat /= sizes[i];
    return flat % sizes[x];
  };

  std::vector<const ComplexOperator*> data;
  for (const auto& t : testers)
    for (const auto& e : t.elements()) data.push_back(&e);
  bool real = true;
  for (const auto* op : data)
    if (op->matrix().imag().cwiseAbs().maxCoeff() > 1e-13) real = false;
  sdp::BlockField field = real ? sdp::BlockField::RealSymmetric : sdp::BlockField::ComplexHermitian;

  auto build = [&](double lam) {
    sdp::SdpProblem prob;
    for (std::size_t k = 0; k < total; ++k)
      prob.add_block("C" + std::to_string(k), d, field);
    for (std::size_t x = 0; x < testers.size(); ++x) {
      for (std::size_t j = 0; j < testers[x].num_outcomes(); ++j)
        prob.add_block("N_" + std::to_string(x) + "_" + std::to_string(j), d, field);
      prob.add_block("rhot" + std::to_string(x), d0, field);
    }
    for (std::size_t x = 0; x < testers.size(); ++x) {
      for (std::size_t j = 0; j < testers[x].num_outcomes(); ++j) {
        sdp::Constraint c;  // sum_{k: k_x = j} C_k = (1-l) T^x_j + l N^x_j
        c.name = "marg_" + std::to_string(x) + "_" + std::to_string(j);
        c.kind = sdp::ConstraintKind::Zero;
        c.side = d;
        c.constant = -(1 - lam) * testers[x].element(j).matrix();
        for (std::size_t k = 0; k < total; ++k)
          if (component(k, x) == j) c.block_terms.push_back(sdp::on_block("C" + std::to_string(k)));
        c.block_terms.push_back(
            sdp::on_block("N_" + std::to_string(x) + "_" + std::to_string(j), -lam));
        prob.add_constraint(std::move(c));
      }
      {
        sdp::Constraint c;  // sum_j N^x_j = I (x) rhot_x
        c.name = "noise_norm_" + std::to_string(x);
        c.kind = sdp::ConstraintKind::Zero;
        c.side = d;
        for (std::size_t j = 0; j < testers[x].num_outcomes(); ++j)
          c.block_terms.push_back(
              sdp::on_block("N_" + std::to_string(x) + "_" + std::to_string(j)));
        c.block_terms.push_back(sdp::kron_left("rhot" + std::to_string(x), d1, d0, -1.0));
        prob.add_constraint(std::move(c));
      }
      {
        sdp::Constraint c;
        c.name = "trace_rhot" + std::to_string(x);
        c.kind = sdp::ConstraintKind::Zero;
        c.side = 1;
        c.constant = -Matrix::Identity(1, 1);
        for (int i = 0; i < d0; ++i) {
          Matrix e = Matrix::Zero(1, d0);
          e(0, i) = 1.0;
          c.block_terms.push_back(sdp::sandwich("rhot" + std::to_string(x), e));
        }
        prob.add_constraint(std::move(c));
      }
      if (x > 0) {
        sdp::Constraint c;  // common mixed normalization with tester 0
        c.name = "mixed_norm_" + std::to_string(x);
        c.kind = sdp::ConstraintKind::Zero;
        c.side = d0;
        c.constant = (1 - lam) * (testers[x].normalization().op().matrix() -
                                  testers[0].normalization().op().matrix());
        c.block_terms.push_back(sdp::on_block("rhot" + std::to_string(x), lam));
        c.block_terms.push_back(sdp::on_block("rhot0", -lam));
        prob.add_constraint(std::move(c));
      }
    }
    return prob;
  };

  double lo = 0.0;
  for (std::size_t i = 0; i < testers.size(); ++i)
    for (std::size_t j = i + 1; j < testers.size(); ++j)
      lo = std::max(lo, state_robustness(testers[i].normalization(),
                                         testers[j].normalization())
                            .lambda);
  double hi = 1.0 - 1.0 / static_cast<double>(testers.size());
  tol = std::max(tol, 1e-6);
  auto feasible_at = [&](double lam) { return sdp::feasibility(build(lam), options); };
  RobustnessResult r;
  r.method = RobustnessMethod::Bisection;
  auto lo_rep = feasible_at(lo);
  double lam_final = lo;
  if (!lo_rep.feasible) {
    while (hi - lo > tol) {
      double mid = 0.5 * (lo + hi);
      if (feasible_at(mid).feasible)
        hi = mid;
      else
        lo = mid;
    }
    lam_final = hi;
    lo_rep = feasible_at(hi);
  }
  r.lambda = lam_final;
  if (lo_rep.feasible) {
    std::vector<ComplexOperator> joint;
    for (std::size_t k = 0; k < total; ++k)
      joint.push_back(clip_psd(ComplexOperator(sig, lo_rep.witness_blocks["C" + std::to_string(k)])));
    r.joint_tester = lenient_tester(std::move(joint), product_outcome_labels(outcome_sets));
    for (std::size_t x = 0; x < testers.size(); ++x) {
      std::vector<ComplexOperator> elems;
      for (std::size_t j = 0; j < testers[x].num_outcomes(); ++j)
        elems.push_back(clip_psd(ComplexOperator(
            sig, lo_rep.witness_blocks["N_" + std::to_string(x) + "_" + std::to_string(j)])));
      r.noise_testers.push_back(lenient_tester(std::move(elems), testers[x].outcomes()));
    }
  }
  return r;
}

}  // namespace qtester
