#include "qtester/objects.hpp"

#include <cmath>

#include "qtester/spectral.hpp"

namespace qtester {

std::string to_string(ValidationCode code) {
  switch (code) {
    case ValidationCode::NotPsd: return "NotPsd";
    case ValidationCode::NotProductNormalized: return "NotProductNormalized";
    case ValidationCode::TraceNotOne: return "TraceNotOne";
    case ValidationCode::NotHermitian: return "NotHermitian";
    case ValidationCode::DimensionMismatch: return "DimensionMismatch";
    case ValidationCode::ChainViolation: return "ChainViolation";
  }
  return "Unknown";
}

std::vector<std::string> default_outcomes(std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) out.push_back(std::to_string(i));
  return out;
}

DensityOperator::DensityOperator(ComplexOperator op, double trace_tol) : op_(std::move(op)) {
  if (!op_.is_hermitian())
    throw ValidationError(ValidationCode::NotHermitian, "density operator not Hermitian",
                          {op_.hermiticity_defect()});
  double mineig = min_eigenvalue(op_);
  if (mineig < -std::max(kPsdTol, trace_tol))
    throw ValidationError(ValidationCode::NotPsd, "density operator not positive", {mineig});
  double tr = op_.trace().real();
  if (std::abs(tr - 1.0) > trace_tol)
    throw ValidationError(ValidationCode::TraceNotOne,
                          "density operator trace " + std::to_string(tr), {tr});
}

Povm::Povm(std::vector<std::string> outcomes, std::vector<ComplexOperator> elements,
           double sum_tol)
    : outcomes_(std::move(outcomes)), elements_(std::move(elements)) {
  if (elements_.empty()) throw ValidationError(ValidationCode::DimensionMismatch, "empty POVM");
  if (outcomes_.size() != elements_.size())
    throw ValidationError(ValidationCode::DimensionMismatch, "outcome/element count mismatch");
  const int side = elements_.front().side();
  ComplexOperator sum = ComplexOperator::zero(elements_.front().signature());
  for (std::size_t j = 0; j < elements_.size(); ++j) {
    if (elements_[j].side() != side)
      throw ValidationError(ValidationCode::DimensionMismatch, "POVM element size mismatch");
    double mineig = min_eigenvalue(elements_[j]);
    if (!elements_[j].is_hermitian() || mineig < -kPsdTol)
      throw ValidationError(ValidationCode::NotPsd,
                            "POVM element " + outcomes_[j] + " not positive", {mineig});
    sum = sum + elements_[j].with_signature(sum.signature());
  }
  double defect = max_abs(sum.matrix() - Matrix::Identity(side, side));
  if (defect > sum_tol)
    throw ValidationError(ValidationCode::NotProductNormalized,
                          "POVM elements do not sum to identity", {defect});
}

Povm Povm::from_elements(std::vector<ComplexOperator> elements, double sum_tol) {
  auto labels = default_outcomes(elements.size());
  return Povm(std::move(labels), std::move(elements), sum_tol);
}

ChoiOperator::ChoiOperator(ComplexOperator op, bool deterministic, double tol)
    : op_(std::move(op)), deterministic_(deterministic) {
  if (op_.signature().num_factors() != 2)
    throw ValidationError(ValidationCode::DimensionMismatch, "Choi operator needs [d1, d0]");
  double mineig = min_eigenvalue(op_);
  if (!op_.is_hermitian() || mineig < -kPsdTol)
    throw ValidationError(ValidationCode::NotPsd, "Choi operator not positive", {mineig});
  if (deterministic_) {
    ComplexOperator marg = partial_trace(op_, 0);
    double defect = max_abs(marg.matrix() - Matrix::Identity(marg.side(), marg.side()));
    if (defect > tol)
      throw ValidationError(ValidationCode::NotProductNormalized,
                            "deterministic Choi operator must have identity input marginal",
                            {defect});
  }
}

ChoiOperator ChoiOperator::from_kraus(const std::vector<Matrix>& kraus, int d0, int d1) {
  Matrix e = Matrix::Zero(d1 * d0, d1 * d0);
  Matrix ksum = Matrix::Zero(d0, d0);
  for (const Matrix& k : kraus) {
    if (k.rows() != d1 || k.cols() != d0)
      throw ValidationError(ValidationCode::DimensionMismatch, "Kraus operator shape mismatch");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d1 * d0);
    for (int m = 0; m < d0; ++m)
      for (int a = 0; a < d1; ++a) v(a * d0 + m) = k(a, m);
    e += v * v.adjoint();
    ksum += k.adjoint() * k;
  }
  bool deterministic = max_abs(ksum - Matrix::Identity(d0, d0)) <= 1e-9;
  return ChoiOperator(ComplexOperator(DimSignature({d1, d0}), std::move(e)), deterministic);
}

ChoiOperator ChoiOperator::identity_channel(int d) {
  return from_kraus({Matrix::Identity(d, d)}, d, d);
}

ChoiOperator ChoiOperator::unitary_channel(const Matrix& u) {
  return from_kraus({u}, static_cast<int>(u.cols()), static_cast<int>(u.rows()));
}

std::pair<Tester, DensityOperator> validate_tester(std::vector<ComplexOperator> candidate,
                                                   std::vector<std::string> outcomes,
                                                   double psd_tol, double norm_tol) {
  if (candidate.empty())
    throw ValidationError(ValidationCode::DimensionMismatch, "tester needs at least one element");
  if (outcomes.empty()) outcomes = default_outcomes(candidate.size());
  if (outcomes.size() != candidate.size())
    throw ValidationError(ValidationCode::DimensionMismatch, "outcome/element count mismatch");
  const DimSignature sig = candidate.front().signature();
  if (sig.num_factors() != 2)
    throw ValidationError(ValidationCode::DimensionMismatch,
                          "tester elements need signature [d1, d0]");
  for (std::size_t j = 0; j < candidate.size(); ++j) {
    if (!(candidate[j].signature() == sig))
      throw ValidationError(ValidationCode::DimensionMismatch, "tester element signature mismatch");
    double mineig = min_eigenvalue(candidate[j]);
    if (!candidate[j].is_hermitian() || mineig < -psd_tol)
      throw ValidationError(ValidationCode::NotPsd,
                            "tester element " + outcomes[j] + " not positive", {mineig});
  }
  ComplexOperator sum = ComplexOperator::zero(sig);
  for (const auto& t : candidate) sum = sum + t;
  const int d1 = sig.factor(0);
  ComplexOperator rho_op = (1.0 / d1) * partial_trace(sum, 0);
  ComplexOperator expected = tensor(ComplexOperator::identity(DimSignature({d1})), rho_op);
  double defect = max_abs_diff(sum, expected);
  if (defect > norm_tol)
    throw ValidationError(ValidationCode::NotProductNormalized,
                          "element sum is not of the form I (x) rho", {defect});
  double tr = rho_op.trace().real();
  if (std::abs(tr - 1.0) > norm_tol)
    throw ValidationError(ValidationCode::TraceNotOne,
                          "normalization state trace " + std::to_string(tr), {tr});
  DensityOperator rho(rho_op.hermitized(), std::max(norm_tol, 1e-9));
  Tester t(std::move(outcomes), std::move(candidate), rho);
  return {std::move(t), std::move(rho)};
}

Tester tester_from_elements(std::vector<ComplexOperator> candidate,
                            std::vector<std::string> outcomes) {
  return validate_tester(std::move(candidate), std::move(outcomes)).first;
}

Tester tester_from_setup(const TesterSetup& setup, int d0, int d1) {
  const auto& psi = setup.input_state.op();
  const int anc = setup.anc_dim;
  if (psi.side() != d0 * anc)
    throw ValidationError(ValidationCode::DimensionMismatch, "input state must live on H0 (x) Hanc");
  if (setup.measurement.dim() != d1 * anc)
    throw ValidationError(ValidationCode::DimensionMismatch, "measurement must live on H1 (x) Hanc");
  ComplexOperator psi2 = psi.with_signature(DimSignature({d0, anc}));
  ComplexOperator swapped = permute_factors(partial_transpose(psi2, 0), {1, 0});
  ComplexOperator probe = tensor(ComplexOperator::identity(DimSignature({d1})), swapped);
  std::vector<ComplexOperator> elements;
  elements.reserve(setup.measurement.num_outcomes());
  for (const auto& p : setup.measurement.elements()) {
    ComplexOperator pj = p.with_signature(DimSignature({d1, anc}));
    ComplexOperator big = tensor(pj, ComplexOperator::identity(DimSignature({d0})));
    elements.push_back(partial_trace(big * probe, 1).hermitized());
  }
  return tester_from_elements(std::move(elements), setup.measurement.outcomes());
}

TesterSetup canonical_implementation(const Tester& t, double support_tol) {
  const int d0 = t.d0();
  const int d1 = t.d1();
  const ComplexOperator& rho = t.normalization().op();
  ComplexOperator rho_sqrt = psd_sqrt(rho);
  ComplexOperator rho_pinv = psd_pinv_sqrt(rho, support_tol);
  ComplexOperator proj = support_projector(rho, support_tol);

  Eigen::VectorXcd psi_vec = Eigen::VectorXcd::Zero(d0 * d0);
  for (int m = 0; m < d0; ++m)
    for (int a = 0; a < d0; ++a) psi_vec(m * d0 + a) += rho_sqrt.matrix()(a, m);
  Matrix psi = psi_vec * psi_vec.adjoint();
  DensityOperator input(ComplexOperator(DimSignature({d0, d0}), std::move(psi)));

  ComplexOperator sandwich = tensor(ComplexOperator::identity(DimSignature({d1})), rho_pinv);
  std::vector<ComplexOperator> povm;
  povm.reserve(t.num_outcomes());
  for (const auto& tj : t.elements()) povm.push_back((sandwich * tj * sandwich).hermitized());
  ComplexOperator deficit =
      tensor(ComplexOperator::identity(DimSignature({d1})),
             ComplexOperator(rho.signature(), Matrix::Identity(d0, d0) - proj.matrix()));
  povm.back() = (povm.back() + deficit).hermitized();
  Povm measurement(t.outcomes(), std::move(povm));
  return TesterSetup{d0, std::move(input), std::move(measurement)};
}

Povm canonical_povm_on_support(const Tester& t, double support_tol) {
  const ComplexOperator& rho = t.normalization().op();
  const int d0 = t.d0();
  const int d1 = t.d1();
  Spectrum spec = spectral_decompose(rho);
  int rank = 0;
  while (rank < d0 && spec.eigenvalues(rank) > support_tol) ++rank;
  if (rank == 0)
    throw ValidationError(ValidationCode::NotPsd, "normalization state has empty support");
  // Rows of K map the support eigenvectors to the first `rank` basis kets,
  // scaled by lambda^-1/2.
  Matrix k(rank, d0);
  for (int i = 0; i < rank; ++i)
    k.row(i) = spec.eigenvectors.col(i).adjoint() / std::sqrt(spec.eigenvalues(i));
  Matrix lift = Matrix::Zero(d1 * rank, d1 * d0);
  for (int a = 0; a < d1; ++a)
    lift.block(a * rank, a * d0, rank, d0) = k;
  std::vector<ComplexOperator> povm;
  povm.reserve(t.num_outcomes());
  for (const auto& tj : t.elements()) {
    Matrix p = lift * tj.matrix() * lift.adjoint();
    povm.emplace_back(ComplexOperator(DimSignature({d1, rank}), 0.5 * (p + p.adjoint().eval())));
  }
  return Povm(t.outcomes(), std::move(povm), 1e-8);
}

std::vector<double> born_probabilities(const Tester& t, const ChoiOperator& e) {
  if (!(t.element(0).signature() == e.op().signature()))
    throw DimensionError("tester and Choi operator signatures differ");
  std::vector<double> probs;
  probs.reserve(t.num_outcomes());
  for (const auto& tj : t.elements())
    probs.push_back((tj.matrix() * e.op().matrix()).trace().real());
  return probs;
}

std::vector<double> povm_probabilities(const Povm& p, const DensityOperator& rho) {
  if (p.dim() != rho.dim()) throw DimensionError("POVM and state dimensions differ");
  std::vector<double> probs;
  probs.reserve(p.num_outcomes());
  for (const auto& pj : p.elements())
    probs.push_back((pj.matrix() * rho.op().matrix()).trace().real());
  return probs;
}

std::optional<std::pair<Povm, DensityOperator>> ancilla_free_decomposition(const Tester& t,
                                                                           double tol) {
  const ComplexOperator& rho = t.normalization().op();
  std::vector<ComplexOperator> candidates;
  candidates.reserve(t.num_outcomes());
  for (const auto& tj : t.elements()) {
    ComplexOperator pj = partial_trace(tj, 1).hermitized();
    if (max_abs_diff(tj, tensor(pj, rho)) > tol) return std::nullopt;
    candidates.push_back(std::move(pj));
  }
  return std::make_pair(Povm(t.outcomes(), std::move(candidates), 1e-8),
                        t.normalization());
}

}  // namespace qtester
