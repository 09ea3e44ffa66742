#include "qtester/ncomb.hpp"

#include <cmath>

#include "qtester/spectral.hpp"

namespace qtester {

namespace {

// Splits off the last factor: given X on [d0..dk], returns Y with
// X ~ Y (x) I_dk, checking the residual. Y is recovered as tr_last(X)/dk.
ComplexOperator peel_identity(const ComplexOperator& x, int level, double chain_tol) {
  const std::size_t last = x.signature().num_factors() - 1;
  const int dk = x.signature().factor(last);
  ComplexOperator y = (1.0 / dk) * partial_trace(x, last);
  ComplexOperator expected = tensor(y, ComplexOperator::identity(DimSignature({dk})));
  double residual = max_abs_diff(x, expected);
  if (residual > chain_tol)
    throw ValidationError(ValidationCode::ChainViolation,
                          "chain link at level " + std::to_string(level) + " violated",
                          {static_cast<double>(level), residual});
  return y.hermitized();
}

}  // namespace

NComb validate_ncomb(const ComplexOperator& op, int steps, double chain_tol) {
  if (steps < 1) throw ValidationError(ValidationCode::DimensionMismatch, "steps must be >= 1");
  if (op.signature().num_factors() != static_cast<std::size_t>(2 * steps))
    throw ValidationError(ValidationCode::DimensionMismatch,
                          "N-comb needs 2N tensor factors, got " + op.signature().to_string());
  double mineig = min_eigenvalue(op);
  if (!op.is_hermitian() || mineig < -kPsdTol)
    throw ValidationError(ValidationCode::NotPsd, "N-comb operator not positive", {mineig});
  ComplexOperator current = op;
  for (int k = steps; k >= 1; --k) {
    // tr over H_{2k-1} must equal R^(k-1) (x) I_{2k-2}; at k = 1 it is I_0.
    ComplexOperator marg = partial_trace(current, current.signature().num_factors() - 1);
    if (k == 1) {
      double residual =
          max_abs(marg.matrix() - Matrix::Identity(marg.side(), marg.side()));
      if (residual > chain_tol)
        throw ValidationError(ValidationCode::ChainViolation,
                              "chain link at level 1 violated (tr_1 R != I_0)",
                              {1.0, residual});
      break;
    }
    current = peel_identity(marg, k, chain_tol);
  }
  return NComb{op, steps};
}

std::pair<NTester, ComplexOperator> validate_ntester(std::vector<ComplexOperator> elements,
                                                     int steps,
                                                     std::vector<std::string> outcomes,
                                                     double chain_tol) {
  if (steps < 1) throw ValidationError(ValidationCode::DimensionMismatch, "steps must be >= 1");
  if (elements.empty())
    throw ValidationError(ValidationCode::DimensionMismatch, "N-tester needs elements");
  if (outcomes.empty()) outcomes = default_outcomes(elements.size());
  const DimSignature sig = elements.front().signature();
  if (sig.num_factors() != static_cast<std::size_t>(2 * steps))
    throw ValidationError(ValidationCode::DimensionMismatch,
                          "N-tester needs 2N tensor factors, got " + sig.to_string());
  ComplexOperator sum = ComplexOperator::zero(sig);
  for (std::size_t j = 0; j < elements.size(); ++j) {
    if (!(elements[j].signature() == sig))
      throw ValidationError(ValidationCode::DimensionMismatch, "element signature mismatch");
    double mineig = min_eigenvalue(elements[j]);
    if (!elements[j].is_hermitian() || mineig < -kPsdTol)
      throw ValidationError(ValidationCode::NotPsd,
                            "N-tester element " + outcomes[j] + " not positive", {mineig});
    sum = sum + elements[j];
  }
  // Sum = Theta^(N) (x) I on the last factor, then the Theta chain.
  ComplexOperator theta = peel_identity(sum, steps + 1, chain_tol);
  ComplexOperator current = theta;
  for (int k = steps; k >= 1; --k) {
    if (k == 1) {
      double residual = std::abs(current.trace().real() - 1.0);
      if (residual > chain_tol)
        throw ValidationError(ValidationCode::ChainViolation, "tr Theta^(1) != 1",
                              {1.0, residual});
      break;
    }
    ComplexOperator marg = partial_trace(current, current.signature().num_factors() - 1);
    current = peel_identity(marg, k, chain_tol);
  }
  NTester t{std::move(outcomes), std::move(elements), steps, theta};
  return {std::move(t), std::move(theta)};
}

std::vector<double> nborn_probabilities(const NTester& t, const NComb& c) {
  if (!(t.elements.front().signature() == c.op.signature()))
    throw DimensionError("N-tester and N-comb signatures differ");
  std::vector<double> probs;
  probs.reserve(t.elements.size());
  for (const auto& tj : t.elements)
    probs.push_back((tj.matrix() * c.op.matrix()).trace().real());
  return probs;
}

NComb ncomb_from_choi(const ChoiOperator& e) {
  if (!e.deterministic())
    throw ValidationError(ValidationCode::ChainViolation,
                          "only deterministic Choi operators are 1-combs");
  return validate_ncomb(permute_factors(e.op(), {1, 0}), 1);
}

NTester ntester_from_tester(const Tester& t) {
  std::vector<ComplexOperator> elements;
  elements.reserve(t.num_outcomes());
  for (const auto& tj : t.elements()) elements.push_back(permute_factors(tj, {1, 0}));
  return validate_ntester(std::move(elements), 1, t.outcomes()).first;
}

}  // namespace qtester
