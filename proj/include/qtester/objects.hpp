#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qtester/operator.hpp"

namespace qtester {

enum class ValidationCode {
  NotPsd,
  NotProductNormalized,
  TraceNotOne,
  NotHermitian,
  DimensionMismatch,
  ChainViolation,
};

std::string to_string(ValidationCode code);

class ValidationError : public Error {
 public:
  ValidationError(ValidationCode code, const std::string& what, std::vector<double> witness = {})
      : Error(to_string(code) + ": " + what), code_(code), witness_(std::move(witness)) {}
  ValidationCode code() const { return code_; }
  /// Numeric evidence for the violation (negative eigenvalues, residuals, ...).
  const std::vector<double>& witness() const { return witness_; }

 private:
  ValidationCode code_;
  std::vector<double> witness_;
};

/// Unit-trace positive operator on a single factor.
class DensityOperator {
 public:
  explicit DensityOperator(ComplexOperator op, double trace_tol = 1e-9);
  const ComplexOperator& op() const { return op_; }
  int dim() const { return op_.side(); }

 private:
  ComplexOperator op_;
};

/// Positive operator-valued measure: elements sum to the identity.
class Povm {
 public:
  Povm(std::vector<std::string> outcomes, std::vector<ComplexOperator> elements,
       double sum_tol = 1e-9);
  static Povm from_elements(std::vector<ComplexOperator> elements, double sum_tol = 1e-9);

  std::size_t num_outcomes() const { return elements_.size(); }
  const std::vector<std::string>& outcomes() const { return outcomes_; }
  const std::vector<ComplexOperator>& elements() const { return elements_; }
  const ComplexOperator& element(std::size_t j) const { return elements_.at(j); }
  int dim() const { return elements_.front().side(); }

 private:
  std::vector<std::string> outcomes_;
  std::vector<ComplexOperator> elements_;
};

/// Choi operator of a process, stored on [d1, d0] with the output factor
/// first. Deterministic processes have tr_out E = I on the input space.
class ChoiOperator {
 public:
  ChoiOperator(ComplexOperator op, bool deterministic, double tol = 1e-9);
  static ChoiOperator from_kraus(const std::vector<Matrix>& kraus, int d0, int d1);
  static ChoiOperator identity_channel(int d);
  static ChoiOperator unitary_channel(const Matrix& u);

  const ComplexOperator& op() const { return op_; }
  bool deterministic() const { return deterministic_; }
  int d1() const { return op_.signature().factor(0); }
  int d0() const { return op_.signature().factor(1); }

 private:
  ComplexOperator op_;
  bool deterministic_;
};

/// Quantum tester (process POVM): positive operators on [d1, d0] summing to
/// I_1 (x) rho for a density operator rho, the normalization state.
class Tester {
 public:
  std::size_t num_outcomes() const { return elements_.size(); }
  const std::vector<std::string>& outcomes() const { return outcomes_; }
  const std::vector<ComplexOperator>& elements() const { return elements_; }
  const ComplexOperator& element(std::size_t j) const { return elements_.at(j); }
  const DensityOperator& normalization() const { return normalization_; }
  int d1() const { return elements_.front().signature().factor(0); }
  int d0() const { return elements_.front().signature().factor(1); }

  friend std::pair<Tester, DensityOperator> validate_tester(
      std::vector<ComplexOperator> candidate, std::vector<std::string> outcomes, double psd_tol,
      double norm_tol);

 private:
  Tester(std::vector<std::string> outcomes, std::vector<ComplexOperator> elements,
         DensityOperator normalization)
      : outcomes_(std::move(outcomes)),
        elements_(std::move(elements)),
        normalization_(std::move(normalization)) {}

  std::vector<std::string> outcomes_;
  std::vector<ComplexOperator> elements_;
  DensityOperator normalization_;
};

/// Physical implementation of a tester: ancilla dimension, joint input state
/// on H0 (x) H_anc, and a POVM on H1 (x) H_anc.
struct TesterSetup {
  int anc_dim;
  DensityOperator input_state;
  Povm measurement;
};

/// Checks positivity and the I (x) rho normalization; returns the tester and
/// the extracted normalization state. The normalization state is read off as
/// tr over the output factor of the element sum, divided by d1.
std::pair<Tester, DensityOperator> validate_tester(std::vector<ComplexOperator> candidate,
                                                   std::vector<std::string> outcomes = {},
                                                   double psd_tol = kPsdTol,
                                                   double norm_tol = 1e-8);

Tester tester_from_elements(std::vector<ComplexOperator> candidate,
                            std::vector<std::string> outcomes = {});

/// T_j = tr_anc[(P_j (x) I_0) (I_1 (x) SWAP Psi^T0 SWAP)].
Tester tester_from_setup(const TesterSetup& setup, int d0, int d1);

/// Canonical implementation: ancilla is a copy of the input space carrying
/// the support of rho, input state (I (x) rho^1/2)|Omega>, canonical POVM
/// (I (x) rho^-1/2) T_j (I (x) rho^-1/2) completed off the support on the
/// last outcome.
TesterSetup canonical_implementation(const Tester& t, double support_tol = kSupportTol);

/// Canonical POVM elements restricted to H1 (x) supp(rho), in the descending
/// eigenbasis of rho.
Povm canonical_povm_on_support(const Tester& t, double support_tol = kSupportTol);

/// Born rule p_j = tr[T_j E].
std::vector<double> born_probabilities(const Tester& t, const ChoiOperator& e);

std::vector<double> povm_probabilities(const Povm& p, const DensityOperator& rho);

/// If every element factorizes as P_j (x) rho, returns the POVM and the
/// state; otherwise absent.
std::optional<std::pair<Povm, DensityOperator>> ancilla_free_decomposition(const Tester& t,
                                                                           double tol = 1e-9);

/// Default outcome labels "1".."n".
std::vector<std::string> default_outcomes(std::size_t n);

}  // namespace qtester
