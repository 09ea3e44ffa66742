#pragma once

#include "qtester/objects.hpp"

namespace qtester {

/// Quantum N-comb: positive operator on the interleaved spaces
/// H_0 (x) H_1 (x) ... (x) H_{2N-1} (ascending storage order) satisfying the
/// recursive partial-trace normalization chain.
struct NComb {
  ComplexOperator op;
  int steps;
};

/// Quantum N-tester: positive operators on the same interleaved space with
/// sum Theta (x) I on the last factor and the Theta-chain terminating in
/// tr Theta^(1) = 1.
struct NTester {
  std::vector<std::string> outcomes;
  std::vector<ComplexOperator> elements;
  int steps;
  ComplexOperator theta;  // normalization Theta^(N), factors H_0..H_{2N-2}
};

/// Checks every link of the comb chain within chain_tol; throws
/// ChainViolation naming the failing level and residual.
NComb validate_ncomb(const ComplexOperator& op, int steps, double chain_tol = 1e-8);

std::pair<NTester, ComplexOperator> validate_ntester(std::vector<ComplexOperator> elements,
                                                     int steps,
                                                     std::vector<std::string> outcomes = {},
                                                     double chain_tol = 1e-8);

/// Generalized Born rule p_j = tr[T_j R].
std::vector<double> nborn_probabilities(const NTester& t, const NComb& c);

/// A valid 1-comb from a deterministic Choi operator (factor order adapter).
NComb ncomb_from_choi(const ChoiOperator& e);

/// A valid 1-tester from a tester (factor order adapter); Theta = rho.
NTester ntester_from_tester(const Tester& t);

}  // namespace qtester
