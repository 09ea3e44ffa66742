#pragma once

#include "qtester/operator.hpp"

namespace qtester {

/// Eigensystem of a Hermitian operator: m = V diag(lambda) V^dagger with
/// eigenvalues sorted in descending order and orthonormal eigenvector columns.
struct Spectrum {
  RealVector eigenvalues;
  Matrix eigenvectors;
};

/// Cyclic Jacobi diagonalization of a Hermitian matrix. Deterministic sweep
/// order; throws on non-Hermitian input.
Spectrum spectral_decompose(const ComplexOperator& m, double herm_tol = -1.0);

/// Jacobi eigensystem of a real symmetric matrix (same routine, real path).
void jacobi_eigensystem(const RealMatrix& a, RealVector& eigenvalues, RealMatrix& eigenvectors);

double min_eigenvalue(const ComplexOperator& m);
double max_eigenvalue(const ComplexOperator& m);

/// Square root of a positive semidefinite operator.
ComplexOperator psd_sqrt(const ComplexOperator& m, double psd_tol = kPsdTol);

/// Inverse of the square root on the support; eigenvalues below support_tol
/// are zeroed.
ComplexOperator psd_pinv_sqrt(const ComplexOperator& m, double support_tol = kSupportTol,
                              double psd_tol = kPsdTol);

/// Projector onto the support of a PSD operator.
ComplexOperator support_projector(const ComplexOperator& m, double support_tol = kSupportTol);

/// Sum of absolute eigenvalues of a Hermitian operator.
double trace_norm(const ComplexOperator& m);

/// Splits a Hermitian operator into positive and negative parts,
/// m = pos - neg with pos, neg >= 0 and pos*neg = 0.
std::pair<ComplexOperator, ComplexOperator> jordan_split(const ComplexOperator& m);

}  // namespace qtester
