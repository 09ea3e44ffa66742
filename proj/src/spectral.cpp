#include "qtester/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qtester {

namespace {

// One cyclic Jacobi pass annihilating A(p,q). A stays Hermitian, V
// accumulates the rotations. Rotation: a complex Givens built from the phase
// of A(p,q) and the classic stable angle formula.
void rotate(Matrix& a, Matrix& v, int p, int q) {
  const Complex apq = a(p, q);
  const double r = std::abs(apq);
  if (r == 0.0) return;
  const Complex phase = apq / r;
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double tau = (aqq - app) / (2.0 * r);
  double t;
  if (tau >= 0)
    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
  else
    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  // J = I except J(p,p)=c, J(p,q)=s, J(q,p)=-s*conj(phase), J(q,q)=c*conj(phase).
  const Complex jqp = -s * std::conj(phase);
  const Complex jqq = c * std::conj(phase);
  const int n = static_cast<int>(a.rows());
  for (int i = 0; i < n; ++i) {
    const Complex aip = a(i, p), aiq = a(i, q);
    a(i, p) = aip * c + aiq * jqp;
    a(i, q) = aip * s + aiq * jqq;
    const Complex vip = v(i, p), viq = v(i, q);
    v(i, p) = vip * c + viq * jqp;
    v(i, q) = vip * s + viq * jqq;
  }
  for (int j = 0; j < n; ++j) {
    const Complex apj = a(p, j), aqj = a(q, j);
    a(p, j) = c * apj + std::conj(jqp) * aqj;
    a(q, j) = s * apj + std::conj(jqq) * aqj;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = Complex(a(p, p).real(), 0.0);
  a(q, q) = Complex(a(q, q).real(), 0.0);
}

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  const int n = static_cast<int>(a.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) sum += std::norm(a(i, j));
  return std::sqrt(sum);
}

Spectrum jacobi_hermitian(Matrix a) {
  const int n = static_cast<int>(a.rows());
  Matrix v = Matrix::Identity(n, n);
  const double scale = std::max(1.0, max_abs(a));
  const double tol = 1e-15 * scale * n;
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= tol) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q)
        if (std::abs(a(p, q)) > tol / (n * n)) rotate(a, v, p, q);
  }
  // Sort descending; ties keep the original column order.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i).real() > a(j, j).real(); });
  Spectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]).real();
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  return out;
}

}  // namespace

Spectrum spectral_decompose(const ComplexOperator& m, double herm_tol) {
  if (!m.is_hermitian(herm_tol))
    throw Error("spectral_decompose: input is not Hermitian (defect " +
                std::to_string(m.hermiticity_defect()) + ")");
  return jacobi_hermitian(0.5 * (m.matrix() + m.matrix().adjoint().eval()));
}

void jacobi_eigensystem(const RealMatrix& a, RealVector& eigenvalues, RealMatrix& eigenvectors) {
  Spectrum s = jacobi_hermitian(a.cast<Complex>());
  eigenvalues = s.eigenvalues;
  eigenvectors = s.eigenvectors.real();
}

double min_eigenvalue(const ComplexOperator& m) {
  Spectrum s = jacobi_hermitian(0.5 * (m.matrix() + m.matrix().adjoint().eval()));
  return s.eigenvalues(s.eigenvalues.size() - 1);
}

double max_eigenvalue(const ComplexOperator& m) {
  Spectrum s = jacobi_hermitian(0.5 * (m.matrix() + m.matrix().adjoint().eval()));
  return s.eigenvalues(0);
}

ComplexOperator psd_sqrt(const ComplexOperator& m, double psd_tol) {
  Spectrum s = spectral_decompose(m);
  if (s.eigenvalues(s.eigenvalues.size() - 1) < -psd_tol)
    throw Error("psd_sqrt: operator has negative eigenvalue " +
                std::to_string(s.eigenvalues(s.eigenvalues.size() - 1)));
  RealVector ev = s.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  Matrix out = s.eigenvectors * ev.asDiagonal() * s.eigenvectors.adjoint();
  return ComplexOperator(m.signature(), std::move(out));
}

ComplexOperator psd_pinv_sqrt(const ComplexOperator& m, double support_tol, double psd_tol) {
  Spectrum s = spectral_decompose(m);
  if (s.eigenvalues(s.eigenvalues.size() - 1) < -psd_tol)
    throw Error("psd_pinv_sqrt: operator has negative eigenvalue " +
                std::to_string(s.eigenvalues(s.eigenvalues.size() - 1)));
  RealVector inv(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i)
    inv(i) = s.eigenvalues(i) > support_tol ? 1.0 / std::sqrt(s.eigenvalues(i)) : 0.0;
  Matrix out = s.eigenvectors * inv.asDiagonal() * s.eigenvectors.adjoint();
  return ComplexOperator(m.signature(), std::move(out));
}

ComplexOperator support_projector(const ComplexOperator& m, double support_tol) {
  Spectrum s = spectral_decompose(m);
  RealVector p(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    p(i) = s.eigenvalues(i) > support_tol ? 1.0 : 0.0;
  Matrix out = s.eigenvectors * p.asDiagonal() * s.eigenvectors.adjoint();
  return ComplexOperator(m.signature(), std::move(out));
}

double trace_norm(const ComplexOperator& m) {
  Spectrum s = spectral_decompose(m);
  return s.eigenvalues.cwiseAbs().sum();
}

std::pair<ComplexOperator, ComplexOperator> jordan_split(const ComplexOperator& m) {
  Spectrum s = spectral_decompose(m);
  RealVector pos = s.eigenvalues.cwiseMax(0.0);
  RealVector neg = (-s.eigenvalues).cwiseMax(0.0);
  Matrix mp = s.eigenvectors * pos.asDiagonal() * s.eigenvectors.adjoint();
  Matrix mn = s.eigenvectors * neg.asDiagonal() * s.eigenvectors.adjoint();
  return {ComplexOperator(m.signature(), std::move(mp)),
          ComplexOperator(m.signature(), std::move(mn))};
}

}  // namespace qtester
