#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtester {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Default tolerances used across the library. Every predicate that uses one
/// of these accepts a per-call override.
inline constexpr double kHermTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kSupportTol = 1e-9;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

/// Ordered subsystem dimensions of a tensor-product space. The matrix side of
/// any operator carrying this signature equals total().
class DimSignature {
 public:
  DimSignature() = default;
  DimSignature(std::initializer_list<int> dims) : DimSignature(std::vector<int>(dims)) {}
  explicit DimSignature(std::vector<int> dims);

  const std::vector<int>& dims() const { return dims_; }
  int factor(std::size_t i) const { return dims_.at(i); }
  std::size_t num_factors() const { return dims_.size(); }
  int total() const { return total_; }

  /// Concatenation, as produced by a tensor product.
  DimSignature concat(const DimSignature& other) const;
  /// Signature with one factor removed (partial trace result).
  DimSignature erase(std::size_t i) const;

  bool operator==(const DimSignature& other) const { return dims_ == other.dims_; }
  std::string to_string() const;

 private:
  std::vector<int> dims_;
  int total_ = 1;
};

/// Dense square complex matrix over a tensor-factored Hilbert space. The
/// universal carrier for states, POVM elements, Choi operators and tester
/// elements. Values are immutable once constructed.
class ComplexOperator {
 public:
  ComplexOperator() : sig_({1}), m_(Matrix::Zero(1, 1)) {}
  ComplexOperator(DimSignature sig, Matrix m, double herm_tol = kHermTol);

  static ComplexOperator zero(DimSignature sig);
  static ComplexOperator identity(DimSignature sig);

  const DimSignature& signature() const { return sig_; }
  const Matrix& matrix() const { return m_; }
  int side() const { return static_cast<int>(m_.rows()); }
  double herm_tol() const { return herm_tol_; }

  Complex trace() const { return m_.trace(); }
  /// Largest entrywise deviation from the adjoint.
  double hermiticity_defect() const;
  bool is_hermitian(double tol = -1.0) const;
  /// Hermitian within herm_tol and min eigenvalue >= -psd_tol.
  bool is_psd(double psd_tol = kPsdTol) const;

  /// Hermitian part (m + m^dagger)/2, used to scrub roundoff.
  ComplexOperator hermitized() const;
  ComplexOperator with_signature(DimSignature sig) const;

  ComplexOperator operator+(const ComplexOperator& o) const;
  ComplexOperator operator-(const ComplexOperator& o) const;
  ComplexOperator operator*(const ComplexOperator& o) const;
  friend ComplexOperator operator*(double c, const ComplexOperator& m);
  friend ComplexOperator operator*(Complex c, const ComplexOperator& m);

 private:
  DimSignature sig_;
  Matrix m_;
  double herm_tol_ = kHermTol;
};

/// Kronecker product; signature is the concatenation of the operands'.
ComplexOperator tensor(const ComplexOperator& a, const ComplexOperator& b);

/// Trace out one tensor factor. Preserves the total trace.
ComplexOperator partial_trace(const ComplexOperator& m, std::size_t factor_index);

/// Transposition on one factor, in the computational basis.
/// Applying it twice returns the input.
ComplexOperator partial_transpose(const ComplexOperator& m, std::size_t factor_index);

/// Reorder tensor factors: result factor i is input factor perm[i].
ComplexOperator permute_factors(const ComplexOperator& m, const std::vector<std::size_t>& perm);

/// SWAP|i>|j> = |j>|i> on two factors of equal dimension. Unitary and
/// self-inverse.
ComplexOperator swap_operator(int d_a, int d_b);

double max_abs(const Matrix& m);
/// Largest entrywise |a - b|.
double max_abs_diff(const ComplexOperator& a, const ComplexOperator& b);

/// Unnormalized maximally entangled vector sum_m |m>|m| on H_d x H_d.
Eigen::VectorXcd omega_vector(int d);

}  // namespace qtester
