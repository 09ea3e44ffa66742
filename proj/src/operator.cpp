#include "qtester/operator.hpp"

#include <numeric>
#include <sstream>

#include "qtester/spectral.hpp"

namespace qtester {

DimSignature::DimSignature(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("signature must have at least one factor");
  total_ = 1;
  for (int d : dims_) {
    if (d < 1) throw DimensionError("subsystem dimensions must be >= 1");
    total_ *= d;
  }
}

DimSignature DimSignature::concat(const DimSignature& other) const {
  std::vector<int> d = dims_;
  d.insert(d.end(), other.dims_.begin(), other.dims_.end());
  return DimSignature(d);
}

DimSignature DimSignature::erase(std::size_t i) const {
  if (i >= dims_.size()) throw DimensionError("factor index out of range");
  std::vector<int> d = dims_;
  d.erase(d.begin() + static_cast<std::ptrdiff_t>(i));
  if (d.empty()) d.push_back(1);
  return DimSignature(d);
}

std::string DimSignature::to_string() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
  os << "]";
  return os.str();
}

ComplexOperator::ComplexOperator(DimSignature sig, Matrix m, double herm_tol)
    : sig_(std::move(sig)), m_(std::move(m)), herm_tol_(herm_tol) {
  if (m_.rows() != m_.cols())
    throw DimensionError("operator matrix must be square");
  if (m_.rows() != sig_.total())
    throw DimensionError("matrix side " + std::to_string(m_.rows()) +
                         " does not match signature " + sig_.to_string());
  if (herm_tol_ < 0) throw Error("herm_tol must be non-negative");
}

ComplexOperator ComplexOperator::zero(DimSignature sig) {
  int n = sig.total();
  return ComplexOperator(std::move(sig), Matrix::Zero(n, n));
}

ComplexOperator ComplexOperator::identity(DimSignature sig) {
  int n = sig.total();
  return ComplexOperator(std::move(sig), Matrix::Identity(n, n));
}

double ComplexOperator::hermiticity_defect() const {
  return max_abs(m_ - m_.adjoint());
}

bool ComplexOperator::is_hermitian(double tol) const {
  return hermiticity_defect() <= (tol < 0 ? herm_tol_ : tol);
}

bool ComplexOperator::is_psd(double psd_tol) const {
  if (!is_hermitian()) return false;
  return min_eigenvalue(*this) >= -psd_tol;
}

ComplexOperator ComplexOperator::hermitized() const {
  return ComplexOperator(sig_, 0.5 * (m_ + m_.adjoint().eval()), herm_tol_);
}

ComplexOperator ComplexOperator::with_signature(DimSignature sig) const {
  return ComplexOperator(std::move(sig), m_, herm_tol_);
}

ComplexOperator ComplexOperator::operator+(const ComplexOperator& o) const {
  if (!(sig_ == o.sig_)) throw DimensionError("signature mismatch in operator sum");
  return ComplexOperator(sig_, m_ + o.m_, herm_tol_);
}

ComplexOperator ComplexOperator::operator-(const ComplexOperator& o) const {
  if (!(sig_ == o.sig_)) throw DimensionError("signature mismatch in operator difference");
  return ComplexOperator(sig_, m_ - o.m_, herm_tol_);
}

ComplexOperator ComplexOperator::operator*(const ComplexOperator& o) const {
  if (m_.cols() != o.m_.rows()) throw DimensionError("size mismatch in operator product");
  return ComplexOperator(sig_, m_ * o.m_, herm_tol_);
}

ComplexOperator operator*(double c, const ComplexOperator& m) {
  return ComplexOperator(m.sig_, c * m.m_, m.herm_tol_);
}

ComplexOperator operator*(Complex c, const ComplexOperator& m) {
  return ComplexOperator(m.sig_, c * m.m_, m.herm_tol_);
}

ComplexOperator tensor(const ComplexOperator& a, const ComplexOperator& b) {
  const Matrix& A = a.matrix();
  const Matrix& B = b.matrix();
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return ComplexOperator(a.signature().concat(b.signature()), std::move(out));
}

namespace {

// Row/column index <-> multi-index over the signature factors, row-major.
std::vector<int> unravel(int idx, const std::vector<int>& dims) {
  std::vector<int> out(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    out[k] = idx % dims[k];
    idx /= dims[k];
  }
  return out;
}

int ravel(const std::vector<int>& multi, const std::vector<int>& dims) {
  int idx = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + multi[k];
  return idx;
}

}  // namespace

ComplexOperator partial_trace(const ComplexOperator& m, std::size_t factor_index) {
  const auto& dims = m.signature().dims();
  if (factor_index >= dims.size()) throw DimensionError("partial_trace: factor index out of range");
  DimSignature out_sig = m.signature().erase(factor_index);
  Matrix out = Matrix::Zero(out_sig.total(), out_sig.total());
  const int n = m.side();
  for (int r = 0; r < n; ++r) {
    auto rm = unravel(r, dims);
    for (int c = 0; c < n; ++c) {
      auto cm = unravel(c, dims);
      if (rm[factor_index] != cm[factor_index]) continue;
      auto ro = rm;
      auto co = cm;
      ro.erase(ro.begin() + static_cast<std::ptrdiff_t>(factor_index));
      co.erase(co.begin() + static_cast<std::ptrdiff_t>(factor_index));
      std::vector<int> od = dims;
      od.erase(od.begin() + static_cast<std::ptrdiff_t>(factor_index));
      if (od.empty()) od.push_back(1);
      if (ro.empty()) ro.push_back(0);
      if (co.empty()) co.push_back(0);
      out(ravel(ro, od), ravel(co, od)) += m.matrix()(r, c);
    }
  }
  return ComplexOperator(out_sig, std::move(out));
}

ComplexOperator partial_transpose(const ComplexOperator& m, std::size_t factor_index) {
  const auto& dims = m.signature().dims();
  if (factor_index >= dims.size())
    throw DimensionError("partial_transpose: factor index out of range");
  const int n = m.side();
  Matrix out(n, n);
  for (int r = 0; r < n; ++r) {
    auto rm = unravel(r, dims);
    for (int c = 0; c < n; ++c) {
      auto cm = unravel(c, dims);
      auto rt = rm;
      auto ct = cm;
      std::swap(rt[factor_index], ct[factor_index]);
      out(ravel(rt, dims), ravel(ct, dims)) = m.matrix()(r, c);
    }
  }
  return ComplexOperator(m.signature(), std::move(out));
}

ComplexOperator permute_factors(const ComplexOperator& m, const std::vector<std::size_t>& perm) {
  const auto& dims = m.signature().dims();
  if (perm.size() != dims.size()) throw DimensionError("permute_factors: wrong permutation size");
  std::vector<int> new_dims(perm.size());
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] >= dims.size() || seen[perm[i]])
      throw DimensionError("permute_factors: invalid permutation");
    seen[perm[i]] = true;
    new_dims[i] = dims[perm[i]];
  }
  const int n = m.side();
  Matrix out(n, n);
  for (int r = 0; r < n; ++r) {
    auto rm = unravel(r, dims);
    std::vector<int> rp(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) rp[i] = rm[perm[i]];
    int rr = ravel(rp, new_dims);
    for (int c = 0; c < n; ++c) {
      auto cm = unravel(c, dims);
      std::vector<int> cp(perm.size());
      for (std::size_t i = 0; i < perm.size(); ++i) cp[i] = cm[perm[i]];
      out(rr, ravel(cp, new_dims)) = m.matrix()(r, c);
    }
  }
  return ComplexOperator(DimSignature(new_dims), std::move(out));
}

ComplexOperator swap_operator(int d_a, int d_b) {
  if (d_a != d_b) throw DimensionError("swap_operator requires equal dimensions");
  const int d = d_a;
  Matrix out = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(j * d + i, i * d + j) = 1.0;
  return ComplexOperator(DimSignature({d, d}), std::move(out));
}

double max_abs(const Matrix& m) {
  return m.cwiseAbs().maxCoeff();
}

double max_abs_diff(const ComplexOperator& a, const ComplexOperator& b) {
  if (a.side() != b.side()) throw DimensionError("max_abs_diff: size mismatch");
  return max_abs(a.matrix() - b.matrix());
}

Eigen::VectorXcd omega_vector(int d) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
  for (int m = 0; m < d; ++m) v(m * d + m) = 1.0;
  return v;
}

}  // namespace qtester
