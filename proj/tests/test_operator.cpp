#include "doctest.h"
#include "qtester/operator.hpp"
#include "qtester/spectral.hpp"
#include "test_util.hpp"

using namespace qtester;
using testutil::Rng;

namespace {

ComplexOperator op2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return ComplexOperator(DimSignature({2}), m);
}

// Independent oracle: partial trace by explicit index summation over the raw
// entries of a two-factor operator.
Matrix partial_trace_oracle(const Matrix& m, int d_first, int d_second, int factor) {
  if (factor == 0) {
    Matrix out = Matrix::Zero(d_second, d_second);
    for (int k = 0; k < d_first; ++k)
      for (int i = 0; i < d_second; ++i)
        for (int j = 0; j < d_second; ++j)
          out(i, j) += m(k * d_second + i, k * d_second + j);
    return out;
  }
  Matrix out = Matrix::Zero(d_first, d_first);
  for (int k = 0; k < d_second; ++k)
    for (int i = 0; i < d_first; ++i)
      for (int j = 0; j < d_first; ++j)
        out(i, j) += m(i * d_second + k, j * d_second + k);
  return out;
}

}  // namespace

TEST_CASE("tensor: identity case and trace multiplicativity") {
  auto i2 = ComplexOperator::identity(DimSignature({2}));
  auto i4 = tensor(i2, i2);
  CHECK(i4.side() == 4);
  CHECK(max_abs(i4.matrix() - Matrix::Identity(4, 4)) == 0.0);
  CHECK(i4.signature() == DimSignature({2, 2}));

  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = testutil::random_hermitian(rng, DimSignature({2}));
    auto b = testutil::random_hermitian(rng, DimSignature({2}));
    Complex lhs = tensor(a, b).trace();
    Complex rhs = a.trace() * b.trace();
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("tensor: |V><V| x |V><V| is the first element of T_V") {
  auto vv = op2(1, 0, 0, 0);
  auto t1 = tensor(vv, vv);
  Matrix expect = Matrix::Zero(4, 4);
  expect(0, 0) = 1.0;
  CHECK(max_abs(t1.matrix() - expect) == 0.0);
}

TEST_CASE("tensor associativity up to signature flattening") {
  Rng rng(12);
  auto a = testutil::random_hermitian(rng, DimSignature({2}));
  auto b = testutil::random_hermitian(rng, DimSignature({3}));
  auto c = testutil::random_hermitian(rng, DimSignature({2}));
  auto left = tensor(tensor(a, b), c);
  auto right = tensor(a, tensor(b, c));
  CHECK(max_abs(left.matrix() - right.matrix()) < 1e-14);
}

TEST_CASE("partial_trace: product case, entangled marginal, trace preservation") {
  Rng rng(13);
  auto a = testutil::random_hermitian(rng, DimSignature({2}));
  auto b = testutil::random_hermitian(rng, DimSignature({3}));
  auto prod = tensor(a, b);
  auto reduced = partial_trace(prod, 1);
  CHECK(max_abs(reduced.matrix() - Matrix(b.trace() * a.matrix())) < 1e-12);

  // Maximally entangled |Omega><Omega| for d0 = 2 has identity marginals.
  Eigen::VectorXcd omega = omega_vector(2);
  ComplexOperator proj(DimSignature({2, 2}), omega * omega.adjoint());
  auto marg = partial_trace(proj, 0);
  CHECK(max_abs(marg.matrix() - Matrix::Identity(2, 2)) < 1e-14);

  for (int trial = 0; trial < 10; ++trial) {
    auto m = testutil::random_psd(rng, DimSignature({2, 2}));
    auto r0 = partial_trace(m, 0);
    CHECK(std::abs(r0.trace() - m.trace()) < 1e-12);
    Matrix oracle = partial_trace_oracle(m.matrix(), 2, 2, 0);
    CHECK(max_abs(r0.matrix() - oracle) < 1e-13);
    Matrix oracle1 = partial_trace_oracle(m.matrix(), 2, 2, 1);
    CHECK(max_abs(partial_trace(m, 1).matrix() - oracle1) < 1e-13);
  }

  CHECK_THROWS_AS(partial_trace(a, 5), DimensionError);
}

TEST_CASE("partial_transpose: product case, involution, Omega -> SWAP") {
  Rng rng(14);
  auto a = testutil::random_hermitian(rng, DimSignature({2}));
  auto b = testutil::random_hermitian(rng, DimSignature({2}));
  auto prod = tensor(a, b);
  auto pt = partial_transpose(prod, 1);
  CHECK(max_abs(pt.matrix() -
                tensor(a, ComplexOperator(b.signature(), b.matrix().transpose())).matrix()) <
        1e-14);

  auto m = testutil::random_hermitian(rng, DimSignature({2, 3}));
  CHECK(max_abs_diff(partial_transpose(partial_transpose(m, 0), 0), m) == 0.0);

  auto both = partial_transpose(partial_transpose(m, 0), 1);
  CHECK(max_abs(both.matrix() - m.matrix().transpose()) == 0.0);

  // |Omega><Omega|^T0 = SWAP for d0 = 2, checked entrywise via the
  // index-permutation oracle (i,j),(k,l) -> (k,j),(i,l).
  Eigen::VectorXcd omega = omega_vector(2);
  ComplexOperator proj(DimSignature({2, 2}), omega * omega.adjoint());
  auto swapped = partial_transpose(proj, 0);
  Matrix oracle(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          oracle(i * 2 + j, k * 2 + l) = proj.matrix()(k * 2 + j, i * 2 + l);
  CHECK(max_abs(swapped.matrix() - oracle) == 0.0);
  CHECK(max_abs(swapped.matrix() - swap_operator(2, 2).matrix()) == 0.0);

  auto spec_m = spectral_decompose(m);
  auto spec_t = spectral_decompose(both);
  CHECK((spec_m.eigenvalues - spec_t.eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("swap_operator: permutation entries, self-inverse, conjugation") {
  auto s = swap_operator(2, 2);
  Matrix expect = Matrix::Zero(4, 4);
  expect(0, 0) = expect(1, 2) = expect(2, 1) = expect(3, 3) = 1.0;
  CHECK(max_abs(s.matrix() - expect) == 0.0);
  CHECK(max_abs((s * s).matrix() - Matrix::Identity(4, 4)) == 0.0);

  Rng rng(15);
  auto a = testutil::random_hermitian(rng, DimSignature({2}));
  auto b = testutil::random_hermitian(rng, DimSignature({2}));
  auto lhs = s * tensor(a, b) * s;
  CHECK(max_abs(lhs.matrix() - tensor(b, a).matrix()) < 1e-14);

  CHECK_THROWS_AS(swap_operator(2, 3), DimensionError);
}

TEST_CASE("permute_factors reorders subsystems") {
  Rng rng(16);
  auto a = testutil::random_hermitian(rng, DimSignature({2}));
  auto b = testutil::random_hermitian(rng, DimSignature({3}));
  auto ab = tensor(a, b);
  auto ba = permute_factors(ab, {1, 0});
  CHECK(ba.signature() == DimSignature({3, 2}));
  CHECK(max_abs(ba.matrix() - tensor(b, a).matrix()) < 1e-14);
}

TEST_CASE("hermiticity and psd predicates") {
  auto h = op2(1, Complex(0, 1), Complex(0, -1), 1);
  CHECK(h.is_hermitian());
  CHECK(h.is_psd());  // eigenvalues 0 and 2
  auto nh = op2(1, 1, 0, 1);
  CHECK(!nh.is_hermitian());
  auto neg = op2(1, 0, 0, -1);
  CHECK(neg.is_hermitian());
  CHECK(!neg.is_psd());
}
