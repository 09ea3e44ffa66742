#include "doctest.h"
#include "qtester/objects.hpp"
#include "qtester/spectral.hpp"
#include "test_util.hpp"

using namespace qtester;
using testutil::Rng;

namespace {

Matrix ket2(Complex a, Complex b) {
  Eigen::Vector2cd v;
  v << a, b;
  return v * v.adjoint();
}

ComplexOperator qubit_op(const Matrix& m) { return ComplexOperator(DimSignature({2}), m); }

const Matrix kVV = ket2(1, 0);
const Matrix kHH = ket2(0, 1);

std::vector<ComplexOperator> tv_elements() {
  return {tensor(qubit_op(kVV), qubit_op(kVV)), tensor(qubit_op(kHH), qubit_op(kVV))};
}

// Six-outcome tomography POVM: V, H, D, A, R, L each weighted 1/3.
std::vector<ComplexOperator> tomo_povm_elements() {
  double s = 1 / std::sqrt(2.0);
  std::vector<Matrix> kets = {ket2(1, 0),  ket2(0, 1),
                              ket2(s, s),  ket2(s, -s),
                              ket2(s, Complex(0, 1) * s), ket2(s, Complex(0, -1) * s)};
  std::vector<ComplexOperator> out;
  for (auto& k : kets) out.push_back(qubit_op((1.0 / 3.0) * k));
  return out;
}

}  // namespace

namespace qtester::testutil {

// Random valid tester with a prescribed normalization state: sandwich a
// random POVM on H1 (x) H0 with I (x) rho^1/2.
inline Tester random_tester(Rng& rng, const ComplexOperator& rho, int d1, int outcomes) {
  int d0 = rho.side();
  DimSignature sig({d1, d0});
  std::vector<ComplexOperator> effects;
  ComplexOperator total = ComplexOperator::zero(sig);
  for (int j = 0; j < outcomes; ++j) {
    auto a = random_psd(rng, sig);
    effects.push_back(a);
    total = total + a;
  }
  auto scale = psd_pinv_sqrt(total, 1e-12);
  auto root = tensor(ComplexOperator::identity(DimSignature({d1})), psd_sqrt(rho));
  std::vector<ComplexOperator> elements;
  for (auto& a : effects)
    elements.push_back((root * scale * a * scale * root).hermitized());
  return tester_from_elements(std::move(elements));
}

inline ChoiOperator random_channel(Rng& rng, int d0, int d1, int env = 2) {
  Matrix u = random_unitary(rng, d1 * env);
  std::vector<Matrix> kraus;
  for (int e = 0; e < env; ++e) {
    Matrix k(d1, d0);
    for (int a = 0; a < d1; ++a)
      for (int m = 0; m < d0; ++m) k(a, m) = u(a * env + e, m);
    kraus.push_back(k);
  }
  return ChoiOperator::from_kraus(kraus, d0, d1);
}

}  // namespace qtester::testutil

TEST_CASE("validate_tester: T_V, unitality, and a non-product failure") {
  auto [tv, rho] = validate_tester(tv_elements());
  CHECK(max_abs(rho.op().matrix() - kVV) < 1e-12);

  std::vector<ComplexOperator> unitality;
  for (auto& p : tomo_povm_elements())
    unitality.push_back(tensor(p, qubit_op(0.5 * Matrix::Identity(2, 2))));
  auto [ut, urho] = validate_tester(unitality);
  CHECK(max_abs(urho.op().matrix() - 0.5 * Matrix::Identity(2, 2)) < 1e-12);

  std::vector<ComplexOperator> bad = {tensor(qubit_op(kVV), qubit_op(kVV)),
                                      tensor(qubit_op(kVV), qubit_op(kHH))};
  CHECK_THROWS_WITH_AS(validate_tester(bad), doctest::Contains("I (x) rho"), ValidationError);
  try {
    validate_tester(bad);
  } catch (const ValidationError& e) {
    CHECK(e.code() == ValidationCode::NotProductNormalized);
  }
}

TEST_CASE("tester_from_setup: ancilla-free T_V") {
  TesterSetup setup{1,
                    DensityOperator(ComplexOperator(DimSignature({2, 1}), kVV)),
                    Povm::from_elements({ComplexOperator(DimSignature({2, 1}), kVV),
                                         ComplexOperator(DimSignature({2, 1}), kHH)})};
  Tester t = tester_from_setup(setup, 2, 2);
  auto expect = tv_elements();
  CHECK(max_abs_diff(t.element(0), expect[0]) < 1e-12);
  CHECK(max_abs_diff(t.element(1), expect[1]) < 1e-12);
}

TEST_CASE("tester_from_setup: entangled probe gives (1/d)|Phi+><Phi+|") {
  Eigen::VectorXcd phip = omega_vector(2) / std::sqrt(2.0);
  Matrix proj = phip * phip.adjoint();
  TesterSetup setup{
      2,
      DensityOperator(ComplexOperator(DimSignature({2, 2}), proj)),
      Povm::from_elements({ComplexOperator(DimSignature({2, 2}), proj),
                           ComplexOperator(DimSignature({2, 2}), Matrix::Identity(4, 4) - proj)})};
  Tester t = tester_from_setup(setup, 2, 2);
  CHECK(max_abs(t.element(0).matrix() - 0.5 * proj) < 1e-12);
  CHECK(max_abs(t.element(1).matrix() - 0.5 * (Matrix::Identity(4, 4) - proj)) < 1e-12);
  CHECK(max_abs(t.normalization().op().matrix() - 0.5 * Matrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("canonical_implementation: unitality tester uses |Phi+> and P_j x I") {
  std::vector<ComplexOperator> unitality;
  auto tomo = tomo_povm_elements();
  for (auto& p : tomo) unitality.push_back(tensor(p, qubit_op(0.5 * Matrix::Identity(2, 2))));
  Tester t = tester_from_elements(unitality);
  TesterSetup setup = canonical_implementation(t);
  Eigen::VectorXcd phip = omega_vector(2) / std::sqrt(2.0);
  CHECK(max_abs(setup.input_state.op().matrix() - Matrix(phip * phip.adjoint())) < 1e-12);
  for (std::size_t j = 0; j < tomo.size(); ++j) {
    auto expected = tensor(tomo[j], ComplexOperator::identity(DimSignature({2})));
    CHECK(max_abs_diff(setup.measurement.element(j), expected) < 1e-10);
  }
}

TEST_CASE("canonical_implementation: T_V has rank-1 ancilla support") {
  Tester t = tester_from_elements(tv_elements());
  Povm canon = canonical_povm_on_support(t);
  CHECK(canon.dim() == 2);  // d1 * rank = 2 * 1
  CHECK(max_abs(canon.element(0).matrix() - kVV) < 1e-10);
  CHECK(max_abs(canon.element(1).matrix() - kHH) < 1e-10);
}

TEST_CASE("canonical implementation round-trips and satisfies the marginal law") {
  Rng rng(41);
  for (int trial = 0; trial < 12; ++trial) {
    auto rho = testutil::random_density(rng, DimSignature({2}));
    Tester t = testutil::random_tester(rng, rho, 2, 2 + trial % 2);
    TesterSetup setup = canonical_implementation(t);
    Tester back = tester_from_setup(setup, t.d0(), t.d1());
    for (std::size_t j = 0; j < t.num_outcomes(); ++j)
      CHECK(max_abs_diff(back.element(j), t.element(j)) < 1e-9);
    // marginal law: tr_anc Psi = rho^T
    auto marg = partial_trace(setup.input_state.op(), 1);
    CHECK(max_abs(marg.matrix() - t.normalization().op().matrix().transpose()) < 1e-9);
  }
}

TEST_CASE("pure-normalization tester: canonical POVM is the factor POVM") {
  Rng rng(42);
  Matrix psi = kVV;  // pure rho
  auto a1 = qubit_op(0.3 * Matrix::Identity(2, 2) + 0.2 * ket2(1, 1));
  auto a2 = ComplexOperator::identity(DimSignature({2})) - a1;
  Tester t = tester_from_elements({tensor(a1, qubit_op(psi)), tensor(a2, qubit_op(psi))});
  Povm canon = canonical_povm_on_support(t);
  CHECK(max_abs(canon.element(0).matrix() - a1.matrix()) < 1e-10);
  CHECK(max_abs(canon.element(1).matrix() - a2.matrix()) < 1e-10);
}

TEST_CASE("born_probabilities: T_V against identity and bit-flip channels") {
  Tester tv = tester_from_elements(tv_elements());
  auto idch = ChoiOperator::identity_channel(2);
  auto p_id = born_probabilities(tv, idch);
  CHECK(p_id[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p_id[1] == doctest::Approx(0.0).epsilon(1e-12));

  Matrix sx(2, 2);
  sx << 0, 1, 1, 0;
  auto flip = ChoiOperator::unitary_channel(sx);
  auto p_flip = born_probabilities(tv, flip);
  CHECK(p_flip[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p_flip[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("born_probabilities: unitality tester on the identity channel is uniform") {
  std::vector<ComplexOperator> unitality;
  for (auto& p : tomo_povm_elements())
    unitality.push_back(tensor(p, qubit_op(0.5 * Matrix::Identity(2, 2))));
  Tester t = tester_from_elements(unitality);
  auto probs = born_probabilities(t, ChoiOperator::identity_channel(2));
  for (double pj : probs) CHECK(pj == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("born probabilities normalize over random channels") {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    auto rho = testutil::random_density(rng, DimSignature({2}));
    Tester t = testutil::random_tester(rng, rho, 2, 3);
    auto e = testutil::random_channel(rng, 2, 2);
    auto probs = born_probabilities(t, e);
    double sum = 0;
    for (double pj : probs) {
      CHECK(pj >= -1e-10);
      sum += pj;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("ancilla_free_decomposition: product, entangled and classical-ancilla testers") {
  Tester tv = tester_from_elements(tv_elements());
  auto dec = ancilla_free_decomposition(tv);
  REQUIRE(dec.has_value());
  CHECK(max_abs(dec->first.element(0).matrix() - kVV) < 1e-12);
  CHECK(max_abs(dec->first.element(1).matrix() - kHH) < 1e-12);
  CHECK(max_abs(dec->second.op().matrix() - kVV) < 1e-12);

  Eigen::VectorXcd phip = omega_vector(2) / std::sqrt(2.0);
  Matrix proj = phip * phip.adjoint();
  Tester ent = tester_from_elements(
      {ComplexOperator(DimSignature({2, 2}), 0.5 * proj),
       ComplexOperator(DimSignature({2, 2}), 0.5 * (Matrix::Identity(4, 4) - proj))});
  CHECK(!ancilla_free_decomposition(ent).has_value());

  // classical ancilla with two distinct input states
  double s = 1 / std::sqrt(2.0);
  Tester cls = tester_from_elements({0.5 * tensor(qubit_op(kVV), qubit_op(kVV)),
                                     0.5 * tensor(qubit_op(kHH), qubit_op(kVV)),
                                     0.5 * tensor(qubit_op(ket2(s, s)), qubit_op(kHH)),
                                     0.5 * tensor(qubit_op(ket2(s, -s)), qubit_op(kHH))});
  CHECK(!ancilla_free_decomposition(cls).has_value());
}
