#include "doctest.h"
#include "qtester/scenarios.hpp"
#include "qtester/spectral.hpp"
#include "test_util.hpp"

using namespace qtester;
using namespace qtester::scenarios;
using testutil::Rng;

TEST_CASE("polarization_pair: valid testers with the printed normalizations") {
  auto pair = polarization_pair(M_PI / 2, M_PI / 2);
  CHECK(max_abs_diff(ComplexOperator(pair.a.normalization().op()), p_alpha(-M_PI / 4)) < 1e-12);
  CHECK(max_abs_diff(ComplexOperator(pair.b.normalization().op()), p_alpha(M_PI / 4)) < 1e-12);
  double dist = trace_norm(pair.a.normalization().op() - pair.b.normalization().op());
  CHECK(dist == doctest::Approx(2 * std::sin(M_PI / 4)).epsilon(1e-12));

  auto same = polarization_pair(0.0, 0.7);
  CHECK(trace_norm(same.a.normalization().op() - same.b.normalization().op()) < 1e-12);

  auto extreme = polarization_pair(M_PI, M_PI);
  CHECK(trace_norm(extreme.a.normalization().op() - extreme.b.normalization().op()) ==
        doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(polarization_pair(-0.1, 0.0), Error);
}

TEST_CASE("region_m membership and closed form") {
  auto inside = region_m(M_PI / 2, M_PI / 2);
  CHECK(inside.member);
  CHECK(*inside.closed_form_lambda ==
        doctest::Approx(std::sin(M_PI / 4) / (1 + std::sin(M_PI / 4))).epsilon(1e-12));

  auto outside = region_m(0.1, M_PI / 2);
  CHECK(!outside.member);

  for (double theta : {0.0, 0.3, 1.0, M_PI}) CHECK(region_m(theta, 0.0).member);
}

TEST_CASE("region_m_witness: full verification inside M") {
  auto w = region_m_witness(M_PI / 2, M_PI / 2);
  CHECK(w.all_checks_pass);
  CHECK(w.lambda == doctest::Approx(std::sin(M_PI / 4) / (1 + std::sin(M_PI / 4))));
  CHECK(w.joint_min_eig > -1e-9);
  CHECK(w.w_min_eig > -1e-9);
  CHECK(w.split_residual < 1e-9);
  CHECK(w.reduced_entry_residual < 1e-8);

  // the four joint elements marginalize to the mixtures
  auto pair = polarization_pair(M_PI / 2, M_PI / 2);
  auto abar1 = (1 - w.lambda) * pair.a.element(0) + w.lambda * w.noise_a.element(0);
  CHECK(max_abs_diff(w.joint[0] + w.joint[1], abar1) < 1e-12);
  auto bbar1 = (1 - w.lambda) * pair.b.element(0) + w.lambda * w.noise_b.element(0);
  CHECK(max_abs_diff(w.joint[0] + w.joint[2], bbar1) < 1e-12);

  CHECK_THROWS_AS(region_m_witness(0.1, M_PI / 2), Error);
}

TEST_CASE("region_m_witness: theta = pi kills delta, boundary kills the seed eigenvalue") {
  auto w = region_m_witness(M_PI, 0.7);
  CHECK(w.delta == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(max_abs_diff(ComplexOperator(w.noise_a.normalization().op()), p_alpha(M_PI / 2)) < 1e-9);
  CHECK(max_abs_diff(ComplexOperator(w.noise_b.normalization().op()), p_alpha(-M_PI / 2)) < 1e-9);

  double phi = M_PI / 2;
  double theta_boundary = 2 * std::asin(std::sin(phi) / (2 + std::sin(phi)));
  auto wb = region_m_witness(theta_boundary + 1e-9, phi);
  CHECK(std::abs(wb.matg_min_eig) < 1e-7);
}

TEST_CASE("region-M witness sweeps a grid") {
  for (double theta : {0.8, 1.2, 1.9, 2.6}) {
    for (double phi : {0.0, 0.9, 1.8, 2.7}) {
      if (!region_m(theta, phi).member) continue;
      auto w = region_m_witness(theta, phi);
      CHECK(w.all_checks_pass);
    }
  }
}

TEST_CASE("extremal_povm_decomposition") {
  auto effect = [&](double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return ComplexOperator(DimSignature({2}), m);
  };
  auto half = extremal_povm_decomposition(effect(0.5, 0.5));
  CHECK(half.coeffs[0] == doctest::Approx(0.5));
  CHECK(half.coeffs[1] == doctest::Approx(0.0));
  CHECK(half.coeffs[2] == doctest::Approx(0.0));
  CHECK(half.coeffs[3] == doctest::Approx(0.5));

  auto proj = extremal_povm_decomposition(effect(1.0, 0.0));
  CHECK(proj.coeffs[1] == doctest::Approx(1.0));
  CHECK(proj.coeffs[0] == doctest::Approx(0.0));
  CHECK(proj.coeffs[3] == doctest::Approx(0.0));

  auto zero = extremal_povm_decomposition(effect(0.0, 0.0));
  CHECK(zero.coeffs[0] == doctest::Approx(1.0));

  Rng rng(81);
  for (int trial = 0; trial < 100; ++trial) {
    auto u = testutil::random_unitary(rng, 2);
    double e1 = rng.uniform(), e2 = rng.uniform();
    Matrix m = e1 * u.col(0) * u.col(0).adjoint() + e2 * u.col(1) * u.col(1).adjoint();
    ComplexOperator eff(DimSignature({2}), m);
    auto dec = extremal_povm_decomposition(eff);
    double sum = dec.coeffs[0] + dec.coeffs[1] + dec.coeffs[2] + dec.coeffs[3];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    for (double c : dec.coeffs) CHECK(c >= -1e-12);
    Matrix rebuilt = dec.coeffs[1] * dec.u1 + dec.coeffs[2] * dec.u2 +
                     dec.coeffs[3] * Matrix::Identity(2, 2);
    CHECK(max_abs(rebuilt - m) < 1e-10);
  }

  CHECK_THROWS_AS(extremal_povm_decomposition(effect(1.5, 0.0)), Error);
}

TEST_CASE("named testers") {
  auto tv = named_testers("t_v");
  Matrix vv = Matrix::Zero(2, 2);
  vv(0, 0) = 1;
  CHECK(max_abs(tv.testers.front().normalization().op().matrix() - vv) < 1e-12);

  auto busch = named_testers("busch", {0.6, 0.6, 2, 2});
  CHECK(busch.povms.size() == 2);

  auto mub = named_testers("mub_testers", {0, 0, 2, 2});
  CHECK(max_abs(mub.testers[0].normalization().op().matrix() -
                0.5 * Matrix::Identity(2, 2)) < 1e-12);
  CHECK(max_abs(mub.testers[1].normalization().op().matrix() -
                0.5 * Matrix::Identity(2, 2)) < 1e-12);
  // canonical POVMs are the projective bases
  auto canon = canonical_povm_on_support(mub.testers[0]);
  for (std::size_t j = 0; j < canon.num_outcomes(); ++j) {
    auto spec = spectral_decompose(canon.element(j));
    CHECK(spec.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(spec.eigenvalues(1)) < 1e-9);
  }

  auto ent = named_testers("entangled");
  CHECK(!ancilla_free_decomposition(ent.testers.front()).has_value());

  auto cls = named_testers("classical_ancilla_example");
  CHECK(!ancilla_free_decomposition(cls.testers.front()).has_value());

  CHECK_THROWS_AS(named_testers("nonsense"), Error);
}

TEST_CASE("sweep: deterministic rows with the pinned CSV header") {
  std::vector<double> grid = {0.0, M_PI / 2, M_PI};
  auto rows = sweep(grid, grid);
  REQUIRE(rows.size() == 9);
  auto csv1 = sweep_csv(rows);
  auto csv2 = sweep_csv(sweep(grid, grid));
  CHECK(csv1 == csv2);  // byte identical
  CHECK(csv1.rfind("theta,phi,in_m,lambda_state_bound,lambda_closed_form,lambda_sdp,"
                   "lambda_measurement_upper\n",
                   0) == 0);

  // (0, 0): identical testers
  CHECK(rows[0].lambda_sdp.has_value());
  CHECK(*rows[0].lambda_sdp <= 1e-6);
  // (0, pi/2): the qubit MUB value through the shared-pure-normalization path
  CHECK(*rows[1].lambda_sdp == doctest::Approx((1 - 1 / std::sqrt(2.0)) / 2).epsilon(1e-6));
  CHECK(rows[1].lambda_measurement_upper.has_value());
  // (pi/2, pi/2): region M closed form
  CHECK(rows[4].in_m);
  CHECK(*rows[4].lambda_sdp == doctest::Approx(*rows[4].lambda_closed_form).epsilon(1e-5));
  // (pi, *): maximal incompatibility from orthogonal normalizations
  CHECK(*rows[8].lambda_sdp == doctest::Approx(0.5).epsilon(1e-6));
}
