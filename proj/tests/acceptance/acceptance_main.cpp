// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Exit code is the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qtester/io.hpp"
#include "qtester/ncomb.hpp"
#include "qtester/robustness.hpp"
#include "qtester/scenarios.hpp"
#include "qtester/spectral.hpp"
#include "../test_util.hpp"

using namespace qtester;
using testutil::Rng;

namespace {

struct Checker {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& msg) {
    if (!cond) {
      ok = false;
      detail << (detail.str().empty() ? "" : "; ") << msg;
    }
  }
  void require_close(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      ok = false;
      detail << (detail.str().empty() ? "" : "; ") << what << ": got " << got << ", want "
             << want << " within " << tol;
    }
  }
};

double bloch_lambda(const Matrix& rho, const Matrix& sigma) {
  auto bloch = [](const Matrix& m) {
    Eigen::Vector3d r;
    r(0) = 2.0 * m(0, 1).real();
    r(1) = -2.0 * m(0, 1).imag();
    r(2) = (m(0, 0) - m(1, 1)).real();
    return r;
  };
  double dist = (bloch(rho) - bloch(sigma)).norm();
  return dist / (dist + 2.0);
}

const double kMubLambda = (1.0 - 1.0 / std::sqrt(2.0)) / 2.0;

// ---------------------------------------------------------------------------

void criterion_1_state_closed_form(Checker& c) {
  Rng rng(1001);
  for (int trial = 0; trial < 50; ++trial) {
    auto rho = testutil::random_density(rng, DimSignature({2}));
    auto sigma = testutil::random_density(rng, DimSignature({2}));
    double lam = state_robustness(DensityOperator(rho), DensityOperator(sigma)).lambda;
    c.require_close(lam, bloch_lambda(rho.matrix(), sigma.matrix()), 1e-9,
                    "trace-norm vs Bloch form, trial " + std::to_string(trial));
  }
  Matrix v0 = Matrix::Zero(2, 2), v1 = Matrix::Zero(2, 2);
  v0(0, 0) = 1;
  v1(1, 1) = 1;
  double lam = state_robustness(DensityOperator(ComplexOperator(DimSignature({2}), v0)),
                                DensityOperator(ComplexOperator(DimSignature({2}), v1)))
                   .lambda;
  c.require(lam == 0.5, "orthogonal pure pair must give exactly 0.5, got " + std::to_string(lam));
}

void criterion_2_tv_th(Checker& c) {
  auto tv = scenarios::named_testers("t_v").testers.front();
  auto th = scenarios::named_testers("t_h").testers.front();
  auto r = tester_robustness_two_outcome(tv, th);
  c.require_close(r.lambda, 0.5, 1e-6, "robustness of T_V vs T_H");
  auto v = tester_compatibility({tv, th});
  c.require(!v.compatible && v.reason == IncompatibilityReason::NormalizationMismatch,
            "verdict must be NormalizationMismatch");
  auto f = structural_predicates(tv, th);
  c.require(f.commuting, "T_V, T_H must commute");
  c.require(f.orthogonal, "T_V, T_H must be orthogonal");
  c.require(f.jointly_diagonal, "T_V, T_H must be jointly diagonal");
}

void criterion_3_region_m(Checker& c) {
  // 9 phi values across [0, pi]; for each, 9 theta values spanning the part
  // of [0, pi] inside region M.
  for (int i = 0; i < 9; ++i) {
    double phi = M_PI * i / 8.0;
    double theta_min = 2.0 * std::asin(std::sin(phi) / (2.0 + std::sin(phi)));
    for (int j = 0; j < 9; ++j) {
      double theta = theta_min + (M_PI - theta_min) * (j + 0.5) / 9.0;
      auto query = scenarios::region_m(theta, phi);
      c.require(query.member, "grid point left region M");
      if (!query.member) continue;
      auto pair = scenarios::polarization_pair(theta, phi);
      double lam = tester_robustness_two_outcome(pair.a, pair.b).lambda;
      c.require_close(lam, *query.closed_form_lambda, 1e-5,
                      "closed form at theta=" + std::to_string(theta) +
                          " phi=" + std::to_string(phi));
      auto w = scenarios::region_m_witness(theta, phi);
      c.require(w.all_checks_pass, "analytic witness checks at theta=" +
                                       std::to_string(theta) + " phi=" + std::to_string(phi));
    }
  }
}

void criterion_4_outside_m(Checker& c) {
  {
    auto pair = scenarios::polarization_pair(0.1, M_PI / 2);
    double lam = tester_robustness_two_outcome(pair.a, pair.b).lambda;
    double lower =
        state_robustness(pair.a.normalization(), pair.b.normalization()).lambda;
    c.require(lam >= lower + 1e-4, "strictness outside M: lambda " + std::to_string(lam) +
                                       " vs state bound " + std::to_string(lower));
  }
  for (double theta : {0.0, 0.2, 0.4}) {
    std::vector<double> lambdas;
    for (int i = 0; i <= 8; ++i) {
      double phi = M_PI * i / 8.0;
      auto pair = scenarios::polarization_pair(theta, phi);
      double lam = tester_robustness_two_outcome(pair.a, pair.b).lambda;
      double lower = state_robustness(pair.a.normalization(), pair.b.normalization()).lambda;
      c.require(lam >= lower - 1e-6 && lam <= 0.5 + 1e-6,
                "sandwich violated at theta=" + std::to_string(theta) +
                    " phi=" + std::to_string(phi));
      lambdas.push_back(lam);
    }
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < lambdas.size(); ++i)
      if (lambdas[i] > lambdas[argmax]) argmax = i;
    c.require(argmax == 4, "phi-peak at theta=" + std::to_string(theta) + " sits at index " +
                               std::to_string(argmax) + " instead of pi/2");
  }
}

void criterion_5_mub(Checker& c) {
  Matrix m0 = Matrix::Zero(2, 2), m1 = Matrix::Zero(2, 2);
  m0(0, 0) = 1;
  m1(1, 1) = 1;
  Matrix f0(2, 2), f1(2, 2);
  f0 << 0.5, 0.5, 0.5, 0.5;
  f1 << 0.5, -0.5, -0.5, 0.5;
  Povm p = Povm::from_elements(
      {ComplexOperator(DimSignature({2}), m0), ComplexOperator(DimSignature({2}), m1)});
  Povm q = Povm::from_elements(
      {ComplexOperator(DimSignature({2}), f0), ComplexOperator(DimSignature({2}), f1)});
  c.require_close(measurement_robustness(p, q).lambda, kMubLambda, 1e-6,
                  "qubit MUB measurement robustness");

  auto pair = scenarios::polarization_pair(0.0, M_PI / 2);
  c.require_close(tester_robustness_two_outcome(pair.a, pair.b).lambda, kMubLambda, 1e-6,
                  "theta=0, phi=pi/2 tester pair via the pure-normalization reduction");
}

void criterion_6_busch(Checker& c) {
  auto verdict = [&](double p, double q) {
    auto objs = scenarios::named_testers("busch", {p, q, 2, 2});
    return povm_compatibility({objs.povms[0], objs.povms[1]}).compatible;
  };
  double b = 1 / std::sqrt(2.0);
  c.require(verdict(b, b), "boundary pair (1/sqrt2, 1/sqrt2) must be compatible");
  c.require(!verdict(0.8, 0.8), "(0.8, 0.8) must be incompatible");
  Rng rng(1006);
  int classified = 0;
  while (classified < 20) {
    double p = rng.uniform(), q = rng.uniform();
    if (std::abs(p * p + q * q - 1.0) < 1e-3) continue;  // off the decision band
    bool expect = p * p + q * q <= 1.0;
    bool got = verdict(p, q);
    c.require(got == expect, "classification at p=" + std::to_string(p) +
                                 " q=" + std::to_string(q));
    ++classified;
  }
}

void criterion_7_unsharp_threshold(Checker& c) {
  Rng rng(1007);
  const double theta = 0.68;
  double expect = std::sin(theta / 2) / (1.0 + std::sin(theta / 2));
  for (int trial = 0; trial < 10; ++trial) {
    auto make_effect = [&]() {
      Matrix u = testutil::random_unitary(rng, 2);
      double e1 = rng.uniform(), e2 = rng.uniform();
      Matrix m = e1 * u.col(0) * u.col(0).adjoint() + e2 * u.col(1) * u.col(1).adjoint();
      return ComplexOperator(DimSignature({2}), m);
    };
    auto e1 = make_effect();
    auto f1 = make_effect();
    auto i2 = ComplexOperator::identity(DimSignature({2}));
    auto a = tester_from_elements({tensor(e1, scenarios::p_alpha(-theta / 2)),
                                   tensor(i2 - e1, scenarios::p_alpha(-theta / 2))});
    auto b = tester_from_elements({tensor(f1, scenarios::p_alpha(theta / 2)),
                                   tensor(i2 - f1, scenarios::p_alpha(theta / 2))});
    double lam = tester_robustness_two_outcome(a, b).lambda;
    c.require_close(lam, expect, 1e-5, "unsharp pair trial " + std::to_string(trial));

    for (const auto& eff : {e1, f1}) {
      auto dec = scenarios::extremal_povm_decomposition(eff);
      Matrix rebuilt = dec.coeffs[1] * dec.u1 + dec.coeffs[2] * dec.u2 +
                       dec.coeffs[3] * Matrix::Identity(2, 2);
      c.require(max_abs(rebuilt - eff.matrix()) <= 1e-10,
                "extremal decomposition reconstruction, trial " + std::to_string(trial));
    }
  }
}

void criterion_8_oracles(Checker& c) {
  // bisection vs the rescaled single program on a 5x5 grid
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      double theta = M_PI * i / 4.0, phi = M_PI * j / 4.0;
      auto pair = scenarios::polarization_pair(theta, phi);
      double direct = tester_robustness_two_outcome(pair.a, pair.b).lambda;
      double bisect = tester_robustness_bisection(pair.a, pair.b, 1e-6).lambda;
      c.require(std::abs(direct - bisect) <= 2e-6,
                "oracle gap " + std::to_string(std::abs(direct - bisect)) + " at theta=" +
                    std::to_string(theta) + " phi=" + std::to_string(phi));
    }
  }
  // Prop 13 vs Theorem 1 on 200 random shared-normalization pairs
  Rng rng(1008);
  for (int trial = 0; trial < 200; ++trial) {
    auto rho = testutil::random_density(rng, DimSignature({2}));
    auto make = [&]() {
      DimSignature sig({2, 2});
      auto m = testutil::random_psd(rng, sig);
      auto total = m + testutil::random_psd(rng, sig);
      auto scale = psd_pinv_sqrt(total, 1e-12);
      auto root = tensor(ComplexOperator::identity(DimSignature({2})), psd_sqrt(rho));
      auto a1 = (root * scale * m * scale * root).hermitized();
      auto a2 = tensor(ComplexOperator::identity(DimSignature({2})), rho) - a1;
      return tester_from_elements({a1, a2});
    };
    Tester a = make();
    Tester b = make();
    bool via_c = two_outcome_tester_compatibility(a, b).compatible;
    bool via_canonical = tester_compatibility({a, b}).compatible;
    c.require(via_c == via_canonical, "paths disagree on trial " + std::to_string(trial));
  }
}

void criterion_9_witness_replay(Checker& c) {
  // Tester results: mix in the returned noise and re-decide compatibility.
  auto replay_tester = [&](const Tester& a, const Tester& b, const std::string& what) {
    auto r = tester_robustness_two_outcome(a, b);
    if (r.noise_testers.size() != 2) {
      c.require(false, what + ": no noise witnesses returned");
      return;
    }
    std::vector<ComplexOperator> abar, bbar;
    for (std::size_t j = 0; j < a.num_outcomes(); ++j) {
      abar.push_back((1 - r.lambda) * a.element(j) +
                     r.lambda * r.noise_testers[0].element(j));
      bbar.push_back((1 - r.lambda) * b.element(j) +
                     r.lambda * r.noise_testers[1].element(j));
    }
    auto va = validate_tester(abar, {}, 1e-6, 1e-5);
    auto vb = validate_tester(bbar, {}, 1e-6, 1e-5);
    auto verdict = tester_compatibility({va.first, vb.first});
    c.require(verdict.compatible, what + ": replay verdict");
  };
  auto tv = scenarios::named_testers("t_v").testers.front();
  auto th = scenarios::named_testers("t_h").testers.front();
  replay_tester(tv, th, "T_V/T_H");
  auto inm = scenarios::polarization_pair(M_PI / 2, M_PI / 2);
  replay_tester(inm.a, inm.b, "region-M point");
  auto outm = scenarios::polarization_pair(0.1, M_PI / 2);
  replay_tester(outm.a, outm.b, "outside-M point");
  auto shared = scenarios::polarization_pair(0.0, 3 * M_PI / 4);
  replay_tester(shared.a, shared.b, "shared pure normalization");

  // POVM result
  auto objs = scenarios::named_testers("busch", {0.9, 0.9, 2, 2});
  auto rm = measurement_robustness(objs.povms[0], objs.povms[1]);
  std::vector<ComplexOperator> pbar, qbar;
  for (std::size_t j = 0; j < 2; ++j) {
    pbar.push_back((1 - rm.lambda) * objs.povms[0].element(j) +
                   rm.lambda * rm.noise_povms[0].element(j));
    qbar.push_back((1 - rm.lambda) * objs.povms[1].element(j) +
                   rm.lambda * rm.noise_povms[1].element(j));
  }
  auto verdict = povm_compatibility(
      {Povm::from_elements(pbar, 1e-5), Povm::from_elements(qbar, 1e-5)});
  c.require(verdict.compatible, "Busch 0.9 measurement replay");
}

void criterion_10_nlevel(Checker& c) {
  // accept constructed N = 1 and N = 2 objects
  auto tv = scenarios::named_testers("t_v").testers.front();
  try {
    auto nt = ntester_from_tester(tv);
    c.require(max_abs(nt.theta.matrix() - tv.normalization().op().matrix()) < 1e-12,
              "1-tester Theta must equal rho");
    auto comb = ncomb_from_choi(ChoiOperator::identity_channel(2));
    c.require(comb.steps == 1, "identity 1-comb");
  } catch (const Error& e) {
    c.require(false, std::string("N = 1 construction threw: ") + e.what());
  }
  Eigen::VectorXcd om = omega_vector(2);
  ComplexOperator omega_proj(DimSignature({2, 2}), om * om.adjoint());
  auto two_comb_op = tensor(omega_proj, omega_proj);
  try {
    validate_ncomb(two_comb_op, 2);
  } catch (const Error& e) {
    c.require(false, std::string("2-comb construction threw: ") + e.what());
  }
  // reject chain-violating perturbations with residual >= 1e-4
  Matrix bump = Matrix::Zero(16, 16);
  bump(0, 0) = 1e-3;
  bool rejected = false;
  double residual = 0;
  try {
    validate_ncomb(ComplexOperator(DimSignature({2, 2, 2, 2}), two_comb_op.matrix() + bump), 2);
  } catch (const ValidationError& e) {
    rejected = e.code() == ValidationCode::ChainViolation;
    if (e.witness().size() == 2) residual = e.witness()[1];
  }
  c.require(rejected && residual >= 1e-4, "chain-violating perturbation must be rejected");

  auto th = scenarios::named_testers("t_h").testers.front();
  double orth = ntester_discrimination_bound({ntester_from_tester(tv), ntester_from_tester(th)});
  c.require_close(orth, 0.5, 1e-12, "orthogonal-Theta discrimination bound");
  double same = ntester_discrimination_bound({ntester_from_tester(tv), ntester_from_tester(tv)});
  c.require_close(same, 0.0, 1e-12, "identical-Theta discrimination bound");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<void(Checker&)> fn;
  };
  std::vector<Criterion> criteria = {
      {1, "state robustness closed form matches the Bloch form", criterion_1_state_closed_form},
      {2, "T_V vs T_H: maximal robustness, mismatch verdict, structural flags", criterion_2_tv_th},
      {3, "region M: solver matches the closed form and the analytic witness verifies",
       criterion_3_region_m},
      {4, "outside M: strict excess and the phi-peak at pi/2", criterion_4_outside_m},
      {5, "qubit MUB pair robustness (1 - 1/sqrt2)/2 via both routes", criterion_5_mub},
      {6, "Busch compatibility boundary p^2 + q^2 <= 1", criterion_6_busch},
      {7, "unsharp factor pairs at theta = 0.68 meet the state bound; extremal decomposition",
       criterion_7_unsharp_threshold},
      {8, "bisection oracle and the two compatibility paths agree", criterion_8_oracles},
      {9, "witness replay through the compatibility checker", criterion_9_witness_replay},
      {10, "N-comb/N-tester validation and discrimination bounds", criterion_10_nlevel},
  };

  int failures = 0;
  for (auto& crit : criteria) {
    Checker c;
    try {
      crit.fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << "exception: " << e.what();
    }
    if (c.ok) {
      std::printf("[PASS] criterion %d: %s\n", crit.id, crit.title);
    } else {
      ++failures;
      std::printf("[FAIL] criterion %d: %s -- %s\n", crit.id, crit.title,
                  c.detail.str().c_str());
    }
    std::fflush(stdout);
  }
  if (failures == 0)
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}
