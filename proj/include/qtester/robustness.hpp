#pragma once

#include "qtester/compatibility.hpp"
#include "qtester/ncomb.hpp"

namespace qtester {

enum class RobustnessMethod { ClosedForm, Sdp, Bisection };

std::string to_string(RobustnessMethod m);

/// Minimum noise weight lambda making the inputs compatible, together with
/// the full witness set: the noise objects, the joint object reproducing the
/// noisy mixtures, and the common mixed normalization.
struct RobustnessResult {
  double lambda = 0.0;
  RobustnessMethod method = RobustnessMethod::ClosedForm;
  std::vector<ComplexOperator> noise_states;  // state robustness: rho~, sigma~
  std::vector<Povm> noise_povms;              // measurement robustness: J^P, J^Q
  std::vector<Tester> noise_testers;          // tester robustness: N^A, N^B
  std::optional<Povm> joint_povm;
  std::optional<Tester> joint_tester;
  std::optional<ComplexOperator> omega;  // common mixed normalization state
};

struct BoundReport {
  double state_lower = 0.0;
  double trivial_upper = 0.5;
  std::optional<double> measurement_upper;
  std::optional<double> discrimination_lower;
};

/// Closed form lambda = ||rho - sigma|| / (||rho - sigma|| + 2) with the
/// orthogonal witness pair rho~ = 2 Delta+, sigma~ = 2 Delta-.
RobustnessResult state_robustness(const DensityOperator& rho, const DensityOperator& sigma);

/// Robustness of measurement incompatibility via the rescaled joint-block
/// program: sup mu with sum_k H_jk >= mu P_j, sum_j H_jk >= mu Q_k and
/// sum H = (1 + mu) I; lambda = 1/(1 + mu).
RobustnessResult measurement_robustness(const Povm& p, const Povm& q,
                                        const sdp::SolveOptions& options = {});

/// Robustness of two-outcome tester incompatibility. Exact shortcuts
/// (jointly diagonal, comparable, shared pure normalization) run before the
/// rescaled linear program.
RobustnessResult tester_robustness_two_outcome(const Tester& a, const Tester& b,
                                               const sdp::SolveOptions& options = {});

/// Independent oracle: bisection over lambda of the fixed-lambda feasibility
/// program. Agrees with the single-program value within 2*tol.
RobustnessResult tester_robustness_bisection(const Tester& a, const Tester& b, double tol = 1e-6,
                                             const sdp::SolveOptions& options = {});

/// Experimental: set robustness for two or more testers of arbitrary outcome
/// counts by bisecting the joint-tester feasibility program.
RobustnessResult tester_robustness_set(const std::vector<Tester>& testers, double tol = 1e-6,
                                       const sdp::SolveOptions& options = {});

/// Lower and upper bounds of the robustness of a tester pair.
BoundReport bounds(const Tester& a, const Tester& b, const sdp::SolveOptions& options = {});

/// Helstrom success probability for discriminating two equiprobable
/// normalizations: (1 + ||t1 - t2||/2) / 2.
double helstrom_success(const ComplexOperator& theta1, const ComplexOperator& theta2);

/// Discrimination lower bound 1 - 1/(|set| p_succ) on the robustness of a
/// set of N-testers, clamped to [0, 1 - 1/|set|]. p_succ is computed via
/// Helstrom for a pair of 1-testers and must be supplied otherwise.
double ntester_discrimination_bound(const std::vector<NTester>& testers,
                                    std::optional<double> p_succ = std::nullopt);

/// Fixed-lambda feasibility program behind the bisection oracle. With
/// shared_noise the two noise testers are forced equal (used to exhibit that
/// common noise cannot reconcile distinct normalizations).
sdp::SdpProblem build_lambda_compatibility(const Tester& a, const Tester& b, double lambda,
                                           bool shared_noise = false);

}  // namespace qtester
