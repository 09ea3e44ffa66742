#pragma once

#include <array>

#include "qtester/robustness.hpp"

namespace qtester::scenarios {

/// P_alpha = (I + sin(alpha) sx + cos(alpha) sz) / 2: rank-one projector
/// in the xz plane of the Bloch sphere.
ComplexOperator p_alpha(double alpha);

/// |beta> = cos(beta/2)|0> + sin(beta/2)|1>
Eigen::Vector2cd beta_ket(double beta);

/// The two-outcome polarization testers
///   A = {P_{-phi/2} (x) P_{-theta/2},  P_{pi-phi/2} (x) P_{-theta/2}}
///   B = {P_{ phi/2} (x) P_{ theta/2},  P_{phi/2-pi} (x) P_{ theta/2}}.
struct PolarizationPair {
  double theta = 0;
  double phi = 0;
  Tester a;
  Tester b;
};

PolarizationPair polarization_pair(double theta, double phi);

/// Membership in region M: sin(theta/2) >= sin(phi) / (2 + sin(phi)); inside,
/// the robustness has the closed form sin(theta/2) / (1 + sin(theta/2)).
struct RegionMQuery {
  bool member = false;
  std::optional<double> closed_form_lambda;
};

RegionMQuery region_m(double theta, double phi);

/// The analytic joint-tester witness achieving the closed form inside M,
/// with every positivity check evaluated.
struct RegionMWitness {
  double lambda = 0;
  double delta = 0;
  Tester noise_a;
  Tester noise_b;
  ComplexOperator omega;
  ComplexOperator c_op;
  std::vector<ComplexOperator> joint;  // C11, C12, C21, C22
  // verification data
  double joint_min_eig = 0;       // min over the four joint elements
  double matg_min_eig = 0;        // smallest eigenvalue of the 2x2 seed of C
  double w_min_eig = 0;           // smallest eigenvalue of the reduced matrix W
  std::array<double, 3> w_xyz{};  // entries x, y, z of W
  double reduced_entry_residual = 0;  // A1bar - C against its 4x4 form
  double split_residual = 0;          // || D - (C - SCS) ||_max
  bool all_checks_pass = false;
};

RegionMWitness region_m_witness(double theta, double phi, double tol = 1e-9);

/// Convex decomposition of a qubit effect over {0, |u1><u1|, |u2><u2|, I}
/// with coefficients summing to one; exact reconstruction.
struct ExtremalDecomposition {
  std::array<double, 4> coeffs{};
  Matrix u1;  // projector carrying the larger eigenvalue
  Matrix u2;
};

ExtremalDecomposition extremal_povm_decomposition(const ComplexOperator& effect,
                                                  double tol = 1e-9);

struct NamedParams {
  double p = 0.8;
  double q = 0.8;
  int d0 = 2;
  int d1 = 2;
};

/// Testers and POVMs printed in the worked examples. Known names: t_v, t_h,
/// unitality, entangled, classical_ancilla_example, mub_testers, busch.
struct ScenarioObjects {
  std::vector<Tester> testers;
  std::vector<Povm> povms;
  std::string description;
};

ScenarioObjects named_testers(const std::string& name, const NamedParams& params = {});

std::vector<std::string> known_scenario_names();

struct SweepRow {
  double theta = 0;
  double phi = 0;
  bool in_m = false;
  double lambda_state_bound = 0;
  std::optional<double> lambda_closed_form;
  std::optional<double> lambda_sdp;
  std::optional<double> lambda_measurement_upper;
  std::string error;  // per-row solver failure, sweep continues
};

/// theta-major scan of the polarization family; deterministic row order.
std::vector<SweepRow> sweep(const std::vector<double>& theta_grid,
                            const std::vector<double>& phi_grid,
                            const sdp::SolveOptions& options = {});

/// {0, pi/steps, 2 pi/steps, ..., pi}
std::vector<double> angle_grid(int steps);

/// CSV with the fixed header
/// theta,phi,in_m,lambda_state_bound,lambda_closed_form,lambda_sdp,lambda_measurement_upper
std::string sweep_csv(const std::vector<SweepRow>& rows);

std::string format_fixed6(double v);

}  // namespace qtester::scenarios
