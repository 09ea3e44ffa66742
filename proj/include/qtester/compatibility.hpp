#pragma once

#include <optional>

#include "qtester/objects.hpp"
#include "qtester/sdp.hpp"

namespace qtester {

/// Structural relations between two testers.
struct StructuralFlags {
  bool commuting = false;
  bool orthogonal = false;
  bool jointly_diagonal = false;
  bool comparable = false;
};

enum class IncompatibilityReason { None, NormalizationMismatch, JointInfeasible };

std::string to_string(IncompatibilityReason r);

struct CompatibilityVerdict {
  bool compatible = false;
  IncompatibilityReason reason = IncompatibilityReason::None;
  /// trace distance of the normalization states (NormalizationMismatch).
  double normalization_distance = 0.0;
  /// joint-slack margin of the feasibility program, when one was solved.
  std::optional<double> margin;
  std::string certificate;
  std::vector<std::string> joint_outcomes;  // product labels "j|k"
  std::optional<Povm> joint_povm;
  std::optional<Tester> joint_tester;
};

/// Joint measurability of a finite set of POVMs on the same space. Fast
/// paths: identical pairs and commuting pairs (product joint); otherwise a
/// joint-block feasibility program. Joint outcome count is capped at 4096.
CompatibilityVerdict povm_compatibility(const std::vector<Povm>& povms,
                                        const sdp::SolveOptions& options = {},
                                        double decision_tol = 1e-6);

/// Compatibility of testers: normalization states must coincide, then the
/// canonical POVMs on the common support must be jointly measurable; a joint
/// POVM lifts back to a joint tester.
CompatibilityVerdict tester_compatibility(const std::vector<Tester>& testers,
                                          const sdp::SolveOptions& options = {},
                                          double decision_tol = 1e-6,
                                          double norm_tol = 1e-8);

/// Two-outcome characterization: testers are compatible iff the
/// normalizations match and some 0 <= C <= A1, B1 has I x rho + C >= A1 + B1.
CompatibilityVerdict two_outcome_tester_compatibility(const Tester& a, const Tester& b,
                                                      const sdp::SolveOptions& options = {},
                                                      double decision_tol = 1e-6,
                                                      double norm_tol = 1e-8);

StructuralFlags structural_predicates(const Tester& a, const Tester& b,
                                      double commute_tol = 1e-9, double diag_tol = 1e-8,
                                      double psd_tol = kPsdTol);

/// Joint product labels "j|k|..." in row-major order over the outcome sets.
std::vector<std::string> product_outcome_labels(
    const std::vector<std::vector<std::string>>& outcome_sets);

}  // namespace qtester
