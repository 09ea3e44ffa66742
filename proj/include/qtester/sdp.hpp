#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtester/operator.hpp"

namespace qtester::sdp {

enum class BlockField { RealSymmetric, ComplexHermitian };
enum class ConstraintKind { Psd, Zero };
enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

/// Thrown when a solve that should have produced an optimum did not.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(what) {}
};

std::string to_string(SolveStatus s);

/// coeff * sum_p L_p X R_p for a named PSD block variable X. An empty factor
/// list means the identity map.
struct BlockTerm {
  std::string block;
  double coeff = 1.0;
  std::vector<std::pair<Matrix, Matrix>> factors;
};

BlockTerm on_block(const std::string& block, double coeff = 1.0);
/// coeff * (I_left (x) X) for a block of the given side
BlockTerm kron_left(const std::string& block, int left_dim, int block_side, double coeff = 1.0);
/// coeff * (X (x) I_right)
BlockTerm kron_right(const std::string& block, int right_dim, int block_side, double coeff = 1.0);
/// coeff * L X L^dagger
BlockTerm sandwich(const std::string& block, const Matrix& l, double coeff = 1.0);

/// s * coeff_mat for a named scalar variable s.
struct ScalarTerm {
  std::string scalar;
  Matrix coeff_mat;
};

/// A linear-matrix constraint: constant + block terms + scalar terms is PSD
/// or exactly zero.
struct Constraint {
  std::string name;
  ConstraintKind kind = ConstraintKind::Psd;
  int side = 0;
  std::vector<BlockTerm> block_terms;
  std::vector<ScalarTerm> scalar_terms;
  Matrix constant;  // zero if empty
};

struct SolveOptions {
  double feas_tol = 1e-7;
  double gap_tol = 1e-7;
  int max_iters = 200;
  double step = 0.98;  // fraction-to-boundary
  bool verbose = false;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective_value = 0.0;  // in the maximize convention
  double dual_bound = 0.0;
  std::map<std::string, Matrix> block_values;
  std::map<std::string, double> scalar_values;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  std::string message;
};

struct FeasibilityReport {
  bool feasible = false;
  double margin = 0.0;  // most-negative slack over all PSD constraints
  bool has_margin = false;
  std::map<std::string, Matrix> witness_blocks;
  std::map<std::string, double> witness_scalars;
  std::string certificate;
};

/// Block-PSD variables, scalar variables, a linear objective (maximize) and
/// linear-matrix constraints. Dense, deterministic, small-scale.
class SdpProblem {
 public:
  void add_block(const std::string& name, int side,
                 BlockField field = BlockField::ComplexHermitian);
  /// nonneg scalars enter the cone directly; free scalars are split
  /// internally into a difference of bounded nonnegative parts.
  void add_scalar(const std::string& name, bool nonneg = true);
  void add_constraint(Constraint c);
  void maximize_scalar(const std::string& name, double coeff = 1.0);
  void maximize_block_trace(const std::string& name, const Matrix& k);

  bool has_block(const std::string& name) const;
  bool has_scalar(const std::string& name) const;
  std::string dump_json() const;

  struct Block {
    std::string name;
    int side;
    BlockField field;
  };
  struct Scalar {
    std::string name;
    bool nonneg;
  };
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Scalar>& scalars() const { return scalars_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::map<std::string, double>& objective_scalars() const { return obj_scalars_; }
  const std::map<std::string, Matrix>& objective_blocks() const { return obj_blocks_; }

 private:
  std::vector<Block> blocks_;
  std::vector<Scalar> scalars_;
  std::vector<Constraint> constraints_;
  std::map<std::string, double> obj_scalars_;
  std::map<std::string, Matrix> obj_blocks_;
};

/// Homogeneous self-dual primal-dual path following on the compiled real
/// cone program. Deterministic: identical input produces identical output.
SdpSolution solve(const SdpProblem& p, const SolveOptions& options = {});

/// Margin-maximization feasibility: substitutes every declared block B by
/// B' + t I and every PSD constraint expr by expr - t I, then maximizes t.
/// Feasible iff the optimal margin clears -feas_tol.
FeasibilityReport feasibility(const SdpProblem& p, const SolveOptions& options = {},
                              double margin_cap = 64.0);

/// M -> [[Re M, -Im M], [Im M, Re M]]; doubles eigenvalue multiplicities and
/// preserves positive semidefiniteness in both directions.
RealMatrix embed_complex(const Matrix& m, double herm_tol = 1e-9);

}  // namespace qtester::sdp
