#include "qtester/compatibility.hpp"

#include <cmath>

#include "qtester/spectral.hpp"

namespace qtester {

std::string to_string(IncompatibilityReason r) {
  switch (r) {
    case IncompatibilityReason::None: return "none";
    case IncompatibilityReason::NormalizationMismatch: return "NormalizationMismatch";
    case IncompatibilityReason::JointInfeasible: return "JointInfeasible";
  }
  return "unknown";
}

std::vector<std::string> product_outcome_labels(
    const std::vector<std::vector<std::string>>& outcome_sets) {
  std::vector<std::string> labels = {""};
  for (const auto& set : outcome_sets) {
    std::vector<std::string> next;
    next.reserve(labels.size() * set.size());
    for (const auto& prefix : labels)
      for (const auto& o : set) next.push_back(prefix.empty() ? o : prefix + "|" + o);
    labels = std::move(next);
  }
  return labels;
}

namespace {

constexpr std::size_t kJointOutcomeCap = 4096;

bool all_real(const std::vector<const ComplexOperator*>& ops) {
  for (const auto* op : ops)
    if (op->matrix().imag().cwiseAbs().maxCoeff() > 1e-13) return false;
  return true;
}

// Row-major joint outcome indexing; component() recovers the outcome of
// measurement x from a flat joint index.
struct JointIndex {
  std::vector<std::size_t> sizes;
  std::size_t total = 1;
  explicit JointIndex(std::vector<std::size_t> s) : sizes(std::move(s)) {
    for (auto n : sizes) total *= n;
  }
  std::size_t component(std::size_t flat, std::size_t x) const {
    for (std::size_t i = sizes.size(); i-- > x + 1;) flat /= sizes[i];
    return flat % sizes[x];
  }
};

std::string joint_block_name(std::size_t flat) { return "R" + std::to_string(flat); }

CompatibilityVerdict joint_feasibility(const std::vector<Povm>& povms,
                                       const sdp::SolveOptions& options, double decision_tol) {
  const int d = povms.front().dim();
  std::vector<std::size_t> sizes;
  std::vector<std::vector<std::string>> outcome_sets;
  std::vector<const ComplexOperator*> data;
  for (const auto& p : povms) {
    sizes.push_back(p.num_outcomes());
    outcome_sets.push_back(p.outcomes());
    for (const auto& e : p.elements()) data.push_back(&e);
  }
  JointIndex joint(sizes);
  if (joint.total > kJointOutcomeCap)
    throw Error("joint outcome count " + std::to_string(joint.total) + " exceeds cap " +
                std::to_string(kJointOutcomeCap));
  sdp::BlockField field =
      all_real(data) ? sdp::BlockField::RealSymmetric : sdp::BlockField::ComplexHermitian;

  sdp::SdpProblem prob;
  for (std::size_t k = 0; k < joint.total; ++k)
    prob.add_block(joint_block_name(k), d, field);
  for (std::size_t x = 0; x < povms.size(); ++x) {
    for (std::size_t j = 0; j < povms[x].num_outcomes(); ++j) {
      sdp::Constraint c;
      c.name = "marginal_" + std::to_string(x) + "_" + std::to_string(j);
      c.kind = sdp::ConstraintKind::Zero;
      c.side = d;
      c.constant = -povms[x].element(j).matrix();
      for (std::size_t k = 0; k < joint.total; ++k)
        if (joint.component(k, x) == j)
          c.block_terms.push_back(sdp::on_block(joint_block_name(k)));
      prob.add_constraint(std::move(c));
    }
  }
  auto rep = sdp::feasibility(prob, options);

  CompatibilityVerdict v;
  v.joint_outcomes = product_outcome_labels(outcome_sets);
  if (rep.has_margin) v.margin = rep.margin;
  if (rep.has_margin ? rep.margin >= -decision_tol : rep.feasible) {
    v.compatible = true;
    std::vector<ComplexOperator> elements;
    elements.reserve(joint.total);
    for (std::size_t k = 0; k < joint.total; ++k) {
      Matrix m = rep.witness_blocks[joint_block_name(k)];
      // clip the tiny negative tail so the witness is a bona fide POVM
      ComplexOperator e(DimSignature({d}), 0.5 * (m + m.adjoint().eval()));
      auto [pos, neg] = jordan_split(e);
      elements.push_back(pos);
    }
    v.joint_povm = Povm(v.joint_outcomes, std::move(elements), 1e-6);
  } else {
    v.compatible = false;
    v.reason = IncompatibilityReason::JointInfeasible;
    v.certificate = rep.certificate;
  }
  return v;
}

std::optional<CompatibilityVerdict> povm_fast_paths(const std::vector<Povm>& povms) {
  if (povms.size() != 2) return std::nullopt;
  const Povm& p = povms[0];
  const Povm& q = povms[1];
  std::vector<std::vector<std::string>> outcome_sets = {p.outcomes(), q.outcomes()};

  // identical POVMs: diagonal pairing R_jk = delta_jk P_j
  if (p.num_outcomes() == q.num_outcomes()) {
    bool same = true;
    for (std::size_t j = 0; same && j < p.num_outcomes(); ++j)
      same = max_abs_diff(p.element(j), q.element(j)) <= 1e-10;
    if (same) {
      std::vector<ComplexOperator> joint;
      for (std::size_t j = 0; j < p.num_outcomes(); ++j)
        for (std::size_t k = 0; k < q.num_outcomes(); ++k)
          joint.push_back(j == k ? p.element(j)
                                 : ComplexOperator::zero(p.element(j).signature()));
      CompatibilityVerdict v;
      v.compatible = true;
      v.joint_outcomes = product_outcome_labels(outcome_sets);
      v.joint_povm = Povm(v.joint_outcomes, std::move(joint));
      return v;
    }
  }

  // commuting POVMs: R_jk = P_j Q_k, verified before acceptance
  bool commuting = true;
  for (std::size_t j = 0; commuting && j < p.num_outcomes(); ++j)
    for (std::size_t k = 0; commuting && k < q.num_outcomes(); ++k)
      commuting = max_abs(Matrix(p.element(j).matrix() * q.element(k).matrix() -
                                 q.element(k).matrix() * p.element(j).matrix())) <= 1e-9;
  if (commuting) {
    std::vector<ComplexOperator> joint;
    bool ok = true;
    for (std::size_t j = 0; ok && j < p.num_outcomes(); ++j)
      for (std::size_t k = 0; ok && k < q.num_outcomes(); ++k) {
        ComplexOperator r(p.element(j).signature(),
                          p.element(j).matrix() * q.element(k).matrix());
        r = r.hermitized();
        ok = min_eigenvalue(r) >= -1e-9;
        joint.push_back(std::move(r));
      }
    if (ok) {
      for (std::size_t j = 0; ok && j < p.num_outcomes(); ++j) {
        ComplexOperator sum = ComplexOperator::zero(p.element(j).signature());
        for (std::size_t k = 0; k < q.num_outcomes(); ++k)
          sum = sum + joint[j * q.num_outcomes() + k];
        ok = max_abs_diff(sum, p.element(j)) <= 1e-9;
      }
      if (ok) {
        CompatibilityVerdict v;
        v.compatible = true;
        v.joint_outcomes = product_outcome_labels(outcome_sets);
        v.joint_povm = Povm(v.joint_outcomes, std::move(joint), 1e-8);
        return v;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

CompatibilityVerdict povm_compatibility(const std::vector<Povm>& povms,
                                        const sdp::SolveOptions& options, double decision_tol) {
  if (povms.size() < 2) throw Error("compatibility needs at least two POVMs");
  const int d = povms.front().dim();
  for (const auto& p : povms)
    if (p.dim() != d) throw DimensionError("POVMs act on different spaces");
  if (auto fast = povm_fast_paths(povms)) return *fast;
  return joint_feasibility(povms, options, decision_tol);
}

namespace {

// I (x) rho^(-1/2) restricted to the support (shrink) and its I (x) rho^(1/2)
// lift back (grow), in the descending eigenbasis of rho.
struct SupportMap {
  Matrix shrink;
  Matrix grow;
  int rank = 0;
};

SupportMap support_map(const ComplexOperator& rho, int d1, double support_tol) {
  const int d0 = rho.side();
  Spectrum spec = spectral_decompose(rho);
  SupportMap sm;
  while (sm.rank < d0 && spec.eigenvalues(sm.rank) > support_tol) ++sm.rank;
  if (sm.rank == 0)
    throw ValidationError(ValidationCode::NotPsd, "normalization state has empty support");
  Matrix kshrink(sm.rank, d0), kgrow(d0, sm.rank);
  for (int i = 0; i < sm.rank; ++i) {
    kshrink.row(i) = spec.eigenvectors.col(i).adjoint() / std::sqrt(spec.eigenvalues(i));
    kgrow.col(i) = spec.eigenvectors.col(i) * std::sqrt(spec.eigenvalues(i));
  }
  sm.shrink = Matrix::Zero(d1 * sm.rank, d1 * d0);
  sm.grow = Matrix::Zero(d1 * d0, d1 * sm.rank);
  for (int a = 0; a < d1; ++a) {
    sm.shrink.block(a * sm.rank, a * d0, sm.rank, d0) = kshrink;
    sm.grow.block(a * d0, a * sm.rank, d0, sm.rank) = kgrow;
  }
  return sm;
}

double normalization_spread(const std::vector<Tester>& testers) {
  double spread = 0.0;
  for (std::size_t i = 0; i + 1 < testers.size(); ++i)
    for (std::size_t j = i + 1; j < testers.size(); ++j)
      spread = std::max(spread, trace_norm(testers[i].normalization().op() -
                                           testers[j].normalization().op()));
  return spread;
}

ComplexOperator mean_normalization(const std::vector<Tester>& testers) {
  ComplexOperator sum = testers.front().normalization().op();
  for (std::size_t i = 1; i < testers.size(); ++i)
    sum = sum + testers[i].normalization().op();
  return (1.0 / static_cast<double>(testers.size())) * sum;
}

}  // namespace

CompatibilityVerdict tester_compatibility(const std::vector<Tester>& testers,
                                          const sdp::SolveOptions& options, double decision_tol,
                                          double norm_tol) {
  if (testers.size() < 2) throw Error("compatibility needs at least two testers");
  const auto sig = testers.front().element(0).signature();
  for (const auto& t : testers)
    if (!(t.element(0).signature() == sig)) throw DimensionError("tester signature mismatch");
  const int d1 = sig.factor(0);

  double spread = normalization_spread(testers);
  if (spread > norm_tol) {
    CompatibilityVerdict v;
    v.compatible = false;
    v.reason = IncompatibilityReason::NormalizationMismatch;
    v.normalization_distance = spread;
    v.certificate = "normalization states differ by " + std::to_string(spread) +
                    " in trace distance";
    return v;
  }

  ComplexOperator rho = mean_normalization(testers).hermitized();
  SupportMap sm = support_map(rho, d1, kSupportTol);
  std::vector<Povm> canon;
  canon.reserve(testers.size());
  for (const auto& t : testers) {
    std::vector<ComplexOperator> elems;
    for (const auto& tj : t.elements()) {
      Matrix p = sm.shrink * tj.matrix() * sm.shrink.adjoint();
      elems.emplace_back(DimSignature({d1, sm.rank}), 0.5 * (p + p.adjoint().eval()));
    }
    canon.emplace_back(t.outcomes(), std::move(elems), 1e-6);
  }
  CompatibilityVerdict v = povm_compatibility(canon, options, decision_tol);
  v.normalization_distance = spread;
  if (v.compatible && v.joint_povm) {
    std::vector<ComplexOperator> lifted;
    for (const auto& r : v.joint_povm->elements()) {
      Matrix c = sm.grow * r.matrix() * sm.grow.adjoint();
      lifted.emplace_back(sig, 0.5 * (c + c.adjoint().eval()));
    }
    v.joint_tester = validate_tester(std::move(lifted), v.joint_outcomes, 1e-6, 1e-5).first;
  }
  return v;
}

CompatibilityVerdict two_outcome_tester_compatibility(const Tester& a, const Tester& b,
                                                      const sdp::SolveOptions& options,
                                                      double decision_tol, double norm_tol) {
  if (a.num_outcomes() != 2 || b.num_outcomes() != 2)
    throw Error("two_outcome_tester_compatibility requires exactly two outcomes");
  if (!(a.element(0).signature() == b.element(0).signature()))
    throw DimensionError("tester signature mismatch");
  double dist = trace_norm(a.normalization().op() - b.normalization().op());
  CompatibilityVerdict v;
  v.normalization_distance = dist;
  v.joint_outcomes = product_outcome_labels({a.outcomes(), b.outcomes()});
  if (dist > norm_tol) {
    v.compatible = false;
    v.reason = IncompatibilityReason::NormalizationMismatch;
    v.certificate = "normalization states differ by " + std::to_string(dist) +
                    " in trace distance";
    return v;
  }
  const auto sig = a.element(0).signature();
  const int d = sig.total();
  const int d1 = sig.factor(0);
  ComplexOperator rho = (0.5 * (a.normalization().op() + b.normalization().op())).hermitized();
  const Matrix& a1 = a.element(0).matrix();
  const Matrix& b1 = b.element(0).matrix();
  Matrix irho = tensor(ComplexOperator::identity(DimSignature({d1})), rho).matrix();

  sdp::BlockField field = all_real({&a.element(0), &b.element(0), &rho})
                              ? sdp::BlockField::RealSymmetric
                              : sdp::BlockField::ComplexHermitian;
  sdp::SdpProblem prob;
  prob.add_block("C", d, field);
  auto bound = [&](const std::string& name, const Matrix& upper) {
    sdp::Constraint c;
    c.name = name;
    c.side = d;
    c.constant = upper;
    c.block_terms.push_back(sdp::on_block("C", -1.0));
    prob.add_constraint(std::move(c));
  };
  bound("CleqA1", a1);
  bound("CleqB1", b1);
  {
    sdp::Constraint c;
    c.name = "cover";
    c.side = d;
    c.constant = irho - a1 - b1;
    c.block_terms.push_back(sdp::on_block("C"));
    prob.add_constraint(std::move(c));
  }
  auto rep = sdp::feasibility(prob, options);
  if (rep.has_margin) v.margin = rep.margin;
  if (rep.has_margin ? rep.margin >= -decision_tol : rep.feasible) {
    v.compatible = true;
    Matrix c11 = rep.witness_blocks["C"];
    c11 = 0.5 * (c11 + c11.adjoint().eval());
    std::vector<ComplexOperator> joint;
    auto push = [&](const Matrix& m) {
      auto [pos, neg] = jordan_split(ComplexOperator(sig, 0.5 * (m + m.adjoint().eval())));
      joint.push_back(pos);
    };
    push(c11);
    push(a1 - c11);
    push(b1 - c11);
    push(irho + c11 - a1 - b1);
    v.joint_tester = validate_tester(std::move(joint), v.joint_outcomes, 1e-6, 1e-5).first;
  } else {
    v.compatible = false;
    v.reason = IncompatibilityReason::JointInfeasible;
    v.certificate = rep.certificate;
  }
  return v;
}

namespace {

bool pairwise_commuting(const std::vector<const ComplexOperator*>& ops, double tol) {
  for (std::size_t i = 0; i < ops.size(); ++i)
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      Matrix comm = ops[i]->matrix() * ops[j]->matrix() - ops[j]->matrix() * ops[i]->matrix();
      if (max_abs(comm) > tol) return false;
    }
  return true;
}

// Common eigenbasis candidate from a generic linear combination; a second
// weight family guards against accidental degeneracies of the first.
bool jointly_diagonalizable(const std::vector<const ComplexOperator*>& ops, double tol) {
  const int n = ops.front()->side();
  const double golden = 0.6180339887498949;
  for (double seed : {golden, std::sqrt(2.0) - 1.0}) {
    Matrix combo = Matrix::Zero(n, n);
    double w = seed;
    for (const auto* op : ops) {
      combo += w * op->matrix();
      w = std::fmod(w + seed, 1.0) + 0.5;
    }
    ComplexOperator generic(ops.front()->signature(), 0.5 * (combo + combo.adjoint().eval()));
    Spectrum s = spectral_decompose(generic);
    bool ok = true;
    for (const auto* op : ops) {
      Matrix rotated = s.eigenvectors.adjoint() * op->matrix() * s.eigenvectors;
      for (int i = 0; ok && i < n; ++i)
        for (int j = 0; ok && j < n; ++j)
          if (i != j && std::abs(rotated(i, j)) > tol) ok = false;
      if (!ok) break;
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace

StructuralFlags structural_predicates(const Tester& a, const Tester& b, double commute_tol,
                                      double diag_tol, double psd_tol) {
  if (!(a.element(0).signature() == b.element(0).signature()))
    throw DimensionError("tester signature mismatch");
  StructuralFlags f;
  f.commuting = true;
  f.orthogonal = true;
  for (const auto& aj : a.elements())
    for (const auto& bk : b.elements()) {
      Matrix prod = aj.matrix() * bk.matrix();
      Matrix comm = prod - bk.matrix() * aj.matrix();
      if (max_abs(comm) > commute_tol) f.commuting = false;
      if (max_abs(prod) > commute_tol) f.orthogonal = false;
    }
  std::vector<const ComplexOperator*> all;
  for (const auto& aj : a.elements()) all.push_back(&aj);
  for (const auto& bk : b.elements()) all.push_back(&bk);
  f.jointly_diagonal =
      pairwise_commuting(all, commute_tol) && jointly_diagonalizable(all, diag_tol);
  f.comparable = false;
  for (const auto& aj : a.elements()) {
    for (const auto& bk : b.elements()) {
      if (min_eigenvalue(bk - aj) >= -psd_tol || min_eigenvalue(aj - bk) >= -psd_tol) {
        f.comparable = true;
        break;
      }
    }
    if (f.comparable) break;
  }
  return f;
}

}  // namespace qtester
