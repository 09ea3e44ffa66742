#include "qtester/sdp.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "qtester/spectral.hpp"

namespace qtester::sdp {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

BlockTerm on_block(const std::string& block, double coeff) { return BlockTerm{block, coeff, {}}; }

BlockTerm kron_left(const std::string& block, int left_dim, int block_side, double coeff) {
  BlockTerm t{block, coeff, {}};
  for (int p = 0; p < left_dim; ++p) {
    Matrix l = Matrix::Zero(left_dim * block_side, block_side);
    l.block(p * block_side, 0, block_side, block_side) = Matrix::Identity(block_side, block_side);
    t.factors.emplace_back(l, l.adjoint());
  }
  return t;
}

BlockTerm kron_right(const std::string& block, int right_dim, int block_side, double coeff) {
  BlockTerm t{block, coeff, {}};
  for (int p = 0; p < right_dim; ++p) {
    Matrix l = Matrix::Zero(block_side * right_dim, block_side);
    for (int i = 0; i < block_side; ++i) l(i * right_dim + p, i) = 1.0;
    t.factors.emplace_back(l, l.adjoint());
  }
  return t;
}

BlockTerm sandwich(const std::string& block, const Matrix& l, double coeff) {
  BlockTerm t{block, coeff, {}};
  t.factors.emplace_back(l, l.adjoint().eval());
  return t;
}

namespace {

// ---------------------------------------------------------------------------
// Vectorization helpers.
//
// svec packs a real symmetric matrix so that dot products match traces:
// (X11, sqrt2 X12, X22, sqrt2 X13, ...). hvec does the same for complex
// Hermitian matrices with interleaved real/imaginary off-diagonal parts.
// ---------------------------------------------------------------------------

const double kSqrt2 = std::sqrt(2.0);

int svec_dim(int n) { return n * (n + 1) / 2; }
int hvec_dim(int n) { return n * n; }

void svec_write(const RealMatrix& x, RealVector& out, int offset) {
  int k = offset;
  for (int j = 0; j < x.cols(); ++j)
    for (int i = 0; i <= j; ++i)
      out(k++) = (i == j) ? x(j, j) : kSqrt2 * x(i, j);
}

RealMatrix smat(const RealVector& v, int offset, int n) {
  RealMatrix x(n, n);
  int k = offset;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      if (i == j)
        x(j, j) = v(k++);
      else {
        x(i, j) = v(k) / kSqrt2;
        x(j, i) = v(k) / kSqrt2;
        ++k;
      }
    }
  return x;
}

void hvec_write(const Matrix& x, RealVector& out, int offset) {
  int k = offset;
  for (int j = 0; j < x.cols(); ++j)
    for (int i = 0; i <= j; ++i) {
      if (i == j)
        out(k++) = x(j, j).real();
      else {
        out(k++) = kSqrt2 * x(i, j).real();
        out(k++) = kSqrt2 * x(i, j).imag();
      }
    }
}

Matrix hmat(const RealVector& v, int offset, int n) {
  Matrix x(n, n);
  int k = offset;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      if (i == j)
        x(j, j) = v(k++);
      else {
        double re = v(k++) / kSqrt2;
        double im = v(k++) / kSqrt2;
        x(i, j) = Complex(re, im);
        x(j, i) = Complex(re, -im);
      }
    }
  return x;
}

// Basis matrix dual to coordinate k of a block, so that the block equals
// sum_k coord_k * basis_k.
Matrix block_basis(BlockField field, int n, int k) {
  Matrix b = Matrix::Zero(n, n);
  int idx = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      if (field == BlockField::RealSymmetric) {
        if (idx == k) {
          if (i == j)
            b(j, j) = 1.0;
          else {
            b(i, j) = 1.0 / kSqrt2;
            b(j, i) = 1.0 / kSqrt2;
          }
          return b;
        }
        ++idx;
      } else {
        if (i == j) {
          if (idx == k) {
            b(j, j) = 1.0;
            return b;
          }
          ++idx;
        } else {
          if (idx == k) {
            b(i, j) = Complex(1.0 / kSqrt2, 0);
            b(j, i) = Complex(1.0 / kSqrt2, 0);
            return b;
          }
          ++idx;
          if (idx == k) {
            b(i, j) = Complex(0, 1.0 / kSqrt2);
            b(j, i) = Complex(0, -1.0 / kSqrt2);
            return b;
          }
          ++idx;
        }
      }
    }
  throw Error("block_basis: coordinate out of range");
}

Matrix apply_block_term(const BlockTerm& t, const Matrix& x) {
  if (t.factors.empty()) return t.coeff * x;
  Matrix out;
  bool first = true;
  for (const auto& [l, r] : t.factors) {
    Matrix piece = l * x * r;
    if (first) {
      out = std::move(piece);
      first = false;
    } else {
      out += piece;
    }
  }
  return t.coeff * out;
}

// ---------------------------------------------------------------------------
// Compiled real cone program:  min c'x  s.t.  A x = b,  G x + s = h,  s in K
// with K a product of PSD cones (1x1 blocks model nonnegative scalars).
// ---------------------------------------------------------------------------

struct ConeBlock {
  int side;
  int offset;  // into svec coordinates of the cone space
};

struct VarInfo {
  std::string name;
  bool is_block;
  int side = 0;
  BlockField field = BlockField::RealSymmetric;
  int offset = 0;
  int ncoords = 0;
  bool nonneg = false;  // scalars only
};

struct Compiled {
  int n = 0;
  RealVector c;
  RealMatrix G;
  RealVector h;
  RealMatrix A;
  RealVector b;
  std::vector<ConeBlock> cones;
  std::vector<VarInfo> vars;
  std::string error;  // set when the equalities are inconsistent
};

RealMatrix embed(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  RealMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = m.real();
  out.bottomRightCorner(n, n) = m.real();
  out.topRightCorner(n, n) = -m.imag();
  out.bottomLeftCorner(n, n) = m.imag();
  return 0.5 * (out + out.transpose().eval());
}

struct ConstraintImages {
  // Per variable coordinate (global index) the complex image matrix; plus
  // the constant. Realness decided over all of them.
  std::vector<std::pair<int, Matrix>> columns;
  Matrix constant;
  bool real = true;
  int side = 0;
};

ConstraintImages constraint_images(const SdpProblem& p, const Constraint& con,
                                   const std::vector<VarInfo>& vars,
                                   const std::map<std::string, int>& var_index) {
  ConstraintImages out;
  out.side = con.side;
  out.constant = con.constant.size() ? con.constant : Matrix::Zero(con.side, con.side);
  if (out.constant.rows() != con.side || out.constant.cols() != con.side)
    throw Error("constraint '" + con.name + "': constant has wrong side");
  if (max_abs(Matrix(out.constant - out.constant.adjoint())) > 1e-12)
    throw Error("constraint '" + con.name + "': constant is not Hermitian");
  auto scan = [&](const Matrix& img) {
    if (max_abs(Matrix(img - img.adjoint())) > 1e-10)
      throw Error("constraint '" + con.name + "': term image is not Hermitian");
    if (img.imag().cwiseAbs().maxCoeff() > 1e-13) out.real = false;
  };
  scan(out.constant);
  for (const auto& bt : con.block_terms) {
    auto it = var_index.find(bt.block);
    if (it == var_index.end() || !vars[it->second].is_block)
      throw Error("constraint '" + con.name + "': unknown block '" + bt.block + "'");
    const VarInfo& vi = vars[it->second];
    for (int k = 0; k < vi.ncoords; ++k) {
      Matrix basis = block_basis(vi.field, vi.side, k);
      Matrix img = apply_block_term(bt, basis);
      if (img.rows() != con.side)
        throw Error("constraint '" + con.name + "': block term side mismatch");
      scan(img);
      out.columns.emplace_back(vi.offset + k, std::move(img));
    }
  }
  for (const auto& st : con.scalar_terms) {
    auto it = var_index.find(st.scalar);
    if (it == var_index.end() || vars[it->second].is_block)
      throw Error("constraint '" + con.name + "': unknown scalar '" + st.scalar + "'");
    if (st.coeff_mat.rows() != con.side)
      throw Error("constraint '" + con.name + "': scalar term side mismatch");
    Matrix img = st.coeff_mat;
    scan(img);
    out.columns.emplace_back(vars[it->second].offset, std::move(img));
  }
  return out;
}

Compiled compile(const SdpProblem& p) {
  Compiled cp;
  std::map<std::string, int> var_index;
  for (const auto& blk : p.blocks()) {
    VarInfo vi;
    vi.name = blk.name;
    vi.is_block = true;
    vi.side = blk.side;
    vi.field = blk.field;
    vi.offset = cp.n;
    vi.ncoords =
        blk.field == BlockField::RealSymmetric ? svec_dim(blk.side) : hvec_dim(blk.side);
    cp.n += vi.ncoords;
    var_index[vi.name] = static_cast<int>(cp.vars.size());
    cp.vars.push_back(std::move(vi));
  }
  for (const auto& sc : p.scalars()) {
    VarInfo vi;
    vi.name = sc.name;
    vi.is_block = false;
    vi.offset = cp.n;
    vi.ncoords = 1;
    vi.nonneg = sc.nonneg;
    cp.n += 1;
    var_index[vi.name] = static_cast<int>(cp.vars.size());
    cp.vars.push_back(std::move(vi));
  }

  // Pass 1: sizes.
  std::vector<ConstraintImages> images;
  images.reserve(p.constraints().size());
  int cone_dim = 0, eq_rows = 0;
  for (const auto& vi : cp.vars) {
    if (vi.is_block) {
      int side = vi.field == BlockField::RealSymmetric ? vi.side : 2 * vi.side;
      cp.cones.push_back({side, cone_dim});
      cone_dim += svec_dim(side);
    } else if (vi.nonneg) {
      cp.cones.push_back({1, cone_dim});
      cone_dim += 1;
    }
  }
  std::vector<int> cone_row_of_constraint(p.constraints().size(), -1);
  std::vector<int> eq_row_of_constraint(p.constraints().size(), -1);
  for (std::size_t ci = 0; ci < p.constraints().size(); ++ci) {
    const auto& con = p.constraints()[ci];
    images.push_back(constraint_images(p, con, cp.vars, var_index));
    const auto& im = images.back();
    if (con.kind == ConstraintKind::Psd) {
      int side = im.real ? con.side : 2 * con.side;
      cone_row_of_constraint[ci] = cone_dim;
      cp.cones.push_back({side, cone_dim});
      cone_dim += svec_dim(side);
    } else {
      eq_row_of_constraint[ci] = eq_rows;
      eq_rows += im.real ? svec_dim(con.side) : hvec_dim(con.side);
    }
  }

  cp.G = RealMatrix::Zero(cone_dim, cp.n);
  cp.h = RealVector::Zero(cone_dim);
  cp.A = RealMatrix::Zero(eq_rows, cp.n);
  cp.b = RealVector::Zero(eq_rows);
  cp.c = RealVector::Zero(cp.n);

  // Cone rows for declared blocks and nonnegative scalars: s = variable.
  {
    std::size_t cone_i = 0;
    for (const auto& vi : cp.vars) {
      if (vi.is_block) {
        const ConeBlock& cb = cp.cones[cone_i++];
        for (int k = 0; k < vi.ncoords; ++k) {
          RealVector col = RealVector::Zero(svec_dim(cb.side));
          if (vi.field == BlockField::RealSymmetric) {
            svec_write(block_basis(vi.field, vi.side, k).real(), col, 0);
          } else {
            svec_write(embed(block_basis(vi.field, vi.side, k)), col, 0);
          }
          cp.G.block(cb.offset, vi.offset + k, col.size(), 1) = -col;
        }
      } else if (vi.nonneg) {
        const ConeBlock& cb = cp.cones[cone_i++];
        cp.G(cb.offset, vi.offset) = -1.0;
      }
    }
  }

  // Constraint rows.
  for (std::size_t ci = 0; ci < p.constraints().size(); ++ci) {
    const auto& con = p.constraints()[ci];
    const auto& im = images[ci];
    if (con.kind == ConstraintKind::Psd) {
      int row = cone_row_of_constraint[ci];
      int side = im.real ? con.side : 2 * con.side;
      int rows = svec_dim(side);
      RealVector tmp = RealVector::Zero(rows);
      if (im.real)
        svec_write(im.constant.real(), tmp, 0);
      else
        svec_write(embed(im.constant), tmp, 0);
      cp.h.segment(row, rows) = tmp;
      for (const auto& [col, img] : im.columns) {
        tmp.setZero();
        if (im.real)
          svec_write(img.real(), tmp, 0);
        else
          svec_write(embed(img), tmp, 0);
        cp.G.block(row, col, rows, 1) -= tmp;
      }
    } else {
      int row = eq_row_of_constraint[ci];
      int rows = im.real ? svec_dim(con.side) : hvec_dim(con.side);
      RealVector tmp = RealVector::Zero(rows);
      if (im.real)
        svec_write(im.constant.real(), tmp, 0);
      else
        hvec_write(im.constant, tmp, 0);
      cp.b.segment(row, rows) = -tmp;
      for (const auto& [col, img] : im.columns) {
        tmp.setZero();
        if (im.real)
          svec_write(img.real(), tmp, 0);
        else
          hvec_write(img, tmp, 0);
        cp.A.block(row, col, rows, 1) += tmp;
      }
    }
  }

  // Objective (maximize -> min of negative).
  for (const auto& [name, coeff] : p.objective_scalars()) {
    auto it = var_index.find(name);
    if (it == var_index.end() || cp.vars[it->second].is_block)
      throw Error("objective references unknown scalar '" + name + "'");
    cp.c(cp.vars[it->second].offset) = -coeff;
  }
  for (const auto& [name, k] : p.objective_blocks()) {
    auto it = var_index.find(name);
    if (it == var_index.end() || !cp.vars[it->second].is_block)
      throw Error("objective references unknown block '" + name + "'");
    const VarInfo& vi = cp.vars[it->second];
    RealVector coords = RealVector::Zero(vi.ncoords);
    if (vi.field == BlockField::RealSymmetric)
      svec_write(Matrix(0.5 * (k + k.adjoint())).real(), coords, 0);
    else
      hvec_write(0.5 * (k + k.adjoint()), coords, 0);
    cp.c.segment(vi.offset, vi.ncoords) -= coords;
  }

  // Free scalars must show up in some cone row, or H = G' W G turns singular.
  for (const auto& vi : cp.vars) {
    if (!vi.is_block && !vi.nonneg && cp.G.col(vi.offset).cwiseAbs().maxCoeff() == 0.0)
      throw Error("free scalar '" + vi.name + "' appears in no PSD constraint");
  }
  return cp;
}

// Deterministic Gaussian elimination dropping linearly dependent equality
// rows. An inconsistent dependent row makes the problem infeasible outright.
bool prune_rows(RealMatrix& a, RealVector& b, std::string& error) {
  const int p = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (p == 0) return true;
  RealMatrix work = a;
  RealVector rhs = b;
  std::vector<int> keep;
  std::vector<bool> used_pivot_col(n, false);
  const double scale = std::max(1.0, work.cwiseAbs().maxCoeff());
  for (int r = 0; r < p; ++r) {
    // Rows already reduced against the kept pivots; a vanished row is
    // dependent and must carry a consistent right-hand side.
    bool dependent = work.row(r).cwiseAbs().maxCoeff() <= 1e-10 * scale;
    if (dependent) {
      if (std::abs(rhs(r)) > 1e-8 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
        error = "equality constraints are inconsistent (residual " +
                std::to_string(std::abs(rhs(r))) + ")";
        return false;
      }
      continue;
    }
    // Find the largest pivot among unused columns.
    int best = -1;
    double bestv = 0;
    for (int c = 0; c < n; ++c)
      if (!used_pivot_col[c] && std::abs(work(r, c)) > bestv) {
        bestv = std::abs(work(r, c));
        best = c;
      }
    if (best < 0 || bestv <= 1e-10 * scale) {
      if (std::abs(rhs(r)) > 1e-8 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
        error = "equality constraints are inconsistent";
        return false;
      }
      continue;
    }
    used_pivot_col[best] = true;
    keep.push_back(r);
    for (int r2 = r + 1; r2 < p; ++r2) {
      double f = work(r2, best) / work(r, best);
      if (f == 0.0) continue;
      work.row(r2) -= f * work.row(r);
      rhs(r2) -= f * rhs(r);
    }
  }
  if (static_cast<int>(keep.size()) == p) return true;
  RealMatrix a2(keep.size(), n);
  RealVector b2(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    a2.row(static_cast<int>(i)) = a.row(keep[i]);
    b2(static_cast<int>(i)) = b(keep[i]);
  }
  a = std::move(a2);
  b = std::move(b2);
  return true;
}

// ---------------------------------------------------------------------------
// The interior-point core.
// ---------------------------------------------------------------------------

struct Scaling {
  // Per cone block: r, rinv with  r^-1 S r^-T = r^T Z r = diag(lambda).
  std::vector<RealMatrix> r, rinv;
  std::vector<RealVector> lambda;
};

RealVector cone_identity(const std::vector<ConeBlock>& cones, int dim) {
  RealVector e = RealVector::Zero(dim);
  for (const auto& cb : cones)
    for (int j = 0, k = cb.offset; j < cb.side; ++j) {
      e(k) = 1.0;
      k += j + 2;
    }
  return e;
}

double min_cone_eig(const std::vector<ConeBlock>& cones, const RealVector& v) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& cb : cones) {
    RealMatrix x = smat(v, cb.offset, cb.side);
    RealVector ev;
    RealMatrix vec;
    jacobi_eigensystem(x, ev, vec);
    m = std::min(m, ev(ev.size() - 1));
  }
  return m;
}

bool compute_scaling(const std::vector<ConeBlock>& cones, const RealVector& s,
                     const RealVector& z, Scaling& w) {
  const std::size_t nb = cones.size();
  w.r.resize(nb);
  w.rinv.resize(nb);
  w.lambda.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const ConeBlock& cb = cones[i];
    RealMatrix S = smat(s, cb.offset, cb.side);
    RealMatrix Z = smat(z, cb.offset, cb.side);
    RealVector ez;
    RealMatrix qz;
    jacobi_eigensystem(Z, ez, qz);
    if (ez(ez.size() - 1) <= 0) return false;
    RealVector ezh = ez.cwiseSqrt();
    RealMatrix zhalf = qz * ezh.asDiagonal() * qz.transpose();
    RealMatrix zihalf = qz * ezh.cwiseInverse().asDiagonal() * qz.transpose();
    RealMatrix M = zhalf * S * zhalf;
    M = 0.5 * (M + M.transpose().eval());
    RealVector em;
    RealMatrix qm;
    jacobi_eigensystem(M, em, qm);
    if (em(em.size() - 1) <= 0) return false;
    RealVector q4 = em.cwiseSqrt().cwiseSqrt();  // D^(1/4)
    w.r[i] = zihalf * qm * q4.asDiagonal();
    w.rinv[i] = q4.cwiseInverse().asDiagonal() * qm.transpose() * zhalf;
    w.lambda[i] = em.cwiseSqrt();
  }
  return true;
}

// Largest step alpha with lambda + alpha * d >= 0 in the scaled geometry.
double max_step_scaled(const RealVector& lambda, const RealMatrix& d) {
  RealVector li = lambda.cwiseSqrt().cwiseInverse();
  RealMatrix m = li.asDiagonal() * d * li.asDiagonal();
  m = 0.5 * (m + m.transpose().eval());
  RealVector ev;
  RealMatrix vec;
  jacobi_eigensystem(m, ev, vec);
  double mn = ev(ev.size() - 1);
  if (mn >= 0) return std::numeric_limits<double>::infinity();
  return -1.0 / mn;
}

struct IpmResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  RealVector x, y, z, s;
  double tau = 1, kappa = 1;
  double pres = 0, dres = 0, gap = 0;
  int iterations = 0;
  std::string message;
  double pcost = 0, dcost = 0;
};

IpmResult run_ipm(const Compiled& cp, const SolveOptions& opt) {
  IpmResult res;
  const int n = cp.n;
  const int p = static_cast<int>(cp.A.rows());
  const int cdim = static_cast<int>(cp.G.rows());
  const auto& cones = cp.cones;
  double deg = 0;
  for (const auto& cb : cones) deg += cb.side;

  const RealVector e = cone_identity(cones, cdim);

  // KKT machinery -----------------------------------------------------------
  Scaling W;
  Eigen::LLT<RealMatrix> lltH, lltM;
  RealMatrix HinvAt;

  auto phi_inv = [&](const RealVector& v) {
    RealVector out(cdim);
    for (std::size_t i = 0; i < cones.size(); ++i) {
      const ConeBlock& cb = cones[i];
      RealMatrix X = smat(v, cb.offset, cb.side);
      RealMatrix Y = W.rinv[i].transpose() * (W.rinv[i] * X * W.rinv[i].transpose()) * W.rinv[i];
      Y = 0.5 * (Y + Y.transpose().eval());
      svec_write(Y, out, cb.offset);
    }
    return out;
  };
  auto phi_identity = [&](const RealVector& v) { return v; };

  // LLT with escalating Tikhonov regularization: end-game scalings make the
  // Schur complement poorly conditioned while staying PD in exact arithmetic.
  auto robust_llt = [](Eigen::LLT<RealMatrix>& llt, RealMatrix m) -> bool {
    llt.compute(m);
    if (llt.info() == Eigen::Success) return true;
    double scale = std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
    for (double reg : {1e-13, 1e-11, 1e-9}) {
      RealMatrix shifted = m;
      shifted.diagonal().array() += reg * scale;
      llt.compute(shifted);
      if (llt.info() == Eigen::Success) return true;
    }
    return false;
  };

  auto factor_kkt = [&](bool identity_scaling) -> bool {
    RealMatrix K(cdim, n);
    for (int j = 0; j < n; ++j)
      K.col(j) = identity_scaling ? phi_identity(cp.G.col(j)) : phi_inv(cp.G.col(j));
    RealMatrix H = cp.G.transpose() * K;
    H = 0.5 * (H + H.transpose().eval());
    if (!robust_llt(lltH, std::move(H))) return false;
    if (p > 0) {
      HinvAt = lltH.solve(cp.A.transpose());
      RealMatrix M = cp.A * HinvAt;
      M = 0.5 * (M + M.transpose().eval());
      if (!robust_llt(lltM, std::move(M))) return false;
    }
    return true;
  };

  // Solves  A ux = q1,  G ux - g uz g = q2,  A'uy + G'uz = q3.
  auto kkt_once = [&](const RealVector& q1, const RealVector& q2, const RealVector& q3,
                      bool identity_scaling, RealVector& ux, RealVector& uy, RealVector& uz) {
    RealVector f = q3 + cp.G.transpose() * (identity_scaling ? q2 : phi_inv(q2));
    RealVector t1 = lltH.solve(f);
    if (p > 0) {
      uy = lltM.solve(cp.A * t1 - q1);
      ux = t1 - lltH.solve(cp.A.transpose() * uy);
    } else {
      uy = RealVector::Zero(0);
      ux = t1;
    }
    uz = identity_scaling ? RealVector(cp.G * ux - q2) : phi_inv(cp.G * ux - q2);
  };
  auto kkt_solve = [&](const RealVector& q1, const RealVector& q2, const RealVector& q3,
                       bool identity_scaling, RealVector& ux, RealVector& uy, RealVector& uz) {
    kkt_once(q1, q2, q3, identity_scaling, ux, uy, uz);
    // one round of iterative refinement
    RealVector gz(cdim);
    if (identity_scaling)
      gz = uz;
    else {
      for (std::size_t i = 0; i < cones.size(); ++i) {
        const ConeBlock& cb = cones[i];
        RealMatrix Zb = smat(uz, cb.offset, cb.side);
        RealMatrix g = W.r[i] * W.r[i].transpose();
        RealMatrix Y = g * Zb * g;
        Y = 0.5 * (Y + Y.transpose().eval());
        svec_write(Y, gz, cb.offset);
      }
    }
    RealVector r1 = q1 - (p > 0 ? RealVector(cp.A * ux) : RealVector::Zero(0));
    RealVector r2 = q2 - (cp.G * ux - gz);
    RealVector r3 = q3 - (cp.A.transpose() * uy + cp.G.transpose() * uz);
    RealVector cx, cy, cz;
    kkt_once(r1, r2, r3, identity_scaling, cx, cy, cz);
    ux += cx;
    if (p > 0) uy += cy;
    uz += cz;
  };

  // Starting point -----------------------------------------------------------
  RealVector x(n), y(p), z(cdim), s(cdim);
  if (!factor_kkt(true)) {
    res.message = "initial KKT factorization failed";
    return res;
  }
  {
    RealVector ux, uy, uz;
    kkt_solve(cp.b, cp.h, RealVector::Zero(n), true, ux, uy, uz);
    x = ux;
    s = -uz;
    double ms = min_cone_eig(cones, s);
    if (ms < 1e-8 * std::max(1.0, s.cwiseAbs().maxCoeff()))
      s += (1.0 - ms) * e;
    kkt_solve(RealVector::Zero(p), RealVector::Zero(cdim), -cp.c, true, ux, uy, uz);
    y = uy;
    z = uz;
    double mz = min_cone_eig(cones, z);
    if (mz < 1e-8 * std::max(1.0, z.cwiseAbs().maxCoeff()))
      z += (1.0 - mz) * e;
  }
  double tau = 1.0, kappa = 1.0;

  const double resx0 = std::max(1.0, std::sqrt(cp.b.squaredNorm() + cp.h.squaredNorm()));
  const double resy0 = std::max(1.0, cp.c.norm());

  RealVector dsa(cdim), dza(cdim);
  double dtaua = 0, dkappaa = 0;

  for (int iter = 0; iter <= opt.max_iters; ++iter) {
    // Residuals of the homogeneous system.
    RealVector rx = cp.A.transpose() * y + cp.G.transpose() * z + cp.c * tau;
    RealVector ry = (p > 0 ? RealVector(cp.A * x) : RealVector::Zero(0)) - cp.b * tau;
    RealVector rz = cp.G * x + s - cp.h * tau;
    double rt = cp.c.dot(x) + cp.b.dot(y) + cp.h.dot(z) + kappa;
    double gap = s.dot(z);
    double mu = (gap + tau * kappa) / (deg + 1.0);

    double pcost = cp.c.dot(x) / tau;
    double dcost = -(cp.b.dot(y) + cp.h.dot(z)) / tau;
    double pres = std::sqrt(ry.squaredNorm() + rz.squaredNorm()) / tau / resx0;
    double dres = rx.norm() / tau / resy0;
    double gap_n = gap / (tau * tau);
    double relgap = gap_n / std::max(1.0, std::abs(pcost));

    res.pres = pres;
    res.dres = dres;
    res.gap = gap_n;
    res.iterations = iter;
    res.pcost = pcost;
    res.dcost = dcost;

    if (opt.verbose) {
      std::ostringstream os;
      os << "iter " << iter << " pcost " << pcost << " dcost " << dcost << " gap " << gap_n
         << " pres " << pres << " dres " << dres << " tau " << tau << " kappa " << kappa;
      std::fprintf(stderr, "%s\n", os.str().c_str());
    }

    if (pres <= opt.feas_tol && dres <= opt.feas_tol &&
        (gap_n <= opt.gap_tol || relgap <= opt.gap_tol)) {
      res.status = SolveStatus::Optimal;
      res.x = x / tau;
      res.y = y / tau;
      res.z = z / tau;
      res.s = s / tau;
      res.tau = tau;
      res.kappa = kappa;
      return res;
    }
    // Primal infeasibility certificate: A'y + G'z = 0, b'y + h'z = -1, z in K*.
    double by_hz = cp.b.dot(y) + cp.h.dot(z);
    if (by_hz < 0) {
      double xi = -by_hz;
      double certres = (cp.A.transpose() * y + cp.G.transpose() * z).norm() / xi / resy0;
      if (certres <= opt.feas_tol) {
        res.status = SolveStatus::Infeasible;
        res.y = y / xi;
        res.z = z / xi;
        res.message = "primal infeasibility certificate found";
        return res;
      }
    }
    double ctx = cp.c.dot(x);
    if (ctx < 0) {
      double zeta = -ctx;
      double certres = std::sqrt((cp.A * x).squaredNorm() + (cp.G * x + s).squaredNorm()) /
                       zeta / resx0;
      if (certres <= opt.feas_tol) {
        res.status = SolveStatus::NumericalFailure;
        res.message = "objective unbounded (dual infeasibility certificate)";
        return res;
      }
    }
    if (iter == opt.max_iters) {
      res.message = "maximum iterations reached";
      return res;
    }

    if (!compute_scaling(cones, s, z, W)) {
      res.message = "iterate left the cone interior";
      return res;
    }
    if (!factor_kkt(false)) {
      res.message = "KKT factorization failed";
      return res;
    }

    RealVector x1, y1, z1;
    kkt_solve(cp.b, cp.h, -cp.c, false, x1, y1, z1);

    auto newton = [&](double sigma, bool corrector, RealVector& dx, RealVector& dy,
                      RealVector& dz, RealVector& ds, double& dtau, double& dkappa) -> bool {
      double fac = 1.0 - sigma;
      RealVector q1 = -fac * ry;
      RealVector q3 = -fac * rx;
      // d-tilde per block, then q2.
      RealVector rdtr(cdim);
      for (std::size_t i = 0; i < cones.size(); ++i) {
        const ConeBlock& cb = cones[i];
        const RealVector& lam = W.lambda[i];
        RealMatrix D;
        if (!corrector) {
          D = RealMatrix((-lam.array() * lam.array()).matrix().asDiagonal());
        } else {
          RealMatrix dsc =
              W.rinv[i] * smat(dsa, cb.offset, cb.side) * W.rinv[i].transpose();
          RealMatrix dzc = W.r[i].transpose() * smat(dza, cb.offset, cb.side) * W.r[i];
          RealMatrix corr = 0.5 * (dsc * dzc + dzc * dsc);
          D = RealMatrix((-lam.array() * lam.array()).matrix().asDiagonal()) - corr;
          D.diagonal().array() += sigma * mu;
        }
        // Jordan division by lambda.
        RealMatrix Dt(cb.side, cb.side);
        for (int a = 0; a < cb.side; ++a)
          for (int bcol = 0; bcol < cb.side; ++bcol)
            Dt(a, bcol) = 2.0 * D(a, bcol) / (lam(a) + lam(bcol));
        RealMatrix img = W.r[i] * Dt * W.r[i].transpose();
        img = 0.5 * (img + img.transpose().eval());
        svec_write(img, rdtr, cb.offset);
      }
      RealVector q2 = -fac * rz - rdtr;
      double dg = (corrector ? sigma * mu - tau * kappa - dtaua * dkappaa : -tau * kappa);

      RealVector x0, y0, z0;
      kkt_solve(q1, q2, q3, false, x0, y0, z0);
      double rhs4p = fac * rt + dg / tau;
      double denom = kappa / tau - (cp.c.dot(x1) + cp.b.dot(y1) + cp.h.dot(z1));
      if (std::abs(denom) < 1e-14) return false;
      dtau = (rhs4p + cp.c.dot(x0) + cp.b.dot(y0) + cp.h.dot(z0)) / denom;
      dx = x0 + dtau * x1;
      dy = y0 + dtau * y1;
      dz = z0 + dtau * z1;
      // ds = r dtilde r' - g dz g
      ds.resize(cdim);
      for (std::size_t i = 0; i < cones.size(); ++i) {
        const ConeBlock& cb = cones[i];
        RealMatrix g = W.r[i] * W.r[i].transpose();
        RealMatrix v = smat(rdtr, cb.offset, cb.side) - g * smat(dz, cb.offset, cb.side) * g;
        v = 0.5 * (v + v.transpose().eval());
        svec_write(v, ds, cb.offset);
      }
      dkappa = (dg - kappa * dtau) / tau;
      return true;
    };

    auto step_to_boundary = [&](const RealVector& ds, const RealVector& dz, double dtau,
                                double dkappa) {
      double a = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < cones.size(); ++i) {
        const ConeBlock& cb = cones[i];
        RealMatrix dsc = W.rinv[i] * smat(ds, cb.offset, cb.side) * W.rinv[i].transpose();
        RealMatrix dzc = W.r[i].transpose() * smat(dz, cb.offset, cb.side) * W.r[i];
        a = std::min(a, max_step_scaled(W.lambda[i], dsc));
        a = std::min(a, max_step_scaled(W.lambda[i], dzc));
      }
      if (dtau < 0) a = std::min(a, -tau / dtau);
      if (dkappa < 0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    RealVector dx, dy, dz, ds;
    double dtau, dkappa;
    if (!newton(0.0, false, dx, dy, dz, ds, dtau, dkappa)) {
      res.message = "singular Newton system";
      return res;
    }
    dsa = ds;
    dza = dz;
    dtaua = dtau;
    dkappaa = dkappa;
    double alpha_a = std::min(1.0, step_to_boundary(ds, dz, dtau, dkappa));
    double sigma = std::pow(1.0 - alpha_a, 3);
    sigma = std::min(1.0, std::max(0.0, sigma));

    if (!newton(sigma, true, dx, dy, dz, ds, dtau, dkappa)) {
      res.message = "singular Newton system";
      return res;
    }
    double alpha = std::min(1.0, opt.step * step_to_boundary(ds, dz, dtau, dkappa));
    if (!(alpha > 1e-13)) {
      res.message = "step size collapsed";
      return res;
    }
    x += alpha * dx;
    if (p > 0) y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
  }
  res.message = "maximum iterations reached";
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API.
// ---------------------------------------------------------------------------

void SdpProblem::add_block(const std::string& name, int side, BlockField field) {
  if (side < 1) throw Error("block side must be positive");
  if (has_block(name) || has_scalar(name)) throw Error("duplicate variable name '" + name + "'");
  blocks_.push_back({name, side, field});
}

void SdpProblem::add_scalar(const std::string& name, bool nonneg) {
  if (has_block(name) || has_scalar(name)) throw Error("duplicate variable name '" + name + "'");
  scalars_.push_back({name, nonneg});
}

void SdpProblem::add_constraint(Constraint c) {
  if (c.side < 1) throw Error("constraint side must be positive");
  constraints_.push_back(std::move(c));
}

void SdpProblem::maximize_scalar(const std::string& name, double coeff) {
  obj_scalars_[name] += coeff;
}

void SdpProblem::maximize_block_trace(const std::string& name, const Matrix& k) {
  auto it = obj_blocks_.find(name);
  if (it == obj_blocks_.end())
    obj_blocks_[name] = k;
  else
    it->second += k;
}

bool SdpProblem::has_block(const std::string& name) const {
  for (const auto& b : blocks_)
    if (b.name == name) return true;
  return false;
}

bool SdpProblem::has_scalar(const std::string& name) const {
  for (const auto& s : scalars_)
    if (s.name == name) return true;
  return false;
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string SdpProblem::dump_json() const {
  nlohmann::json j;
  for (const auto& b : blocks_)
    j["blocks"].push_back({{"name", b.name},
                           {"side", b.side},
                           {"field", b.field == BlockField::RealSymmetric ? "real-symmetric"
                                                                          : "complex-hermitian"}});
  for (const auto& s : scalars_)
    j["scalars"].push_back({{"name", s.name}, {"nonneg", s.nonneg}});
  for (const auto& c : constraints_) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["kind"] = c.kind == ConstraintKind::Psd ? "psd" : "zero";
    jc["side"] = c.side;
    if (c.constant.size()) jc["constant"] = matrix_json(c.constant);
    for (const auto& bt : c.block_terms) {
      nlohmann::json jt;
      jt["block"] = bt.block;
      jt["coeff"] = bt.coeff;
      jt["num_factors"] = bt.factors.size();
      jc["block_terms"].push_back(jt);
    }
    for (const auto& st : c.scalar_terms)
      jc["scalar_terms"].push_back({{"scalar", st.scalar}, {"coeff_mat", matrix_json(st.coeff_mat)}});
    j["constraints"].push_back(jc);
  }
  for (const auto& [name, coeff] : obj_scalars_)
    j["objective"]["scalars"].push_back({{"name", name}, {"coeff", coeff}});
  return j.dump(2);
}

SdpSolution solve(const SdpProblem& p, const SolveOptions& options) {
  Compiled cp = compile(p);
  SdpSolution sol;
  std::string prune_error;
  if (!prune_rows(cp.A, cp.b, prune_error)) {
    sol.status = SolveStatus::Infeasible;
    sol.message = prune_error;
    return sol;
  }
  IpmResult r = run_ipm(cp, options);
  sol.status = r.status;
  sol.iterations = r.iterations;
  sol.message = r.message;
  sol.primal_residual = r.pres;
  sol.dual_residual = r.dres;
  sol.duality_gap = r.gap;
  if (r.status == SolveStatus::Optimal) {
    sol.objective_value = -r.pcost;
    sol.dual_bound = -r.dcost;
    for (const auto& vi : cp.vars) {
      if (vi.is_block) {
        if (vi.field == BlockField::RealSymmetric)
          sol.block_values[vi.name] =
              smat(RealVector(r.x.segment(vi.offset, vi.ncoords)), 0, vi.side).cast<Complex>();
        else
          sol.block_values[vi.name] =
              hmat(RealVector(r.x.segment(vi.offset, vi.ncoords)), 0, vi.side);
      } else {
        sol.scalar_values[vi.name] = r.x(vi.offset);
      }
    }
  }
  return sol;
}

FeasibilityReport feasibility(const SdpProblem& p, const SolveOptions& options,
                              double margin_cap) {
  // Substitute B -> B' + t I for every block and expr -> expr - t I for every
  // PSD constraint; maximize the common slack t.
  SdpProblem q;
  const std::string margin = "__feas_margin";
  for (const auto& b : p.blocks()) q.add_block(b.name, b.side, b.field);
  for (const auto& s : p.scalars()) q.add_scalar(s.name, s.nonneg);
  q.add_scalar(margin, /*nonneg=*/false);
  for (const auto& con : p.constraints()) {
    Constraint c = con;
    double shift = (con.kind == ConstraintKind::Psd) ? -1.0 : 0.0;
    // Blocks appearing in the constraint contribute map(I) * t.
    for (const auto& bt : con.block_terms) {
      int side = 0;
      for (const auto& b : p.blocks())
        if (b.name == bt.block) side = b.side;
      Matrix img = apply_block_term(bt, Matrix::Identity(side, side));
      c.scalar_terms.push_back({margin, img});
    }
    if (shift != 0.0)
      c.scalar_terms.push_back({margin, shift * Matrix::Identity(con.side, con.side)});
    q.add_constraint(std::move(c));
  }
  {
    Constraint cap;
    cap.name = "__margin_cap";
    cap.kind = ConstraintKind::Psd;
    cap.side = 1;
    cap.constant = Matrix::Constant(1, 1, margin_cap);
    cap.scalar_terms.push_back({margin, -Matrix::Identity(1, 1)});
    q.add_constraint(std::move(cap));
  }
  q.maximize_scalar(margin);

  SdpSolution sol = solve(q, options);
  FeasibilityReport rep;
  if (sol.status == SolveStatus::Infeasible) {
    rep.feasible = false;
    rep.certificate = sol.message.empty() ? "infeasibility certificate" : sol.message;
    return rep;
  }
  if (sol.status != SolveStatus::Optimal) {
    rep.feasible = false;
    rep.certificate = "solver failure: " + sol.message;
    return rep;
  }
  rep.margin = sol.objective_value;
  rep.has_margin = true;
  rep.feasible = rep.margin >= -options.feas_tol;
  double t = sol.scalar_values[margin];
  for (const auto& b : p.blocks()) {
    Matrix v = sol.block_values[b.name];
    v += t * Matrix::Identity(b.side, b.side);
    rep.witness_blocks[b.name] = v;
  }
  for (const auto& s : p.scalars()) rep.witness_scalars[s.name] = sol.scalar_values[s.name];
  if (!rep.feasible)
    rep.certificate = "maximum joint slack " + std::to_string(rep.margin) + " below tolerance";
  return rep;
}

RealMatrix embed_complex(const Matrix& m, double herm_tol) {
  if (m.rows() != m.cols()) throw DimensionError("embed_complex: matrix must be square");
  if (max_abs(Matrix(m - m.adjoint())) > herm_tol)
    throw Error("embed_complex: input is not Hermitian");
  return embed(m);
}

}  // namespace qtester::sdp
