#ifndef TENSORALT_SDP_HPP
#define TENSORALT_SDP_HPP

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace tensoralt {

/// Block-diagonal symmetric matrix; size-1 blocks model nonnegative scalars.
class BlockMatrix {
 public:
  BlockMatrix() = default;
  explicit BlockMatrix(const std::vector<int>& sizes) {
    blocks_.reserve(sizes.size());
    for (int s : sizes) {
      if (s < 1) throw std::invalid_argument("BlockMatrix: block size must be >= 1");
      blocks_.emplace_back(Eigen::MatrixXd::Zero(s, s));
    }
  }

  static BlockMatrix identity(const std::vector<int>& sizes, double scale = 1.0) {
    BlockMatrix b(sizes);
    for (auto& blk : b.blocks_) blk.setIdentity();
    if (scale != 1.0) b.scale_in_place(scale);
    return b;
  }

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  Eigen::MatrixXd& block(int i) { return blocks_[i]; }
  const Eigen::MatrixXd& block(int i) const { return blocks_[i]; }

  int total_dim() const {
    int d = 0;
    for (const auto& b : blocks_) d += static_cast<int>(b.rows());
    return d;
  }

  double dot(const BlockMatrix& o) const {
    double s = 0.0;
    for (int i = 0; i < num_blocks(); ++i) s += blocks_[i].cwiseProduct(o.blocks_[i]).sum();
    return s;
  }

  double frobenius_norm() const { return std::sqrt(dot(*this)); }

  void axpy(double a, const BlockMatrix& o) {
    for (int i = 0; i < num_blocks(); ++i) blocks_[i] += a * o.blocks_[i];
  }

  void scale_in_place(double s) {
    for (auto& b : blocks_) b *= s;
  }

  void symmetrize() {
    for (auto& b : blocks_) b = 0.5 * (b + b.transpose()).eval();
  }

  double min_eigenvalue() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& b : blocks_) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
  }

 private:
  std::vector<Eigen::MatrixXd> blocks_;
};

/// max <C,X>  s.t.  <A_k,X> = b_k,  X positive semidefinite per block.
struct SdpProblem {
  std::vector<int> block_sizes;
  BlockMatrix objective;                  // C
  std::vector<BlockMatrix> constraints;   // A_k
  std::vector<double> rhs;                // b_k

  void validate() const {
    if (block_sizes.empty()) throw std::invalid_argument("SdpProblem: no blocks");
    if (constraints.empty()) throw std::invalid_argument("SdpProblem: no constraints");
    if (constraints.size() != rhs.size())
      throw std::invalid_argument("SdpProblem: constraint/rhs count mismatch");
    for (double v : rhs)
      if (!std::isfinite(v)) throw std::invalid_argument("SdpProblem: rhs not finite");
  }
};

enum class SdpStatus {
  Optimal,
  PrimalInfeasibleLikely,
  DualInfeasibleLikely,
  MaxIterations,
  NumericalTrouble
};

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::PrimalInfeasibleLikely: return "PrimalInfeasibleLikely";
    case SdpStatus::DualInfeasibleLikely: return "DualInfeasibleLikely";
    case SdpStatus::MaxIterations: return "MaxIterations";
    case SdpStatus::NumericalTrouble: return "NumericalTrouble";
  }
  return "?";
}

struct SdpSolution {
  BlockMatrix x;               // primal
  std::vector<double> y;       // dual multipliers
  BlockMatrix s;               // dual slack
  SdpStatus status = SdpStatus::NumericalTrouble;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;  // ||A(X)-b|| / (1+||b||)
  double dual_residual = 0.0;    // ||sum y A - S - C||_F / (1+||C||_F)
  double gap_residual = 0.0;     // |b.y - <C,X>| / (1+|b.y|+|<C,X>|)
  int iterations = 0;
};

struct SdpSettings {
  double tol = 1e-8;
  int max_iter = 200;
  double fraction_to_boundary = 0.98;
  // Mehrotra-style predictor-corrector (deterministic). Without it the plain
  // fixed-centering iteration stalls on degenerate instances.
  bool predictor_corrector = true;
  double sigma = 0.3;  // centering parameter when the corrector is disabled
};

namespace detail {

// Largest step t with M + t*D staying positive definite, via the Cholesky
// factor of M: t = -1/lambda_min(L^-1 D L^-T) when that eigenvalue is negative.
inline double max_step(const BlockMatrix& m, const BlockMatrix& d) {
  double step = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.num_blocks(); ++i) {
    Eigen::LLT<Eigen::MatrixXd> llt(m.block(i));
    Eigen::MatrixXd w;
    if (llt.info() == Eigen::Success) {
      const Eigen::MatrixXd& l = llt.matrixL();
      w = l.triangularView<Eigen::Lower>().solve(d.block(i));
      w = l.triangularView<Eigen::Lower>().solve(w.transpose().eval());
    } else {
      // Fallback for a nearly singular iterate: eigen-based pseudo-factor.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.block(i));
      Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-300);
      Eigen::MatrixXd isq =
          es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
      w = isq * d.block(i) * isq;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (w + w.transpose()),
                                                      Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    if (lo < -1e-14) step = std::min(step, -1.0 / lo);
  }
  return step;
}

}  // namespace detail

/// Dense primal-dual path-following interior-point solve (HKM direction,
/// fraction-to-boundary step). Deterministic: no randomized pivoting, fixed
/// centering, single-threaded.
inline SdpSolution solve(const SdpProblem& p, const SdpSettings& settings = {}) {
  p.validate();
  const int ncon = static_cast<int>(p.constraints.size());
  const int ntot = [&] {
    int t = 0;
    for (int s : p.block_sizes) t += s;
    return t;
  }();

  double bmax = 0.0, anorm = 0.0;
  for (double v : p.rhs) bmax = std::max(bmax, std::abs(v));
  for (const auto& a : p.constraints) anorm = std::max(anorm, a.frobenius_norm());
  const double eta = 1.0 + bmax + anorm;

  SdpSolution sol;
  sol.x = BlockMatrix::identity(p.block_sizes, eta);
  sol.s = BlockMatrix::identity(p.block_sizes, eta);
  sol.y.assign(ncon, 0.0);

  const double bnorm = [&] {
    double t = 0.0;
    for (double v : p.rhs) t += v * v;
    return std::sqrt(t);
  }();
  const double cnorm = p.objective.frobenius_norm();

  Eigen::VectorXd b(ncon);
  for (int k = 0; k < ncon; ++k) b[k] = p.rhs[k];

  int stall = 0;
  for (int iter = 0; iter <= settings.max_iter; ++iter) {
    sol.iterations = iter;

    // Residuals.
    Eigen::VectorXd rp(ncon);
    for (int k = 0; k < ncon; ++k) rp[k] = p.rhs[k] - p.constraints[k].dot(sol.x);
    BlockMatrix rd = p.objective;  // C + S - sum y A
    rd.axpy(1.0, sol.s);
    for (int k = 0; k < ncon; ++k) rd.axpy(-sol.y[k], p.constraints[k]);

    const double pobj = p.objective.dot(sol.x);
    double dobj = 0.0;
    for (int k = 0; k < ncon; ++k) dobj += sol.y[k] * p.rhs[k];
    sol.primal_objective = pobj;
    sol.dual_objective = dobj;
    sol.primal_residual = rp.norm() / (1.0 + bnorm);
    sol.dual_residual = rd.frobenius_norm() / (1.0 + cnorm);
    sol.gap_residual = std::abs(dobj - pobj) / (1.0 + std::abs(dobj) + std::abs(pobj));

    if (sol.primal_residual <= settings.tol && sol.dual_residual <= settings.tol &&
        sol.gap_residual <= settings.tol) {
      sol.status = SdpStatus::Optimal;
      return sol;
    }

    // Divergence heuristics; callers are designed to avoid relying on these.
    double ynorm = 0.0;
    for (double v : sol.y) ynorm = std::max(ynorm, std::abs(v));
    if (ynorm > 1e9 * eta && sol.dual_residual < 1e-6 && dobj < -1e6 * eta) {
      sol.status = SdpStatus::PrimalInfeasibleLikely;
      return sol;
    }
    if (sol.x.frobenius_norm() > 1e10 * eta && pobj > 1e8 * eta) {
      sol.status = SdpStatus::DualInfeasibleLikely;
      return sol;
    }
    if (iter == settings.max_iter) break;

    const double mu = sol.x.dot(sol.s) / ntot;
    const double nu = settings.sigma * mu;

    // Per-block S^{-1} (S here is the dual slack Z of the algorithm). A tiny
    // ridge retries a factorization that fails from endgame roundoff.
    BlockMatrix sinv(p.block_sizes);
    bool ok = true;
    for (int i = 0; i < sinv.num_blocks(); ++i) {
      const auto& blk = sol.s.block(i);
      Eigen::LLT<Eigen::MatrixXd> llt(blk);
      if (llt.info() != Eigen::Success) {
        const double ridge = 1e3 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, blk.cwiseAbs().maxCoeff());
        llt.compute(blk + ridge * Eigen::MatrixXd::Identity(blk.rows(), blk.cols()));
        if (llt.info() != Eigen::Success) {
          ok = false;
          break;
        }
      }
      sinv.block(i) = llt.solve(Eigen::MatrixXd::Identity(blk.rows(), blk.cols()));
    }
    if (!ok) {
      sol.status = SdpStatus::NumericalTrouble;
      return sol;
    }

    // Schur complement M_ij = tr(A_i X A_j S^{-1}).
    std::vector<BlockMatrix> w(ncon, BlockMatrix(p.block_sizes));
    for (int j = 0; j < ncon; ++j)
      for (int i = 0; i < sinv.num_blocks(); ++i)
        w[j].block(i) = sol.x.block(i) * p.constraints[j].block(i) * sinv.block(i);

    Eigen::MatrixXd schur(ncon, ncon);
    for (int i = 0; i < ncon; ++i)
      for (int j = 0; j < ncon; ++j) schur(i, j) = p.constraints[i].dot(w[j]);
    schur = 0.5 * (schur + schur.transpose()).eval();

    Eigen::LLT<Eigen::MatrixXd> mllt(schur);
    Eigen::LDLT<Eigen::MatrixXd> mldlt;
    int factor_kind = 0;  // 0 llt, 1 ldlt, 2 ridged llt
    if (mllt.info() != Eigen::Success) {
      mldlt.compute(schur);
      factor_kind = 1;
      if (mldlt.info() != Eigen::Success) {
        const double ridge = 1e3 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
        mllt.compute(schur + ridge * Eigen::MatrixXd::Identity(ncon, ncon));
        factor_kind = 2;
        if (mllt.info() != Eigen::Success) {
          sol.status = SdpStatus::NumericalTrouble;
          return sol;
        }
      }
    }
    auto schur_solve = [&](const Eigen::VectorXd& r) {
      Eigen::VectorXd v = factor_kind == 1 ? mldlt.solve(r).eval() : mllt.solve(r).eval();
      // One pass of iterative refinement; the Schur system turns badly
      // conditioned near the optimum.
      Eigen::VectorXd resid = r - schur * v;
      v += factor_kind == 1 ? mldlt.solve(resid).eval() : mllt.solve(resid).eval();
      return v;
    };

    BlockMatrix xrdsinv(p.block_sizes);
    for (int i = 0; i < sinv.num_blocks(); ++i)
      xrdsinv.block(i) = sol.x.block(i) * rd.block(i) * sinv.block(i);

    // Newton direction for a given complementarity target; the optional
    // second-order term carries the predictor's dX dS S^{-1}.
    auto newton_direction = [&](double target, const BlockMatrix* second_order) {
      Eigen::VectorXd r(ncon);
      for (int k = 0; k < ncon; ++k) {
        r[k] = target * p.constraints[k].dot(sinv) - p.rhs[k] + p.constraints[k].dot(xrdsinv);
        if (second_order) r[k] -= p.constraints[k].dot(*second_order);
      }
      Eigen::VectorXd dyv = schur_solve(r);
      BlockMatrix dsv = rd;
      dsv.scale_in_place(-1.0);
      for (int k = 0; k < ncon; ++k) dsv.axpy(dyv[k], p.constraints[k]);
      BlockMatrix dxv(p.block_sizes);
      for (int i = 0; i < dxv.num_blocks(); ++i) {
        dxv.block(i) = target * sinv.block(i) - sol.x.block(i) -
                       sol.x.block(i) * dsv.block(i) * sinv.block(i);
        if (second_order) dxv.block(i) -= second_order->block(i);
      }
      dxv.symmetrize();
      return std::tuple<BlockMatrix, BlockMatrix, Eigen::VectorXd>(std::move(dxv), std::move(dsv),
                                                                   std::move(dyv));
    };

    BlockMatrix dx(p.block_sizes), ds(p.block_sizes);
    Eigen::VectorXd dy;
    if (settings.predictor_corrector) {
      auto [dxa, dsa, dya] = newton_direction(0.0, nullptr);
      const double apa = std::min(1.0, detail::max_step(sol.x, dxa));
      const double ada = std::min(1.0, detail::max_step(sol.s, dsa));
      BlockMatrix xa = sol.x;
      xa.axpy(apa, dxa);
      BlockMatrix sa = sol.s;
      sa.axpy(ada, dsa);
      const double gap_aff = std::max(xa.dot(sa), 0.0);
      const double sigma =
          std::clamp(std::pow(gap_aff / sol.x.dot(sol.s), 3.0), 1e-4, 1.0);
      BlockMatrix second(p.block_sizes);
      for (int i = 0; i < second.num_blocks(); ++i)
        second.block(i) = dxa.block(i) * dsa.block(i) * sinv.block(i);
      std::tie(dx, ds, dy) = newton_direction(sigma * mu, &second);
    } else {
      std::tie(dx, ds, dy) = newton_direction(nu, nullptr);
    }

    double ap = std::min(1.0, settings.fraction_to_boundary * detail::max_step(sol.x, dx));
    double ad = std::min(1.0, settings.fraction_to_boundary * detail::max_step(sol.s, ds));

    if (std::min(ap, ad) < 0.1) {
      // Recenter: a plain step aimed at the current mu often unblocks the
      // iteration when the corrected direction is boundary-limited.
      auto [dxc, dsc, dyc] = newton_direction(mu, nullptr);
      const double apc = std::min(1.0, settings.fraction_to_boundary * detail::max_step(sol.x, dxc));
      const double adc = std::min(1.0, settings.fraction_to_boundary * detail::max_step(sol.s, dsc));
      if (std::min(apc, adc) > std::min(ap, ad)) {
        dx = std::move(dxc);
        ds = std::move(dsc);
        dy = std::move(dyc);
        ap = apc;
        ad = adc;
      }
    }

    // Keep the iterate factorizable: back off if rounding pushed a block to
    // the boundary.
    for (int attempt = 0; attempt < 6; ++attempt) {
      BlockMatrix xn = sol.x;
      xn.axpy(ap, dx);
      bool pd = true;
      for (int i = 0; i < xn.num_blocks() && pd; ++i)
        pd = Eigen::LLT<Eigen::MatrixXd>(xn.block(i)).info() == Eigen::Success;
      if (pd) break;
      ap *= 0.5;
    }
    for (int attempt = 0; attempt < 6; ++attempt) {
      BlockMatrix sn = sol.s;
      sn.axpy(ad, ds);
      bool pd = true;
      for (int i = 0; i < sn.num_blocks() && pd; ++i)
        pd = Eigen::LLT<Eigen::MatrixXd>(sn.block(i)).info() == Eigen::Success;
      if (pd) break;
      ad *= 0.5;
    }

    sol.x.axpy(ap, dx);
    sol.s.axpy(ad, ds);
    for (int k = 0; k < ncon; ++k) sol.y[k] += ad * dy[k];

    if (ap < 1e-4 && ad < 1e-4) {
      if (++stall >= 8) {
        sol.status = SdpStatus::NumericalTrouble;
        return sol;
      }
    } else {
      stall = 0;
    }
  }

  sol.status = SdpStatus::MaxIterations;
  return sol;
}

/// Plain-text dump of (C, A_k, b) for cross-checking against external
/// solvers. Format: '%' comment lines; a "blocks" line with the block sizes;
/// then one section per matrix, each block row-major.
inline void dump_problem(const SdpProblem& p, std::ostream& os) {
  os << "% tensoralt sdp dump\n";
  os << "% max <C,X> s.t. <A_k,X> = b_k, X >= 0 (block diagonal)\n";
  os << "blocks";
  for (int s : p.block_sizes) os << ' ' << s;
  os << '\n';
  auto write_block_matrix = [&os](const BlockMatrix& m) {
    for (int i = 0; i < m.num_blocks(); ++i) {
      const auto& blk = m.block(i);
      os << "% block " << i << " (" << blk.rows() << "x" << blk.cols() << ")\n";
      for (int r = 0; r < blk.rows(); ++r) {
        for (int c = 0; c < blk.cols(); ++c) {
          if (c) os << ' ';
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.17g", blk(r, c));
          os << buf;
        }
        os << '\n';
      }
    }
  };
  os << "objective\n";
  write_block_matrix(p.objective);
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", p.rhs[k]);
    os << "constraint " << k << " rhs " << buf << '\n';
    write_block_matrix(p.constraints[k]);
  }
}

inline void dump_problem(const SdpProblem& p, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dump_problem: cannot open " + path);
  dump_problem(p, os);
}

}  // namespace tensoralt

#endif  // TENSORALT_SDP_HPP
