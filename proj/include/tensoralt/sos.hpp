#ifndef TENSORALT_SOS_HPP
#define TENSORALT_SOS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tensoralt/multiindex.hpp"
#include "tensoralt/poly.hpp"
#include "tensoralt/sdp.hpp"

namespace tensoralt {

/// Monomial basis indexing a Gram matrix: degree exactly m/2 for homogeneous
/// targets, degree <= m/2 otherwise, in grlex order.
struct GramBasis {
  int n = 0;
  int m = 0;
  bool homogeneous = false;
  std::vector<Exponent> monomials;
  std::map<Exponent, int, GrlexLess> index;

  int size() const { return static_cast<int>(monomials.size()); }

  static GramBasis build(int n, int m, bool homogeneous) {
    if (m <= 0 || m % 2 != 0) throw std::invalid_argument("GramBasis: m must be even");
    GramBasis b;
    b.n = n;
    b.m = m;
    b.homogeneous = homogeneous;
    b.monomials =
        enumerate_monomials(n, m / 2, homogeneous ? EnumMode::Exact : EnumMode::UpTo);
    for (int i = 0; i < b.size(); ++i) b.index.emplace(b.monomials[i], i);
    return b;
  }
};

inline GramBasis gram_basis(int n, int m, bool homogeneous) {
  return GramBasis::build(n, m, homogeneous);
}

/// Explicit sum-of-squares witness: a PSD Gram matrix over `basis` together
/// with the squares it factors into. `residual` is the max coefficient error
/// of sum(squares^2) against the certified polynomial.
struct SosCertificate {
  GramBasis basis;
  Eigen::MatrixXd gram;
  std::vector<Polynomial> squares;
  double residual = 0.0;
};

/// Dual multipliers of the coefficient-matching constraints, one per exponent.
struct MomentVector {
  GramBasis basis;
  std::map<Exponent, double, GrlexLess> y;

  double value(const Exponent& a) const {
    auto it = y.find(a);
    return it == y.end() ? 0.0 : it->second;
  }

  double y0() const {
    return basis.n > 0 ? value(Exponent::zero(basis.n)) : 0.0;
  }

  /// M(y)_{ij} = y_{beta_i + beta_j}.
  Eigen::MatrixXd moment_matrix() const {
    const int nb = basis.size();
    Eigen::MatrixXd mm(nb, nb);
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j) mm(i, j) = value(basis.monomials[i] + basis.monomials[j]);
    return mm;
  }

  /// <y, f> = sum_alpha y_alpha f_alpha.
  double pairing(const Polynomial& f) const {
    double s = 0.0;
    for (const auto& [a, c] : f.terms()) s += value(a) * c;
    return s;
  }
};

/// Eigendecomposition of a (near-)PSD Gram matrix into explicit squares:
/// Q = sum w_j v_j v_j^T and g_j = sqrt(w_j) * (v_j . basis). Eigenvalues in
/// [-1e-5, 0) are clamped to zero; anything below rejects the matrix.
inline std::vector<Polynomial> extract_decomposition(const Eigen::MatrixXd& gram,
                                                     const GramBasis& basis,
                                                     double clamp_limit = 1e-5) {
  if (gram.rows() != basis.size() || gram.cols() != basis.size())
    throw std::invalid_argument("extract_decomposition: gram/basis size mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gram + gram.transpose()));
  const Eigen::VectorXd& w = es.eigenvalues();
  if (w.size() > 0 && w.minCoeff() < -clamp_limit)
    throw std::domain_error("extract_decomposition: gram matrix not PSD (min eigenvalue " +
                            std::to_string(w.minCoeff()) + ")");
  const double wmax = w.size() > 0 ? std::max(w.maxCoeff(), 0.0) : 0.0;
  std::vector<Polynomial> squares;
  // Largest eigenvalue first.
  for (int j = static_cast<int>(w.size()) - 1; j >= 0; --j) {
    const double wj = w[j];
    if (wj <= 1e-14 * std::max(1.0, wmax)) continue;
    const double scale = std::sqrt(wj);
    Polynomial g(basis.n);
    for (int k = 0; k < basis.size(); ++k) {
      const double c = scale * es.eigenvectors()(k, j);
      if (c != 0.0) g.add_term(basis.monomials[k], c);
    }
    squares.push_back(std::move(g));
  }
  return squares;
}

inline Polynomial sum_of_squares_poly(const std::vector<Polynomial>& squares, int n) {
  Polynomial s(n);
  for (const Polynomial& g : squares) s += g * g;
  return s;
}

/// Max coefficient error between target and sum(squares^2).
inline double reconstruction_residual(const Polynomial& target,
                                      const std::vector<Polynomial>& squares) {
  Polynomial diff = sum_of_squares_poly(squares, target.dim()) - target;
  return diff.max_abs_coeff();
}

// ---------------------------------------------------------------------------
// Generic SOS program: find Q >= 0 over a Gram basis and theta in R^q with
//     gram_sum_alpha(Q) = base_alpha + sum_j theta_j * piece_j_alpha
// for every alpha in the matching support, subject to optional linear
// equalities on theta, maximizing a linear functional of theta.
// ---------------------------------------------------------------------------

struct SosTheta {
  std::string name;
  Polynomial piece;
  bool nonneg = true;
  double objective = 0.0;
};

struct SosProgram {
  int n = 0;
  int m = 0;
  bool homogeneous = false;
  Polynomial base;
  std::vector<SosTheta> thetas;
  // Rows a.theta = rhs.
  std::vector<std::pair<std::vector<double>, double>> linear_eqs;
};

class AssembledSosProgram {
 public:
  explicit AssembledSosProgram(const SosProgram& prog) : prog_(prog) {
    basis_ = GramBasis::build(prog.n, prog.m, prog.homogeneous);
    build_rows();
    eliminate_free_thetas();
    build_sdp();
  }

  const SdpProblem& sdp() const { return sdp_; }
  const GramBasis& basis() const { return basis_; }

  struct Solved {
    SdpStatus status = SdpStatus::NumericalTrouble;
    double objective = 0.0;  // includes constants folded in by elimination
    Eigen::MatrixXd gram;
    std::vector<double> theta;
    MomentVector moments;
    std::vector<double> linear_eq_duals;
    SdpSolution raw;
  };

  Solved solve(const SdpSettings& settings = {}) const {
    Solved out;
    out.moments.basis = basis_;
    if (sdp_.constraints.empty()) {
      // Every row was consumed by elimination; X = 0 is optimal as long as
      // the folded objective cannot increase along the PSD cone.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sdp_.objective.block(0),
                                                        Eigen::EigenvaluesOnly);
      bool bounded = es.eigenvalues().maxCoeff() <= 1e-12;
      for (std::size_t j = 0; j < prog_.thetas.size(); ++j)
        if (theta_block_[j] >= 0 && sdp_.objective.block(theta_block_[j])(0, 0) > 1e-12)
          bounded = false;
      out.status = bounded ? SdpStatus::Optimal : SdpStatus::DualInfeasibleLikely;
      if (!bounded) return out;
      out.gram = Eigen::MatrixXd::Zero(basis_.size(), basis_.size());
      out.theta.assign(prog_.thetas.size(), 0.0);
      out.raw.status = SdpStatus::Optimal;
    } else {
      out.raw = tensoralt::solve(sdp_, settings);
      out.status = out.raw.status;
      if (out.status != SdpStatus::Optimal && out.status != SdpStatus::MaxIterations) return out;

      out.gram = out.raw.x.block(0);
      out.theta.assign(prog_.thetas.size(), 0.0);
      for (std::size_t j = 0; j < prog_.thetas.size(); ++j) {
        int blk = theta_block_[j];
        if (blk >= 0) out.theta[j] = out.raw.x.block(blk)(0, 0);
      }
    }

    // Duals of the active rows, indexed by master row id.
    std::vector<double> ydual(rows_.size(), 0.0);
    out.linear_eq_duals.assign(prog_.linear_eqs.size(), 0.0);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (rows_[r].sdp_index >= 0) {
        ydual[r] = out.raw.y[rows_[r].sdp_index];
        if (!rows_[r].is_coeff) out.linear_eq_duals[rows_[r].linear_index] = ydual[r];
      }
    }

    // Reverse-order reconstruction of eliminated primal/dual values.
    for (auto it = elims_.rbegin(); it != elims_.rend(); ++it) {
      const Row& pivot = rows_[it->pivot_row];
      double val = pivot.rhs;
      for (const auto& [c, w] : pivot.gram) val -= w * gram_sum(out.gram, c);
      for (std::size_t k = 0; k < prog_.thetas.size(); ++k) {
        if (static_cast<int>(k) == it->theta_index) continue;
        val -= pivot.theta[k] * out.theta[k];
      }
      out.theta[it->theta_index] = val / pivot.theta[it->theta_index];

      double yv = it->objective;
      for (const auto& [rid, t] : it->column) {
        if (rid == it->pivot_row) continue;
        yv -= ydual[rid] * t;
      }
      ydual[it->pivot_row] = yv / it->column.at(it->pivot_row);
    }

    for (std::size_t r = 0; r < rows_.size(); ++r)
      if (rows_[r].is_coeff) out.moments.y[rows_[r].alpha] = ydual[r];

    out.objective = out.raw.primal_objective + obj_const_;
    return out;
  }

 private:
  struct Row {
    bool is_coeff = true;
    Exponent alpha;       // coefficient rows
    int linear_index = -1;  // linear_eq rows
    std::map<Exponent, double, GrlexLess> gram;
    std::vector<double> theta;
    double rhs = 0.0;
    bool active = true;
    int sdp_index = -1;
  };

  struct Elim {
    int theta_index = -1;
    int pivot_row = -1;
    double objective = 0.0;           // objective coefficient at elimination time
    std::map<int, double> column;     // theta column over rows active at that time
  };

  double gram_sum(const Eigen::MatrixXd& q, const Exponent& alpha) const {
    double s = 0.0;
    auto it = pair_lists_.find(alpha);
    if (it == pair_lists_.end()) return 0.0;
    for (const auto& [i, j] : it->second) s += q(i, j);
    return s;
  }

  void build_rows() {
    const int q = static_cast<int>(prog_.thetas.size());
    for (const auto& th : prog_.thetas) {
      if (th.piece.dim() != prog_.n)
        throw std::invalid_argument("SosProgram: theta piece dimension mismatch");
      if (th.piece.degree() > prog_.m)
        throw std::invalid_argument("SosProgram: theta piece degree overflow");
    }
    if (prog_.base.dim() != prog_.n && !prog_.base.is_zero())
      throw std::invalid_argument("SosProgram: base dimension mismatch");
    if (prog_.base.degree() > prog_.m)
      throw std::invalid_argument("SosProgram: base degree overflow");

    // Ordered pair lists per matched exponent.
    for (int i = 0; i < basis_.size(); ++i)
      for (int j = 0; j < basis_.size(); ++j)
        pair_lists_[basis_.monomials[i] + basis_.monomials[j]].emplace_back(i, j);

    const auto support =
        enumerate_monomials(prog_.n, prog_.m, prog_.homogeneous ? EnumMode::Exact : EnumMode::UpTo);
    for (const Exponent& a : support) {
      Row row;
      row.is_coeff = true;
      row.alpha = a;
      row.gram[a] = 1.0;
      row.theta.assign(q, 0.0);
      for (int j = 0; j < q; ++j) row.theta[j] = -prog_.thetas[j].piece.coeff(a);
      row.rhs = prog_.base.is_zero() ? 0.0 : prog_.base.coeff(a);
      rows_.push_back(std::move(row));
    }
    for (std::size_t k = 0; k < prog_.linear_eqs.size(); ++k) {
      const auto& [coeffs, rhs] = prog_.linear_eqs[k];
      if (static_cast<int>(coeffs.size()) != q)
        throw std::invalid_argument("SosProgram: linear_eq length mismatch");
      Row row;
      row.is_coeff = false;
      row.linear_index = static_cast<int>(k);
      row.theta = coeffs;
      row.rhs = rhs;
      rows_.push_back(std::move(row));
    }

    obj_theta_.assign(q, 0.0);
    for (int j = 0; j < q; ++j) obj_theta_[j] = prog_.thetas[j].objective;
  }

  void eliminate_free_thetas() {
    for (std::size_t j = 0; j < prog_.thetas.size(); ++j) {
      if (prog_.thetas[j].nonneg) continue;
      // Pivot: active row with the largest |theta_j| coefficient.
      int pivot = -1;
      double best = 0.0;
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (!rows_[r].active) continue;
        double t = std::abs(rows_[r].theta[j]);
        if (t > best) {
          best = t;
          pivot = static_cast<int>(r);
        }
      }
      if (pivot < 0) {
        if (obj_theta_[j] != 0.0)
          throw std::invalid_argument("SosProgram: free theta with no constraint is unbounded");
        continue;
      }

      Elim e;
      e.theta_index = static_cast<int>(j);
      e.pivot_row = pivot;
      e.objective = obj_theta_[j];
      for (std::size_t r = 0; r < rows_.size(); ++r)
        if (rows_[r].active && rows_[r].theta[j] != 0.0)
          e.column[static_cast<int>(r)] = rows_[r].theta[j];

      const Row& pr = rows_[pivot];
      const double tp = pr.theta[j];
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (!rows_[r].active || static_cast<int>(r) == pivot) continue;
        Row& row = rows_[r];
        const double factor = row.theta[j] / tp;
        if (factor == 0.0) continue;
        for (const auto& [c, w] : pr.gram) {
          double& g = row.gram[c];
          g -= factor * w;
          if (g == 0.0) row.gram.erase(c);
        }
        for (std::size_t k = 0; k < row.theta.size(); ++k) row.theta[k] -= factor * pr.theta[k];
        row.theta[j] = 0.0;
        row.rhs -= factor * pr.rhs;
      }

      // Fold theta_j out of the objective via the pivot expression.
      const double s = obj_theta_[j] / tp;
      if (s != 0.0) {
        obj_const_ += s * pr.rhs;
        for (const auto& [c, w] : pr.gram) obj_gram_[c] -= s * w;
        for (std::size_t k = 0; k < obj_theta_.size(); ++k)
          if (k != j) obj_theta_[k] -= s * pr.theta[k];
      }
      obj_theta_[j] = 0.0;
      rows_[pivot].active = false;
      elims_.push_back(std::move(e));
    }
  }

  void build_sdp() {
    const int nb = basis_.size();
    std::vector<int> sizes = {nb};
    theta_block_.assign(prog_.thetas.size(), -1);
    for (std::size_t j = 0; j < prog_.thetas.size(); ++j) {
      if (!prog_.thetas[j].nonneg) continue;
      theta_block_[j] = static_cast<int>(sizes.size());
      sizes.push_back(1);
    }

    sdp_.block_sizes = sizes;
    sdp_.objective = BlockMatrix(sizes);
    for (const auto& [c, w] : obj_gram_) add_gram_indicator(sdp_.objective.block(0), c, w);
    for (std::size_t j = 0; j < prog_.thetas.size(); ++j)
      if (theta_block_[j] >= 0) sdp_.objective.block(theta_block_[j])(0, 0) = obj_theta_[j];

    int idx = 0;
    for (auto& row : rows_) {
      if (!row.active) continue;
      BlockMatrix a(sizes);
      for (const auto& [c, w] : row.gram) add_gram_indicator(a.block(0), c, w);
      bool nonzero = !row.gram.empty();
      for (std::size_t j = 0; j < prog_.thetas.size(); ++j) {
        if (theta_block_[j] >= 0 && row.theta[j] != 0.0) {
          a.block(theta_block_[j])(0, 0) = row.theta[j];
          nonzero = true;
        }
      }
      if (!nonzero) {
        if (std::abs(row.rhs) > 1e-12)
          throw std::invalid_argument("SosProgram: inconsistent empty constraint row");
        row.active = false;
        continue;
      }
      row.sdp_index = idx++;
      sdp_.constraints.push_back(std::move(a));
      sdp_.rhs.push_back(row.rhs);
    }
  }

  void add_gram_indicator(Eigen::MatrixXd& blk, const Exponent& alpha, double w) const {
    auto it = pair_lists_.find(alpha);
    if (it == pair_lists_.end()) return;
    for (const auto& [i, j] : it->second) blk(i, j) += w;
  }

  SosProgram prog_;
  GramBasis basis_;
  std::map<Exponent, std::vector<std::pair<int, int>>, GrlexLess> pair_lists_;
  std::vector<Row> rows_;
  std::vector<Elim> elims_;
  std::vector<double> obj_theta_;
  std::map<Exponent, double, GrlexLess> obj_gram_;
  double obj_const_ = 0.0;
  SdpProblem sdp_;
  std::vector<int> theta_block_;
};

/// Standard-form assembly per the module contract; bookkeeping lives in
/// AssembledSosProgram when the solution must be mapped back.
inline SdpProblem assemble_sos_program(const SosProgram& prog) {
  return AssembledSosProgram(prog).sdp();
}

// ---------------------------------------------------------------------------
// SOS membership of a single polynomial.
// ---------------------------------------------------------------------------

enum class SosStatus { Sos, NotSos, Indeterminate };

inline const char* to_string(SosStatus s) {
  switch (s) {
    case SosStatus::Sos: return "SOS";
    case SosStatus::NotSos: return "NOT_SOS";
    case SosStatus::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

struct SosCheckResult {
  SosStatus status = SosStatus::Indeterminate;
  std::optional<SosCertificate> certificate;
  std::optional<MomentVector> moment_witness;
  double gamma_star = 0.0;  // decisive margin of the shifted program
  bool boundary = false;    // |gamma_star| within the decision threshold
  std::string message;
};

/// Decide membership via the strictly feasible shifted program
/// max gamma s.t. f - gamma*s is SOS, with s = sum x_i^m (+ 1 when f is not
/// homogeneous of degree m). gamma* >= 0 iff f is SOS; the Gram certificate
/// of f itself is recovered as Q* + gamma* * diag-shift.
inline SosCheckResult sos_check(const Polynomial& f, int m, const SdpSettings& settings = {},
                                double decision_tol = 1e-6,
                                const std::optional<std::string>& dump_sdp_path = {}) {
  if (m <= 0 || m % 2 != 0) throw std::invalid_argument("sos_check: m must be even");
  if (f.degree() > m) throw std::invalid_argument("sos_check: deg f > m");
  const int n = f.dim();

  SosCheckResult out;
  if (f.is_zero()) {
    out.status = SosStatus::Sos;
    SosCertificate cert;
    cert.basis = GramBasis::build(n, m, true);
    cert.gram = Eigen::MatrixXd::Zero(cert.basis.size(), cert.basis.size());
    cert.residual = 0.0;
    out.certificate = std::move(cert);
    return out;
  }

  const bool homogeneous = f.is_homogeneous(m);
  Polynomial shift(n);
  for (int i = 0; i < n; ++i) shift.add_term(Exponent::unit(n, i, m), 1.0);
  if (!homogeneous) shift.add_term(Exponent::zero(n), 1.0);

  SosProgram prog;
  prog.n = n;
  prog.m = m;
  prog.homogeneous = homogeneous;
  prog.base = f;
  prog.thetas.push_back({"gamma", shift.scaled(-1.0), /*nonneg=*/false, /*objective=*/1.0});

  AssembledSosProgram assembled(prog);
  if (dump_sdp_path) dump_problem(assembled.sdp(), *dump_sdp_path);
  auto solved = assembled.solve(settings);
  if (solved.status != SdpStatus::Optimal) {
    out.message = std::string("solver status ") + to_string(solved.status);
    return out;
  }

  const double gamma = solved.objective;
  out.gamma_star = gamma;
  out.boundary = std::abs(gamma) <= decision_tol;

  if (gamma >= -decision_tol) {
    // Shift the Gram back: f = (f - gamma*s) + gamma*s and s has a diagonal Gram.
    Eigen::MatrixXd gram = solved.gram;
    const GramBasis& basis = assembled.basis();
    for (int i = 0; i < n; ++i) {
      auto it = basis.index.find(Exponent::unit(n, i, m / 2));
      if (it != basis.index.end()) gram(it->second, it->second) += gamma;
    }
    if (!homogeneous) {
      auto it = basis.index.find(Exponent::zero(n));
      if (it != basis.index.end()) gram(it->second, it->second) += gamma;
    }
    SosCertificate cert;
    cert.basis = basis;
    cert.gram = gram;
    cert.squares = extract_decomposition(gram, basis);
    // Re-clamp: store the PSD matrix actually certified by the squares.
    cert.gram = Eigen::MatrixXd::Zero(basis.size(), basis.size());
    for (const Polynomial& g : cert.squares) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(basis.size());
      for (const auto& [a, c] : g.terms()) v[basis.index.at(a)] = c;
      cert.gram += v * v.transpose();
    }
    cert.residual = reconstruction_residual(f, cert.squares);
    if (cert.residual <= 1e-6 * (1.0 + f.max_abs_coeff())) {
      out.status = SosStatus::Sos;
      out.certificate = std::move(cert);
    } else {
      out.message = "boundary case: certificate residual " + std::to_string(cert.residual);
    }
    out.moment_witness = solved.moments;
    return out;
  }

  out.status = SosStatus::NotSos;
  out.moment_witness = solved.moments;
  return out;
}

}  // namespace tensoralt

#endif  // TENSORALT_SOS_HPP
