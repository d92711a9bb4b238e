#ifndef TENSORALT_ALTERNATIVE_HPP
#define TENSORALT_ALTERNATIVE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tensoralt/sos.hpp"
#include "tensoralt/tensor.hpp"

namespace tensoralt {

using Matrix = std::vector<std::vector<double>>;

enum class AltOutcome { StatementI, StatementII, AssumptionViolated, Indeterminate };

inline const char* to_string(AltOutcome o) {
  switch (o) {
    case AltOutcome::StatementI: return "STATEMENT_I";
    case AltOutcome::StatementII: return "STATEMENT_II";
    case AltOutcome::AssumptionViolated: return "ASSUMPTION_VIOLATED";
    case AltOutcome::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

/// Certificate for whichever side of the alternative holds: simplex weights
/// plus an SOS decomposition of sum lambda_l f_l (statement II), or a point
/// with every form strictly negative (statement I). `margin` is the decisive
/// optimum gamma* of the shifted SOS program.
struct AltCertificate {
  AltOutcome outcome = AltOutcome::Indeterminate;
  std::vector<double> lambda;
  std::optional<SosCertificate> sos;
  std::vector<double> witness;
  double margin = 0.0;
  std::optional<MomentVector> moments;
  std::string message;
};

struct AltSettings {
  SdpSettings sdp;
  double decision_tol = 1e-6;
  // Relative zero threshold for the ENP gate; absorbs roundoff from the
  // change-of-variables re-expansion.
  double assumption_tol = 1e-10;
  int witness_starts = 64;
  int witness_iters = 200;
  std::uint64_t seed = 20240801;
  std::optional<std::string> dump_sdp_path;
};

namespace detail {

inline Eigen::MatrixXd to_eigen(const Matrix& p) {
  const int n = static_cast<int>(p.size());
  Eigen::MatrixXd e(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(p[i].size()) != n)
      throw std::invalid_argument("matrix must be square");
    for (int j = 0; j < n; ++j) e(i, j) = p[i][j];
  }
  return e;
}

inline Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix p(e.rows(), std::vector<double>(e.cols()));
  for (int i = 0; i < e.rows(); ++i)
    for (int j = 0; j < e.cols(); ++j) p[i][j] = e(i, j);
  return p;
}

inline double condition_number(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 0.0)
    return std::numeric_limits<double>::infinity();
  return sv(0) / sv(sv.size() - 1);
}

/// Minimize max_l f_l(x) over the unit sphere by projected subgradient
/// descent with backtracking; the forms are homogeneous so any strictly
/// negative value certifies statement I after rescaling.
inline std::pair<std::vector<double>, double> sphere_minimax(
    const std::vector<Polynomial>& forms, const std::vector<std::vector<double>>& starts,
    int iters) {
  const int n = forms.front().dim();
  auto value = [&](const std::vector<double>& x) {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& f : forms) v = std::max(v, f.evaluate(x));
    return v;
  };
  auto normalize = [&](std::vector<double>& x) {
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm < 1e-300) {
      x.assign(n, 0.0);
      x[0] = 1.0;
    } else {
      for (double& v : x) v /= nrm;
    }
  };

  std::vector<double> best;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::vector<double> x : starts) {
    normalize(x);
    double fx = value(x);
    for (int it = 0; it < iters; ++it) {
      // Subgradient of the active form, projected to the sphere tangent.
      int active = 0;
      double fmax = forms[0].evaluate(x);
      for (std::size_t l = 1; l < forms.size(); ++l) {
        double v = forms[l].evaluate(x);
        if (v > fmax) {
          fmax = v;
          active = static_cast<int>(l);
        }
      }
      std::vector<double> g = forms[active].gradient(x);
      double gx = 0.0;
      for (int i = 0; i < n; ++i) gx += g[i] * x[i];
      double gnorm2 = 0.0;
      for (int i = 0; i < n; ++i) {
        g[i] -= gx * x[i];
        gnorm2 += g[i] * g[i];
      }
      if (gnorm2 < 1e-24) break;
      double step = 0.5;
      bool moved = false;
      for (int bt = 0; bt < 30; ++bt) {
        std::vector<double> xn(n);
        for (int i = 0; i < n; ++i) xn[i] = x[i] - step * g[i];
        normalize(xn);
        double fn = value(xn);
        if (fn < fx - 1e-12) {
          x = std::move(xn);
          fx = fn;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    if (fx < best_val) {
      best_val = fx;
      best = x;
    }
  }
  return {best, best_val};
}

}  // namespace detail

/// Decide the alternative for tensors F_0..F_p sharing an even order m:
/// transform by P when given, gate on the essentially-nonpositive assumption,
/// then read the sign of gamma* = max{gamma : sum lambda_l F_l - gamma*D SOS,
/// lambda in the simplex} with D the tensor of sum_i x_i^m.
inline AltCertificate yuan_alternative(const std::vector<SymmetricTensor>& tensors,
                                       const std::optional<Matrix>& p = std::nullopt,
                                       const AltSettings& settings = {}) {
  if (tensors.empty()) throw std::invalid_argument("yuan_alternative: no tensors");
  const int m = tensors.front().order();
  const int n = tensors.front().dim();
  for (const auto& t : tensors) tensors.front().require_same_shape(t);

  AltCertificate cert;

  Eigen::MatrixXd pmat, pt_inv;
  std::vector<SymmetricTensor> g;
  if (p) {
    pmat = detail::to_eigen(*p);
    if (pmat.rows() != n) throw std::invalid_argument("yuan_alternative: P dimension mismatch");
    const double cond = detail::condition_number(pmat);
    if (!(cond <= 1e12))
      throw std::invalid_argument("yuan_alternative: P is singular or near-singular (cond " +
                                  std::to_string(cond) + ")");
    pt_inv = pmat.transpose().inverse();
    g.reserve(tensors.size());
    for (const auto& t : tensors) g.push_back(transform(*p, t));
  } else {
    g = tensors;
  }

  for (std::size_t l = 0; l < g.size(); ++l) {
    if (!is_essentially_nonpositive(g[l], p ? settings.assumption_tol : 0.0)) {
      cert.outcome = AltOutcome::AssumptionViolated;
      cert.message = "tensor " + std::to_string(l) + " is not essentially nonpositive" +
                     (p ? " after applying P" : "");
      return cert;
    }
  }

  std::vector<Polynomial> gpolys;
  gpolys.reserve(g.size());
  for (const auto& t : g) gpolys.push_back(polynomial_from_tensor(t));

  Polynomial diag(n);
  for (int i = 0; i < n; ++i) diag.add_term(Exponent::unit(n, i, m), 1.0);

  SosProgram prog;
  prog.n = n;
  prog.m = m;
  prog.homogeneous = true;
  prog.base = Polynomial(n);
  for (std::size_t l = 0; l < g.size(); ++l)
    prog.thetas.push_back({"lambda" + std::to_string(l), gpolys[l], true, 0.0});
  prog.thetas.push_back({"gamma", diag.scaled(-1.0), false, 1.0});
  std::vector<double> simplex(prog.thetas.size(), 1.0);
  simplex.back() = 0.0;
  prog.linear_eqs.emplace_back(simplex, 1.0);

  AssembledSosProgram assembled(prog);
  if (settings.dump_sdp_path) dump_problem(assembled.sdp(), *settings.dump_sdp_path);
  auto solved = assembled.solve(settings.sdp);
  if (solved.status != SdpStatus::Optimal) {
    cert.message = std::string("solver status ") + to_string(solved.status);
    return cert;
  }

  const double gamma = solved.objective;
  cert.margin = gamma;
  cert.moments = solved.moments;

  if (gamma >= -settings.decision_tol) {
    // Statement II. Clamp and renormalize the simplex weights.
    std::vector<double> lambda(solved.theta.begin(), solved.theta.end() - 1);
    double total = 0.0;
    for (double& v : lambda) {
      v = std::max(v, 0.0);
      total += v;
    }
    if (total <= 0.0) {
      cert.message = "degenerate simplex weights";
      return cert;
    }
    for (double& v : lambda) v /= total;

    // Gram of sum lambda g_l = sigma + gamma * D.
    Eigen::MatrixXd gram = solved.gram;
    const GramBasis& basis = assembled.basis();
    for (int i = 0; i < n; ++i) {
      auto it = basis.index.find(Exponent::unit(n, i, m / 2));
      if (it != basis.index.end()) gram(it->second, it->second) += gamma;
    }

    std::vector<Polynomial> squares;
    try {
      squares = extract_decomposition(gram, basis);
    } catch (const std::domain_error& e) {
      cert.message = e.what();
      return cert;
    }
    if (p) {
      // sigma((P^T)^{-1} x) stays a sum of squares of polynomials.
      Matrix back = detail::from_eigen(pt_inv);
      for (Polynomial& sq : squares) sq = sq.substitute_linear(back);
    }

    Polynomial target(n);
    for (std::size_t l = 0; l < tensors.size(); ++l)
      target += polynomial_from_tensor(tensors[l]).scaled(lambda[l]);

    SosCertificate sos;
    sos.basis = basis;
    sos.gram = Eigen::MatrixXd::Zero(basis.size(), basis.size());
    for (const Polynomial& sq : squares) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(basis.size());
      for (const auto& [a, c] : sq.terms()) {
        auto it = basis.index.find(a);
        if (it == basis.index.end()) {
          cert.message = "mapped square left the Gram basis";
          return cert;
        }
        v[it->second] = c;
      }
      sos.gram += v * v.transpose();
    }
    sos.squares = std::move(squares);
    sos.residual = reconstruction_residual(target, sos.squares);
    const double scale = 1.0 + target.max_abs_coeff();
    if (sos.residual > 1e-6 * scale + std::abs(std::min(gamma, 0.0)) * n) {
      cert.message = "statement II certificate residual " + std::to_string(sos.residual);
      return cert;
    }
    cert.outcome = AltOutcome::StatementII;
    cert.lambda = std::move(lambda);
    cert.sos = std::move(sos);
    return cert;
  }

  // Statement I: recover a witness for the transformed system, map through
  // P^T, and only claim the outcome once it validates.
  auto map_and_validate = [&](std::vector<double> x) -> std::optional<std::vector<double>> {
    std::vector<double> w(n, 0.0);
    if (p) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w[i] += pmat(j, i) * x[j];  // w = P^T x
    } else {
      w = x;
    }
    double worst = -std::numeric_limits<double>::infinity();
    double nrm = 0.0;
    for (double v : w) nrm += v * v;
    if (nrm < 1e-300) return std::nullopt;
    for (const auto& t : tensors) worst = std::max(worst, evaluate(t, w));
    if (worst >= 0.0) return std::nullopt;
    // Homogeneity: rescale so the worst value sits well below the margin.
    const double s = std::min(std::pow(1.0 / -worst, 1.0 / m), 1e8);
    for (double& v : w) v *= s;
    worst = -std::numeric_limits<double>::infinity();
    for (const auto& t : tensors) worst = std::max(worst, evaluate(t, w));
    if (worst < -1e-9) return w;
    return std::nullopt;
  };

  // First candidate: diagonal roots of the dual moment tensor.
  std::vector<std::vector<double>> starts;
  {
    std::vector<double> xbar(n, 0.0);
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      double d = solved.moments.value(Exponent::unit(n, i, m));
      if (d < -1e-8) {
        ok = false;
        break;
      }
      xbar[i] = d < 1e-8 ? 0.0 : std::pow(d, 1.0 / m);
    }
    if (ok) {
      if (auto w = map_and_validate(xbar)) {
        cert.outcome = AltOutcome::StatementI;
        cert.witness = *w;
        return cert;
      }
      starts.push_back(std::move(xbar));
    }
  }

  std::mt19937_64 rng(settings.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int s = 0; s < settings.witness_starts; ++s) {
    std::vector<double> x(n);
    for (double& v : x) v = gauss(rng);
    starts.push_back(std::move(x));
  }
  auto [best, best_val] =
      detail::sphere_minimax(gpolys, starts, settings.witness_iters);
  if (best_val < 0.0) {
    if (auto w = map_and_validate(best)) {
      cert.outcome = AltOutcome::StatementI;
      cert.witness = *w;
      return cert;
    }
  }
  cert.message = "gamma* = " + std::to_string(gamma) +
                 " < 0 but no validated witness was found";
  return cert;
}

enum class SLemmaOutcome { ImplicationHolds, Violated, AssumptionViolated, Indeterminate };

inline const char* to_string(SLemmaOutcome o) {
  switch (o) {
    case SLemmaOutcome::ImplicationHolds: return "IMPLICATION_HOLDS";
    case SLemmaOutcome::Violated: return "VIOLATED";
    case SLemmaOutcome::AssumptionViolated: return "ASSUMPTION_VIOLATED";
    case SLemmaOutcome::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

struct SLemmaResult {
  SLemmaOutcome outcome = SLemmaOutcome::Indeterminate;
  std::vector<double> lambda;  // multipliers for l = 1..p
  std::optional<SosCertificate> sos;
  std::vector<double> violator;
  double margin = 0.0;
  std::string message;
};

/// Tensor homogeneous S-lemma: under the ENP assumption and a strictly
/// feasible x0, either F_0 + sum lambda_l F_l is SOS for some lambda >= 0,
/// or a point violating the implication is produced.
inline SLemmaResult s_lemma(const SymmetricTensor& f0,
                            const std::vector<SymmetricTensor>& constraints,
                            const std::vector<double>& x0,
                            const std::optional<Matrix>& p = std::nullopt,
                            const AltSettings& settings = {}) {
  for (const auto& t : constraints) {
    if (!(evaluate(t, x0) < 0.0))
      throw std::invalid_argument("s_lemma: x0 is not strictly feasible");
  }

  std::vector<SymmetricTensor> all;
  all.reserve(constraints.size() + 1);
  all.push_back(f0);
  for (const auto& t : constraints) all.push_back(t);

  AltCertificate alt = yuan_alternative(all, p, settings);
  SLemmaResult out;
  out.margin = alt.margin;
  switch (alt.outcome) {
    case AltOutcome::AssumptionViolated:
      out.outcome = SLemmaOutcome::AssumptionViolated;
      out.message = alt.message;
      return out;
    case AltOutcome::Indeterminate:
      out.message = alt.message;
      return out;
    case AltOutcome::StatementI:
      out.outcome = SLemmaOutcome::Violated;
      out.violator = alt.witness;
      return out;
    case AltOutcome::StatementII:
      break;
  }

  const double lambda0 = alt.lambda.at(0);
  if (lambda0 <= 1e-7) {
    out.message = "lambda_0 = " + std::to_string(lambda0) +
                  " vanished despite strict feasibility";
    return out;
  }
  out.lambda.assign(alt.lambda.begin() + 1, alt.lambda.end());
  for (double& v : out.lambda) v /= lambda0;

  SosCertificate sos = *alt.sos;
  sos.gram /= lambda0;
  const double sq = 1.0 / std::sqrt(lambda0);
  for (Polynomial& g : sos.squares) g = g.scaled(sq);
  Polynomial target = polynomial_from_tensor(f0);
  for (std::size_t l = 0; l < constraints.size(); ++l)
    target += polynomial_from_tensor(constraints[l]).scaled(out.lambda[l]);
  sos.residual = reconstruction_residual(target, sos.squares);
  out.sos = std::move(sos);
  out.outcome = SLemmaOutcome::ImplicationHolds;
  return out;
}

/// Order-2 tensor from a symmetric matrix.
inline SymmetricTensor tensor_from_matrix(const Matrix& a) {
  const int n = static_cast<int>(a.size());
  SymmetricTensor t(2, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(a[i].size()) != n)
      throw std::invalid_argument("tensor_from_matrix: matrix must be square");
    for (int j = i; j < n; ++j) {
      const double v = 0.5 * (a[i][j] + a[j][i]);
      if (v != 0.0) t.set_entry(tuple_to_exponent({i + 1, j + 1}, n), v);
    }
  }
  return t;
}

/// Matrix specialization (m = 2): identical decision path, with the
/// statement II certificate cross-checked by an eigenvalue PSD test.
inline AltCertificate matrix_alternative(const std::vector<Matrix>& mats,
                                         const std::optional<Matrix>& q = std::nullopt,
                                         const AltSettings& settings = {}) {
  if (mats.empty()) throw std::invalid_argument("matrix_alternative: no matrices");
  const int n = static_cast<int>(mats.front().size());
  std::vector<SymmetricTensor> tensors;
  tensors.reserve(mats.size());
  for (const auto& a : mats) tensors.push_back(tensor_from_matrix(a));

  std::optional<Matrix> p;
  if (q) {
    // P^m F corresponds to Q^T A Q at order 2 when P = Q^T.
    Eigen::MatrixXd qe = detail::to_eigen(*q);
    p = detail::from_eigen(qe.transpose().eval());
  }

  AltCertificate cert = yuan_alternative(tensors, p, settings);
  if (cert.outcome == AltOutcome::StatementII) {
    Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t l = 0; l < mats.size(); ++l)
      combo += cert.lambda[l] * detail::to_eigen(mats[l]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (combo + combo.transpose()),
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) {
      cert.outcome = AltOutcome::Indeterminate;
      cert.message = "eigenvalue cross-check failed: min eig " +
                     std::to_string(es.eigenvalues().minCoeff());
    }
  }
  return cert;
}

}  // namespace tensoralt

#endif  // TENSORALT_ALTERNATIVE_HPP
