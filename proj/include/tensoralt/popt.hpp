#ifndef TENSORALT_POPT_HPP
#define TENSORALT_POPT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tensoralt/sos.hpp"
#include "tensoralt/tensor.hpp"

namespace tensoralt {

/// min f_0(x) s.t. f_l(x) <= 0, all polynomials of degree <= m with
/// essentially nonpositive coefficients. The ENP check is a hard constructor
/// gate; `allow_non_enp` exists for negative experiments only.
struct PopInstance {
  int n = 0;
  int m = 0;
  Polynomial objective;
  std::vector<Polynomial> constraints;
  bool enp_verified = false;

  static PopInstance make(int n, int m, Polynomial objective,
                          std::vector<Polynomial> constraints, bool allow_non_enp = false) {
    if (m <= 0 || m % 2 != 0) throw std::invalid_argument("PopInstance: m must be even");
    PopInstance inst;
    inst.n = n;
    inst.m = m;
    inst.objective = std::move(objective);
    inst.constraints = std::move(constraints);
    bool enp = has_enp_coefficients(inst.objective, m);
    for (const auto& f : inst.constraints) enp = enp && has_enp_coefficients(f, m);
    if (!enp && !allow_non_enp)
      throw std::invalid_argument(
          "PopInstance: a polynomial lacks essentially nonpositive coefficients");
    inst.enp_verified = enp;
    if (inst.objective.dim() != n)
      throw std::invalid_argument("PopInstance: objective dimension mismatch");
    if (inst.objective.degree() > m)
      throw std::invalid_argument("PopInstance: objective degree > m");
    for (const auto& f : inst.constraints) {
      if (f.dim() != n) throw std::invalid_argument("PopInstance: constraint dimension mismatch");
      if (f.degree() > m) throw std::invalid_argument("PopInstance: constraint degree > m");
    }
    return inst;
  }

  // max_l f_l(x); -inf when there are no constraints.
  double max_constraint_value(const std::vector<double>& x) const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& f : constraints) v = std::max(v, f.evaluate(x));
    return v;
  }
};

enum class PopValidation { ExactSolutionRecovered, BoundOnly, Unbounded, Indeterminate };

inline const char* to_string(PopValidation v) {
  switch (v) {
    case PopValidation::ExactSolutionRecovered: return "EXACT_SOLUTION_RECOVERED";
    case PopValidation::BoundOnly: return "BOUND_ONLY";
    case PopValidation::Unbounded: return "UNBOUNDED";
    case PopValidation::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

struct PopReport {
  double bound = 0.0;                    // mu*
  std::vector<double> multipliers;       // lambda_l >= 0
  std::optional<SosCertificate> sigma;   // f_0 + sum lambda f_l - mu* = sum squares
  MomentVector moments;
  std::optional<std::vector<double>> recovered;
  PopValidation validation = PopValidation::Indeterminate;
  std::optional<double> oracle_value;
  std::optional<std::vector<double>> oracle_point;
  bool slater_verified = false;
  bool gap_flag = false;
  SdpStatus solver_status = SdpStatus::NumericalTrouble;
  std::string message;
};

struct OracleBudget {
  int starts = 64;
  std::optional<int> grid;  // per-axis resolution for n <= 3
  std::uint64_t seed = 20240801;
  int iters_per_stage = 150;
};

struct PopSettings {
  SdpSettings sdp;
  OracleBudget oracle;
  bool run_oracle = true;
  std::optional<std::vector<double>> slater_point;
  std::optional<std::string> dump_sdp_path;
};

struct OracleResult {
  bool found = false;
  std::vector<double> point;
  double value = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double penalized_value(const PopInstance& inst, const std::vector<double>& x, double rho) {
  double v = inst.objective.evaluate(x);
  for (const auto& f : inst.constraints) {
    const double c = f.evaluate(x);
    if (c > 0.0) v += rho * c * c;
  }
  return v;
}

inline std::vector<double> penalized_gradient(const PopInstance& inst,
                                              const std::vector<double>& x, double rho) {
  std::vector<double> g = inst.objective.gradient(x);
  for (const auto& f : inst.constraints) {
    const double c = f.evaluate(x);
    if (c > 0.0) {
      std::vector<double> gf = f.gradient(x);
      for (int i = 0; i < inst.n; ++i) g[i] += 2.0 * rho * c * gf[i];
    }
  }
  return g;
}

inline std::vector<double> descend(const PopInstance& inst, std::vector<double> x,
                                   int iters_per_stage) {
  const int n = inst.n;
  for (double rho : {1e2, 1e4, 1e6, 1e8}) {
    std::vector<double> xprev, gprev;
    for (int it = 0; it < iters_per_stage; ++it) {
      const double fx = penalized_value(inst, x, rho);
      std::vector<double> g = penalized_gradient(inst, x, rho);
      double gnorm2 = 0.0;
      for (double v : g) gnorm2 += v * v;
      if (gnorm2 < 1e-24) break;
      // Barzilai-Borwein step with an Armijo safeguard; plain normalized
      // steps crawl once the penalty valley turns stiff.
      double step = 1.0 / (1.0 + std::sqrt(gnorm2));
      if (!xprev.empty()) {
        double sy = 0.0, yy = 0.0;
        for (int i = 0; i < n; ++i) {
          const double si = x[i] - xprev[i];
          const double yi = g[i] - gprev[i];
          sy += si * yi;
          yy += yi * yi;
        }
        if (sy > 0.0 && yy > 0.0) step = std::clamp(sy / yy, 1e-12, 1e3);
      }
      xprev = x;
      gprev = g;
      bool moved = false;
      for (int bt = 0; bt < 45; ++bt) {
        std::vector<double> xn(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) xn[i] = x[i] - step * g[i];
        if (penalized_value(inst, xn, rho) < fx - 1e-4 * step * gnorm2) {
          x = std::move(xn);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
  }
  return x;
}

// Active-set tangent polish: steps along the objective gradient projected
// onto the tangent space of the (nearly) active constraints, with a Newton
// pullback onto the feasible side. Sharpens boundary minima that the
// penalty stages only approach.
inline std::vector<double> boundary_polish(const PopInstance& inst, std::vector<double> x,
                                           int iters = 120) {
  const int n = inst.n;
  if (inst.constraints.empty()) return x;
  auto pullback = [&](std::vector<double>& z) {
    for (int rounds = 0; rounds < 30; ++rounds) {
      int worst = -1;
      double val = 1e-12;
      for (std::size_t l = 0; l < inst.constraints.size(); ++l) {
        const double c = inst.constraints[l].evaluate(z);
        if (c > val) {
          val = c;
          worst = static_cast<int>(l);
        }
      }
      if (worst < 0) return true;
      std::vector<double> a = inst.constraints[worst].gradient(z);
      double an = 0.0;
      for (double v : a) an += v * v;
      if (an < 1e-18) return false;
      for (int i = 0; i < n; ++i) z[i] -= val * a[i] / an;
    }
    return inst.max_constraint_value(z) <= 1e-9;
  };

  double fx = inst.objective.evaluate(x);
  for (int it = 0; it < iters; ++it) {
    std::vector<double> g = inst.objective.gradient(x);
    // Project out each nearly active constraint gradient in turn.
    for (std::size_t l = 0; l < inst.constraints.size(); ++l) {
      if (inst.constraints[l].evaluate(x) < -1e-6 * (1.0 + std::abs(fx))) continue;
      std::vector<double> a = inst.constraints[l].gradient(x);
      double an = 0.0, ga = 0.0;
      for (int i = 0; i < n; ++i) {
        an += a[i] * a[i];
        ga += g[i] * a[i];
      }
      if (an < 1e-18) continue;
      for (int i = 0; i < n; ++i) g[i] -= (ga / an) * a[i];
    }
    double gn = 0.0;
    for (double v : g) gn += v * v;
    if (gn < 1e-20) break;
    double step = 0.1 / (1.0 + std::sqrt(gn));
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      std::vector<double> xn(x);
      for (int i = 0; i < n; ++i) xn[i] -= step * g[i];
      if (pullback(xn)) {
        const double fn = inst.objective.evaluate(xn);
        if (fn < fx - 1e-12) {
          x = std::move(xn);
          fx = fn;
          moved = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

// Crude feasible-box radius from the constraint data: a constraint with
// positive pure m-th power coefficients bounds those coordinates.
inline double start_radius(const PopInstance& inst) {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& f : inst.constraints) {
    double amax = 0.0;
    for (int i = 0; i < inst.n; ++i)
      amax = std::max(amax, f.coeff(Exponent::unit(inst.n, i, inst.m)));
    if (amax > 0.0) {
      const double c = std::abs(f.constant_term()) + 1.0;
      r = std::min(r, std::pow(c / amax, 1.0 / inst.m) * 1.5);
    }
  }
  if (!std::isfinite(r)) r = 2.0;
  return std::clamp(r, 1.0, 10.0);
}

}  // namespace detail

/// Independent verification oracle: multi-start penalized gradient descent
/// (plus an optional coarse grid for n <= 3), returning the best point with
/// constraint violation at most 1e-8. Deterministic under a fixed seed.
inline OracleResult oracle_minimize(const PopInstance& inst, const OracleBudget& budget = {}) {
  OracleResult best;
  const double radius = detail::start_radius(inst);
  std::mt19937_64 rng(budget.seed);
  std::uniform_real_distribution<double> unif(-radius, radius);

  std::vector<std::vector<double>> starts;
  starts.emplace_back(inst.n, 0.0);
  for (int s = 0; s < budget.starts; ++s) {
    std::vector<double> x(inst.n);
    for (double& v : x) v = unif(rng);
    starts.push_back(std::move(x));
  }
  if (budget.grid && inst.n <= 3) {
    const int g = std::max(2, *budget.grid);
    std::vector<std::vector<double>> grid_pts;
    std::vector<int> idx(inst.n, 0);
    while (true) {
      std::vector<double> x(inst.n);
      for (int i = 0; i < inst.n; ++i)
        x[i] = -radius + 2.0 * radius * idx[i] / (g - 1);
      grid_pts.push_back(std::move(x));
      int k = inst.n - 1;
      while (k >= 0 && ++idx[k] == g) idx[k--] = 0;
      if (k < 0) break;
    }
    // Keep the most promising grid points as extra descent starts.
    std::stable_sort(grid_pts.begin(), grid_pts.end(),
                     [&](const std::vector<double>& a, const std::vector<double>& b) {
                       return detail::penalized_value(inst, a, 1e4) <
                              detail::penalized_value(inst, b, 1e4);
                     });
    for (std::size_t i = 0; i < std::min<std::size_t>(grid_pts.size(), 16); ++i)
      starts.push_back(grid_pts[i]);
  }

  for (auto& x0 : starts) {
    std::vector<double> x = detail::descend(inst, std::move(x0), budget.iters_per_stage);
    x = detail::boundary_polish(inst, std::move(x));
    double viol = inst.max_constraint_value(x);
    if (viol > 1e-8) {
      // Pull back toward the best known strictly feasible anchor (the origin
      // qualifies for every instance in scope with f_l(0) < 0).
      std::vector<double> anchor(inst.n, 0.0);
      if (inst.max_constraint_value(anchor) < 0.0) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          std::vector<double> xm(inst.n);
          for (int i = 0; i < inst.n; ++i) xm[i] = anchor[i] + mid * (x[i] - anchor[i]);
          (inst.max_constraint_value(xm) <= 1e-10 ? lo : hi) = mid;
        }
        for (int i = 0; i < inst.n; ++i) x[i] = anchor[i] + lo * (x[i] - anchor[i]);
        viol = inst.max_constraint_value(x);
      }
    }
    if (viol <= 1e-8) {
      const double v = inst.objective.evaluate(x);
      if (v < best.value) {
        best.found = true;
        best.value = v;
        best.point = x;
      }
    }
  }
  return best;
}

/// Feasibility + objective match against the proven lower bound mu*:
/// f_l(x) <= 1e-6 for all l and f_0(x) <= mu* + 1e-4 (1+|mu*|) certify x as a
/// global minimizer within tolerance.
inline PopValidation validate_solution(const PopInstance& inst, const std::vector<double>& x,
                                       double mu) {
  for (const auto& f : inst.constraints)
    if (f.evaluate(x) > 1e-6) return PopValidation::BoundOnly;
  if (inst.objective.evaluate(x) > mu + 1e-4 * (1.0 + std::abs(mu)))
    return PopValidation::BoundOnly;
  return PopValidation::ExactSolutionRecovered;
}

/// Structured form of the conic program over U_{m,n+1}: the homogenized
/// tensors, the index of the normalized diagonal entry, and the note that
/// membership is only outer-approximated by the moment relaxation.
struct ConicRelaxation {
  std::vector<SymmetricTensor> homogenized;  // F~_0 .. F~_p in dimension n+1
  int normalization_index = 0;               // diagonal entry fixed to one
  std::string note;
};

inline ConicRelaxation build_conic_relaxation(const PopInstance& inst) {
  ConicRelaxation rel;
  rel.homogenized.push_back(tensor_from_polynomial(homogenize(inst.objective, inst.m), inst.m));
  for (const auto& f : inst.constraints)
    rel.homogenized.push_back(tensor_from_polynomial(homogenize(f, inst.m), inst.m));
  rel.normalization_index = inst.n;  // the homogenization variable, zero-based
  rel.note =
      "membership in the rank-one-sum cone is NP-hard in general; this data is "
      "outer-approximated by the moment side of the degree-m SOS relaxation";
  return rel;
}

namespace detail {

inline std::vector<int> odd_exponent_variables(const PopInstance& inst) {
  std::vector<bool> odd(inst.n, false);
  auto scan = [&](const Polynomial& f) {
    for (const auto& [a, c] : f.terms())
      for (int i = 0; i < inst.n; ++i)
        if (a[i] % 2 == 1) odd[i] = true;
  };
  scan(inst.objective);
  for (const auto& f : inst.constraints) scan(f);
  std::vector<int> vars;
  for (int i = 0; i < inst.n; ++i)
    if (odd[i]) vars.push_back(i);
  return vars;
}

}  // namespace detail

/// Degree-m SOS relaxation max{mu : f_0 + sum lambda_l f_l - mu is SOS},
/// with minimizer recovery from the dual moments by diagonal m-th roots,
/// sign refinement, and validation. Exact on ENP instances with a strictly
/// feasible point.
inline PopReport solve_exact_sos(const PopInstance& inst, const PopSettings& settings = {}) {
  PopReport report;

  OracleResult oracle;
  if (settings.run_oracle) {
    oracle = oracle_minimize(inst, settings.oracle);
    if (oracle.found) {
      report.oracle_value = oracle.value;
      report.oracle_point = oracle.point;
    }
  }

  // Slater check: supplied point, the origin, or the oracle's best point.
  auto strictly_feasible = [&](const std::vector<double>& x) {
    for (const auto& f : inst.constraints)
      if (!(f.evaluate(x) < -1e-9)) return false;
    return true;
  };
  if (settings.slater_point && strictly_feasible(*settings.slater_point))
    report.slater_verified = true;
  else if (strictly_feasible(std::vector<double>(inst.n, 0.0)))
    report.slater_verified = true;
  else if (oracle.found && strictly_feasible(oracle.point))
    report.slater_verified = true;
  if (inst.constraints.empty()) report.slater_verified = true;

  SosProgram prog;
  prog.n = inst.n;
  prog.m = inst.m;
  prog.homogeneous = false;
  prog.base = inst.objective;
  prog.thetas.push_back({"mu", Polynomial::constant(inst.n, -1.0), /*nonneg=*/false, 1.0});
  for (std::size_t l = 0; l < inst.constraints.size(); ++l)
    prog.thetas.push_back(
        {"lambda" + std::to_string(l + 1), inst.constraints[l], /*nonneg=*/true, 0.0});

  AssembledSosProgram assembled(prog);
  if (settings.dump_sdp_path) dump_problem(assembled.sdp(), *settings.dump_sdp_path);
  auto solved = assembled.solve(settings.sdp);
  report.solver_status = solved.status;
  report.moments = solved.moments;

  if (solved.status == SdpStatus::PrimalInfeasibleLikely ||
      solved.status == SdpStatus::DualInfeasibleLikely) {
    report.validation = PopValidation::Unbounded;
    report.message = std::string("relaxation solver reports ") + to_string(solved.status);
    return report;
  }
  if (solved.status != SdpStatus::Optimal) {
    report.validation = PopValidation::Indeterminate;
    report.message = std::string("solver status ") + to_string(solved.status);
    return report;
  }

  const double mu = solved.objective;
  report.bound = mu;
  report.multipliers.assign(inst.constraints.size(), 0.0);
  for (std::size_t l = 0; l < inst.constraints.size(); ++l)
    report.multipliers[l] = std::max(0.0, solved.theta[l + 1]);

  if (oracle.found) {
    const double cap = oracle.value + 1e3 * (1.0 + std::abs(oracle.value));
    if (mu > cap) {
      report.validation = PopValidation::Unbounded;
      report.message = "bound exceeded the oracle cap; treating the relaxation as divergent";
      return report;
    }
  }

  // Certificate sigma_0 = f_0 + sum lambda f_l - mu*.
  {
    Polynomial target = inst.objective;
    for (std::size_t l = 0; l < inst.constraints.size(); ++l)
      target += inst.constraints[l].scaled(report.multipliers[l]);
    target.add_term(Exponent::zero(inst.n), -mu);
    SosCertificate cert;
    cert.basis = assembled.basis();
    try {
      cert.squares = extract_decomposition(solved.gram, cert.basis);
    } catch (const std::domain_error&) {
      cert.squares.clear();
    }
    cert.gram = Eigen::MatrixXd::Zero(cert.basis.size(), cert.basis.size());
    for (const Polynomial& g : cert.squares) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(cert.basis.size());
      for (const auto& [a, c] : g.terms()) v[cert.basis.index.at(a)] = c;
      cert.gram += v * v.transpose();
    }
    cert.residual = reconstruction_residual(target, cert.squares);
    report.sigma = std::move(cert);
  }

  // Moment-based recovery: x_i = (y_{m e_i})^{1/m}, then sign refinement.
  std::vector<double> xbar(inst.n, 0.0);
  bool moments_ok = true;
  for (int i = 0; i < inst.n; ++i) {
    const double d = solved.moments.value(Exponent::unit(inst.n, i, inst.m));
    if (d < -1e-8) {
      moments_ok = false;
      break;
    }
    xbar[i] = d < 1e-8 ? 0.0 : std::pow(d, 1.0 / inst.m);
  }

  report.validation = PopValidation::BoundOnly;
  if (moments_ok) {
    std::vector<std::vector<double>> candidates;
    const std::vector<int> flip_vars = detail::odd_exponent_variables(inst);
    if (flip_vars.size() <= 12) {
      const std::size_t patterns = std::size_t{1} << flip_vars.size();
      for (std::size_t mask = 0; mask < patterns; ++mask) {
        std::vector<double> x = xbar;
        for (std::size_t k = 0; k < flip_vars.size(); ++k)
          if (mask & (std::size_t{1} << k)) x[flip_vars[k]] = -x[flip_vars[k]];
        candidates.push_back(std::move(x));
      }
    } else {
      candidates.push_back(xbar);
    }

    double best_val = std::numeric_limits<double>::infinity();
    std::optional<std::vector<double>> best;
    for (const auto& x : candidates) {
      if (validate_solution(inst, x, mu) == PopValidation::ExactSolutionRecovered) {
        const double v = inst.objective.evaluate(x);
        if (v < best_val) {
          best_val = v;
          best = x;
        }
      }
    }
    if (!best) {
      // Local descent from the diagonal-root point as a last refinement.
      std::vector<double> x = detail::descend(inst, xbar, settings.oracle.iters_per_stage);
      if (validate_solution(inst, x, mu) == PopValidation::ExactSolutionRecovered) best = x;
    }
    if (best) {
      report.recovered = *best;
      report.validation = PopValidation::ExactSolutionRecovered;
    } else {
      report.recovered = xbar;  // reported, but downgraded
    }
  }

  if (oracle.found && report.validation != PopValidation::ExactSolutionRecovered &&
      oracle.value - mu > 1e-3 * (1.0 + std::abs(mu))) {
    report.gap_flag = true;
  }
  return report;
}

}  // namespace tensoralt

#endif  // TENSORALT_POPT_HPP
