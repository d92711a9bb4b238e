#ifndef TENSORALT_TESTS_HELPERS_HPP
#define TENSORALT_TESTS_HELPERS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <vector>

#include "tensoralt/poly.hpp"
#include "tensoralt/tensor.hpp"

namespace testutil {

using tensoralt::Exponent;
using tensoralt::Polynomial;
using tensoralt::SymmetricTensor;

// x3^6 + x1^2 x2^4 + x1^4 x2^2 - 3 x1^2 x2^2 x3^2 in n variables (n >= 3).
inline Polynomial motzkin(int n = 3) {
  Polynomial f(n);
  auto e = [n](std::vector<int> v) {
    v.resize(n, 0);
    return Exponent(std::move(v));
  };
  f.add_term(e({0, 0, 6}), 1.0);
  f.add_term(e({2, 4, 0}), 1.0);
  f.add_term(e({4, 2, 0}), 1.0);
  f.add_term(e({2, 2, 2}), -3.0);
  return f;
}

// Robinson-style objective of the degree-6 ball-constrained example:
// sum x_i^6 - sum_{i != j} x_i^2 x_j^4.
inline Polynomial ep3_objective() {
  Polynomial f(3);
  auto e = [](std::vector<int> v) { return Exponent(std::move(v)); };
  f.add_term(e({6, 0, 0}), 1.0);
  f.add_term(e({0, 6, 0}), 1.0);
  f.add_term(e({0, 0, 6}), 1.0);
  f.add_term(e({2, 4, 0}), -1.0);
  f.add_term(e({2, 0, 4}), -1.0);
  f.add_term(e({4, 2, 0}), -1.0);
  f.add_term(e({0, 2, 4}), -1.0);
  f.add_term(e({4, 0, 2}), -1.0);
  f.add_term(e({0, 4, 2}), -1.0);
  return f;
}

inline Polynomial lm_ball_constraint(int n, int m) {
  Polynomial f(n);
  for (int i = 0; i < n; ++i) f.add_term(Exponent::unit(n, i, m), 1.0);
  f.add_term(Exponent::zero(n), -1.0);
  return f;
}

// Full-index-tuple inner product: sums A_t * B_t over all n^m tuples,
// independent of the multiplicity-weighted implementation.
inline double inner_bruteforce(const SymmetricTensor& a, const SymmetricTensor& b) {
  const int n = a.dim();
  const int m = a.order();
  std::vector<int> tuple(m, 1);
  double total = 0.0;
  while (true) {
    std::vector<int> sorted = tuple;
    std::sort(sorted.begin(), sorted.end());
    Exponent alpha = tensoralt::tuple_to_exponent(sorted, n);
    total += a.entry(alpha) * b.entry(alpha);
    int k = m - 1;
    while (k >= 0 && tuple[k] == n) tuple[k--] = 1;
    if (k < 0) break;
    ++tuple[k];
  }
  return total;
}

// Entry-by-entry transform oracle: B_{i_1..i_m} = sum P_{i_1 j_1}...P_{i_m j_m} A_{j_1..j_m}.
inline SymmetricTensor transform_bruteforce(const std::vector<std::vector<double>>& p,
                                            const SymmetricTensor& a) {
  const int n = a.dim();
  const int m = a.order();
  SymmetricTensor out(m, n);
  for (const Exponent& alpha : tensoralt::enumerate_monomials(n, m, tensoralt::EnumMode::Exact)) {
    std::vector<int> itup = tensoralt::exponent_to_canonical_tuple(alpha);
    std::vector<int> jtup(m, 1);
    double value = 0.0;
    while (true) {
      double prod = 1.0;
      for (int k = 0; k < m; ++k) prod *= p[itup[k] - 1][jtup[k] - 1];
      std::vector<int> sorted = jtup;
      std::sort(sorted.begin(), sorted.end());
      prod *= a.entry(tensoralt::tuple_to_exponent(sorted, n));
      value += prod;
      int k = m - 1;
      while (k >= 0 && jtup[k] == n) jtup[k--] = 1;
      if (k < 0) break;
      ++jtup[k];
    }
    out.set_entry(alpha, value);
  }
  return out;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, int n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> x(n);
  for (double& v : x) v = dist(rng);
  return x;
}

inline std::vector<std::vector<double>> random_matrix(std::mt19937_64& rng, int n,
                                                      double lo = -1.0, double hi = 1.0) {
  std::vector<std::vector<double>> p(n);
  for (auto& row : p) row = random_vector(rng, n, lo, hi);
  return p;
}

// Random essentially nonpositive homogeneous tensor: arbitrary diagonal,
// nonpositive off-diagonal entries.
inline SymmetricTensor random_enp_tensor(std::mt19937_64& rng, int n, int m,
                                         double diag_lo = -1.0, double diag_hi = 1.0) {
  std::uniform_real_distribution<double> diag(diag_lo, diag_hi);
  std::uniform_real_distribution<double> off(-1.0, 0.0);
  std::uniform_real_distribution<double> keep(0.0, 1.0);
  SymmetricTensor t(m, n);
  for (const Exponent& a : tensoralt::enumerate_monomials(n, m, tensoralt::EnumMode::Exact)) {
    if (a.is_pure_power()) {
      t.set_entry(a, diag(rng));
    } else if (keep(rng) < 0.6) {
      t.set_entry(a, off(rng));
    }
  }
  return t;
}

// Explicit rank-one sum with at most I(m,n) terms; certified member of the
// rank-one-sum cone by construction.
inline SymmetricTensor random_rank_one_sum(std::mt19937_64& rng, int n, int m, int terms) {
  SymmetricTensor x(m, n);
  for (int j = 0; j < terms; ++j) {
    x += tensoralt::rank_one(random_vector(rng, n), m);
  }
  return x;
}

// max over the simplex of lambda_min(sum lambda_l A_l); the map lambda ->
// lambda_min is concave, so a multilevel grid converges to the global
// maximum. Sign decides between the two statements of the matrix
// alternative: >= 0 means some convex combination is PSD.
inline double simplex_min_eig_max(const std::vector<Eigen::MatrixXd>& mats) {
  const int k = static_cast<int>(mats.size());
  auto min_eig_at = [&](const std::vector<double>& lambda) {
    Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(mats[0].rows(), mats[0].cols());
    for (int l = 0; l < k; ++l) combo += lambda[l] * mats[l];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(combo, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  };

  std::vector<double> best(k, 1.0 / k);
  double best_val = min_eig_at(best);

  // Coarse pass at resolution 0.05, then shrinking local grids.
  const int coarse = 20;
  std::vector<int> idx(k - 1, 0);
  if (k == 1) return min_eig_at({1.0});
  while (true) {
    int used = 0;
    for (int v : idx) used += v;
    if (used <= coarse) {
      std::vector<double> lambda(k, 0.0);
      for (int l = 0; l < k - 1; ++l) lambda[l] = static_cast<double>(idx[l]) / coarse;
      lambda[k - 1] = static_cast<double>(coarse - used) / coarse;
      const double v = min_eig_at(lambda);
      if (v > best_val) {
        best_val = v;
        best = lambda;
      }
    }
    int pos = k - 2;
    while (pos >= 0 && ++idx[pos] > coarse) idx[pos--] = 0;
    if (pos < 0) break;
  }

  double radius = 1.0 / coarse;
  for (int level = 0; level < 4; ++level) {
    const int steps = 10;
    std::vector<int> off(k - 1, -steps);
    while (true) {
      std::vector<double> lambda(k, 0.0);
      double sum = 0.0;
      bool valid = true;
      for (int l = 0; l < k - 1 && valid; ++l) {
        lambda[l] = best[l] + radius * off[l] / steps;
        if (lambda[l] < 0.0 || lambda[l] > 1.0) valid = false;
        sum += lambda[l];
      }
      if (valid) {
        lambda[k - 1] = 1.0 - sum;
        if (lambda[k - 1] >= 0.0) {
          const double v = min_eig_at(lambda);
          if (v > best_val) {
            best_val = v;
            best = lambda;
          }
        }
      }
      int pos = k - 2;
      while (pos >= 0 && ++off[pos] > steps) off[pos--] = -steps;
      if (pos < 0) break;
    }
    radius /= steps;
  }
  return best_val;
}

}  // namespace testutil

#endif  // TENSORALT_TESTS_HELPERS_HPP
