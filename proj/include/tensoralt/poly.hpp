#ifndef TENSORALT_POLY_HPP
#define TENSORALT_POLY_HPP

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tensoralt/multiindex.hpp"

namespace tensoralt {

/// Sparse multivariate polynomial with real coefficients, keyed by exponent
/// in grlex order. Zero coefficients are pruned on construction and after
/// every mutation, so the stored support is exact.
class Polynomial {
 public:
  using TermMap = std::map<Exponent, double, GrlexLess>;

  Polynomial() = default;
  explicit Polynomial(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("Polynomial: n must be >= 1");
  }

  static Polynomial constant(int n, double c) {
    Polynomial p(n);
    p.add_term(Exponent::zero(n), c);
    return p;
  }

  static Polynomial monomial(int n, const Exponent& alpha, double c) {
    Polynomial p(n);
    if (alpha.dim() != n) throw std::invalid_argument("Polynomial::monomial: dimension mismatch");
    p.add_term(alpha, c);
    return p;
  }

  int dim() const { return n_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [a, c] : terms_) d = std::max(d, a.degree());
    return d;
  }

  double coeff(const Exponent& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? 0.0 : it->second;
  }

  double constant_term() const { return coeff(Exponent::zero(n_)); }

  void add_term(const Exponent& alpha, double c) {
    if (alpha.dim() != n_) throw std::invalid_argument("Polynomial::add_term: dimension mismatch");
    double& v = terms_[alpha];
    v += c;
    if (v == 0.0) terms_.erase(alpha);
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.n_ != n_) throw std::invalid_argument("Polynomial+=: dimension mismatch");
    for (const auto& [a, c] : o.terms_) add_term(a, c);
    return *this;
  }

  Polynomial operator+(const Polynomial& o) const {
    Polynomial r(*this);
    r += o;
    return r;
  }

  Polynomial operator-(const Polynomial& o) const { return *this + o.scaled(-1.0); }

  Polynomial scaled(double s) const {
    Polynomial r(n_);
    if (s == 0.0) return r;
    for (const auto& [a, c] : terms_) r.terms_[a] = s * c;
    return r;
  }

  Polynomial operator*(const Polynomial& o) const {
    if (o.n_ != n_) throw std::invalid_argument("Polynomial*: dimension mismatch");
    Polynomial r(n_);
    for (const auto& [a, ca] : terms_)
      for (const auto& [b, cb] : o.terms_) r.add_term(a + b, ca * cb);
    return r;
  }

  double evaluate(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != n_)
      throw std::invalid_argument("Polynomial::evaluate: length mismatch");
    double total = 0.0;
    for (const auto& [a, c] : terms_) {
      double mono = c;
      for (int i = 0; i < n_; ++i)
        for (int k = 0; k < a[i]; ++k) mono *= x[i];
      total += mono;
    }
    return total;
  }

  /// Coefficient-wise gradient: d/dx_i as a polynomial.
  Polynomial partial(int i) const {
    Polynomial r(n_);
    for (const auto& [a, c] : terms_) {
      if (a[i] == 0) continue;
      std::vector<int> b = a.values();
      --b[i];
      r.add_term(Exponent(std::move(b)), c * a[i]);
    }
    return r;
  }

  std::vector<double> gradient(const std::vector<double>& x) const {
    std::vector<double> g(n_, 0.0);
    for (const auto& [a, c] : terms_) {
      for (int i = 0; i < n_; ++i) {
        if (a[i] == 0) continue;
        double mono = c * a[i];
        for (int j = 0; j < n_; ++j) {
          int e = a[j] - (j == i ? 1 : 0);
          for (int k = 0; k < e; ++k) mono *= x[j];
        }
        g[i] += mono;
      }
    }
    return g;
  }

  /// Substitute x_i <- sum_j L[i][j] x'_j and re-expand.
  Polynomial substitute_linear(const std::vector<std::vector<double>>& L) const {
    if (static_cast<int>(L.size()) != n_)
      throw std::invalid_argument("substitute_linear: row count mismatch");
    const int n_out = L.empty() ? n_ : static_cast<int>(L[0].size());
    std::vector<Polynomial> forms;
    forms.reserve(n_);
    for (int i = 0; i < n_; ++i) {
      if (static_cast<int>(L[i].size()) != n_out)
        throw std::invalid_argument("substitute_linear: ragged matrix");
      Polynomial f(n_out);
      for (int j = 0; j < n_out; ++j) f.add_term(Exponent::unit(n_out, j, 1), L[i][j]);
      forms.push_back(std::move(f));
    }
    Polynomial out(n_out);
    for (const auto& [a, c] : terms_) {
      Polynomial term = Polynomial::constant(n_out, c);
      for (int i = 0; i < n_; ++i)
        for (int k = 0; k < a[i]; ++k) term = term * forms[i];
      out += term;
    }
    return out;
  }

  bool is_homogeneous(int d) const {
    for (const auto& [a, c] : terms_)
      if (a.degree() != d) return false;
    return true;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [a, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  std::string to_string(const std::string& var = "x") const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto& [a, c] : terms_) {
      double v = c;
      if (first) {
        if (v < 0) { s += "-"; v = -v; }
      } else {
        s += v < 0 ? " - " : " + ";
        v = std::abs(v);
      }
      first = false;
      std::string mono;
      for (int i = 0; i < n_; ++i) {
        if (a[i] == 0) continue;
        if (!mono.empty()) mono += "*";
        mono += var + std::to_string(i + 1);
        if (a[i] > 1) mono += "^" + std::to_string(a[i]);
      }
      const bool unit = std::abs(v - 1.0) < 1e-14;
      if (mono.empty()) {
        s += format_coeff(v);
      } else if (unit) {
        s += mono;
      } else {
        s += format_coeff(v) + "*" + mono;
      }
    }
    return s;
  }

 private:
  static std::string format_coeff(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
  }

  int n_ = 0;
  TermMap terms_;
};

using ExponentSet = std::set<Exponent, GrlexLess>;

/// Omega_f: support of f excluding the pure m-th powers m*e_i. The constant
/// exponent 0 is a member whenever f(0) != 0.
inline ExponentSet omega_support(const Polynomial& f, int m) {
  if (f.degree() > m) throw std::invalid_argument("omega_support: deg f > m");
  ExponentSet s;
  for (const auto& [a, c] : f.terms()) {
    if (a.degree() == m && a.is_pure_power()) continue;
    s.insert(a);
  }
  return s;
}

/// Delta_f: members of Omega_f with a negative coefficient or an odd entry.
inline ExponentSet delta_support(const Polynomial& f, int m) {
  ExponentSet s;
  for (const Exponent& a : omega_support(f, m)) {
    if (f.coeff(a) < 0.0 || !a.all_even()) s.insert(a);
  }
  return s;
}

/// The diagonal-minus-tail companion: keeps the pure m-th powers, replaces
/// every Delta_f term by -|f_alpha| x^alpha, drops the rest of Omega_f.
inline Polynomial hat(const Polynomial& f, int m) {
  if (f.degree() > m) throw std::invalid_argument("hat: deg f > m");
  Polynomial h(f.dim());
  for (const auto& [a, c] : f.terms()) {
    if (a.degree() == m && a.is_pure_power()) h.add_term(a, c);
  }
  for (const Exponent& a : delta_support(f, m)) h.add_term(a, -std::abs(f.coeff(a)));
  return h;
}

/// True iff every coefficient outside the pure m-th powers and the constant
/// term is <= 0.
inline bool has_enp_coefficients(const Polynomial& f, int m) {
  if (f.degree() > m) throw std::invalid_argument("has_enp_coefficients: deg f > m");
  for (const auto& [a, c] : f.terms()) {
    if (a.degree() == 0) continue;
    if (a.degree() == m && a.is_pure_power()) continue;
    if (c > 0.0) return false;
  }
  return true;
}

/// Exponents that block the essentially-nonpositive property.
inline std::vector<Exponent> enp_violations(const Polynomial& f, int m) {
  std::vector<Exponent> v;
  for (const auto& [a, c] : f.terms()) {
    if (a.degree() == 0) continue;
    if (a.degree() == m && a.is_pure_power()) continue;
    if (c > 0.0) v.push_back(a);
  }
  return v;
}

/// Degree-m homogenization in n+1 variables: each term gains t^{m-|alpha|}
/// in the trailing slot.
inline Polynomial homogenize(const Polynomial& f, int m) {
  if (f.degree() > m) throw std::invalid_argument("homogenize: deg f > m");
  const int n = f.dim();
  Polynomial g(n + 1);
  for (const auto& [a, c] : f.terms()) {
    std::vector<int> b = a.values();
    b.push_back(m - a.degree());
    g.add_term(Exponent(std::move(b)), c);
  }
  return g;
}

/// Substitute t = 1 in the trailing variable.
inline Polynomial dehomogenize(const Polynomial& g) {
  const int n = g.dim() - 1;
  if (n < 1) throw std::invalid_argument("dehomogenize: needs at least 2 variables");
  Polynomial f(n);
  for (const auto& [a, c] : g.terms()) {
    std::vector<int> b(a.values().begin(), a.values().end() - 1);
    f.add_term(Exponent(std::move(b)), c);
  }
  return f;
}

}  // namespace tensoralt

#endif  // TENSORALT_POLY_HPP
