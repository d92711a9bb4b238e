#ifndef TENSORALT_TENSOR_HPP
#define TENSORALT_TENSOR_HPP

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "tensoralt/multiindex.hpp"
#include "tensoralt/poly.hpp"

namespace tensoralt {

enum class EssentialSign { Nonpositive, Nonnegative, Both, Neither };

/// Even-order symmetric tensor stored sparsely: one representative value per
/// exponent alpha with |alpha| = m; all index permutations share it. The
/// full inner product over n^m index tuples collapses to a multiplicity-
/// weighted sum over exponents.
class SymmetricTensor {
 public:
  using EntryMap = std::map<Exponent, double, GrlexLess>;

  SymmetricTensor() = default;
  SymmetricTensor(int order, int dim) : m_(order), n_(dim) {
    if (order <= 0 || order % 2 != 0)
      throw std::invalid_argument("SymmetricTensor: order must be even and positive");
    if (dim < 1) throw std::invalid_argument("SymmetricTensor: dim must be >= 1");
  }

  int order() const { return m_; }
  int dim() const { return n_; }
  const EntryMap& entries() const { return entries_; }

  double entry(const Exponent& alpha) const {
    auto it = entries_.find(alpha);
    return it == entries_.end() ? 0.0 : it->second;
  }

  void set_entry(const Exponent& alpha, double v) {
    if (alpha.dim() != n_ || alpha.degree() != m_)
      throw std::invalid_argument("SymmetricTensor::set_entry: bad exponent");
    if (v == 0.0)
      entries_.erase(alpha);
    else
      entries_[alpha] = v;
  }

  void add_entry(const Exponent& alpha, double v) { set_entry(alpha, entry(alpha) + v); }

  SymmetricTensor& operator+=(const SymmetricTensor& o) {
    require_same_shape(o);
    for (const auto& [a, v] : o.entries_) add_entry(a, v);
    return *this;
  }

  SymmetricTensor operator+(const SymmetricTensor& o) const {
    SymmetricTensor r(*this);
    r += o;
    return r;
  }

  SymmetricTensor scaled(double s) const {
    SymmetricTensor r(m_, n_);
    if (s == 0.0) return r;
    for (const auto& [a, v] : entries_) r.entries_[a] = s * v;
    return r;
  }

  void require_same_shape(const SymmetricTensor& o) const {
    if (o.m_ != m_ || o.n_ != n_)
      throw std::invalid_argument("SymmetricTensor: order/dimension mismatch");
  }

 private:
  int m_ = 2;
  int n_ = 1;
  EntryMap entries_;
};

/// x^{tensor m}: entry at alpha is prod_i x_i^{alpha_i}.
inline SymmetricTensor rank_one(const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size());
  SymmetricTensor t(m, n);
  for (const Exponent& a : enumerate_monomials(n, m, EnumMode::Exact)) {
    double v = 1.0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < a[i]; ++k) v *= x[i];
    if (v != 0.0) t.set_entry(a, v);
  }
  return t;
}

/// <A,B> = sum over all index tuples; per exponent that is multiplicity * A * B.
inline double inner(const SymmetricTensor& a, const SymmetricTensor& b) {
  a.require_same_shape(b);
  // Iterate over the sparser map.
  const SymmetricTensor& small = a.entries().size() <= b.entries().size() ? a : b;
  const SymmetricTensor& large = a.entries().size() <= b.entries().size() ? b : a;
  double total = 0.0;
  for (const auto& [alpha, v] : small.entries()) {
    double w = large.entry(alpha);
    if (w != 0.0) total += static_cast<double>(multiplicity(alpha)) * v * w;
  }
  return total;
}

inline double frobenius_norm(const SymmetricTensor& a) { return std::sqrt(inner(a, a)); }

/// Homogeneous form f_A(x) = <A, x^{tensor m}> evaluated directly from the
/// sparse entries.
inline double evaluate(const SymmetricTensor& a, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != a.dim())
    throw std::invalid_argument("evaluate: length mismatch");
  double total = 0.0;
  for (const auto& [alpha, v] : a.entries()) {
    double mono = static_cast<double>(multiplicity(alpha)) * v;
    for (int i = 0; i < a.dim(); ++i)
      for (int k = 0; k < alpha[i]; ++k) mono *= x[i];
    total += mono;
  }
  return total;
}

/// Unique homogeneous polynomial with f(x) = <A, x^{tensor m}>.
inline Polynomial polynomial_from_tensor(const SymmetricTensor& a) {
  Polynomial f(a.dim());
  for (const auto& [alpha, v] : a.entries())
    f.add_term(alpha, static_cast<double>(multiplicity(alpha)) * v);
  return f;
}

/// Inverse of polynomial_from_tensor; f must be homogeneous of even degree m.
inline SymmetricTensor tensor_from_polynomial(const Polynomial& f, int m) {
  if (!f.is_homogeneous(m))
    throw std::invalid_argument("tensor_from_polynomial: polynomial not homogeneous of degree m");
  SymmetricTensor t(m, f.dim());
  for (const auto& [alpha, c] : f.terms())
    t.set_entry(alpha, c / static_cast<double>(multiplicity(alpha)));
  return t;
}

/// B = P^m A, defined by <B, x^{tensor m}> = <A, (P^T x)^{tensor m}>.
/// Computed by substituting the linear forms of P^T into f_A and re-expanding,
/// which is algebraically the full n^{2m} entry sum.
inline SymmetricTensor transform(const std::vector<std::vector<double>>& p,
                                 const SymmetricTensor& a) {
  const int n = a.dim();
  if (static_cast<int>(p.size()) != n)
    throw std::invalid_argument("transform: matrix dimension mismatch");
  for (const auto& row : p)
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("transform: matrix must be square");
  // (P^T x)_i = sum_j P_{ji} x_j.
  std::vector<std::vector<double>> pt(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) pt[i][j] = p[j][i];
  Polynomial f = polynomial_from_tensor(a).substitute_linear(pt);
  return tensor_from_polynomial(f, a.order());
}

/// Sign classification over the off-diagonal entries (alpha != m*e_i).
/// `rel_tol` treats entries within rel_tol * max|entry| as zero; the default
/// is an exact sign test, while callers classifying transformed tensors pass
/// a small tolerance to absorb re-expansion roundoff.
inline EssentialSign classify_essential_sign(const SymmetricTensor& a, double rel_tol = 0.0) {
  double scale = 0.0;
  for (const auto& [alpha, v] : a.entries()) scale = std::max(scale, std::abs(v));
  const double cut = rel_tol * scale;
  bool has_pos = false, has_neg = false;
  for (const auto& [alpha, v] : a.entries()) {
    if (alpha.is_pure_power()) continue;
    if (v > cut) has_pos = true;
    if (v < -cut) has_neg = true;
  }
  if (!has_pos && !has_neg) return EssentialSign::Both;
  if (!has_pos) return EssentialSign::Nonpositive;
  if (!has_neg) return EssentialSign::Nonnegative;
  return EssentialSign::Neither;
}

inline bool is_essentially_nonpositive(const SymmetricTensor& a, double rel_tol = 0.0) {
  EssentialSign s = classify_essential_sign(a, rel_tol);
  return s == EssentialSign::Nonpositive || s == EssentialSign::Both;
}

/// Recovery vector of diagonal m-th roots: x_i = (X_{i...i})^{1/m}. Entries
/// within tol of zero are clamped to zero; entries below -tol reject the
/// input as a moment/rank-one-sum tensor.
inline std::vector<double> diagonal_root_vector(const SymmetricTensor& x, double tol = 1e-8) {
  const int n = x.dim();
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) {
    double d = x.entry(Exponent::unit(n, i, x.order()));
    if (d < -tol)
      throw std::domain_error("diagonal_root_vector: negative diagonal entry " +
                              std::to_string(d));
    r[i] = d < tol ? 0.0 : std::pow(d, 1.0 / x.order());
  }
  return r;
}

}  // namespace tensoralt

#endif  // TENSORALT_TENSOR_HPP
