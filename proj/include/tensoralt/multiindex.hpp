#ifndef TENSORALT_MULTIINDEX_HPP
#define TENSORALT_MULTIINDEX_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tensoralt {

/// Multi-index over n variables: the exponent vector of a monomial
/// x^alpha = x_1^{a_1} ... x_n^{a_n}, and the canonical key for one
/// independent entry of a symmetric tensor.
class Exponent {
 public:
  Exponent() = default;

  explicit Exponent(std::vector<int> alpha) : alpha_(std::move(alpha)) {
    for (int a : alpha_) {
      if (a < 0) throw std::invalid_argument("Exponent: negative entry");
    }
    degree_ = std::accumulate(alpha_.begin(), alpha_.end(), 0);
  }

  static Exponent zero(int n) { return Exponent(std::vector<int>(n, 0)); }

  // d * e_i, with i zero-based.
  static Exponent unit(int n, int i, int d) {
    std::vector<int> a(n, 0);
    if (i < 0 || i >= n) throw std::invalid_argument("Exponent::unit: index out of range");
    a[i] = d;
    return Exponent(std::move(a));
  }

  int dim() const { return static_cast<int>(alpha_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return alpha_[i]; }
  const std::vector<int>& values() const { return alpha_; }

  bool operator==(const Exponent& o) const { return alpha_ == o.alpha_; }
  bool operator!=(const Exponent& o) const { return alpha_ != o.alpha_; }

  Exponent operator+(const Exponent& o) const {
    if (dim() != o.dim()) throw std::invalid_argument("Exponent+: dimension mismatch");
    std::vector<int> a(alpha_);
    for (int i = 0; i < dim(); ++i) a[i] += o.alpha_[i];
    return Exponent(std::move(a));
  }

  // True iff alpha = degree * e_i for some i (a pure power), degree > 0.
  bool is_pure_power() const {
    int nonzero = 0;
    for (int a : alpha_) nonzero += (a > 0);
    return nonzero == 1;
  }

  // Index i of the pure power, or -1.
  int pure_power_index() const {
    int idx = -1;
    for (int i = 0; i < dim(); ++i) {
      if (alpha_[i] > 0) {
        if (idx >= 0) return -1;
        idx = i;
      }
    }
    return idx;
  }

  bool all_even() const {
    return std::all_of(alpha_.begin(), alpha_.end(), [](int a) { return a % 2 == 0; });
  }

  std::string to_string() const {
    std::string s = "(";
    for (int i = 0; i < dim(); ++i) {
      if (i) s += ",";
      s += std::to_string(alpha_[i]);
    }
    return s + ")";
  }

 private:
  std::vector<int> alpha_;
  int degree_ = 0;
};

/// Graded lexicographic order: lower total degree first; within a degree,
/// lexicographically larger exponent vectors first, so that for n=2, d=2 the
/// sequence reads (2,0), (1,1), (0,2).
struct GrlexLess {
  bool operator()(const Exponent& a, const Exponent& b) const {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    return std::lexicographical_compare(b.values().begin(), b.values().end(),
                                        a.values().begin(), a.values().end());
  }
};

inline bool grlex_less(const Exponent& a, const Exponent& b) { return GrlexLess{}(a, b); }

inline std::uint64_t binomial(int top, int bottom) {
  if (bottom < 0 || bottom > top) return 0;
  bottom = std::min(bottom, top - bottom);
  std::uint64_t r = 1;
  for (int i = 1; i <= bottom; ++i) {
    std::uint64_t next = r * static_cast<std::uint64_t>(top - bottom + i);
    if (next / static_cast<std::uint64_t>(top - bottom + i) != r)
      throw std::overflow_error("binomial: overflow");
    r = next / static_cast<std::uint64_t>(i);
  }
  return r;
}

/// Number of independent entries of an order-m symmetric tensor in dimension n,
/// equivalently the dimension of degree-m homogeneous polynomials: C(n+m-1, n-1).
inline std::uint64_t monomial_space_dim(int m, int n) { return binomial(n + m - 1, n - 1); }

enum class EnumMode { Exact, UpTo };

/// All exponents with |alpha| = d (Exact) or |alpha| <= d (UpTo) in grlex order.
inline std::vector<Exponent> enumerate_monomials(int n, int d, EnumMode mode) {
  if (n < 1) throw std::invalid_argument("enumerate_monomials: n must be >= 1");
  if (d < 0) throw std::invalid_argument("enumerate_monomials: d must be >= 0");
  std::vector<Exponent> out;
  const int dlo = (mode == EnumMode::Exact) ? d : 0;
  for (int deg = dlo; deg <= d; ++deg) {
    // Within a degree, descend from (deg,0,...,0): colex-style successor walk.
    std::vector<int> a(n, 0);
    a[0] = deg;
    while (true) {
      out.emplace_back(a);
      // Find rightmost position (excluding last) with a positive entry.
      int k = n - 2;
      while (k >= 0 && a[k] == 0) --k;
      if (k < 0) break;
      --a[k];
      int tail = a[n - 1] + 1;
      a[n - 1] = 0;
      a[k + 1] = tail;
    }
  }
  return out;
}

/// m! / prod(alpha_i!): number of index m-tuples whose multiset of values
/// matches alpha. Computed as a product of binomials to delay overflow;
/// overflow raises.
inline std::uint64_t multiplicity(const Exponent& alpha) {
  std::uint64_t r = 1;
  int seen = 0;
  for (int i = 0; i < alpha.dim(); ++i) {
    seen += alpha[i];
    std::uint64_t c = binomial(seen, alpha[i]);
    if (c != 0 && r > UINT64_MAX / c) throw std::overflow_error("multiplicity: overflow");
    r *= c;
  }
  return r;
}

/// Sorted 1-based index tuple -> exponent. (1,1,3) with n=3 maps to (2,0,1).
inline Exponent tuple_to_exponent(const std::vector<int>& tuple, int n) {
  std::vector<int> a(n, 0);
  for (int idx : tuple) {
    if (idx < 1 || idx > n) throw std::out_of_range("tuple_to_exponent: index out of range");
    ++a[idx - 1];
  }
  return Exponent(std::move(a));
}

/// Inverse of tuple_to_exponent on canonical (sorted) tuples.
inline std::vector<int> exponent_to_canonical_tuple(const Exponent& alpha) {
  std::vector<int> t;
  t.reserve(alpha.degree());
  for (int i = 0; i < alpha.dim(); ++i)
    for (int k = 0; k < alpha[i]; ++k) t.push_back(i + 1);
  return t;
}

}  // namespace tensoralt

#endif  // TENSORALT_MULTIINDEX_HPP
