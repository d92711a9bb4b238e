#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "tensoralt/tensor.hpp"

using namespace tensoralt;

TEST_CASE("rank_one entries") {
  auto t1 = rank_one({1.0, 0.0}, 2);
  CHECK(t1.entry(Exponent({2, 0})) == 1.0);
  CHECK(t1.entry(Exponent({1, 1})) == 0.0);
  CHECK(t1.entry(Exponent({0, 2})) == 0.0);

  auto t2 = rank_one({1.0, 1.0}, 2);
  CHECK(t2.entry(Exponent({2, 0})) == 1.0);
  CHECK(t2.entry(Exponent({1, 1})) == 1.0);
  CHECK(t2.entry(Exponent({0, 2})) == 1.0);

  auto t3 = rank_one({2.0, -1.0}, 4);
  CHECK(t3.entry(Exponent({3, 1})) == doctest::Approx(-8.0));
}

TEST_CASE("inner product equals the full tuple sum") {
  CHECK(inner(rank_one({1.0, 0.0}, 2), rank_one({0.0, 1.0}, 2)) == doctest::Approx(0.0));

  auto a = rank_one({1.0, 1.0}, 2);
  CHECK(inner(a, a) == doctest::Approx(4.0));

  std::mt19937_64 rng(17);
  for (int m : {2, 4, 6}) {
    for (int trial = 0; trial < 5; ++trial) {
      auto x = testutil::random_vector(rng, 3);
      auto y = testutil::random_vector(rng, 3);
      double dot = 0.0;
      for (int i = 0; i < 3; ++i) dot += x[i] * y[i];
      const double lhs = inner(rank_one(x, m), rank_one(y, m));
      CHECK(lhs == doctest::Approx(std::pow(dot, m)).epsilon(1e-10));
    }
  }

  // Independent oracle: enumerate all n^m index tuples.
  for (int trial = 0; trial < 5; ++trial) {
    auto a1 = testutil::random_enp_tensor(rng, 3, 4);
    auto a2 = testutil::random_rank_one_sum(rng, 3, 4, 3);
    CHECK(inner(a1, a2) == doctest::Approx(testutil::inner_bruteforce(a1, a2)).epsilon(1e-10));
  }

  CHECK_THROWS_AS(inner(rank_one({1.0, 1.0}, 2), rank_one({1.0, 1.0, 1.0}, 2)),
                  std::invalid_argument);
}

TEST_CASE("inner is symmetric, bilinear, positive definite") {
  std::mt19937_64 rng(23);
  auto a = testutil::random_rank_one_sum(rng, 2, 4, 3);
  auto b = testutil::random_enp_tensor(rng, 2, 4);
  auto c = testutil::random_enp_tensor(rng, 2, 4);
  CHECK(inner(a, b) == doctest::Approx(inner(b, a)));
  auto bc = b + c.scaled(2.5);
  CHECK(inner(a, bc) == doctest::Approx(inner(a, b) + 2.5 * inner(a, c)));
  CHECK(inner(a, a) > 0.0);
  SymmetricTensor zero(4, 2);
  CHECK(inner(zero, zero) == 0.0);
}

TEST_CASE("evaluate agrees with the rank-one pairing and the polynomial") {
  Polynomial fm = testutil::motzkin();
  auto am = tensor_from_polynomial(fm, 6);
  CHECK(evaluate(am, {1.0, 1.0, 1.0}) == doctest::Approx(0.0));

  std::mt19937_64 rng(29);
  auto a = testutil::random_enp_tensor(rng, 3, 4);
  CHECK(evaluate(a, {0.0, 0.0, 0.0}) == 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = testutil::random_vector(rng, 3);
    const double via_rank_one = inner(a, rank_one(x, 4));
    const double direct = evaluate(a, x);
    CHECK(direct == doctest::Approx(via_rank_one).epsilon(1e-12));
    CHECK(direct == doctest::Approx(polynomial_from_tensor(a).evaluate(x)).epsilon(1e-12));
  }
}

TEST_CASE("tensor/polynomial correspondence") {
  Polynomial f(2);
  f.add_term(Exponent({1, 1}), 1.0);
  auto a = tensor_from_polynomial(f, 2);
  CHECK(a.entry(Exponent({1, 1})) == doctest::Approx(0.5));

  Polynomial pure(3);
  pure.add_term(Exponent::unit(3, 0, 6), 1.0);
  CHECK(tensor_from_polynomial(pure, 6).entry(Exponent::unit(3, 0, 6)) == 1.0);

  std::mt19937_64 rng(31);
  auto t = testutil::random_enp_tensor(rng, 3, 6);
  Polynomial p = polynomial_from_tensor(t);
  auto back = tensor_from_polynomial(p, 6);
  for (const auto& [alpha, v] : t.entries())
    CHECK(back.entry(alpha) == doctest::Approx(v).epsilon(1e-12));

  Polynomial inhom(2);
  inhom.add_term(Exponent({2, 0}), 1.0);
  inhom.add_term(Exponent({1, 0}), 1.0);
  CHECK_THROWS_AS(tensor_from_polynomial(inhom, 2), std::invalid_argument);
}

TEST_CASE("transform: identity, matrix case, substitution identity") {
  std::mt19937_64 rng(37);
  auto a = testutil::random_enp_tensor(rng, 3, 4);
  std::vector<std::vector<double>> eye = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  auto b = transform(eye, a);
  for (const auto& [alpha, v] : a.entries()) CHECK(b.entry(alpha) == doctest::Approx(v));

  // m=2: P^2 A is the matrix product P A P^T.
  for (int trial = 0; trial < 10; ++trial) {
    auto p = testutil::random_matrix(rng, 3);
    auto t = testutil::random_enp_tensor(rng, 3, 2);
    auto pt = transform(p, t);
    // Dense matrix from the order-2 tensor.
    auto as_matrix = [](const SymmetricTensor& s) {
      std::vector<std::vector<double>> m(s.dim(), std::vector<double>(s.dim(), 0.0));
      for (int i = 0; i < s.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j)
          m[i][j] = s.entry(tuple_to_exponent({std::min(i, j) + 1, std::max(i, j) + 1}, s.dim()));
      return m;
    };
    auto am = as_matrix(t);
    const int n = 3;
    std::vector<std::vector<double>> expected(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) expected[i][j] += p[i][k] * am[k][l] * p[j][l];
    auto got = as_matrix(pt);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(got[i][j] == doctest::Approx(expected[i][j]).epsilon(1e-10));
  }

  // The defining identity <A,(P^T x)^m> = <P^m A, x^m>.
  for (int m : {2, 4}) {
    for (int trial = 0; trial < 10; ++trial) {
      auto p = testutil::random_matrix(rng, 3);
      auto t = testutil::random_rank_one_sum(rng, 3, m, 2);
      auto x = testutil::random_vector(rng, 3);
      std::vector<double> ptx(3, 0.0);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) ptx[i] += p[j][i] * x[j];
      const double lhs = evaluate(t, ptx);
      const double rhs = evaluate(transform(p, t), x);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }

  // Entrywise against the n^{2m} oracle at a small size.
  for (int trial = 0; trial < 3; ++trial) {
    auto p = testutil::random_matrix(rng, 2);
    auto t = testutil::random_enp_tensor(rng, 2, 4);
    auto fast = transform(p, t);
    auto slow = testutil::transform_bruteforce(p, t);
    for (const Exponent& alpha : enumerate_monomials(2, 4, EnumMode::Exact))
      CHECK(fast.entry(alpha) == doctest::Approx(slow.entry(alpha)).epsilon(1e-10));
  }

  // Composition: P(QA) = (PQ)A.
  for (int trial = 0; trial < 5; ++trial) {
    auto p = testutil::random_matrix(rng, 2);
    auto q = testutil::random_matrix(rng, 2);
    auto t = testutil::random_enp_tensor(rng, 2, 4);
    auto lhs = transform(p, transform(q, t));
    std::vector<std::vector<double>> pq(2, std::vector<double>(2, 0.0));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) pq[i][j] += p[i][k] * q[k][j];
    auto rhs = transform(pq, t);
    for (const Exponent& alpha : enumerate_monomials(2, 4, EnumMode::Exact))
      CHECK(lhs.entry(alpha) == doctest::Approx(rhs.entry(alpha)).epsilon(1e-10));
  }
}

TEST_CASE("essential sign classification") {
  auto am = tensor_from_polynomial(testutil::motzkin(), 6);
  CHECK(classify_essential_sign(am) == EssentialSign::Neither);
  CHECK_FALSE(is_essentially_nonpositive(am));

  SymmetricTensor diag(6, 3);
  for (int i = 0; i < 3; ++i) diag.set_entry(Exponent::unit(3, i, 6), 1.0);
  CHECK(classify_essential_sign(diag) == EssentialSign::Both);
  CHECK(is_essentially_nonpositive(diag));

  Polynomial ep2like(2);
  ep2like.add_term(Exponent({4, 0}), 1.0);
  ep2like.add_term(Exponent({0, 4}), 1.0);
  ep2like.add_term(Exponent({1, 3}), -4.0);
  CHECK(classify_essential_sign(tensor_from_polynomial(ep2like, 4)) ==
        EssentialSign::Nonpositive);

  Polynomial posoff(2);
  posoff.add_term(Exponent({4, 0}), -1.0);
  posoff.add_term(Exponent({2, 2}), 2.0);
  CHECK(classify_essential_sign(tensor_from_polynomial(posoff, 4)) == EssentialSign::Nonnegative);
}

TEST_CASE("diagonal root vector") {
  auto x1 = rank_one({2.0, 3.0}, 4);
  auto r1 = diagonal_root_vector(x1);
  CHECK(r1[0] == doctest::Approx(2.0));
  CHECK(r1[1] == doctest::Approx(3.0));

  auto x2 = rank_one({1.0, 0.0}, 2) + rank_one({0.0, 1.0}, 2);
  auto r2 = diagonal_root_vector(x2);
  CHECK(r2[0] == doctest::Approx(1.0));
  CHECK(r2[1] == doctest::Approx(1.0));

  SymmetricTensor third(6, 3);
  for (int i = 0; i < 3; ++i) third.set_entry(Exponent::unit(3, i, 6), 1.0 / 3.0);
  auto r3 = diagonal_root_vector(third);
  for (int i = 0; i < 3; ++i) CHECK(r3[i] == doctest::Approx(std::pow(3.0, -1.0 / 6.0)));

  SymmetricTensor bad(2, 2);
  bad.set_entry(Exponent({2, 0}), -1.0);
  CHECK_THROWS_AS(diagonal_root_vector(bad), std::domain_error);
}

TEST_CASE("generalized Hoelder inequality for ENP tensors") {
  std::mt19937_64 rng(41);
  for (int m : {2, 4, 6}) {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 2);
      auto x = testutil::random_rank_one_sum(
          rng, n, m, static_cast<int>(monomial_space_dim(m, n)));
      auto f = testutil::random_enp_tensor(rng, n, m);
      auto xbar = diagonal_root_vector(x);
      CHECK(evaluate(f, xbar) <= inner(f, x) + 1e-9);
    }
  }
}

TEST_CASE("duality sampling: rank-one sums pair nonnegatively with SOS tensors") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = (trial % 2 == 0) ? 2 : 4;
    auto x = testutil::random_rank_one_sum(rng, 3, m, 4);
    // Z built from explicit squares: sum of (v . monomials of degree m/2)^2.
    Polynomial z(3);
    for (int s = 0; s < 3; ++s) {
      Polynomial g(3);
      std::uniform_real_distribution<double> coef(-1.0, 1.0);
      for (const Exponent& b : enumerate_monomials(3, m / 2, EnumMode::Exact))
        g.add_term(b, coef(rng));
      z += g * g;
    }
    auto zt = tensor_from_polynomial(z, m);
    CHECK(inner(x, zt) >= -1e-9);
  }
}
