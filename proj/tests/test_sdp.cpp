#include <doctest.h>

#include <Eigen/Dense>
#include <random>
#include <sstream>

#include "tensoralt/sdp.hpp"

using namespace tensoralt;

namespace {

// Strictly complementary primal-dual pair with a known optimum: X* and S*
// share an eigenbasis with complementary supports, y* is random, and (C, b)
// are back-solved so that (X*, y*, S*) is optimal. The first constraint
// matrix is kept block-diagonal in that eigenbasis with a positive-definite
// leading block, so a strictly feasible dual point exists (S* + eps A_1 is
// PD); without that the optimal face can be unbounded and ill-posed.
struct KnownProblem {
  SdpProblem problem;
  double optimum = 0.0;
};

KnownProblem make_known_problem(std::mt19937_64& rng, int block, int ncon) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> pos(0.5, 2.0);

  Eigen::MatrixXd raw(block, block);
  for (int i = 0; i < block; ++i)
    for (int j = 0; j < block; ++j) raw(i, j) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd q = qr.householderQ();

  const int rank = 1 + static_cast<int>(rng() % (block - 1));
  Eigen::VectorXd xe = Eigen::VectorXd::Zero(block);
  Eigen::VectorXd se = Eigen::VectorXd::Zero(block);
  for (int i = 0; i < rank; ++i) xe[i] = pos(rng);
  for (int i = rank; i < block; ++i) se[i] = pos(rng);
  Eigen::MatrixXd xstar = q * xe.asDiagonal() * q.transpose();
  Eigen::MatrixXd sstar = q * se.asDiagonal() * q.transpose();

  KnownProblem kp;
  kp.problem.block_sizes = {block};
  std::vector<double> ystar(ncon);
  for (int k = 0; k < ncon; ++k) {
    BlockMatrix a(kp.problem.block_sizes);
    Eigen::MatrixXd ak(block, block);
    for (int i = 0; i < block; ++i)
      for (int j = 0; j < block; ++j) ak(i, j) = gauss(rng);
    ak = 0.5 * (ak + ak.transpose()).eval();
    if (k == 0) {
      Eigen::MatrixXd lead(rank, rank);
      for (int i = 0; i < rank; ++i)
        for (int j = 0; j < rank; ++j) lead(i, j) = gauss(rng);
      Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(block, block);
      blk.topLeftCorner(rank, rank) =
          lead * lead.transpose() + 0.5 * Eigen::MatrixXd::Identity(rank, rank);
      blk.bottomRightCorner(block - rank, block - rank) =
          ak.bottomRightCorner(block - rank, block - rank);
      ak = q * blk * q.transpose();
    }
    a.block(0) = 0.5 * (ak + ak.transpose());
    kp.problem.constraints.push_back(a);
    ystar[k] = gauss(rng);
  }
  BlockMatrix c(kp.problem.block_sizes);
  c.block(0) = -sstar;
  for (int k = 0; k < ncon; ++k) c.block(0) += ystar[k] * kp.problem.constraints[k].block(0);
  kp.problem.objective = c;
  kp.problem.rhs.resize(ncon);
  for (int k = 0; k < ncon; ++k)
    kp.problem.rhs[k] = (kp.problem.constraints[k].block(0).cwiseProduct(xstar)).sum();
  kp.optimum = (c.block(0).cwiseProduct(xstar)).sum();
  return kp;
}

}  // namespace

TEST_CASE("scalar slack problem: max mu s.t. 3 - mu >= 0") {
  SdpProblem p;
  p.block_sizes = {1, 1};  // slack, mu
  p.objective = BlockMatrix(p.block_sizes);
  p.objective.block(1)(0, 0) = 1.0;
  BlockMatrix a(p.block_sizes);
  a.block(0)(0, 0) = 1.0;
  a.block(1)(0, 0) = 1.0;
  p.constraints.push_back(a);
  p.rhs.push_back(3.0);

  auto sol = solve(p);
  CHECK(sol.status == SdpStatus::Optimal);
  CHECK(sol.primal_objective == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("smallest eigenvalue: max mu s.t. 2I - mu I >= 0") {
  SdpProblem p;
  p.block_sizes = {2, 1};  // slack block, mu
  p.objective = BlockMatrix(p.block_sizes);
  p.objective.block(1)(0, 0) = 1.0;
  for (int i = 0; i < 2; ++i) {
    BlockMatrix a(p.block_sizes);
    a.block(0)(i, i) = 1.0;
    a.block(1)(0, 0) = 1.0;
    p.constraints.push_back(a);
    p.rhs.push_back(2.0);
  }
  BlockMatrix off(p.block_sizes);
  off.block(0)(0, 1) = 1.0;
  off.block(0)(1, 0) = 1.0;
  p.constraints.push_back(off);
  p.rhs.push_back(0.0);

  auto sol = solve(p);
  CHECK(sol.status == SdpStatus::Optimal);
  CHECK(sol.x.block(1)(0, 0) == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("eigenvalue floor: min <diag(1,2),X> s.t. trace X = 1") {
  SdpProblem p;
  p.block_sizes = {2};
  p.objective = BlockMatrix(p.block_sizes);
  p.objective.block(0)(0, 0) = -1.0;
  p.objective.block(0)(1, 1) = -2.0;
  BlockMatrix tr(p.block_sizes);
  tr.block(0).setIdentity();
  p.constraints.push_back(tr);
  p.rhs.push_back(1.0);

  auto sol = solve(p);
  CHECK(sol.status == SdpStatus::Optimal);
  CHECK(-sol.primal_objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.x.block(0)(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(sol.x.block(0)(1, 1) == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("random problems with constructed optima") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const int block = 2 + static_cast<int>(rng() % 4);
    const int maxcon = block * (block + 1) / 2;
    const int ncon = 1 + static_cast<int>(rng() % std::min(6, maxcon));
    auto kp = make_known_problem(rng, block, ncon);
    auto sol = solve(kp.problem);
    REQUIRE(sol.status == SdpStatus::Optimal);
    CHECK(std::abs(sol.primal_objective - kp.optimum) <= 1e-6 * (1.0 + std::abs(kp.optimum)));
    CHECK(sol.primal_residual <= 1e-7);
    CHECK(sol.dual_residual <= 1e-7);
    CHECK(sol.gap_residual <= 1e-7);
    // Weak duality at the returned point.
    CHECK(sol.primal_objective <= sol.dual_objective + 1e-6 * (1.0 + std::abs(sol.dual_objective)));
    // PSD within tolerance.
    CHECK(sol.x.min_eigenvalue() >= -1e-8);
    CHECK(sol.s.min_eigenvalue() >= -1e-8);
  }
}

TEST_CASE("deterministic across repeated runs") {
  std::mt19937_64 rng(99);
  auto kp = make_known_problem(rng, 4, 5);
  auto a = solve(kp.problem);
  auto b = solve(kp.problem);
  CHECK(a.iterations == b.iterations);
  CHECK(a.primal_objective == b.primal_objective);  // bit-identical
  for (std::size_t k = 0; k < a.y.size(); ++k) CHECK(a.y[k] == b.y[k]);
  for (int i = 0; i < a.x.block(0).rows(); ++i)
    for (int j = 0; j < a.x.block(0).cols(); ++j)
      CHECK(a.x.block(0)(i, j) == b.x.block(0)(i, j));
}

TEST_CASE("statuses: iteration cap and infeasible input") {
  std::mt19937_64 rng(7);
  auto kp = make_known_problem(rng, 4, 5);
  SdpSettings s;
  s.max_iter = 2;
  auto sol = solve(kp.problem, s);
  CHECK(sol.status == SdpStatus::MaxIterations);

  // x = -1 with x >= 0 has no solution; any non-Optimal status is accepted.
  SdpProblem bad;
  bad.block_sizes = {1};
  bad.objective = BlockMatrix(bad.block_sizes);
  BlockMatrix a(bad.block_sizes);
  a.block(0)(0, 0) = 1.0;
  bad.constraints.push_back(a);
  bad.rhs.push_back(-1.0);
  auto badsol = solve(bad);
  CHECK(badsol.status != SdpStatus::Optimal);
}

TEST_CASE("malformed input is rejected") {
  SdpProblem p;
  CHECK_THROWS_AS(solve(p), std::invalid_argument);
  p.block_sizes = {2};
  p.objective = BlockMatrix(p.block_sizes);
  CHECK_THROWS_AS(solve(p), std::invalid_argument);  // no constraints
  BlockMatrix a(p.block_sizes);
  a.block(0)(0, 0) = 1.0;
  p.constraints.push_back(a);
  p.rhs.push_back(std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(solve(p), std::invalid_argument);
}

TEST_CASE("debug dump format") {
  SdpProblem p;
  p.block_sizes = {2, 1};
  p.objective = BlockMatrix(p.block_sizes);
  p.objective.block(0)(0, 0) = 1.0;
  BlockMatrix a(p.block_sizes);
  a.block(0)(0, 1) = 0.5;
  a.block(0)(1, 0) = 0.5;
  a.block(1)(0, 0) = 2.0;
  p.constraints.push_back(a);
  p.rhs.push_back(1.5);

  std::ostringstream os;
  dump_problem(p, os);
  const std::string text = os.str();
  CHECK(text.find("blocks 2 1") != std::string::npos);
  CHECK(text.find("objective") != std::string::npos);
  CHECK(text.find("constraint 0 rhs 1.5") != std::string::npos);
  CHECK(text.find('%') != std::string::npos);
}
