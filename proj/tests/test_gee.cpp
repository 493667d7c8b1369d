#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gaplm/gee.hpp"
#include "gaplm/rng.hpp"

using namespace gaplm;

namespace {

GeeProblem toy_gaussian(Rng& rng, int n_clusters, int m, int p,
                        CorrKind corr = CorrKind::independence,
                        double alpha = 0.0) {
  GeeProblem problem;
  problem.link = LinkFamily::gaussian();
  problem.working_corr = WorkingCorrelation{corr, alpha};
  for (int i = 0; i < n_clusters; ++i) {
    GeeCluster c;
    c.design.resize(m, p);
    for (int r = 0; r < m; ++r)
      for (int k = 0; k < p; ++k) c.design(r, k) = rng.normal();
    c.offset = Eigen::VectorXd::Zero(m);
    c.y.resize(m);
    for (int r = 0; r < m; ++r) c.y[r] = rng.normal();
    problem.clusters.push_back(std::move(c));
  }
  return problem;
}

GeeProblem toy_logit(Rng& rng, int n_clusters, int m, int p) {
  GeeProblem problem;
  problem.link = LinkFamily::bernoulli();
  problem.working_corr = WorkingCorrelation{CorrKind::independence, 0.0};
  Eigen::VectorXd coef(p);
  for (int k = 0; k < p; ++k) coef[k] = 0.4 * rng.normal();
  for (int i = 0; i < n_clusters; ++i) {
    GeeCluster c;
    c.design.resize(m, p);
    for (int r = 0; r < m; ++r)
      for (int k = 0; k < p; ++k) c.design(r, k) = rng.normal();
    c.offset = Eigen::VectorXd::Zero(m);
    c.y.resize(m);
    for (int r = 0; r < m; ++r) {
      const double eta = c.design.row(r).dot(coef);
      c.y[r] = rng.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    }
    problem.clusters.push_back(std::move(c));
  }
  return problem;
}

// Naive reference assembly: dense matrices, explicit inverses.
Eigen::VectorXd naive_score(const GeeProblem& problem,
                            const Eigen::VectorXd& coef) {
  const int p = problem.coef_dim();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
  for (const auto& c : problem.clusters) {
    const Eigen::VectorXd eta = c.offset + c.design * coef;
    Eigen::VectorXd mu(eta.size()), delta(eta.size()), a(eta.size());
    for (Eigen::Index j = 0; j < eta.size(); ++j) {
      if (problem.link.kind == LinkKind::gaussian_identity) {
        mu[j] = eta[j];
        delta[j] = 1.0;
        a[j] = problem.link.dispersion;
      } else {
        mu[j] = 1.0 / (1.0 + std::exp(-eta[j]));
        delta[j] = mu[j] * (1.0 - mu[j]);
        a[j] = delta[j];
      }
    }
    const Eigen::MatrixXd r =
        build_correlation(problem.working_corr, static_cast<int>(eta.size()));
    const Eigen::MatrixXd v = a.array().sqrt().matrix().asDiagonal() * r *
                              a.array().sqrt().matrix().asDiagonal();
    g += c.design.transpose() * delta.asDiagonal() * v.inverse() * (c.y - mu);
  }
  return g;
}

Eigen::MatrixXd naive_info(const GeeProblem& problem,
                           const Eigen::VectorXd& coef) {
  const int p = problem.coef_dim();
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(p, p);
  for (const auto& c : problem.clusters) {
    const Eigen::VectorXd eta = c.offset + c.design * coef;
    Eigen::VectorXd mu(eta.size()), delta(eta.size()), a(eta.size());
    for (Eigen::Index j = 0; j < eta.size(); ++j) {
      if (problem.link.kind == LinkKind::gaussian_identity) {
        delta[j] = 1.0;
        a[j] = problem.link.dispersion;
      } else {
        mu[j] = 1.0 / (1.0 + std::exp(-eta[j]));
        delta[j] = mu[j] * (1.0 - mu[j]);
        a[j] = delta[j];
      }
    }
    const Eigen::MatrixXd r =
        build_correlation(problem.working_corr, static_cast<int>(eta.size()));
    const Eigen::MatrixXd v = a.array().sqrt().matrix().asDiagonal() * r *
                              a.array().sqrt().matrix().asDiagonal();
    const Eigen::MatrixXd vinv = v.inverse();
    // entry-by-entry triple product
    for (int s = 0; s < p; ++s)
      for (int t = 0; t < p; ++t) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < eta.size(); ++j)
          for (Eigen::Index k = 0; k < eta.size(); ++k)
            acc += c.design(j, s) * delta[j] * vinv(j, k) * delta[k] *
                   c.design(k, t);
        psi(s, t) += acc;
      }
  }
  return psi;
}

}  // namespace

TEST_CASE("score vanishes at the least-squares solution under independence") {
  Rng rng(5);
  GeeProblem problem = toy_gaussian(rng, 8, 4, 3);
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(3);
  for (const auto& c : problem.clusters) {
    xtx += c.design.transpose() * c.design;
    xty += c.design.transpose() * c.y;
  }
  const Eigen::VectorXd ls = xtx.ldlt().solve(xty);
  CHECK(score(problem, ls).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("score is zero at a zero-residual fixed point") {
  Rng rng(6);
  GeeProblem problem = toy_gaussian(rng, 5, 3, 2, CorrKind::exchangeable, 0.3);
  Eigen::VectorXd coef(2);
  coef << 0.7, -1.2;
  for (auto& c : problem.clusters) c.y = c.design * coef;  // mu == y exactly
  CHECK(score(problem, coef).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("score matches an independent dense assembly on a logit toy") {
  Rng rng(9);
  GeeProblem problem = toy_logit(rng, 2, 2, 2);
  problem.working_corr = WorkingCorrelation{CorrKind::exchangeable, 0.25};
  Eigen::VectorXd coef(2);
  coef << 0.3, -0.8;
  const Eigen::VectorXd got = score(problem, coef);
  const Eigen::VectorXd want = naive_score(problem, coef);
  CHECK((got - want).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("information matrix properties") {
  Rng rng(12);

  SUBCASE("collapses to sum of cross products under identity weights") {
    GeeProblem problem = toy_gaussian(rng, 6, 3, 3);
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(3, 3);
    for (const auto& c : problem.clusters)
      xtx += c.design.transpose() * c.design;
    const Eigen::MatrixXd psi = fisher_info(problem, Eigen::VectorXd::Zero(3));
    CHECK((psi - xtx).lpNorm<Eigen::Infinity>() < 1e-10);
  }

  SUBCASE("symmetry") {
    GeeProblem problem = toy_logit(rng, 6, 4, 3);
    problem.working_corr = WorkingCorrelation{CorrKind::ar1, -0.3};
    const Eigen::MatrixXd psi =
        fisher_info(problem, Eigen::VectorXd::Constant(3, 0.2));
    CHECK((psi - psi.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
  }

  SUBCASE("matches the naive triple-product oracle") {
    GeeProblem problem = toy_logit(rng, 3, 3, 2);
    problem.working_corr = WorkingCorrelation{CorrKind::exchangeable, 0.4};
    Eigen::VectorXd coef(2);
    coef << -0.2, 0.5;
    const Eigen::MatrixXd got = fisher_info(problem, coef);
    const Eigen::MatrixXd want = naive_info(problem, coef);
    CHECK((got - want).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("solver reaches the GLS solution in one step") {
  Rng rng(20);
  GeeProblem problem = toy_gaussian(rng, 10, 5, 3);
  const GeeSolution sol =
      solve(problem, Eigen::VectorXd::Zero(3), SolverControl{});
  REQUIRE(sol.converged);
  CHECK(sol.iterations <= 1);

  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(3);
  for (const auto& c : problem.clusters) {
    xtx += c.design.transpose() * c.design;
    xty += c.design.transpose() * c.y;
  }
  const Eigen::VectorXd ls = xtx.ldlt().solve(xty);
  CHECK((sol.coefficients - ls).lpNorm<Eigen::Infinity>() < 1e-8);

  // restarting from the solution converges without further iterations
  const GeeSolution again = solve(problem, sol.coefficients, SolverControl{});
  CHECK(again.converged);
  CHECK(again.iterations <= 1);
  CHECK(again.final_score_norm <= again.score_threshold);
}

TEST_CASE("logit solution matches a damped Newton root finder on the score") {
  Rng rng(31);
  GeeProblem problem = toy_logit(rng, 50, 2, 2);

  const GeeSolution sol =
      solve(problem, Eigen::VectorXd::Zero(2), SolverControl{});
  REQUIRE(sol.converged);

  // independent root finder: finite-difference Jacobian of the naive score
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(2);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd g = naive_score(problem, coef);
    if (g.lpNorm<Eigen::Infinity>() < 1e-10) break;
    Eigen::MatrixXd jac(2, 2);
    const double h = 1e-7;
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd up = coef, dn = coef;
      up[k] += h;
      dn[k] -= h;
      jac.col(k) = (naive_score(problem, up) - naive_score(problem, dn)) /
                   (2.0 * h);
    }
    Eigen::VectorXd step = jac.fullPivLu().solve(-g);
    double scale = 1.0;
    while (scale > 1e-4 &&
           naive_score(problem, coef + scale * step).lpNorm<Eigen::Infinity>() >
               g.lpNorm<Eigen::Infinity>())
      scale *= 0.5;
    coef += scale * step;
  }
  CHECK((sol.coefficients - coef).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("offset shifts are absorbed by an intercept") {
  Rng rng(44);
  GeeProblem problem = toy_gaussian(rng, 6, 4, 3, CorrKind::exchangeable, 0.2);
  for (auto& c : problem.clusters) c.design.col(0).setOnes();

  const GeeSolution base =
      solve(problem, Eigen::VectorXd::Zero(3), SolverControl{});
  GeeProblem shifted = problem;
  const double delta = 0.37;
  for (auto& c : shifted.clusters) c.offset.array() += delta;
  const GeeSolution moved =
      solve(shifted, Eigen::VectorXd::Zero(3), SolverControl{});

  CHECK(std::abs(moved.coefficients[0] - (base.coefficients[0] - delta)) <
        1e-9);
  for (int k = 1; k < 3; ++k)
    CHECK(std::abs(moved.coefficients[k] - base.coefficients[k]) < 1e-9);
  // fitted means agree
  for (std::size_t i = 0; i < problem.clusters.size(); ++i) {
    const auto& c = problem.clusters[i];
    const auto& s = shifted.clusters[i];
    const Eigen::VectorXd mu0 = c.offset + c.design * base.coefficients;
    const Eigen::VectorXd mu1 = s.offset + s.design * moved.coefficients;
    CHECK((mu0 - mu1).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("cluster order does not change the solution") {
  Rng rng(52);
  GeeProblem problem = toy_logit(rng, 12, 3, 2);
  problem.working_corr = WorkingCorrelation{CorrKind::ar1, 0.3};
  const GeeSolution sol =
      solve(problem, Eigen::VectorXd::Zero(2), SolverControl{});

  GeeProblem permuted = problem;
  std::reverse(permuted.clusters.begin(), permuted.clusters.end());
  const GeeSolution sol2 =
      solve(permuted, Eigen::VectorXd::Zero(2), SolverControl{});
  CHECK((sol.coefficients - sol2.coefficients).lpNorm<Eigen::Infinity>() <
        1e-10);
}

TEST_CASE("saturated bernoulli means raise a named error") {
  GeeProblem problem;
  problem.link = LinkFamily::bernoulli();
  problem.working_corr = WorkingCorrelation{CorrKind::independence, 0.0};
  GeeCluster c;
  c.design = Eigen::MatrixXd::Constant(2, 1, 1.0);
  c.offset = Eigen::VectorXd::Zero(2);
  c.y = Eigen::VectorXd::Ones(2);
  problem.clusters.push_back(c);
  Eigen::VectorXd coef(1);
  coef << 800.0;  // mu rounds to exactly 1
  try {
    score(problem, coef);
    FAIL("expected saturation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::saturation);
    CHECK(e.context().count("cluster") == 1);
    CHECK(e.context().count("row") == 1);
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  Rng rng(61);
  GeeProblem problem = toy_logit(rng, 30, 2, 2);
  SolverControl ctrl;
  ctrl.max_iter = 1;
  ctrl.tol_score = 1e-16;
  const GeeSolution sol = solve(problem, Eigen::VectorXd::Zero(2), ctrl);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 1);
}
