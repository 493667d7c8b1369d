#include "gaplm/gee.hpp"

#include <cmath>
#include <string>

namespace gaplm {

void GeeProblem::validate() const {
  if (clusters.empty())
    throw Error(ErrorCode::config_error, "estimating-equation problem is empty");
  const Eigen::Index p = clusters[0].design.cols();
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    if (c.design.rows() != c.y.size() || c.offset.size() != c.y.size() ||
        c.design.cols() != p)
      throw Error(ErrorCode::config_error,
                  "dimension mismatch in cluster " + std::to_string(i),
                  {{"cluster", std::to_string(i)}});
  }
}

ClusterState eval_cluster(const GeeProblem& problem, int cluster_index,
                          const Eigen::VectorXd& coef) {
  const auto& c = problem.clusters[static_cast<std::size_t>(cluster_index)];
  Eigen::VectorXd eta = c.offset + c.design * coef;
  Eigen::VectorXd mu, delta;
  mu_and_delta(problem.link, eta, mu, delta);
  Eigen::VectorXd a(mu.size());
  if (problem.link.is_binary()) {
    for (Eigen::Index j = 0; j < mu.size(); ++j) {
      a[j] = mu[j] * (1.0 - mu[j]);
      if (!(a[j] > 0.0))
        throw Error(ErrorCode::saturation,
                    "fitted bernoulli mean saturated at " +
                        std::to_string(mu[j]) + " (cluster " +
                        std::to_string(cluster_index) + ", row " +
                        std::to_string(j) + ")",
                    {{"cluster", std::to_string(cluster_index)},
                     {"row", std::to_string(j)}});
    }
  } else {
    a.setConstant(problem.link.dispersion);
  }
  return ClusterState{std::move(eta), std::move(mu), std::move(delta),
                      ClusterCovariance(std::move(a), problem.working_corr,
                                        cluster_index)};
}

namespace {

// One pass over the clusters; the information matrix is optional so the
// step-halving line search only pays for the score.
void assemble(const GeeProblem& problem, const Eigen::VectorXd& coef,
              Eigen::VectorXd& g, Eigen::MatrixXd* psi) {
  const int p = problem.coef_dim();
  g = Eigen::VectorXd::Zero(p);
  if (psi) psi->setZero(p, p);
  for (int i = 0; i < static_cast<int>(problem.clusters.size()); ++i) {
    const auto& c = problem.clusters[static_cast<std::size_t>(i)];
    const ClusterState state = eval_cluster(problem, i, coef);
    const Eigen::MatrixXd weighted = state.delta.asDiagonal() * c.design;
    const Eigen::VectorXd resid = c.y - state.mu;
    if (psi) {
      Eigen::MatrixXd both(c.y.size(), p + 1);
      both.leftCols(p) = weighted;
      both.col(p) = resid;
      const Eigen::MatrixXd solved = state.cov.solve(both);
      psi->noalias() += weighted.transpose() * solved.leftCols(p);
      g.noalias() += weighted.transpose() * solved.col(p);
    } else {
      g.noalias() += weighted.transpose() * state.cov.solve(resid);
    }
  }
}

}  // namespace

Eigen::VectorXd score(const GeeProblem& problem, const Eigen::VectorXd& coef) {
  problem.validate();
  if (coef.size() != problem.coef_dim())
    throw Error(ErrorCode::param_domain, "coefficient dimension mismatch");
  Eigen::VectorXd g;
  assemble(problem, coef, g, nullptr);
  return g;
}

Eigen::MatrixXd fisher_info(const GeeProblem& problem,
                            const Eigen::VectorXd& coef) {
  problem.validate();
  if (coef.size() != problem.coef_dim())
    throw Error(ErrorCode::param_domain, "coefficient dimension mismatch");
  Eigen::VectorXd g;
  Eigen::MatrixXd psi;
  assemble(problem, coef, g, &psi);
  // enforce exact symmetry against roundoff drift
  psi = 0.5 * (psi + psi.transpose()).eval();
  return psi;
}

GeeSolution solve(const GeeProblem& problem, const Eigen::VectorXd& init,
                  const SolverControl& ctrl) {
  problem.validate();
  if (ctrl.max_iter < 1 || !(ctrl.tol_score > 0.0) || !(ctrl.tol_step > 0.0))
    throw Error(ErrorCode::param_domain, "invalid solver control");
  if (init.size() != problem.coef_dim() || !init.allFinite())
    throw Error(ErrorCode::param_domain, "invalid initial coefficients");

  const double score_tol = ctrl.tol_score * static_cast<double>(problem.n_total());

  GeeSolution sol;
  sol.coefficients = init;
  sol.score_threshold = score_tol;

  Eigen::VectorXd g;
  Eigen::MatrixXd psi;
  assemble(problem, sol.coefficients, g, &psi);
  double g_norm = g.lpNorm<Eigen::Infinity>();

  while (true) {
    if (g_norm <= score_tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= ctrl.max_iter) break;

    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (psi + psi.transpose()));
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::singular_information,
                  "model information matrix is singular (rank-deficient "
                  "design; consider fewer knots)");
    Eigen::VectorXd step = llt.solve(g);

    Eigen::VectorXd trial = sol.coefficients + step;
    Eigen::VectorXd g_trial;
    assemble(problem, trial, g_trial, nullptr);
    double trial_norm = g_trial.lpNorm<Eigen::Infinity>();
    for (int h = 0; h < ctrl.step_halvings && trial_norm > g_norm; ++h) {
      step *= 0.5;
      trial = sol.coefficients + step;
      assemble(problem, trial, g_trial, nullptr);
      trial_norm = g_trial.lpNorm<Eigen::Infinity>();
    }

    sol.coefficients = trial;
    ++sol.iterations;

    assemble(problem, sol.coefficients, g, &psi);
    g_norm = g.lpNorm<Eigen::Infinity>();

    // A vanishing step means the iteration has stalled; stop and let the
    // score criterion decide the flag so that converged always certifies
    // a small score.
    if (step.lpNorm<Eigen::Infinity>() <= ctrl.tol_step) {
      sol.converged = g_norm <= score_tol;
      break;
    }
  }

  sol.final_score_norm = g_norm;
  sol.model_hessian = 0.5 * (psi + psi.transpose());
  return sol;
}

}  // namespace gaplm
