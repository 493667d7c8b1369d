#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gaplm/dataset.hpp"
#include "gaplm/family.hpp"

namespace gaplm {

// One cluster of a generic estimating-equation problem: the linear predictor
// is offset + design * coef.
struct GeeCluster {
  Eigen::MatrixXd design;
  Eigen::VectorXd offset;
  Eigen::VectorXd y;
};

struct GeeProblem {
  std::vector<GeeCluster> clusters;
  LinkFamily link;
  WorkingCorrelation working_corr;

  int coef_dim() const {
    return clusters.empty() ? 0 : static_cast<int>(clusters[0].design.cols());
  }
  long long n_total() const {
    long long total = 0;
    for (const auto& c : clusters) total += c.y.size();
    return total;
  }
  void validate() const;
};

struct SolverControl {
  int max_iter = 100;
  double tol_score = 1e-8;  // scaled by the total observation count
  double tol_step = 1e-10;
  int step_halvings = 10;
};

struct GeeSolution {
  Eigen::VectorXd coefficients;
  bool converged = false;
  int iterations = 0;
  double final_score_norm = 0.0;
  double score_threshold = 0.0;
  Eigen::MatrixXd model_hessian;  // Psi at the solution
};

// Fitted per-cluster state at given coefficients; shared by the solver and
// the covariance estimators.
struct ClusterState {
  Eigen::VectorXd eta;
  Eigen::VectorXd mu;
  Eigen::VectorXd delta;
  ClusterCovariance cov;
};

ClusterState eval_cluster(const GeeProblem& problem, int cluster_index,
                          const Eigen::VectorXd& coef);

// Summed weighted score g(coef) = sum_i D_i' Delta_i V_i^{-1} (y_i - mu_i).
Eigen::VectorXd score(const GeeProblem& problem, const Eigen::VectorXd& coef);

// Model information Psi(coef) = sum_i D_i' Delta_i V_i^{-1} Delta_i D_i.
Eigen::MatrixXd fisher_info(const GeeProblem& problem,
                            const Eigen::VectorXd& coef);

// Fisher scoring with step halving on the score norm.
GeeSolution solve(const GeeProblem& problem, const Eigen::VectorXd& init,
                  const SolverControl& ctrl);

}  // namespace gaplm
