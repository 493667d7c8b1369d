#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gaplm/two_step.hpp"

namespace gaplm {

enum class ProjectionKind { weighted, unweighted };

struct SandwichBeta {
  Eigen::MatrixXd xi;     // Psi^{-1} Phi Psi^{-1}
  Eigen::MatrixXd bread;  // Psi
  Eigen::MatrixXd meat;   // Phi
  std::vector<Eigen::MatrixXd> x_hat;  // spline-projected designs
};

struct SandwichTheta {
  int component = 0;
  Eigen::MatrixXd xi;
  Eigen::MatrixXd bread;
  Eigen::MatrixXd meat;
};

// Residual covariance estimate. When every cluster has the same size the
// pooled correlation estimator is used; otherwise the per-cluster outer
// product fallback.
struct SigmaHat {
  std::vector<Eigen::MatrixXd> sigma;
  Eigen::MatrixXd pooled_correlation;  // empty in fallback mode
  bool pooled = false;
};

struct Curve {
  Eigen::VectorXd z;
  Eigen::VectorXd value;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double multiplier = 0.0;
};

// Residuals standardized by the variance function (unit dispersion).
std::vector<Eigen::VectorXd> pearson_residuals(const GeeProblem& problem,
                                               const Eigen::VectorXd& coef);

// Pearson dispersion estimate sum r^2 / (n_T - p).
double pearson_dispersion(const GeeProblem& problem,
                          const Eigen::VectorXd& coef);

// Moment estimator of the working-correlation parameter from standardized
// residuals: all within-cluster pairs for EX, lag-1 pairs for AR(1);
// clipped into the admissible open interval for the largest cluster.
double estimate_alpha_from_residuals(const std::vector<Eigen::VectorXd>& resid,
                                     double dispersion, CorrKind structure);

double estimate_alpha(const GeeProblem& problem, const Eigen::VectorXd& coef,
                      CorrKind structure);

SigmaHat estimate_sigma(const GeeProblem& problem, const Eigen::VectorXd& coef);

SandwichBeta sandwich_beta(const PilotFit& pilot, const SigmaHat& sigma,
                           ProjectionKind projection = ProjectionKind::weighted);

SandwichTheta sandwich_theta(const ComponentFit& fit, const SigmaHat& sigma);

// Standard normal quantile, rational approximation plus one refinement
// step; absolute accuracy well under 1e-8.
double normal_quantile(double p);

Curve pointwise_ci(const ComponentFit& fit, const SandwichTheta& sw,
                   const Eigen::VectorXd& z_grid, double level);

double band_multiplier(int step2_knot_count, double alpha);

// Conservative simultaneous band; requires a linear-spline fit (q = 1).
Curve simultaneous_band(const ComponentFit& fit, const SandwichTheta& sw,
                        const Eigen::VectorXd& z_grid, double level);

}  // namespace gaplm
