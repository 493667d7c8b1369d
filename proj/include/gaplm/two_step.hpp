#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "gaplm/dataset.hpp"
#include "gaplm/gee.hpp"
#include "gaplm/knots.hpp"
#include "gaplm/spline.hpp"

namespace gaplm {

struct ModelSpec {
  LinkFamily link;
  WorkingCorrelation working_corr;
  int degree = 3;  // same spline degree in both steps
};

// Step-I joint fit: beta plus one undersmoothed spline block per additive
// component.
struct PilotFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd gamma;  // J_n x d2, one column per component
  std::vector<CenteredSplineBasis> bases;
  GeeSolution solution;
  GeeProblem problem;  // kept for covariance estimation
  int d1 = 0;
  int d2 = 0;

  double theta(int component, double z) const {
    return bases[static_cast<std::size_t>(component)].eval(z).dot(
        gamma.col(component));
  }
};

// Step-II (or oracle) refit of a single component.
struct ComponentFit {
  int component = 0;
  Eigen::VectorXd gamma;
  CenteredSplineBasis basis;
  GeeSolution solution;
  GeeProblem problem;
  bool oracle = false;
  Eigen::MatrixXd xi_star;  // sandwich covariance; empty until attached

  double theta(double z) const { return basis.eval(z).dot(gamma); }
};

// Generating truth for simulation benchmarks. Component functions are used
// after subtracting their empirical mean over the dataset at hand.
struct TruthSpec {
  Eigen::VectorXd beta0;
  std::vector<std::function<double(double)>> theta0;

  std::vector<double> centers_for(const ClusteredDataset& data) const;
};

struct ComponentCurve {
  Eigen::VectorXd z;
  Eigen::VectorXd value;
  Eigen::MatrixXd basis_rows;  // for CI / band half-widths downstream
};

PilotFit fit_pilot(const ClusteredDataset& data, const ModelSpec& spec,
                   int step1_knot_count, const SolverControl& ctrl);

ComponentFit fit_component(const ClusteredDataset& data, const ModelSpec& spec,
                           const PilotFit& pilot, int component,
                           int step2_knot_count, const SolverControl& ctrl);

ComponentFit fit_oracle(const ClusteredDataset& data, const ModelSpec& spec,
                        const TruthSpec& truth, int component,
                        int step2_knot_count, const SolverControl& ctrl);

ComponentCurve evaluate_component(const ComponentFit& fit,
                                  const Eigen::VectorXd& z_grid);

// Half the V^{-1}-weighted residual sum of squares at the given
// coefficients; the goodness-of-fit term of the knot-selection criterion.
double weighted_half_rss(const GeeProblem& problem, const Eigen::VectorXd& coef);

// Exhaustive BIC search over [lower, upper]; ties go to the smaller count.
KnotPlan select_component_knots(const ClusteredDataset& data,
                                const ModelSpec& spec, const PilotFit& pilot,
                                int component, int lower, int upper,
                                const SolverControl& ctrl);

}  // namespace gaplm
