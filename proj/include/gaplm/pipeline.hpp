#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gaplm/inference.hpp"
#include "gaplm/two_step.hpp"

namespace gaplm {

// Shared front half of every fit: pilot under working independence,
// dispersion and correlation-parameter estimation from its residuals, then
// the pilot refit under the requested working structure.
struct PilotPipeline {
  ModelSpec spec;  // final spec: dispersion and alpha filled in
  PilotFit pilot;
  double alpha_hat = 0.0;
  double dispersion = 1.0;
};

PilotPipeline run_pilot_pipeline(const ClusteredDataset& data, LinkKind link,
                                 CorrKind working, int degree, int step1_knots,
                                 const double* fixed_alpha,
                                 const SolverControl& ctrl);

struct RunConfig {
  LinkKind link = LinkKind::gaussian_identity;
  CorrKind working = CorrKind::exchangeable;
  std::optional<double> fixed_alpha;
  int degree = 3;
  int step1_override = 0;  // 0 -> N = [2 n_T^{1/(2p)}]
  int step2_override = 0;  // 0 -> BIC selection
  double level = 0.95;
  bool band = false;       // simultaneous bands (requires degree 1)
  ProjectionKind projection = ProjectionKind::weighted;
  int grid_points = 201;
  int threads = 1;  // component-level parallelism; <=0 -> hardware
};

struct ComponentResult {
  int index = 0;
  KnotPlan plan;
  ComponentFit fit;
  SandwichTheta sandwich;
  Curve ci;
  std::optional<Curve> band;
};

struct FitResult {
  RunConfig config;
  int n = 0;
  long long n_total = 0;
  int p_order = 0;
  int step1_knots = 0;
  double alpha_hat = 0.0;
  double dispersion = 1.0;
  PilotFit pilot;
  SandwichBeta beta_sandwich;
  Eigen::VectorXd beta_se;
  std::vector<ComponentResult> components;
  std::vector<AffineMap> z_maps;
};

FitResult run_fit(const ClusteredDataset& data, const RunConfig& cfg);

// report.json with config echo, knot plans and traces, alpha, convergence
// diagnostics, coefficients and standard errors.
std::string fit_report_json(const FitResult& result);

// curves_<l>.csv: z on the original scale, estimate, pointwise interval and
// (when requested) the simultaneous band.
std::string curve_csv(const FitResult& result, int component);

}  // namespace gaplm
