#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gaplm/dataset.hpp"
#include "gaplm/inference.hpp"
#include "gaplm/rng.hpp"
#include "gaplm/two_step.hpp"

namespace gaplm {

// Standard normal CDF.
double normal_cdf(double x);

// P(U <= h, V <= k) for a standard bivariate normal with correlation r,
// by adaptive quadrature of the conditional CDF.
double bvn_cdf(double h, double k, double r);

// Latent normal correlation reproducing a target correlation rho between
// dichotomized margins p1, p2; bisection on the orthant probability.
double tetrachoric_latent_corr(double p1, double p2, double rho);

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& covariance, Rng& rng);

// Correlated Bernoulli draws with given marginals and a common pairwise
// correlation, via the dichotomized-Gaussian construction.
Eigen::VectorXd gen_correlated_binary(const Eigen::VectorXd& probabilities,
                                      double rho, Rng& rng);

// Continuous-response generator: gaussian errors with exchangeable
// correlation 0.5, three sine components, correlated covariates.
struct Example1Config {
  int n = 250;
  int m = 20;
  std::uint64_t seed = 1;
};

// Binary-response generator: marginal logit model, exchangeable binary
// correlation 0.1, cluster size floor(2*sqrt(n)) unless overridden.
struct Example2Config {
  int n = 100;
  int m = 0;  // 0 -> floor(2*sqrt(n))
  std::uint64_t seed = 1;
};

int example2_cluster_size(int n);

std::pair<ClusteredDataset, TruthSpec> gen_example1(const Example1Config& cfg,
                                                    Rng& rng);
std::pair<ClusteredDataset, TruthSpec> gen_example2(const Example2Config& cfg,
                                                    Rng& rng);

struct McConfig {
  int example = 1;
  int n = 250;
  int m = 0;  // 0 -> example default
  CorrKind working = CorrKind::exchangeable;
  int nsim = 500;
  std::uint64_t seed = 1;
  int threads = 1;  // <=0 -> hardware concurrency
  double level = 0.95;
  int degree = 3;
  bool record_probe = false;
  double probe_z = 0.5;
};

struct ComponentSummary {
  double mise_pilot = 0.0;
  double mise_two_step = 0.0;
  double mise_oracle = 0.0;
  double mean_ci_halfwidth = 0.0;  // pointwise CI half-width at z = 1/2
  std::vector<double> efficiency;  // per-replication eff samples
};

struct ProbeSummary {
  std::vector<double> oracle_value;
  std::vector<double> oracle_sd;
  std::vector<double> truth_value;
  double oracle_coverage = 0.0;
};

struct McReport {
  McConfig config;
  int replications_requested = 0;
  int replications_done = 0;
  int excluded = 0;
  std::vector<std::string> exclusion_notes;
  bool valid = false;  // excluded <= 2% of nsim

  Eigen::VectorXd coverage;  // per linear coefficient
  Eigen::VectorXd rmse;
  Eigen::VectorXd bias;
  std::vector<ComponentSummary> components;
  double mean_alpha_hat = 0.0;
  ProbeSummary probe;

  double wall_seconds = 0.0;  // excluded from serialized output
};

McReport run_monte_carlo(const McConfig& cfg);

// Deterministic JSON (no timing information) and an aligned-column text
// table of the coverage/RMSE/bias and MISE summaries.
std::string mc_report_json(const McReport& report);
std::string mc_table_text(const McReport& report);

}  // namespace gaplm
