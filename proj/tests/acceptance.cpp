// Acceptance suite: reduced-scale reproductions of the published Monte
// Carlo studies plus the fast algebraic identities. Prints one PASS/FAIL
// line per criterion and exits nonzero on any failure.
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gaplm/gaplm.h"
#include "gaplm/inference.hpp"
#include "gaplm/rng.hpp"
#include "gaplm/simulate.hpp"
#include "gaplm/spline.hpp"

using namespace gaplm;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %d [%s] %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Anderson-Darling statistic for normality with estimated mean and
// variance, with Stephens' small-sample modification.
double anderson_darling_modified(std::vector<double> x) {
  const int n = static_cast<int>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= (n - 1);
  const double sd = std::sqrt(var);
  std::sort(x.begin(), x.end());
  double a2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double zi = (x[static_cast<std::size_t>(i)] - mean) / sd;
    const double zr = (x[static_cast<std::size_t>(n - 1 - i)] - mean) / sd;
    const double ui = std::min(std::max(normal_cdf(zi), 1e-15), 1.0 - 1e-15);
    const double ur = std::min(std::max(normal_cdf(zr), 1e-15), 1.0 - 1e-15);
    a2 += (2.0 * i + 1.0) * (std::log(ui) + std::log(1.0 - ur));
  }
  a2 = -n - a2 / n;
  return a2 * (1.0 + 0.75 / n + 2.25 / (static_cast<double>(n) * n));
}

// ---- criterion 6: fast algebraic identities ------------------------------

bool identity_sandwich_collapse(std::string& note) {
  Rng rng(640);
  ClusteredDataset data;
  for (int i = 0; i < 25; ++i) {
    Cluster c;
    c.id = std::to_string(i);
    c.y.resize(4);
    c.x.resize(4, 2);
    c.z.resize(4, 1);
    for (int j = 0; j < 4; ++j) {
      c.x(j, 0) = rng.normal();
      c.x(j, 1) = rng.sign();
      c.z(j, 0) = rng.uniform();
      c.y[j] = c.x(j, 0) - 0.5 * c.x(j, 1) +
               std::sin(2.0 * M_PI * c.z(j, 0)) + 0.4 * rng.normal();
    }
    data.clusters.push_back(std::move(c));
  }
  ModelSpec spec;
  spec.link = LinkFamily::gaussian();
  spec.working_corr = WorkingCorrelation{CorrKind::exchangeable, 0.35};
  const PilotFit pilot = fit_pilot(data, spec, 2, SolverControl{});
  SigmaHat sigma;
  sigma.pooled = false;
  for (int i = 0; i < data.n(); ++i)
    sigma.sigma.push_back(
        eval_cluster(pilot.problem, i, pilot.solution.coefficients).cov.dense());
  const SandwichBeta sw = sandwich_beta(pilot, sigma);
  const double gap = (sw.meat - sw.bread).lpNorm<Eigen::Infinity>() /
                     sw.bread.lpNorm<Eigen::Infinity>();
  note = "sandwich collapse |Phi-Psi|/|Psi| = " + fmt(gap);
  return gap < 1e-10;
}

bool identity_partition_of_unity(std::string& note) {
  Rng rng(641);
  double worst = 0.0;
  for (const auto& [n_knots, degree] : {std::pair{2, 1}, {5, 3}, {11, 3}}) {
    const KnotVector kv = build_knots(n_knots, degree);
    for (int t = 0; t < 500; ++t) {
      const double z = t == 0 ? 0.0 : (t == 1 ? 1.0 : rng.uniform());
      worst = std::max(worst, std::abs(eval_raw(kv, z).sum() - 1.0));
    }
  }
  note = "partition-of-unity deviation = " + fmt(worst);
  return worst < 1e-12;
}

bool identity_centered_mean(std::string& note) {
  Rng rng(642);
  Eigen::VectorXd z(800);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.uniform();
  const CenteredSplineBasis basis = CenteredSplineBasis::fit(6, 3, z);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(basis.dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) mean += basis.eval(z[i]);
  mean /= static_cast<double>(z.size());
  note = "centered-basis empirical mean = " + fmt(mean.lpNorm<Eigen::Infinity>());
  return mean.lpNorm<Eigen::Infinity>() < 1e-10;
}

bool identity_gls_reduction(std::string& note) {
  Rng rng(643);
  GeeProblem problem;
  problem.link = LinkFamily::gaussian();
  problem.working_corr = WorkingCorrelation{CorrKind::independence, 0.0};
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < 12; ++i) {
    GeeCluster c;
    c.design.resize(5, 3);
    c.offset = Eigen::VectorXd::Zero(5);
    c.y.resize(5);
    for (int r = 0; r < 5; ++r) {
      for (int k = 0; k < 3; ++k) c.design(r, k) = rng.normal();
      c.y[r] = rng.normal();
    }
    xtx += c.design.transpose() * c.design;
    xty += c.design.transpose() * c.y;
    problem.clusters.push_back(std::move(c));
  }
  const GeeSolution sol =
      solve(problem, Eigen::VectorXd::Zero(3), SolverControl{});
  const Eigen::VectorXd ols = xtx.ldlt().solve(xty);
  const double gap = (sol.coefficients - ols).lpNorm<Eigen::Infinity>();
  note = "solver vs closed-form OLS gap = " + fmt(gap);
  return sol.converged && gap < 1e-8;
}

bool identity_ar1_tridiagonal(std::string& note) {
  ClusterCovariance cov(Eigen::VectorXd::Ones(8),
                        WorkingCorrelation{CorrKind::ar1, 0.45});
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(8, 8);
  const Eigen::MatrixXd inv = cov.solve(eye);
  double worst = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      if (std::abs(i - j) > 1) worst = std::max(worst, std::abs(inv(i, j)));
  note = "AR(1) inverse off-tridiagonal max = " + fmt(worst);
  return worst < 1e-10;
}

bool identity_tetrachoric(std::string& note) {
  double worst = 0.0;
  for (double rho : {0.1, 0.3, -0.2}) {
    const double r = tetrachoric_latent_corr(0.5, 0.5, rho);
    worst = std::max(worst, std::abs(r - std::sin(M_PI * rho / 2.0)));
  }
  note = "tetrachoric closed-form gap at p = 1/2: " + fmt(worst);
  return worst < 1e-6;
}

// ---- shared Monte Carlo runs ---------------------------------------------

McReport run_example1(CorrKind corr, int nsim, std::uint64_t seed) {
  McConfig cfg;
  cfg.example = 1;
  cfg.n = 250;
  cfg.m = 20;
  cfg.working = corr;
  cfg.nsim = nsim;
  cfg.seed = seed;
  cfg.threads = 0;  // all cores
  return run_monte_carlo(cfg);
}

}  // namespace

int main() {
  std::printf("== acceptance suite ==\n");

  // criteria 6 and 7 are fast; run them first
  {
    bool all = true;
    std::string notes;
    for (auto* check :
         {identity_sandwich_collapse, identity_partition_of_unity,
          identity_centered_mean, identity_gls_reduction,
          identity_ar1_tridiagonal, identity_tetrachoric}) {
      std::string note;
      const bool ok = check(note);
      all = all && ok;
      notes += (notes.empty() ? "" : "; ") + note + (ok ? "" : " <-- FAIL");
    }
    report(6, all, "algebraic identities: " + notes);
  }

  {
    const char* config =
        "{\"example\":1,\"n\":30,\"m\":6,\"nsim\":4,\"seed\":99,"
        "\"threads\":2}";
    char* r1 = nullptr;
    char* r2 = nullptr;
    const bool ok1 = gaplm_simulate_run(config, &r1, nullptr) == GAPLM_OK;
    const bool ok2 = gaplm_simulate_run(config, &r2, nullptr) == GAPLM_OK;
    const bool same = ok1 && ok2 && std::string(r1) == std::string(r2);
    report(7, same,
           std::string("repeated simulate invocations byte-identical: ") +
               (same ? "yes" : "no"));
    gaplm_string_free(r1);
    gaplm_string_free(r2);
  }

  const int nsim = 200;
  const std::uint64_t seed = 20120601;

  // Example 1 under the three working correlations (criteria 1, 2, 4)
  const McReport ex = run_example1(CorrKind::exchangeable, nsim, seed);
  const McReport ind = run_example1(CorrKind::independence, nsim, seed);
  const McReport ar1 = run_example1(CorrKind::ar1, nsim, seed);

  {
    const double rmse_ref[3] = {0.0196, 0.0098, 0.0108};
    bool pass = ex.valid;
    std::string detail = "Example 1 EX n=250 m=20 nsim=200: coverage (";
    for (int k = 0; k < 3; ++k) {
      pass = pass && ex.coverage[k] >= 0.91 && ex.coverage[k] <= 0.98;
      detail += fmt(ex.coverage[k]) + (k < 2 ? ", " : ")");
    }
    detail += ", rmse (";
    for (int k = 0; k < 3; ++k) {
      pass = pass && ex.rmse[k] >= 0.7 * rmse_ref[k] &&
             ex.rmse[k] <= 1.3 * rmse_ref[k];
      detail += fmt(ex.rmse[k]) + (k < 2 ? ", " : ")");
    }
    detail += " vs (0.0196, 0.0098, 0.0108) +/-30%";
    report(1, pass, detail);
  }

  {
    bool pass = ex.valid && ind.valid;
    std::string detail = "MISE ordering:";
    for (std::size_t l = 0; l < ex.components.size(); ++l) {
      const auto& c = ex.components[l];
      const double ratio = c.mise_two_step / c.mise_oracle;
      pass = pass && c.mise_pilot > c.mise_two_step;
      pass = pass && ratio >= 0.9 && ratio <= 1.4;
      pass = pass &&
             c.mise_two_step < ind.components[l].mise_two_step;
      detail += " l=" + std::to_string(l + 1) + " pilot/ss/or = " +
                fmt(c.mise_pilot) + "/" + fmt(c.mise_two_step) + "/" +
                fmt(c.mise_oracle) + " (ss/or " + fmt(ratio) + ", IND ss " +
                fmt(ind.components[l].mise_two_step) + ");";
    }
    report(2, pass, detail);
  }

  {
    McConfig cfg;
    cfg.example = 2;
    cfg.n = 100;
    cfg.m = 20;
    cfg.working = CorrKind::exchangeable;
    cfg.nsim = nsim;
    cfg.seed = seed;
    cfg.threads = 0;
    const McReport bin = run_monte_carlo(cfg);
    bool pass = bin.valid;
    std::string detail = "Example 2 EX n=100 m=20 nsim=200: coverage (";
    for (int k = 0; k < 3; ++k) {
      pass = pass && bin.coverage[k] >= 0.90 && bin.coverage[k] <= 0.98;
      detail += fmt(bin.coverage[k]) + (k < 2 ? ", " : ")");
    }
    const double mise1 = bin.components[0].mise_two_step;
    const double oracle1 = bin.components[0].mise_oracle;
    pass = pass && mise1 >= 0.6 * 0.0148 && mise1 <= 1.4 * 0.0148;
    pass = pass && std::abs(mise1 - oracle1) <= 0.15 * oracle1;
    detail += ", MISE ss1 " + fmt(mise1) + " (target 0.0148 +/-40%), oracle " +
              fmt(oracle1) + ", excluded " + std::to_string(bin.excluded);
    report(3, pass, detail);
  }

  {
    bool pass = true;
    std::string detail = "median efficiency of the first component:";
    for (const auto& [name, rep] :
         {std::pair<const char*, const McReport*>{"EX", &ex},
          {"IND", &ind},
          {"AR1", &ar1}}) {
      const double med = median(rep->components[0].efficiency);
      pass = pass && med >= 0.9 && med <= 1.2;
      detail += std::string(" ") + name + " " + fmt(med) + ";";
    }
    report(4, pass, detail);
  }

  {
    McConfig cfg;
    cfg.example = 2;
    cfg.n = 200;
    cfg.working = CorrKind::exchangeable;
    cfg.nsim = nsim;
    cfg.seed = seed + 1;
    cfg.threads = 0;
    cfg.record_probe = true;
    cfg.probe_z = 0.5;
    const McReport probe = run_monte_carlo(cfg);
    const double ad = anderson_darling_modified(probe.probe.oracle_value);
    const double coverage = probe.probe.oracle_coverage;
    // 1% critical value for normality with estimated parameters
    const bool pass = probe.valid && ad < 1.092 && coverage >= 0.90 &&
                      coverage <= 0.99;
    report(5, pass,
           "oracle at z=0.5 (Example 2, n=200): Anderson-Darling A* = " +
               fmt(ad) + " (crit 1.092), oracle CI coverage " + fmt(coverage));
  }

  std::printf("== %s ==\n", g_failures == 0 ? "ALL CRITERIA PASSED"
                                            : "FAILURES PRESENT");
  return g_failures == 0 ? 0 : 1;
}
