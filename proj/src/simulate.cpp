#include "gaplm/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "gaplm/knots.hpp"
#include "gaplm/pipeline.hpp"
#include "json.hpp"

namespace gaplm {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// 15-point Gauss-Kronrod pair on [-1,1].
constexpr double kGkNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kGkWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kGaussWeights[4] = {0.129484966168870, 0.279705391489277,
                                     0.381830050505119, 0.417959183673469};

template <typename F>
void gk15(const F& f, double a, double b, double& value, double& error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double kronrod = kGkWeights[7] * f(center);
  double gauss = kGaussWeights[3] * f(center);
  for (int i = 0; i < 7; ++i) {
    const double lo = f(center - half * kGkNodes[i]);
    const double hi = f(center + half * kGkNodes[i]);
    kronrod += kGkWeights[i] * (lo + hi);
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (lo + hi);
  }
  value = kronrod * half;
  error = std::abs((kronrod - gauss) * half);
}

// Adaptive bisection on the Gauss-Kronrod error estimate.
template <typename F>
double adaptive_quadrature(const F& f, double a, double b, double tol) {
  struct Segment {
    double a, b, value, error;
  };
  double value, error;
  gk15(f, a, b, value, error);
  std::vector<Segment> stack{{a, b, value, error}};
  double total = 0.0;
  int splits = 0;
  while (!stack.empty()) {
    Segment seg = stack.back();
    stack.pop_back();
    if (seg.error <= tol * std::max(1.0, std::abs(seg.b - seg.a) / (b - a)) ||
        splits > 2000) {
      total += seg.value;
      continue;
    }
    ++splits;
    const double mid = 0.5 * (seg.a + seg.b);
    Segment left{seg.a, mid, 0, 0}, right{mid, seg.b, 0, 0};
    gk15(f, left.a, left.b, left.value, left.error);
    gk15(f, right.a, right.b, right.value, right.error);
    stack.push_back(left);
    stack.push_back(right);
  }
  return total;
}

}  // namespace

double bvn_cdf(double h, double k, double r) {
  if (!(r > -1.0 && r < 1.0))
    throw Error(ErrorCode::param_domain, "latent correlation must be in (-1,1)");
  const double cut = 8.5;  // normal mass beyond is below 1e-17
  if (h <= -cut || k <= -cut) return 0.0;
  const double upper = std::min(h, cut);
  const double s = std::sqrt(1.0 - r * r);
  auto integrand = [&](double u) {
    return normal_pdf(u) * normal_cdf((k - r * u) / s);
  };
  return adaptive_quadrature(integrand, -cut, upper, 5e-12);
}

double tetrachoric_latent_corr(double p1, double p2, double rho) {
  if (!(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0))
    throw Error(ErrorCode::param_domain,
                "binary marginals must lie strictly inside (0,1)");
  const double q1 = 1.0 - p1, q2 = 1.0 - p2;
  const double upper =
      std::min(std::sqrt(p1 * q2 / (q1 * p2)), std::sqrt(p2 * q1 / (q2 * p1)));
  const double lower = std::max(-std::sqrt(p1 * p2 / (q1 * q2)),
                                -std::sqrt(q1 * q2 / (p1 * p2)));
  if (!(rho > lower + 1e-9 && rho < upper - 1e-9))
    throw Error(ErrorCode::infeasible_correlation,
                "target correlation " + std::to_string(rho) +
                    " outside the Frechet bounds (" + std::to_string(lower) +
                    ", " + std::to_string(upper) + ") for marginals p1 = " +
                    std::to_string(p1) + ", p2 = " + std::to_string(p2));

  const double target = p1 * p2 + rho * std::sqrt(p1 * q1 * p2 * q2);
  const double h = normal_quantile(p1);
  const double k = normal_quantile(p2);

  // bvn_cdf is increasing in r; plain bisection to width 1e-8.
  double lo = -0.999999, hi = 0.999999;
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (bvn_cdf(h, k, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& covariance, Rng& rng) {
  if (covariance.rows() != covariance.cols() ||
      covariance.rows() != mean.size())
    throw Error(ErrorCode::param_domain, "covariance dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::param_domain,
                "covariance matrix is not positive definite");
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + llt.matrixL() * z;
}

Eigen::VectorXd gen_correlated_binary(const Eigen::VectorXd& probabilities,
                                      double rho, Rng& rng) {
  const int m = static_cast<int>(probabilities.size());
  for (int j = 0; j < m; ++j)
    if (!(probabilities[j] > 0.0 && probabilities[j] < 1.0))
      throw Error(ErrorCode::param_domain,
                  "binary marginals must lie strictly inside (0,1)");

  Eigen::VectorXd y(m);
  if (m == 1) {
    y[0] = rng.uniform() < probabilities[0] ? 1.0 : 0.0;
    return y;
  }

  Eigen::MatrixXd latent = Eigen::MatrixXd::Identity(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) {
      const double r = rho == 0.0 ? 0.0
                                  : tetrachoric_latent_corr(probabilities[j],
                                                            probabilities[k],
                                                            rho);
      latent(j, k) = latent(k, j) = r;
    }

  Eigen::LLT<Eigen::MatrixXd> llt(latent);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::infeasible_correlation,
                "latent correlation matrix is not positive definite");
  Eigen::VectorXd z(m);
  for (int j = 0; j < m; ++j) z[j] = rng.normal();
  const Eigen::VectorXd u = llt.matrixL() * z;
  for (int j = 0; j < m; ++j)
    y[j] = u[j] <= normal_quantile(probabilities[j]) ? 1.0 : 0.0;
  return y;
}

int example2_cluster_size(int n) {
  return static_cast<int>(std::floor(2.0 * std::sqrt(static_cast<double>(n))));
}

std::pair<ClusteredDataset, TruthSpec> gen_example1(const Example1Config& cfg,
                                                    Rng& rng) {
  if (cfg.n < 1 || cfg.m < 2)
    throw Error(ErrorCode::param_domain, "need n >= 1 and m >= 2");

  auto theta = [](double z) { return std::sin(2.0 * M_PI * z); };
  auto var_scale = [](double z) {
    return (5.0 - 0.5 * std::sin(2.0 * M_PI * z)) /
           (5.0 + 0.5 * std::sin(2.0 * M_PI * z));
  };

  // AR(1) latent covariance for the three additive covariates.
  Eigen::MatrixXd z_cov(3, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) z_cov(a, b) = std::pow(0.5, std::abs(a - b));
  const Eigen::MatrixXd z_chol = Eigen::LLT<Eigen::MatrixXd>(z_cov).matrixL();

  // Exchangeable error correlation, unit marginal variance.
  Eigen::MatrixXd eps_cov = Eigen::MatrixXd::Constant(cfg.m, cfg.m, 0.5);
  eps_cov.diagonal().setOnes();
  const Eigen::MatrixXd eps_chol =
      Eigen::LLT<Eigen::MatrixXd>(eps_cov).matrixL();

  const Eigen::Vector3d beta0(1.0, -1.0, 0.5);

  ClusteredDataset data;
  data.clusters.reserve(static_cast<std::size_t>(cfg.n));
  data.z_maps.assign(3, AffineMap{});
  for (int i = 0; i < cfg.n; ++i) {
    Cluster c;
    c.id = std::to_string(i + 1);
    c.y.resize(cfg.m);
    c.x.resize(cfg.m, 3);
    c.z.resize(cfg.m, 3);
    for (int j = 0; j < cfg.m; ++j) {
      Eigen::Vector3d latent;
      for (int a = 0; a < 3; ++a) latent[a] = rng.normal();
      latent = z_chol * latent;
      for (int a = 0; a < 3; ++a) c.z(j, a) = normal_cdf(latent[a]);
      c.x(j, 0) = 0.5 * rng.sign();
      c.x(j, 1) = std::sqrt(var_scale(c.z(j, 0))) * rng.normal();
      c.x(j, 2) = std::sqrt(var_scale(c.z(j, 1))) * rng.normal();
    }
    Eigen::VectorXd eps(cfg.m);
    for (int j = 0; j < cfg.m; ++j) eps[j] = rng.normal();
    eps = eps_chol * eps;
    for (int j = 0; j < cfg.m; ++j) {
      double eta = c.x.row(j).dot(beta0);
      for (int a = 0; a < 3; ++a) eta += theta(c.z(j, a));
      c.y[j] = eta + eps[j];
    }
    data.clusters.push_back(std::move(c));
  }

  TruthSpec truth;
  truth.beta0 = beta0;
  truth.theta0 = {theta, theta, theta};
  return {std::move(data), std::move(truth)};
}

std::pair<ClusteredDataset, TruthSpec> gen_example2(const Example2Config& cfg,
                                                    Rng& rng) {
  if (cfg.n < 1)
    throw Error(ErrorCode::param_domain, "need n >= 1");
  const int m = cfg.m > 0 ? cfg.m : example2_cluster_size(cfg.n);
  if (m < 1)
    throw Error(ErrorCode::param_domain, "cluster size must be >= 1");

  auto theta1 = [](double z) { return 0.5 * std::sin(2.0 * M_PI * z); };
  auto theta2 = [](double z) {
    return -0.5 * (z - 0.5 + std::sin(2.0 * M_PI * z));
  };
  const Eigen::Vector3d beta0(0.5, -0.3, 0.3);

  ClusteredDataset data;
  data.clusters.reserve(static_cast<std::size_t>(cfg.n));
  data.z_maps.assign(2, AffineMap{});
  for (int i = 0; i < cfg.n; ++i) {
    Cluster c;
    c.id = std::to_string(i + 1);
    c.x.resize(m, 3);
    c.z.resize(m, 2);
    Eigen::VectorXd prob(m);
    for (int j = 0; j < m; ++j) {
      c.x(j, 0) = 1.0;
      c.x(j, 1) = rng.normal();
      c.x(j, 2) = rng.normal();
      c.z(j, 0) = rng.uniform();
      c.z(j, 1) = rng.uniform();
      const double eta =
          c.x.row(j).dot(beta0) + theta1(c.z(j, 0)) + theta2(c.z(j, 1));
      prob[j] = 1.0 / (1.0 + std::exp(-eta));
    }
    c.y = gen_correlated_binary(prob, 0.1, rng);
    data.clusters.push_back(std::move(c));
  }

  TruthSpec truth;
  truth.beta0 = beta0;
  truth.theta0 = {theta1, theta2};
  return {std::move(data), std::move(truth)};
}

namespace {

struct RepOutcome {
  bool ok = false;
  std::string note;
  Eigen::VectorXd beta_hat;
  std::vector<int> covered;
  double alpha_hat = 0.0;
  std::vector<double> ise_pilot, ise_two_step, ise_oracle, ci_half;
  double probe_or_value = 0.0, probe_or_sd = 0.0, probe_truth = 0.0;
  bool probe_covered = false;
};

Eigen::VectorXd example_beta0(int example) {
  if (example == 1) return Eigen::Vector3d(1.0, -1.0, 0.5);
  return Eigen::Vector3d(0.5, -0.3, 0.3);
}

RepOutcome run_replication(const McConfig& cfg, int m, int rep) {
  RepOutcome out;
  Rng rng = Rng::for_replication(cfg.seed, static_cast<std::uint64_t>(rep));

  ClusteredDataset data;
  TruthSpec truth;
  LinkKind link;
  if (cfg.example == 1) {
    Example1Config g{cfg.n, m, cfg.seed};
    std::tie(data, truth) = gen_example1(g, rng);
    link = LinkKind::gaussian_identity;
  } else {
    Example2Config g{cfg.n, m, cfg.seed};
    std::tie(data, truth) = gen_example2(g, rng);
    link = LinkKind::bernoulli_logit;
  }

  SolverControl ctrl;
  const int p = cfg.degree + 1;
  const long long n_total = data.n_total();
  const int n1 = step1_knots(n_total, p);

  PilotPipeline pp =
      run_pilot_pipeline(data, link, cfg.working, cfg.degree, n1, nullptr, ctrl);
  if (!pp.pilot.solution.converged)
    throw Error(ErrorCode::non_convergence, "pilot fit did not converge");
  out.alpha_hat = pp.alpha_hat;

  const SigmaHat sigma =
      estimate_sigma(pp.pilot.problem, pp.pilot.solution.coefficients);
  const SandwichBeta sw_beta = sandwich_beta(pp.pilot, sigma);
  const Eigen::VectorXd se = sw_beta.xi.diagonal().array().sqrt();
  const double zq = normal_quantile(1.0 - (1.0 - cfg.level) / 2.0);

  out.beta_hat = pp.pilot.beta;
  out.covered.resize(data.d1());
  for (int k = 0; k < data.d1(); ++k)
    out.covered[static_cast<std::size_t>(k)] =
        std::abs(pp.pilot.beta[k] - truth.beta0[k]) <= zq * se[k] ? 1 : 0;

  const std::vector<double> centers = truth.centers_for(data);
  const auto [lo, hi] = step2_candidates(n_total, p);

  for (int l = 0; l < data.d2(); ++l) {
    const KnotPlan plan =
        select_component_knots(data, pp.spec, pp.pilot, l, lo, hi, ctrl);
    const ComponentFit ss =
        fit_component(data, pp.spec, pp.pilot, l, plan.ns_selected, ctrl);
    const ComponentFit oracle =
        fit_oracle(data, pp.spec, truth, l, plan.ns_selected, ctrl);
    if (!ss.solution.converged || !oracle.solution.converged)
      throw Error(ErrorCode::non_convergence,
                  "second-step fit did not converge for component " +
                      std::to_string(l + 1));

    double ep = 0.0, es = 0.0, eo = 0.0;
    for (const auto& c : data.clusters) {
      for (Eigen::Index j = 0; j < c.z.rows(); ++j) {
        const double z = c.z(j, l);
        const double t =
            truth.theta0[static_cast<std::size_t>(l)](z) -
            centers[static_cast<std::size_t>(l)];
        ep += std::pow(pp.pilot.theta(l, z) - t, 2);
        es += std::pow(ss.theta(z) - t, 2);
        eo += std::pow(oracle.theta(z) - t, 2);
      }
    }
    const double scale = static_cast<double>(n_total);
    out.ise_pilot.push_back(ep / scale);
    out.ise_two_step.push_back(es / scale);
    out.ise_oracle.push_back(eo / scale);

    const SandwichTheta sw_ss = sandwich_theta(ss, sigma);
    const Eigen::VectorXd mid_row = ss.basis.eval(0.5);
    out.ci_half.push_back(
        zq * std::sqrt(std::max(0.0, mid_row.dot(sw_ss.xi * mid_row))));

    if (cfg.record_probe && l == 0) {
      const SandwichTheta sw_or = sandwich_theta(oracle, sigma);
      const Eigen::VectorXd row = oracle.basis.eval(cfg.probe_z);
      out.probe_or_value = oracle.theta(cfg.probe_z);
      out.probe_or_sd = std::sqrt(std::max(0.0, row.dot(sw_or.xi * row)));
      out.probe_truth = truth.theta0[0](cfg.probe_z) - centers[0];
      out.probe_covered =
          std::abs(out.probe_or_value - out.probe_truth) <=
          zq * out.probe_or_sd;
    }
  }

  out.ok = true;
  return out;
}

RepOutcome run_replication_safe(const McConfig& cfg, int m, int rep) {
  try {
    return run_replication(cfg, m, rep);
  } catch (const Error& e) {
    RepOutcome out;
    out.note = "replication " + std::to_string(rep) + ": " +
               error_code_name(e.code()) + ": " + e.what();
    return out;
  } catch (const std::exception& e) {
    RepOutcome out;
    out.note = "replication " + std::to_string(rep) + ": " + e.what();
    return out;
  }
}

}  // namespace

McReport run_monte_carlo(const McConfig& cfg) {
  if (cfg.nsim < 1)
    throw Error(ErrorCode::param_domain, "nsim must be >= 1");
  if (cfg.example != 1 && cfg.example != 2)
    throw Error(ErrorCode::param_domain, "example must be 1 or 2");

  const auto t0 = std::chrono::steady_clock::now();
  const int m = cfg.m > 0 ? cfg.m
                          : (cfg.example == 1 ? 20 : example2_cluster_size(cfg.n));

  int threads = cfg.threads;
  if (threads <= 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.nsim);

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.nsim));
  if (threads == 1) {
    for (int rep = 0; rep < cfg.nsim; ++rep)
      outcomes[static_cast<std::size_t>(rep)] =
          run_replication_safe(cfg, m, rep);
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      while (true) {
        const int rep = next.fetch_add(1);
        if (rep >= cfg.nsim) break;
        outcomes[static_cast<std::size_t>(rep)] =
            run_replication_safe(cfg, m, rep);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  McReport report;
  report.config = cfg;
  report.config.m = m;
  report.replications_requested = cfg.nsim;

  const Eigen::VectorXd beta0 = example_beta0(cfg.example);
  const int d1 = static_cast<int>(beta0.size());
  const int d2 = cfg.example == 1 ? 3 : 2;

  report.coverage = Eigen::VectorXd::Zero(d1);
  report.rmse = Eigen::VectorXd::Zero(d1);
  report.bias = Eigen::VectorXd::Zero(d1);
  report.components.assign(static_cast<std::size_t>(d2), ComponentSummary{});

  Eigen::VectorXd beta_mean = Eigen::VectorXd::Zero(d1);
  int probe_covered = 0;
  for (const auto& rep : outcomes) {
    if (!rep.ok) {
      ++report.excluded;
      report.exclusion_notes.push_back(rep.note);
      continue;
    }
    ++report.replications_done;
    report.mean_alpha_hat += rep.alpha_hat;
    for (int k = 0; k < d1; ++k) {
      report.coverage[k] += rep.covered[static_cast<std::size_t>(k)];
      report.rmse[k] += std::pow(rep.beta_hat[k] - beta0[k], 2);
      beta_mean[k] += rep.beta_hat[k];
    }
    for (int l = 0; l < d2; ++l) {
      auto& comp = report.components[static_cast<std::size_t>(l)];
      comp.mise_pilot += rep.ise_pilot[static_cast<std::size_t>(l)];
      comp.mise_two_step += rep.ise_two_step[static_cast<std::size_t>(l)];
      comp.mise_oracle += rep.ise_oracle[static_cast<std::size_t>(l)];
      comp.mean_ci_halfwidth += rep.ci_half[static_cast<std::size_t>(l)];
      comp.efficiency.push_back(
          std::sqrt(rep.ise_two_step[static_cast<std::size_t>(l)] /
                    rep.ise_oracle[static_cast<std::size_t>(l)]));
    }
    if (cfg.record_probe) {
      report.probe.oracle_value.push_back(rep.probe_or_value);
      report.probe.oracle_sd.push_back(rep.probe_or_sd);
      report.probe.truth_value.push_back(rep.probe_truth);
      probe_covered += rep.probe_covered ? 1 : 0;
    }
  }

  const double done = std::max(1, report.replications_done);
  report.coverage /= done;
  report.mean_alpha_hat /= done;
  for (int k = 0; k < d1; ++k) {
    report.rmse[k] = std::sqrt(report.rmse[k] / done);
    report.bias[k] = std::abs(beta_mean[k] / done - beta0[k]);
  }
  for (auto& comp : report.components) {
    comp.mise_pilot /= done;
    comp.mise_two_step /= done;
    comp.mise_oracle /= done;
    comp.mean_ci_halfwidth /= done;
  }
  if (cfg.record_probe && report.replications_done > 0)
    report.probe.oracle_coverage = static_cast<double>(probe_covered) / done;

  report.valid =
      report.excluded <= static_cast<int>(0.02 * cfg.nsim);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

std::string mc_report_json(const McReport& report) {
  nlohmann::ordered_json j;
  j["config"] = {
      {"example", report.config.example},
      {"n", report.config.n},
      {"m", report.config.m},
      {"correlation", corr_kind_name(report.config.working)},
      {"nsim", report.config.nsim},
      {"seed", report.config.seed},
      {"threads", report.config.threads},
      {"level", report.config.level},
      {"degree", report.config.degree},
      {"record_probe", report.config.record_probe},
      {"probe_z", report.config.probe_z},
  };
  j["replications"] = {{"requested", report.replications_requested},
                       {"done", report.replications_done},
                       {"excluded", report.excluded},
                       {"notes", report.exclusion_notes},
                       {"valid", report.valid}};
  const Eigen::VectorXd beta0 = example_beta0(report.config.example);
  j["beta"] = {
      {"truth", std::vector<double>(beta0.data(), beta0.data() + beta0.size())},
      {"coverage", std::vector<double>(report.coverage.data(),
                                       report.coverage.data() +
                                           report.coverage.size())},
      {"rmse", std::vector<double>(report.rmse.data(),
                                   report.rmse.data() + report.rmse.size())},
      {"bias", std::vector<double>(report.bias.data(),
                                   report.bias.data() + report.bias.size())},
  };
  j["alpha_hat_mean"] = report.mean_alpha_hat;
  nlohmann::ordered_json comps = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < report.components.size(); ++l) {
    const auto& comp = report.components[l];
    comps.push_back(nlohmann::ordered_json{
        {"component", l + 1},
        {"mise_pilot", comp.mise_pilot},
        {"mise_two_step", comp.mise_two_step},
        {"mise_oracle", comp.mise_oracle},
        {"mean_ci_halfwidth", comp.mean_ci_halfwidth},
        {"efficiency", comp.efficiency},
    });
  }
  j["components"] = std::move(comps);
  if (report.config.record_probe) {
    j["probe"] = {{"z", report.config.probe_z},
                  {"oracle_value", report.probe.oracle_value},
                  {"oracle_sd", report.probe.oracle_sd},
                  {"truth_value", report.probe.truth_value},
                  {"oracle_coverage", report.probe.oracle_coverage}};
  }
  return j.dump(2) + "\n";
}

std::string mc_table_text(const McReport& report) {
  const int d1 = static_cast<int>(report.coverage.size());
  std::string out;
  char buf[256];

  std::snprintf(buf, sizeof(buf), "example %d  n=%d  m=%d  corr=%s  nsim=%d\n\n",
                report.config.example, report.config.n, report.config.m,
                corr_kind_name(report.config.working),
                report.replications_requested);
  out += buf;

  out += "            ";
  for (int k = 0; k < d1; ++k) {
    std::snprintf(buf, sizeof(buf), "   beta_%d", k);
    out += buf;
  }
  out += "\n";
  auto row = [&](const char* label, const Eigen::VectorXd& values) {
    std::snprintf(buf, sizeof(buf), "%-12s", label);
    out += buf;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
      std::snprintf(buf, sizeof(buf), " %8.4f", values[k]);
      out += buf;
    }
    out += "\n";
  };
  row("coverage", report.coverage);
  row("rmse", report.rmse);
  row("bias", report.bias);

  out += "\ncomponent     two-step        pilot       oracle\n";
  for (std::size_t l = 0; l < report.components.size(); ++l) {
    const auto& comp = report.components[l];
    std::snprintf(buf, sizeof(buf), "%-9zu %12.6g %12.6g %12.6g\n", l + 1,
                  comp.mise_two_step, comp.mise_pilot, comp.mise_oracle);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "\nalpha_hat mean %.4f   excluded %d/%d\n",
                report.mean_alpha_hat, report.excluded,
                report.replications_requested);
  out += buf;
  return out;
}

}  // namespace gaplm
