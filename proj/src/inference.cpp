#include "gaplm/inference.hpp"

#include <algorithm>
#include <cmath>

namespace gaplm {

namespace {

LinkFamily unit_dispersion(const LinkFamily& link) {
  LinkFamily out = link;
  out.dispersion = 1.0;
  return out;
}

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::singular_information,
                std::string(what) + " is singular");
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

}  // namespace

std::vector<Eigen::VectorXd> pearson_residuals(const GeeProblem& problem,
                                               const Eigen::VectorXd& coef) {
  GeeProblem unit = problem;
  unit.link = unit_dispersion(problem.link);
  std::vector<Eigen::VectorXd> out;
  out.reserve(problem.clusters.size());
  for (int i = 0; i < static_cast<int>(problem.clusters.size()); ++i) {
    const ClusterState state = eval_cluster(unit, i, coef);
    const Eigen::VectorXd var = marginal_variance(unit.link, state.mu);
    out.push_back(
        ((problem.clusters[static_cast<std::size_t>(i)].y - state.mu).array() /
         var.array().sqrt())
            .matrix());
  }
  return out;
}

double pearson_dispersion(const GeeProblem& problem,
                          const Eigen::VectorXd& coef) {
  const auto resid = pearson_residuals(problem, coef);
  double ss = 0.0;
  long long count = 0;
  for (const auto& r : resid) {
    ss += r.squaredNorm();
    count += r.size();
  }
  const long long dof = count - problem.coef_dim();
  if (dof < 1)
    throw Error(ErrorCode::degenerate_variance,
                "not enough observations for a dispersion estimate");
  return ss / static_cast<double>(dof);
}

double estimate_alpha_from_residuals(const std::vector<Eigen::VectorXd>& resid,
                                     double dispersion, CorrKind structure) {
  if (structure == CorrKind::independence) return 0.0;
  if (!(dispersion > 0.0))
    throw Error(ErrorCode::degenerate_variance, "non-positive dispersion");

  int max_m = 0;
  double numerator = 0.0;
  long long pairs = 0;
  for (const auto& r : resid) {
    const int m = static_cast<int>(r.size());
    max_m = std::max(max_m, m);
    if (m < 2) continue;
    if (structure == CorrKind::exchangeable) {
      const double total = r.sum();
      numerator += 0.5 * (total * total - r.squaredNorm());
      pairs += static_cast<long long>(m) * (m - 1) / 2;
    } else {
      for (int j = 0; j + 1 < m; ++j) numerator += r[j] * r[j + 1];
      pairs += m - 1;
    }
  }
  if (pairs == 0)
    throw Error(ErrorCode::not_identifiable,
                "all clusters have a single observation; the correlation "
                "parameter is not identifiable");

  double alpha = numerator / (dispersion * static_cast<double>(pairs));

  const double eps = 1e-6;
  const double lower = structure == CorrKind::exchangeable
                           ? (max_m > 1 ? -1.0 / (max_m - 1) + eps : -1.0 + eps)
                           : -1.0 + eps;
  return std::clamp(alpha, lower, 1.0 - eps);
}

double estimate_alpha(const GeeProblem& problem, const Eigen::VectorXd& coef,
                      CorrKind structure) {
  return estimate_alpha_from_residuals(pearson_residuals(problem, coef),
                                       pearson_dispersion(problem, coef),
                                       structure);
}

SigmaHat estimate_sigma(const GeeProblem& problem, const Eigen::VectorXd& coef) {
  const int n = static_cast<int>(problem.clusters.size());
  bool equal = true;
  for (const auto& c : problem.clusters)
    if (c.y.size() != problem.clusters[0].y.size()) equal = false;

  SigmaHat out;
  out.sigma.reserve(static_cast<std::size_t>(n));

  if (!equal) {
    // Degraded mode: per-cluster residual outer products.
    out.pooled = false;
    for (int i = 0; i < n; ++i) {
      const ClusterState state = eval_cluster(problem, i, coef);
      const Eigen::VectorXd r =
          problem.clusters[static_cast<std::size_t>(i)].y - state.mu;
      out.sigma.push_back(r * r.transpose());
    }
    return out;
  }

  const int m = static_cast<int>(problem.clusters[0].y.size());
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(m, m);
  std::vector<Eigen::VectorXd> a_sqrt;
  a_sqrt.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const ClusterState state = eval_cluster(problem, i, coef);
    const Eigen::VectorXd a =
        marginal_variance(problem.link, state.mu);
    const Eigen::VectorXd r =
        problem.clusters[static_cast<std::size_t>(i)].y - state.mu;
    const Eigen::VectorXd scaled = r.array() / a.array().sqrt();
    pooled.noalias() += scaled * scaled.transpose();
    a_sqrt.push_back(a.array().sqrt());
  }
  pooled /= static_cast<double>(n);
  pooled = 0.5 * (pooled + pooled.transpose()).eval();

  for (int j = 0; j < m; ++j)
    if (!(pooled(j, j) > 0.0))
      throw Error(ErrorCode::degenerate_variance,
                  "zero residual variance at within-cluster position " +
                      std::to_string(j));

  const Eigen::VectorXd d_isqrt = pooled.diagonal().array().rsqrt();
  out.pooled_correlation = d_isqrt.asDiagonal() * pooled * d_isqrt.asDiagonal();
  out.pooled = true;
  for (int i = 0; i < n; ++i)
    out.sigma.push_back(a_sqrt[static_cast<std::size_t>(i)].asDiagonal() *
                        out.pooled_correlation *
                        a_sqrt[static_cast<std::size_t>(i)].asDiagonal());
  return out;
}

SandwichBeta sandwich_beta(const PilotFit& pilot, const SigmaHat& sigma,
                           ProjectionKind projection) {
  const GeeProblem& problem = pilot.problem;
  const int n = static_cast<int>(problem.clusters.size());
  if (static_cast<int>(sigma.sigma.size()) != n)
    throw Error(ErrorCode::config_error, "sigma list does not match clusters");

  const int d1 = pilot.d1;
  const int spline_dim = problem.coef_dim() - d1;
  const Eigen::VectorXd& coef = pilot.solution.coefficients;

  std::vector<ClusterState> states;
  states.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) states.push_back(eval_cluster(problem, i, coef));

  // Projection coefficients of each linear column on the spline block.
  Eigen::MatrixXd proj_coef = Eigen::MatrixXd::Zero(spline_dim, d1);
  if (spline_dim > 0) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(spline_dim, spline_dim);
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(spline_dim, d1);
    for (int i = 0; i < n; ++i) {
      const auto& c = problem.clusters[static_cast<std::size_t>(i)];
      const auto x = c.design.leftCols(d1);
      const auto b = c.design.rightCols(spline_dim);
      if (projection == ProjectionKind::weighted) {
        const Eigen::MatrixXd db = states[static_cast<std::size_t>(i)]
                                       .delta.asDiagonal() *
                                   b;
        const Eigen::MatrixXd dx = states[static_cast<std::size_t>(i)]
                                       .delta.asDiagonal() *
                                   x;
        const Eigen::MatrixXd vdb =
            states[static_cast<std::size_t>(i)].cov.solve(db);
        gram.noalias() += db.transpose() * vdb;
        cross.noalias() += vdb.transpose() * dx;
      } else {
        gram.noalias() += b.transpose() * b;
        cross.noalias() += b.transpose() * x;
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (gram + gram.transpose()));
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::singular_information,
                  "spline projection system is singular");
    proj_coef = llt.solve(cross);
  }

  SandwichBeta out;
  out.bread = Eigen::MatrixXd::Zero(d1, d1);
  out.meat = Eigen::MatrixXd::Zero(d1, d1);
  out.x_hat.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& c = problem.clusters[static_cast<std::size_t>(i)];
    Eigen::MatrixXd x_hat = c.design.leftCols(d1);
    if (spline_dim > 0)
      x_hat.noalias() -= c.design.rightCols(spline_dim) * proj_coef;
    const Eigen::MatrixXd dx =
        states[static_cast<std::size_t>(i)].delta.asDiagonal() * x_hat;
    const Eigen::MatrixXd vdx =
        states[static_cast<std::size_t>(i)].cov.solve(dx);
    out.bread.noalias() += dx.transpose() * vdx;
    out.meat.noalias() +=
        vdx.transpose() * sigma.sigma[static_cast<std::size_t>(i)] * vdx;
    out.x_hat.push_back(std::move(x_hat));
  }
  out.bread = 0.5 * (out.bread + out.bread.transpose()).eval();
  out.meat = 0.5 * (out.meat + out.meat.transpose()).eval();

  const Eigen::MatrixXd bread_inv = symmetric_inverse(out.bread, "bread matrix");
  out.xi = bread_inv * out.meat * bread_inv;
  out.xi = 0.5 * (out.xi + out.xi.transpose()).eval();
  return out;
}

SandwichTheta sandwich_theta(const ComponentFit& fit, const SigmaHat& sigma) {
  const GeeProblem& problem = fit.problem;
  const int n = static_cast<int>(problem.clusters.size());
  if (static_cast<int>(sigma.sigma.size()) != n)
    throw Error(ErrorCode::config_error, "sigma list does not match clusters");

  const int p = problem.coef_dim();
  SandwichTheta out;
  out.component = fit.component;
  out.bread = Eigen::MatrixXd::Zero(p, p);
  out.meat = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    const auto& c = problem.clusters[static_cast<std::size_t>(i)];
    const ClusterState state = eval_cluster(problem, i, fit.gamma);
    const Eigen::MatrixXd db = state.delta.asDiagonal() * c.design;
    const Eigen::MatrixXd vdb = state.cov.solve(db);
    out.bread.noalias() += db.transpose() * vdb;
    out.meat.noalias() +=
        vdb.transpose() * sigma.sigma[static_cast<std::size_t>(i)] * vdb;
  }
  out.bread = 0.5 * (out.bread + out.bread.transpose()).eval();
  out.meat = 0.5 * (out.meat + out.meat.transpose()).eval();

  const Eigen::MatrixXd bread_inv =
      symmetric_inverse(out.bread, "component bread matrix");
  out.xi = bread_inv * out.meat * bread_inv;
  out.xi = 0.5 * (out.xi + out.xi.transpose()).eval();
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorCode::param_domain,
                "normal quantile argument must lie in (0,1)");

  // Rational approximation in three regions, then one Newton step against
  // the erfc-based CDF.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  if (pdf > 0.0) x -= (cdf - p) / pdf;
  return x;
}

namespace {

Curve interval_curve(const ComponentFit& fit, const SandwichTheta& sw,
                     const Eigen::VectorXd& z_grid, double multiplier) {
  Curve curve;
  curve.z = z_grid;
  curve.multiplier = multiplier;
  curve.value.resize(z_grid.size());
  curve.lower.resize(z_grid.size());
  curve.upper.resize(z_grid.size());
  for (Eigen::Index k = 0; k < z_grid.size(); ++k) {
    const Eigen::VectorXd row = fit.basis.eval(z_grid[k]);
    const double value = row.dot(fit.gamma);
    const double var = row.dot(sw.xi * row);
    const double half = multiplier * std::sqrt(std::max(0.0, var));
    curve.value[k] = value;
    curve.lower[k] = value - half;
    curve.upper[k] = value + half;
  }
  return curve;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorCode::param_domain, "confidence level must be in (0,1)");
  if (1.0 - level < 1e-12)
    throw Error(ErrorCode::param_domain,
                "confidence level too close to 1 (interval width diverges)");
}

}  // namespace

Curve pointwise_ci(const ComponentFit& fit, const SandwichTheta& sw,
                   const Eigen::VectorXd& z_grid, double level) {
  check_level(level);
  const double alpha = 1.0 - level;
  return interval_curve(fit, sw, z_grid, normal_quantile(1.0 - alpha / 2.0));
}

double band_multiplier(int step2_knot_count, double alpha) {
  if (step2_knot_count < 1)
    throw Error(ErrorCode::param_domain, "knot count must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::param_domain, "alpha must lie in (0,1)");
  return std::sqrt(2.0 * std::log(step2_knot_count + 1.0) -
                   2.0 * std::log(alpha));
}

Curve simultaneous_band(const ComponentFit& fit, const SandwichTheta& sw,
                        const Eigen::VectorXd& z_grid, double level) {
  check_level(level);
  if (fit.basis.degree() != 1)
    throw Error(ErrorCode::band_degree,
                "simultaneous bands require linear splines (degree 1), got "
                "degree " +
                    std::to_string(fit.basis.degree()));
  const double alpha = 1.0 - level;
  return interval_curve(fit, sw, z_grid,
                        band_multiplier(fit.basis.nominal_knots(), alpha));
}

}  // namespace gaplm
