#include "gaplm/family.hpp"

#include <cmath>
#include <string>

namespace gaplm {

void mu_and_delta(const LinkFamily& link, const Eigen::VectorXd& eta,
                  Eigen::VectorXd& mu, Eigen::VectorXd& delta) {
  mu.resize(eta.size());
  delta.resize(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    if (!std::isfinite(e))
      throw Error(ErrorCode::numeric_domain, "non-finite linear predictor");
    if (link.kind == LinkKind::gaussian_identity) {
      mu[i] = e;
      delta[i] = 1.0;
    } else {
      double m;
      if (e >= 0.0) {
        const double q = std::exp(-e);
        m = 1.0 / (1.0 + q);
      } else {
        const double q = std::exp(e);
        m = q / (1.0 + q);
      }
      mu[i] = m;
      delta[i] = m * (1.0 - m);
    }
  }
}

Eigen::VectorXd marginal_variance(const LinkFamily& link,
                                  const Eigen::VectorXd& mu) {
  Eigen::VectorXd a(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (link.kind == LinkKind::gaussian_identity) {
      a[i] = link.dispersion;
    } else {
      const double m = mu[i];
      if (!(m > 0.0 && m < 1.0))
        throw Error(ErrorCode::degenerate_variance,
                    "bernoulli mean at the boundary: mu = " + std::to_string(m));
      a[i] = m * (1.0 - m);
    }
  }
  return a;
}

const char* corr_kind_name(CorrKind kind) {
  switch (kind) {
    case CorrKind::independence: return "ind";
    case CorrKind::exchangeable: return "ex";
    case CorrKind::ar1: return "ar1";
  }
  return "unknown";
}

void WorkingCorrelation::validate(int max_cluster) const {
  if (max_cluster < 1)
    throw Error(ErrorCode::param_domain, "cluster size must be >= 1");
  switch (structure) {
    case CorrKind::independence:
      return;
    case CorrKind::exchangeable: {
      const double lower =
          max_cluster > 1 ? -1.0 / (max_cluster - 1) : -1.0;
      if (!(alpha > lower && alpha < 1.0))
        throw Error(ErrorCode::param_domain,
                    "exchangeable alpha " + std::to_string(alpha) +
                        " outside (" + std::to_string(lower) + ", 1) for m = " +
                        std::to_string(max_cluster));
      return;
    }
    case CorrKind::ar1:
      if (!(std::abs(alpha) < 1.0))
        throw Error(ErrorCode::param_domain,
                    "AR(1) alpha must satisfy |alpha| < 1, got " +
                        std::to_string(alpha));
      return;
  }
}

Eigen::MatrixXd build_correlation(const WorkingCorrelation& wc, int m) {
  wc.validate(m);
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(m, m);
  switch (wc.structure) {
    case CorrKind::independence:
      break;
    case CorrKind::exchangeable:
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          if (i != j) r(i, j) = wc.alpha;
      break;
    case CorrKind::ar1:
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          if (i != j) r(i, j) = std::pow(wc.alpha, std::abs(i - j));
      break;
  }
  return r;
}

ClusterCovariance::ClusterCovariance(Eigen::VectorXd a_diag,
                                     WorkingCorrelation wc, int cluster_index)
    : a_diag_(std::move(a_diag)), wc_(wc), cluster_index_(cluster_index) {
  wc_.validate(size());
  a_isqrt_.resize(a_diag_.size());
  for (Eigen::Index i = 0; i < a_diag_.size(); ++i) {
    if (!(a_diag_[i] > 0.0))
      throw Error(ErrorCode::degenerate_variance,
                  "non-positive marginal variance in cluster " +
                      std::to_string(cluster_index_),
                  {{"cluster", std::to_string(cluster_index_)},
                   {"row", std::to_string(i)}});
    a_isqrt_[i] = 1.0 / std::sqrt(a_diag_[i]);
  }
}

// R(alpha)^{-1} * rhs using the closed forms:
//   EX:   R^{-1} = [I - alpha/(1-alpha+m*alpha) * 11'] / (1-alpha)
//   AR1:  tridiagonal inverse, applied directly
Eigen::MatrixXd ClusterCovariance::corr_solve(const Eigen::MatrixXd& rhs) const {
  const int m = size();
  const double alpha = wc_.alpha;
  switch (wc_.structure) {
    case CorrKind::independence:
      return rhs;
    case CorrKind::exchangeable: {
      if (m == 1) return rhs;
      const double denom = 1.0 - alpha + m * alpha;
      Eigen::MatrixXd out = rhs;
      const Eigen::RowVectorXd colsum = rhs.colwise().sum();
      for (int j = 0; j < out.cols(); ++j)
        out.col(j).array() -= alpha / denom * colsum[j];
      out /= (1.0 - alpha);
      return out;
    }
    case CorrKind::ar1: {
      if (m == 1) return rhs;
      const double a2 = alpha * alpha;
      const double scale = 1.0 / (1.0 - a2);
      Eigen::MatrixXd out(m, rhs.cols());
      for (int j = 0; j < rhs.cols(); ++j) {
        out(0, j) = scale * (rhs(0, j) - alpha * rhs(1, j));
        for (int i = 1; i < m - 1; ++i)
          out(i, j) = scale * (-alpha * rhs(i - 1, j) + (1.0 + a2) * rhs(i, j) -
                               alpha * rhs(i + 1, j));
        out(m - 1, j) = scale * (rhs(m - 1, j) - alpha * rhs(m - 2, j));
      }
      return out;
    }
  }
  return rhs;
}

Eigen::MatrixXd ClusterCovariance::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd scaled = a_isqrt_.asDiagonal() * rhs;
  scaled = corr_solve(scaled);
  return a_isqrt_.asDiagonal() * scaled;
}

Eigen::VectorXd ClusterCovariance::solve(const Eigen::VectorXd& rhs) const {
  return solve(Eigen::MatrixXd(rhs)).col(0);
}

Eigen::MatrixXd ClusterCovariance::solve_dense(const Eigen::MatrixXd& rhs) const {
  if (!llt_) {
    Eigen::MatrixXd r = build_correlation(wc_, size());
    auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(r);
    if (llt->info() != Eigen::Success)
      throw Error(ErrorCode::ill_conditioned,
                  "working covariance factorization failed for cluster " +
                      std::to_string(cluster_index_),
                  {{"cluster", std::to_string(cluster_index_)}});
    llt_ = llt;
  }
  Eigen::MatrixXd scaled = a_isqrt_.asDiagonal() * rhs;
  scaled = llt_->solve(scaled);
  return a_isqrt_.asDiagonal() * scaled;
}

Eigen::MatrixXd ClusterCovariance::dense() const {
  Eigen::VectorXd a_sqrt = a_diag_.array().sqrt();
  return a_sqrt.asDiagonal() * build_correlation(wc_, size()) *
         a_sqrt.asDiagonal();
}

}  // namespace gaplm
