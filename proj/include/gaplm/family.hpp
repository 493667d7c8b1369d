#pragma once

#include <Eigen/Dense>
#include <memory>

#include "gaplm/error.hpp"

namespace gaplm {

enum class LinkKind { gaussian_identity, bernoulli_logit };

// Marginal mean model: link, mean derivative and variance function.
struct LinkFamily {
  LinkKind kind = LinkKind::gaussian_identity;
  double dispersion = 1.0;  // gaussian only

  static LinkFamily gaussian(double dispersion = 1.0) {
    if (!(dispersion > 0.0))
      throw Error(ErrorCode::param_domain, "dispersion must be positive");
    return LinkFamily{LinkKind::gaussian_identity, dispersion};
  }
  static LinkFamily bernoulli() {
    return LinkFamily{LinkKind::bernoulli_logit, 1.0};
  }

  bool is_binary() const { return kind == LinkKind::bernoulli_logit; }
};

// mu(eta) and the first derivative of mu, elementwise. Overflow-safe for
// |eta| up to ~700 in the logit case.
void mu_and_delta(const LinkFamily& link, const Eigen::VectorXd& eta,
                  Eigen::VectorXd& mu, Eigen::VectorXd& delta);

// Marginal variances A from the fitted means.
Eigen::VectorXd marginal_variance(const LinkFamily& link,
                                  const Eigen::VectorXd& mu);

enum class CorrKind { independence, exchangeable, ar1 };

const char* corr_kind_name(CorrKind kind);

struct WorkingCorrelation {
  CorrKind structure = CorrKind::independence;
  double alpha = 0.0;

  // Positive definiteness for every cluster size up to max_cluster.
  void validate(int max_cluster) const;
};

Eigen::MatrixXd build_correlation(const WorkingCorrelation& wc, int m);

// Working covariance V = A^{1/2} R(alpha) A^{1/2} for one cluster, with
// closed-form inverse paths for IND/EX/AR(1) and a dense Cholesky fallback.
class ClusterCovariance {
 public:
  ClusterCovariance(Eigen::VectorXd a_diag, WorkingCorrelation wc,
                    int cluster_index = -1);

  // V^{-1} * rhs (single vector).
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  // V^{-1} * rhs column-wise.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  // Same computation through the dense factorization, for cross-checking
  // the closed forms.
  Eigen::MatrixXd solve_dense(const Eigen::MatrixXd& rhs) const;

  Eigen::MatrixXd dense() const;  // explicit V
  int size() const { return static_cast<int>(a_diag_.size()); }

 private:
  Eigen::MatrixXd corr_solve(const Eigen::MatrixXd& rhs) const;

  Eigen::VectorXd a_diag_;
  Eigen::VectorXd a_isqrt_;
  WorkingCorrelation wc_;
  int cluster_index_ = -1;
  mutable std::shared_ptr<Eigen::LLT<Eigen::MatrixXd>> llt_;  // lazy fallback
};

}  // namespace gaplm
