#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gaplm/error.hpp"

namespace gaplm {

// Affine map original -> [0,1] recorded when an additive covariate is
// rescaled at ingestion, so plots can be reported on the original scale.
struct AffineMap {
  double offset = 0.0;
  double scale = 1.0;
  double to_unit(double v) const { return (v - offset) / scale; }
  double from_unit(double u) const { return offset + scale * u; }
};

struct Cluster {
  std::string id;
  Eigen::VectorXd y;   // m_i responses
  Eigen::MatrixXd x;   // m_i x d1 linear covariates
  Eigen::MatrixXd z;   // m_i x d2 additive covariates in [0,1]
};

struct ClusteredDataset {
  std::vector<Cluster> clusters;
  std::vector<AffineMap> z_maps;  // size d2; identity unless rescaled

  int n() const { return static_cast<int>(clusters.size()); }
  int d1() const { return clusters.empty() ? 0 : static_cast<int>(clusters[0].x.cols()); }
  int d2() const { return clusters.empty() ? 0 : static_cast<int>(clusters[0].z.cols()); }

  long long n_total() const {
    long long total = 0;
    for (const auto& c : clusters) total += c.y.size();
    return total;
  }

  int max_cluster_size() const {
    Eigen::Index m = 0;
    for (const auto& c : clusters) m = std::max(m, c.y.size());
    return static_cast<int>(m);
  }

  bool equal_cluster_sizes() const {
    for (const auto& c : clusters)
      if (c.y.size() != clusters[0].y.size()) return false;
    return true;
  }

  // All observed values of additive covariate l, stacked cluster by cluster.
  Eigen::VectorXd additive_column(int l) const;

  void validate() const;
};

}  // namespace gaplm
