#include "gaplm/dataset.hpp"

namespace gaplm {

Eigen::VectorXd ClusteredDataset::additive_column(int l) const {
  Eigen::VectorXd out(n_total());
  Eigen::Index pos = 0;
  for (const auto& c : clusters) {
    out.segment(pos, c.z.rows()) = c.z.col(l);
    pos += c.z.rows();
  }
  return out;
}

void ClusteredDataset::validate() const {
  if (clusters.empty())
    throw Error(ErrorCode::config_error, "dataset has no clusters");
  const Eigen::Index nx = clusters[0].x.cols();
  const Eigen::Index nz = clusters[0].z.cols();
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    if (c.y.size() < 1)
      throw Error(ErrorCode::config_error, "empty cluster '" + c.id + "'",
                  {{"cluster", c.id}});
    if (c.x.rows() != c.y.size() || c.z.rows() != c.y.size() ||
        c.x.cols() != nx || c.z.cols() != nz)
      throw Error(ErrorCode::config_error,
                  "inconsistent row/column counts in cluster '" + c.id + "'",
                  {{"cluster", c.id}});
    for (Eigen::Index r = 0; r < c.z.rows(); ++r)
      for (Eigen::Index col = 0; col < c.z.cols(); ++col)
        if (!(c.z(r, col) >= 0.0 && c.z(r, col) <= 1.0))
          throw Error(ErrorCode::numeric_domain,
                      "additive covariate outside [0,1] in cluster '" + c.id +
                          "'",
                      {{"cluster", c.id},
                       {"row", std::to_string(r)},
                       {"column", std::to_string(col)}});
  }
  if (!z_maps.empty() && static_cast<Eigen::Index>(z_maps.size()) != nz)
    throw Error(ErrorCode::config_error,
                "rescale map count does not match additive columns");
}

}  // namespace gaplm
