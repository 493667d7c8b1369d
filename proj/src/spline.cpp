#include "gaplm/spline.hpp"

#include <cmath>
#include <string>

namespace gaplm {

KnotVector build_knots(int interior_count, int degree) {
  if (interior_count < 1)
    throw Error(ErrorCode::param_domain,
                "interior knot count must be >= 1, got " +
                    std::to_string(interior_count));
  if (degree < 1)
    throw Error(ErrorCode::param_domain,
                "spline degree must be >= 1, got " + std::to_string(degree));

  KnotVector kv;
  kv.degree = degree;
  kv.interior_count = interior_count;
  kv.knots.reserve(static_cast<std::size_t>(interior_count + 2 * (degree + 1)));
  for (int i = 0; i <= degree; ++i) kv.knots.push_back(0.0);
  for (int s = 1; s <= interior_count; ++s)
    kv.knots.push_back(static_cast<double>(s) / (interior_count + 1));
  for (int i = 0; i <= degree; ++i) kv.knots.push_back(1.0);
  return kv;
}

Eigen::VectorXd eval_raw(const KnotVector& kv, double z) {
  if (!(z >= 0.0 && z <= 1.0))
    throw Error(ErrorCode::numeric_domain,
                "spline evaluation point outside [0,1]: " + std::to_string(z));

  const auto& t = kv.knots;
  const int q = kv.degree;
  const int n_knots = static_cast<int>(t.size());
  const int n0 = n_knots - 1;  // degree-0 indicator count

  // Last nonempty subinterval; it absorbs z == 1.
  int last = -1;
  for (int i = n0 - 1; i >= 0; --i) {
    if (t[i] < t[i + 1]) {
      last = i;
      break;
    }
  }

  std::vector<double> b(static_cast<std::size_t>(n0), 0.0);
  for (int i = 0; i < n0; ++i) {
    const bool inside = (z >= t[i] && z < t[i + 1]);
    b[static_cast<std::size_t>(i)] =
        (inside || (i == last && z == t[i + 1])) ? 1.0 : 0.0;
  }

  for (int d = 1; d <= q; ++d) {
    const int count = n_knots - d - 1;
    for (int i = 0; i < count; ++i) {
      const double den1 = t[i + d] - t[i];
      const double den2 = t[i + d + 1] - t[i + 1];
      const double w1 = den1 > 0.0 ? (z - t[i]) / den1 : 0.0;
      const double w2 = den2 > 0.0 ? (t[i + d + 1] - z) / den2 : 0.0;
      b[static_cast<std::size_t>(i)] =
          w1 * b[static_cast<std::size_t>(i)] +
          w2 * b[static_cast<std::size_t>(i + 1)];
    }
  }

  const int dim = kv.raw_dim();
  Eigen::VectorXd out(dim);
  for (int i = 0; i < dim; ++i) out[i] = b[static_cast<std::size_t>(i)];
  return out;
}

CenteredSplineBasis CenteredSplineBasis::fit(int nominal_knots, int degree,
                                             const Eigen::VectorXd& training_z) {
  if (nominal_knots < 1)
    throw Error(ErrorCode::param_domain,
                "centered basis needs nominal knot count >= 1, got " +
                    std::to_string(nominal_knots));
  if (training_z.size() == 0)
    throw Error(ErrorCode::param_domain, "empty training sample for centering");

  CenteredSplineBasis basis;
  basis.nominal_n_ = nominal_knots;
  basis.scale_ = std::sqrt(static_cast<double>(nominal_knots));
  basis.knots_ = build_knots(nominal_knots + 1, degree);

  const int raw = basis.knots_.raw_dim();  // == nominal_knots + degree + 2
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(raw);
  for (Eigen::Index i = 0; i < training_z.size(); ++i)
    mean += eval_raw(basis.knots_, training_z[i]);
  mean /= static_cast<double>(training_z.size());

  if (!(mean[0] > 0.0))
    throw Error(ErrorCode::degenerate_design,
                "no training data in the support of the first basis function "
                "(left boundary region is empty)");

  basis.ratios_ = mean.tail(raw - 1) / mean[0];
  return basis;
}

Eigen::VectorXd CenteredSplineBasis::eval(double z) const {
  const Eigen::VectorXd raw = eval_raw(knots_, z);
  return scale_ * (raw.tail(raw.size() - 1) - raw[0] * ratios_);
}

Eigen::MatrixXd CenteredSplineBasis::eval_matrix(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd out(z.size(), dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) out.row(i) = eval(z[i]).transpose();
  return out;
}

}  // namespace gaplm
