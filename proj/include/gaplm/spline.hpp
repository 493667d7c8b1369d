#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gaplm/error.hpp"

namespace gaplm {

// Clamped knot sequence on [0,1]: equally spaced interior knots plus
// (q+1)-fold repeats of both boundaries.
struct KnotVector {
  int degree = 0;
  int interior_count = 0;
  std::vector<double> knots;

  // Number of raw B-splines supported by this sequence.
  int raw_dim() const { return interior_count + degree + 1; }
};

KnotVector build_knots(int interior_count, int degree);

// All raw B-spline values at z, by the three-term recursion with the
// 0/0 := 0 convention. The final subinterval is right-closed so z = 1
// evaluates without special-casing by the caller.
Eigen::VectorXd eval_raw(const KnotVector& knots, double z);

// Centered spline basis of nominal size N: functions
//   B_s(z) = sqrt(N) * [ b_{s+1}(z) - r_s * b_1(z) ],  s = 1..N+q+1,
// where r_s is the ratio of empirical means of b_{s+1} and b_1 over the
// training sample. The raw sequence carries N+1 interior knots so that the
// centered dimension comes out as N+q+1.
class CenteredSplineBasis {
 public:
  static CenteredSplineBasis fit(int nominal_knots, int degree,
                                 const Eigen::VectorXd& training_z);

  Eigen::VectorXd eval(double z) const;
  // Rows are eval(z_i); convenience for design assembly.
  Eigen::MatrixXd eval_matrix(const Eigen::VectorXd& z) const;

  int dim() const { return static_cast<int>(ratios_.size()); }
  int nominal_knots() const { return nominal_n_; }
  int degree() const { return knots_.degree; }
  double scale() const { return scale_; }
  const KnotVector& knot_vector() const { return knots_; }
  const Eigen::VectorXd& centering_ratios() const { return ratios_; }

 private:
  KnotVector knots_;
  int nominal_n_ = 0;
  double scale_ = 1.0;
  Eigen::VectorXd ratios_;
};

}  // namespace gaplm
