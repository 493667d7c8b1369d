#include "gaplm/knots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gaplm {

namespace {
void check_args(long long n_total, int p) {
  if (n_total < 2)
    throw Error(ErrorCode::param_domain,
                "need at least 2 observations, got " + std::to_string(n_total));
  if (p < 1)
    throw Error(ErrorCode::param_domain,
                "smoothness order p must be >= 1, got " + std::to_string(p));
}
}  // namespace

int step1_knots(long long n_total, int p) {
  check_args(n_total, p);
  const double value =
      2.0 * std::pow(static_cast<double>(n_total), 1.0 / (2.0 * p));
  return std::max(1, static_cast<int>(std::llround(value)));
}

std::pair<int, int> step2_candidates(long long n_total, int p) {
  check_args(n_total, p);
  const double nt = static_cast<double>(n_total);
  const double a_n = std::pow(nt * std::log(nt), 1.0 / (2.0 * p + 1.0));
  int lower = static_cast<int>(std::llround(a_n));
  int upper = static_cast<int>(std::llround(5.0 * a_n));
  lower = std::max(1, lower);
  upper = std::max(lower, upper);
  return {lower, upper};
}

double bic_value(double q_star, int basis_dim, int n_clusters) {
  if (n_clusters < 1)
    throw Error(ErrorCode::param_domain, "cluster count must be >= 1");
  if (!(q_star > 0.0)) return -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(n_clusters);
  return std::log(2.0 * q_star / n) + basis_dim * std::log(n) / n;
}

}  // namespace gaplm
