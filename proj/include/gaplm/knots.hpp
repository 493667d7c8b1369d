#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gaplm/error.hpp"

namespace gaplm {

// Step-I knot count N = [2 n_T^{1/(2p)}], nearest integer half away from
// zero, floored at 1.
int step1_knots(long long n_total, int p);

// Step-II candidate interval [[a_n],[5 a_n]] with a_n = (n_T log n_T)^{1/(2p+1)},
// clamped to lower >= 1 and lower <= upper.
std::pair<int, int> step2_candidates(long long n_total, int p);

// BIC(N^S) = log(2 Q* / n) + J^S log(n) / n with n the cluster count.
// A perfect fit (Q* <= 0) yields -infinity, flagged in the trace.
double bic_value(double q_star, int basis_dim, int n_clusters);

struct BicTraceEntry {
  int ns = 0;
  double bic = 0.0;
  bool ok = false;
  std::string note;
};

struct KnotPlan {
  int p = 4;
  int n_step1 = 0;
  int ns_lower = 0;
  int ns_upper = 0;
  int ns_selected = 0;
  std::vector<BicTraceEntry> trace;
};

}  // namespace gaplm
