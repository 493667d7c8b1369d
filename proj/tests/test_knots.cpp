#include <cmath>
#include <limits>

#include "doctest.h"
#include "gaplm/knots.hpp"

using namespace gaplm;

TEST_CASE("step-I knot rule") {
  CHECK(step1_knots(5000, 4) == 6);  // 2 * 5000^(1/8) = 5.799...
  CHECK(step1_knots(2, 1) == 3);     // 2 * sqrt(2) = 2.83
  CHECK_THROWS_AS(step1_knots(1, 4), Error);
  CHECK_THROWS_AS(step1_knots(100, 0), Error);

  SUBCASE("nondecreasing in the sample size") {
    int prev = 0;
    for (long long n = 2; n < 4000; n += 7) {
      const int now = step1_knots(n, 4);
      CHECK(now >= prev);
      prev = now;
    }
  }

  SUBCASE("half-away-from-zero rounding") {
    // pick n with 2*n^(1/2) landing exactly on k + 1/2: n = ((k+0.5)/2)^2
    // k=4: n = 5.0625 -> not integral; check against direct formula instead
    for (long long n : {2LL, 10LL, 123LL, 999LL, 5000LL}) {
      const double value = 2.0 * std::pow(static_cast<double>(n), 0.125);
      CHECK(step1_knots(n, 4) == std::max(1LL, std::llround(value)));
    }
  }
}

TEST_CASE("step-II candidate interval") {
  {
    const auto [lo, hi] = step2_candidates(5000, 4);
    CHECK(lo == 3);  // a_n = (5000 ln 5000)^(1/9) = 3.27
    CHECK(hi == 16);
  }
  {
    const auto [lo, hi] = step2_candidates(100, 4);
    CHECK(lo == 2);  // a_n = (100 ln 100)^(1/9) = 1.977
    CHECK(hi == 10);
  }
  SUBCASE("never empty") {
    for (long long n : {2LL, 3LL, 10LL, 50LL, 100000LL})
      for (int p : {1, 2, 4, 6}) {
        const auto [lo, hi] = step2_candidates(n, p);
        CHECK(lo >= 1);
        CHECK(hi >= lo);
      }
  }
}

TEST_CASE("BIC value ordering") {
  // better fit wins at equal dimension
  CHECK(bic_value(1.0, 8, 100) < bic_value(2.0, 8, 100));
  // smaller dimension wins at equal fit
  CHECK(bic_value(1.5, 7, 100) < bic_value(1.5, 9, 100));
  // perfect fit is a -inf sentinel
  CHECK(std::isinf(bic_value(0.0, 8, 100)));
  CHECK(bic_value(0.0, 8, 100) < 0.0);
  CHECK_THROWS_AS(bic_value(1.0, 8, 0), Error);
}
