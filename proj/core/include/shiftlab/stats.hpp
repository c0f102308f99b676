#pragma once

#include <span>

namespace shiftlab {

struct TTestResult {
    double t = 0.0;  ///< +-infinity when the differences have zero variance and nonzero mean
    double p = 1.0;  ///< two-sided
    int df = 0;
};

/// Paired t-test on a - b. Needs equal lengths of at least 2.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

/// CDF of Student's t with `df` degrees of freedom (df > 0).
double student_t_cdf(double t, double df);

}  // namespace shiftlab
