#pragma once

namespace rabm {

/// P(F > f) for an F(df1, df2) variable. f <= 0 gives 1.
double f_upper_tail(double f, double df1, double df2);

/// Two-sided p-value of a standard normal statistic.
double normal_two_sided_p(double z);

/// Upper quantile of Student's t: P(T > q) = alpha.
double student_t_upper_quantile(double alpha, double df);

}  // namespace rabm
