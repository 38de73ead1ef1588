#include "rabm/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "rabm/error.hpp"

namespace rabm {

double f_upper_tail(double f, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw ContractError("F distribution needs positive degrees of freedom");
  if (std::isnan(f)) return f;
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  // P(F > f) = I_x(df2/2, df1/2) with x = df2 / (df2 + df1 f).
  const double x = df2 / (df2 + df1 * f);
  return boost::math::ibeta(df2 / 2.0, df1 / 2.0, x);
}

double normal_two_sided_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

double student_t_upper_quantile(double alpha, double df) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(df > 0.0)) throw ContractError("bad t quantile arguments");
  return boost::math::quantile(boost::math::complement(boost::math::students_t(df), alpha));
}

}  // namespace rabm
