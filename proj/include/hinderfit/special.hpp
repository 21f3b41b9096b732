#pragma once

namespace hinderfit {

/// Standard normal CDF.
double normal_cdf(double z);

/// I_x(a, b), evaluated by Lentz's continued fraction. The symmetry
/// I_x(a,b) = 1 - I_{1-x}(b,a) is applied when x > (a+1)/(a+b+2).
double regularized_incomplete_beta(double a, double b, double x);

/// CDF of the F distribution with (df1, df2) degrees of freedom.
double f_cdf(double f, int df1, int df2);

/// 1 - f_cdf, computed without cancellation so tiny p-values keep precision.
double f_survival(double f, int df1, int df2);

/// Upper-tail critical value: f_cdf(F_crit) = 1 - alpha.
double f_critical(double alpha, int df1, int df2);

} // namespace hinderfit
