#ifndef LMX_DIST_HPP
#define LMX_DIST_HPP

// Distribution functions for the t/F/chi-square/Normal/Beta machinery.
// Tail probabilities route through the regularized incomplete beta and
// gamma functions, target accuracy ~1e-12 relative.

namespace lmx::dist {

double norm_pdf(double x);
double norm_cdf(double x);
// Inverse standard Normal CDF (Wichura's AS 241 rational approximations).
double norm_quantile(double p);

double lgamma_fn(double x);
double digamma(double x);
double trigamma(double x);

// Regularized incomplete beta I_x(a, b).
double inc_beta(double a, double b, double x);
// Regularized lower incomplete gamma P(a, x).
double inc_gamma_p(double a, double x);

double t_cdf(double t, double df);
double t_quantile(double p, double df);
double f_cdf(double f, double df1, double df2);
double chisq_cdf(double x, double df);
double beta_cdf(double x, double a, double b);

// Two-sided p-values.
double t_two_sided_p(double t, double df);
double normal_two_sided_p(double z);
// Upper-tail p-values.
double f_upper_p(double f, double df1, double df2);
double chisq_upper_p(double x, double df);

// Asymptotic Kolmogorov-Smirnov p-value for statistic d at sample size n,
// using Stephens' effective-n correction.
double ks_p_value(double d, long n);

}  // namespace lmx::dist

#endif
