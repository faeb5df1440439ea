#pragma once

// Tail probabilities used by every detector: regularized incomplete beta,
// F and chi-squared tails with their inverses, and the standard normal tail.
// All functions are pure and throw std::domain_error on invalid arguments.

namespace csd::specfun {

struct DegreesOfFreedom {
    int d1;
    int d2;

    DegreesOfFreedom(int numerator, int denominator);
};

/// I_x(a, b) = B(x; a, b) / B(a, b).
double reg_inc_beta(double x, double a, double b);

/// Upper regularized incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s).
double reg_upper_gamma(double s, double x);

/// Q_F(d1,d2)(x) = 1 - I_{d1 x / (d1 x + d2)}(d1/2, d2/2).
double f_tail(DegreesOfFreedom dof, double x);
double f_pdf(DegreesOfFreedom dof, double x);
double f_tail_inv(DegreesOfFreedom dof, double p);

double chi2_tail(int d, double x);
double chi2_pdf(int d, double x);
double chi2_tail_inv(int d, double p);

double normal_tail(double z);
double normal_tail_inv(double p);

/// Mean and spread of the normal surrogate for F(d1, d2); requires d2 > 4.
struct NormalApproxParams {
    double mu;
    double sigma;
};
NormalApproxParams f_normal_approx_params(DegreesOfFreedom dof);

/// Q_z((x - mu) / sigma) with the surrogate above. Only meaningful for large
/// degrees of freedom (both beyond ~100); never used in place of f_tail.
double f_tail_normal_approx(DegreesOfFreedom dof, double x);

}  // namespace csd::specfun
