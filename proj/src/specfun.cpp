#include "csd/specfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace csd::specfun {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double x, double a, double b) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("reg_inc_beta: continued fraction did not converge (a=" +
                             std::to_string(a) + ", b=" + std::to_string(b) + ")");
}

double lower_gamma_series(double s, double x, double log_front) {
    double ap = s;
    double del = 1.0 / s;
    double sum = del;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kEps) return sum * std::exp(log_front);
    }
    throw std::runtime_error("reg_upper_gamma: series did not converge");
}

double upper_gamma_continued_fraction(double s, double x, double log_front) {
    double b = x + 1.0 - s;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return std::exp(log_front) * h;
    }
    throw std::runtime_error("reg_upper_gamma: continued fraction did not converge");
}

void require_probability(double p, const char* who) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error(std::string(who) + ": probability must lie in (0, 1), got " +
                                std::to_string(p));
    }
}

void require_nonnegative(double x, const char* who) {
    if (!(x >= 0.0)) {
        throw std::domain_error(std::string(who) + ": argument must be >= 0, got " +
                                std::to_string(x));
    }
}

// Solves tail(x) = p for a strictly decreasing tail on [0, inf). Bracketing
// keeps the iterate safe; Newton steps (slope = -pdf) are taken whenever they
// stay inside the bracket, otherwise the bracket is bisected.
template <class Tail, class Pdf>
double invert_decreasing_tail(Tail tail, Pdf pdf, double p, double start) {
    double lo = 0.0;
    double hi = start > 0.0 ? start : 1.0;
    for (int i = 0; tail(hi) > p; ++i) {
        lo = hi;
        hi *= 2.0;
        if (i > 2000) throw std::runtime_error("tail inversion: failed to bracket");
    }
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 500; ++iter) {
        const double f = tail(x) - p;
        if (f == 0.0) return x;
        if (f > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
        const double slope = pdf(x);
        double next = slope > 0.0 ? x + f / slope : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }
    return x;
}

}  // namespace

DegreesOfFreedom::DegreesOfFreedom(int numerator, int denominator)
    : d1(numerator), d2(denominator) {
    if (d1 < 1 || d2 < 1) {
        throw std::domain_error("degrees of freedom must be >= 1, got (" + std::to_string(d1) +
                                ", " + std::to_string(d2) + ")");
    }
}

double reg_inc_beta(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("reg_inc_beta: x must lie in [0, 1], got " + std::to_string(x));
    }
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("reg_inc_beta: shape parameters must be positive");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_front) * beta_continued_fraction(x, a, b) / a;
    }
    return 1.0 - std::exp(log_front) * beta_continued_fraction(1.0 - x, b, a) / b;
}

double reg_upper_gamma(double s, double x) {
    if (!(s > 0.0)) throw std::domain_error("reg_upper_gamma: shape must be positive");
    require_nonnegative(x, "reg_upper_gamma");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double log_front = -x + s * std::log(x) - std::lgamma(s);
    if (x < s + 1.0) return 1.0 - lower_gamma_series(s, x, log_front);
    return upper_gamma_continued_fraction(s, x, log_front);
}

double f_tail(DegreesOfFreedom dof, double x) {
    require_nonnegative(x, "f_tail");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    // 1 - I_w(a, b) with w = d1 x / (d1 x + d2) equals I_{1-w}(b, a); forming
    // 1 - w directly avoids cancellation in the upper tail.
    const double d1 = dof.d1;
    const double d2 = dof.d2;
    const double complement = d2 / (d1 * x + d2);
    return reg_inc_beta(complement, 0.5 * d2, 0.5 * d1);
}

double f_pdf(DegreesOfFreedom dof, double x) {
    require_nonnegative(x, "f_pdf");
    const double a = 0.5 * dof.d1;
    const double b = 0.5 * dof.d2;
    if (x == 0.0) {
        if (dof.d1 == 1) return std::numeric_limits<double>::infinity();
        return dof.d1 == 2 ? 1.0 : 0.0;
    }
    const double d1 = dof.d1;
    const double d2 = dof.d2;
    const double log_pdf = a * std::log(d1) + b * std::log(d2) + (a - 1.0) * std::log(x) -
                           (a + b) * std::log(d1 * x + d2) - log_beta(a, b);
    return std::exp(log_pdf);
}

double f_tail_inv(DegreesOfFreedom dof, double p) {
    require_probability(p, "f_tail_inv");
    return invert_decreasing_tail([dof](double x) { return f_tail(dof, x); },
                                  [dof](double x) { return f_pdf(dof, x); }, p, 1.0);
}

double chi2_tail(int d, double x) {
    if (d < 1) throw std::domain_error("chi2_tail: degrees of freedom must be >= 1");
    require_nonnegative(x, "chi2_tail");
    return reg_upper_gamma(0.5 * d, 0.5 * x);
}

double chi2_pdf(int d, double x) {
    if (d < 1) throw std::domain_error("chi2_pdf: degrees of freedom must be >= 1");
    require_nonnegative(x, "chi2_pdf");
    const double k = 0.5 * d;
    if (x == 0.0) {
        if (d == 1) return std::numeric_limits<double>::infinity();
        return d == 2 ? 0.5 : 0.0;
    }
    return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

double chi2_tail_inv(int d, double p) {
    if (d < 1) throw std::domain_error("chi2_tail_inv: degrees of freedom must be >= 1");
    require_probability(p, "chi2_tail_inv");
    return invert_decreasing_tail([d](double x) { return chi2_tail(d, x); },
                                  [d](double x) { return chi2_pdf(d, x); }, p,
                                  static_cast<double>(d));
}

double normal_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_tail_inv(double p) {
    require_probability(p, "normal_tail_inv");
    // Shift to a decreasing tail on [0, inf) so the shared inverter applies.
    constexpr double offset = 40.0;
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::acos(-1.0));
    const double shifted = invert_decreasing_tail(
        [](double y) { return normal_tail(y - offset); },
        [inv_sqrt_2pi](double y) {
            const double z = y - offset;
            return inv_sqrt_2pi * std::exp(-0.5 * z * z);
        },
        p, offset);
    return shifted - offset;
}

NormalApproxParams f_normal_approx_params(DegreesOfFreedom dof) {
    if (dof.d2 <= 4) {
        throw std::domain_error("f_tail_normal_approx: requires d2 > 4, got " +
                                std::to_string(dof.d2));
    }
    const double d1 = dof.d1;
    const double d2 = dof.d2;
    const double mu = d2 / (d2 - 2.0);
    const double sigma = mu * std::sqrt(2.0 * (d1 + d2 - 2.0) / (d1 * (d2 - 4.0)));
    return {mu, sigma};
}

double f_tail_normal_approx(DegreesOfFreedom dof, double x) {
    const auto [mu, sigma] = f_normal_approx_params(dof);
    return normal_tail((x - mu) / sigma);
}

}  // namespace csd::specfun
