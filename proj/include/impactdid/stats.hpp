#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>

#include "impactdid/types.hpp"

namespace impactdid {
namespace stats {

// Ordinary least squares fit of y = intercept + slope * x, centered sums.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rss = 0.0;  // residual sum of squares
    double sxx = 0.0;  // centered sum of squares of x
    std::size_t n = 0;
};

inline LinearFit ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("ols_fit: size mismatch");
    if (x.size() < 2) throw std::invalid_argument("ols_fit: need at least 2 points");
    const std::size_t n = x.size();
    double x_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x_mean += x[i];
        y_mean += y[i];
    }
    x_mean /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - x_mean;
        sxx += dx * dx;
        sxy += dx * (y[i] - y_mean);
    }
    if (sxx == 0.0) throw std::invalid_argument("ols_fit: zero variance in x");
    LinearFit fit;
    fit.n = n;
    fit.sxx = sxx;
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - (fit.intercept + fit.slope * x[i]);
        rss += r * r;
    }
    fit.rss = std::max(rss, 0.0);
    return fit;
}

// Regularized incomplete beta function I_x(a, b), continued fraction
// evaluation (modified Lentz).
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a, b must be > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    auto continued_fraction = [](double a_, double b_, double x_) {
        constexpr double eps = std::numeric_limits<double>::epsilon();
        constexpr double tiny = 1e-300;
        const double qab = a_ + b_;
        const double qap = a_ + 1.0;
        const double qam = a_ - 1.0;
        double c = 1.0;
        double d = 1.0 - qab * x_ / qap;
        if (std::fabs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 300; ++m) {
            const double m2 = 2.0 * m;
            double aa = m * (b_ - m) * x_ / ((qam + m2) * (a_ + m2));
            d = 1.0 + aa * d;
            if (std::fabs(d) < tiny) d = tiny;
            c = 1.0 + aa / c;
            if (std::fabs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            aa = -(a_ + m) * (qab + m) * x_ / ((a_ + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if (std::fabs(d) < tiny) d = tiny;
            c = 1.0 + aa / c;
            if (std::fabs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::fabs(del - 1.0) < eps) break;
        }
        return h;
    };

    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * continued_fraction(a, b, x) / a;
    return 1.0 - front * continued_fraction(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a Student-t statistic with df degrees of freedom:
// P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw std::invalid_argument("student_t_two_sided_p: df must be > 0");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    double x = df / (df + t * t);
    double p = incomplete_beta(df / 2.0, 0.5, x);
    return std::min(1.0, std::max(0.0, p));
}

// Slope-difference test between two independent regressions: the pooled model
// y = a + b*x + c*g + d*(x*g) is saturated per group, so the interaction
// coefficient d equals the slope difference and its standard error comes from
// the pooled residual variance with n1 + n2 - 4 degrees of freedom.
struct SlopeDifference {
    double slope_a = 0.0;
    double slope_b = 0.0;
    double diff = 0.0;  // slope_a - slope_b
    double t_statistic = 0.0;
    double p_value = 1.0;
    double df = 0.0;
};

inline SlopeDifference slope_difference_test(const LinearFit& a, const LinearFit& b) {
    if (a.n < 3 || b.n < 3)
        throw std::invalid_argument("slope_difference_test: need at least 3 points per series");
    SlopeDifference out;
    out.slope_a = a.slope;
    out.slope_b = b.slope;
    out.diff = a.slope - b.slope;
    out.df = static_cast<double>(a.n + b.n) - 4.0;
    const double pooled_var = (a.rss + b.rss) / out.df;
    const double se = std::sqrt(pooled_var * (1.0 / a.sxx + 1.0 / b.sxx));
    if (se == 0.0) {
        // exact fits: any nonzero gap is unambiguous
        out.t_statistic = out.diff == 0.0 ? 0.0
                          : out.diff > 0.0
                              ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
        out.p_value = out.diff == 0.0 ? 1.0 : 0.0;
        return out;
    }
    out.t_statistic = out.diff / se;
    out.p_value = student_t_two_sided_p(out.t_statistic, out.df);
    return out;
}

}  // namespace stats
}  // namespace impactdid
