#include "pvlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pvlab {

Moments moments(std::span<const double> values)
{
    const std::size_t count = values.size();
    if (count < 2)
        throw TooFewSamplesError("moments need at least 2 values");
    const double n = static_cast<double>(count);
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    Moments out{mean, m2 * n / (n - 1.0), std::numeric_limits<double>::quiet_NaN(),
                std::numeric_limits<double>::quiet_NaN()};
    if (m2 > 0.0) {
        if (count >= 3) {
            const double g1 = m3 / std::pow(m2, 1.5);
            out.skewness = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
        }
        if (count >= 4) {
            const double g2 = m4 / (m2 * m2) - 3.0;
            out.excess_kurtosis = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
        }
    }
    return out;
}

double variance_jackknife_se(std::span<const double> values)
{
    const std::size_t count = values.size();
    if (count < 3)
        throw TooFewSamplesError("jackknife variance needs at least 3 values");
    const double n = static_cast<double>(count);
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);

    // Leave-one-out: SS_{-i} = SS - n/(n-1) (x_i - mean)^2.
    std::vector<double> loo(count);
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double d = values[i] - mean;
        loo[i] = (ss - n / (n - 1.0) * d * d) / (n - 2.0);
        loo_mean += loo[i];
    }
    loo_mean /= n;
    double acc = 0.0;
    for (double v : loo)
        acc += (v - loo_mean) * (v - loo_mean);
    return std::sqrt((n - 1.0) / n * acc);
}

ScalingFit fit_scaling(std::span<const double> lambdas, std::span<const double> variances)
{
    if (lambdas.size() != variances.size())
        throw std::invalid_argument("fit_scaling: grid and variances differ in length");
    if (lambdas.size() < 3)
        throw TooFewSamplesError("fit_scaling needs at least 3 grid points");
    const std::size_t count = lambdas.size();
    std::vector<double> x(count), y(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (!(variances[i] > 0.0))
            throw std::domain_error("fit_scaling: variances must be > 0");
        if (!(lambdas[i] > 0.0))
            throw std::domain_error("fit_scaling: intensities must be > 0");
        x[i] = std::log(lambdas[i]);
        y[i] = std::log(variances[i]);
    }
    const double n = static_cast<double>(count);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0))
        throw std::domain_error("fit_scaling: intensity grid is constant");
    ScalingFit fit{};
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        sse += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    fit.slope_se = count > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    return fit;
}

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double kolmogorov_survival(double t)
{
    if (t <= 0.0)
        return 1.0;
    if (t < 1.0) {
        // Jacobi-transformed series for the CDF converges fast for small t.
        double cdf = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double odd = 2.0 * k - 1.0;
            cdf += std::exp(-odd * odd * std::numbers::pi * std::numbers::pi / (8.0 * t * t));
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / t;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * t * t);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18)
            break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_normal(std::span<const double> values)
{
    if (values.size() < 50)
        throw TooFewSamplesError("ks_normal needs at least 50 values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = normal_cdf(sorted[i]);
        const double i_d = static_cast<double>(i);
        d = std::max({d, (i_d + 1.0) / n - cdf, cdf - i_d / n});
    }
    const double root = std::sqrt(n);
    return {d, kolmogorov_survival((root + 0.12 + 0.11 / root) * d)};
}

std::vector<double> standardize(std::span<const double> values, double center, double scale)
{
    if (!(scale > 0.0))
        throw std::domain_error("standardize: scale must be > 0");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = (values[i] - center) / scale;
    return out;
}

}  // namespace pvlab
