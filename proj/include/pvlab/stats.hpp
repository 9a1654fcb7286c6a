#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace pvlab {

class TooFewSamplesError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Moments {
    double mean;
    double variance;         ///< n - 1 denominator
    double skewness;         ///< adjusted Fisher-Pearson G1; NaN below 3 values
    double excess_kurtosis;  ///< bias-adjusted G2; NaN below 4 values
};

Moments moments(std::span<const double> values);

/// Jackknife standard error of the unbiased sample variance.
double variance_jackknife_se(std::span<const double> values);

struct ScalingFit {
    double slope;
    double intercept;
    double r2;
    double slope_se;  ///< OLS standard error; 0 for an exact fit or 2 points
};

/// Ordinary least squares of log(variance) on log(lambda). Needs >= 3 points.
ScalingFit fit_scaling(std::span<const double> lambdas, std::span<const double> variances);

double normal_cdf(double x);

/// Asymptotic Kolmogorov survival function Q(t) = 2 sum (-1)^(k-1) exp(-2 k^2 t^2).
double kolmogorov_survival(double t);

struct KsResult {
    double statistic;
    double p_value;
};

/// One-sample KS test of values against N(0, 1). The p-value uses Stephens'
/// finite-n correction t = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) D. When the
/// values were standardized by their own mean and deviation the p-value is
/// conservative. Needs >= 50 values.
KsResult ks_normal(std::span<const double> values);

/// (v - center) / scale elementwise.
std::vector<double> standardize(std::span<const double> values, double center, double scale);

}  // namespace pvlab
