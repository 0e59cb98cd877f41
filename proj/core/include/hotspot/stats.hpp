#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace hotspot {

inline double expit(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// log(1 + exp(x)) without overflow for large |x|.
inline double log1pexp(double x) {
    if (x > 0.0) {
        return x + std::log1p(std::exp(-x));
    }
    return std::log1p(std::exp(x));
}

// Neumaier compensated summation; order-dependent only in the last ulp.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7). `values` need not be sorted. Empty input is an error.
double quantile(std::span<const double> values, double q);

double mean(std::span<const double> values);

// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double stddev(std::span<const double> values);

double normal_cdf(double x);

}  // namespace hotspot
