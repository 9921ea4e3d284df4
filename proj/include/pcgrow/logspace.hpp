#pragma once

#include <cmath>
#include <limits>

namespace pcg {

// All probability arithmetic is done in natural-log space; zero probability
// is the -inf sentinel.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = a > b ? a : b;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log(sum exp(x_i)) over a contiguous range.
inline double log_sum_exp(const double* x, int64_t n) {
    double m = kNegInf;
    for (int64_t i = 0; i < n; ++i)
        if (x[i] > m) m = x[i];
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
    return m + std::log(s);
}

inline double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace pcg
