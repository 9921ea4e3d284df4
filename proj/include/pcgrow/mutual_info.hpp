#pragma once

#include <cstdint>
#include <vector>

#include "pcgrow/data.hpp"

namespace pcg {

// Symmetric matrix of pairwise mutual information estimates in nats.
struct MITable {
    int n = 0;
    std::vector<double> m;  // n * n, row-major

    explicit MITable(int size = 0) : n(size), m(static_cast<int64_t>(size) * size, 0.0) {}
    double at(int i, int j) const { return m[static_cast<int64_t>(i) * n + j]; }
    void set(int i, int j, double v) {
        m[static_cast<int64_t>(i) * n + j] = v;
        m[static_cast<int64_t>(j) * n + i] = v;
    }
};

// MI from smoothed empirical frequencies: each joint cell gets `smoothing`
// pseudocounts, marginals are the row/column sums of the smoothed joint, and
// entries are clamped at zero. Pairs are estimated in parallel. Requires at
// least 2 samples and smoothing > 0.
MITable pairwise_mutual_information(const DiscreteData& data, double smoothing = 1.0);

}  // namespace pcg
