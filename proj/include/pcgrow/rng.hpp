#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace pcg {

// Single deterministic pseudorandom stream. All randomized steps (K-means
// init, Dirichlet init, jitter, shuffles) draw from one Rng threaded through
// explicitly, so a run is a pure function of (inputs, seed). The raw engine
// is standard mt19937_64; the transforms below avoid the library's
// implementation-defined distributions.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1).
    double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1].
    double u01_open() { return 1.0 - u01(); }

    // Uniform integer in [0, n).
    int64_t uniform_int(int64_t n) {
        // rejection sampling keeps the draw unbiased
        uint64_t un = static_cast<uint64_t>(n);
        uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return static_cast<int64_t>(v % un);
    }

    // Standard normal via Box-Muller.
    double normal() {
        double u1 = u01_open();
        double u2 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Symmetric Dirichlet(alpha = 1): normalized exponential draws.
    std::vector<double> dirichlet(int n) {
        std::vector<double> w(n);
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            w[i] = -std::log(u01_open());
            total += w[i];
        }
        for (int i = 0; i < n; ++i) w[i] /= total;
        return w;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
            int64_t j = uniform_int(i + 1);
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace pcg
