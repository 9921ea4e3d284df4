#include "pcgrow/mutual_info.hpp"

#include <cmath>

namespace pcg {

MITable pairwise_mutual_information(const DiscreteData& data, double smoothing) {
    if (data.num_samples() < 2) throw ArgError("mutual information needs at least 2 samples");
    if (!(smoothing > 0.0)) throw ArgError("smoothing pseudocount must be positive");
    data.check_domains();

    int nv = data.num_vars;
    int64_t n = data.num_samples();
    MITable mi(nv);

    // constant columns carry no information; their rows stay exactly zero
    std::vector<char> constant(nv, 0);
    for (int v = 0; v < nv; ++v) {
        int32_t first = data.row(0)[v];
        constant[v] = 1;
        for (int64_t s = 1; s < n && constant[v]; ++s)
            if (data.row(s)[v] != first) constant[v] = 0;
    }

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < nv; ++i)
        for (int j = i + 1; j < nv; ++j)
            if (!constant[i] && !constant[j]) pairs.emplace_back(i, j);

#pragma omp parallel for schedule(static)
    for (int64_t p = 0; p < static_cast<int64_t>(pairs.size()); ++p) {
        int a = pairs[p].first, b = pairs[p].second;
        int da = data.domains[a], db = data.domains[b];
        std::vector<int64_t> joint(static_cast<int64_t>(da) * db, 0);
        for (int64_t s = 0; s < n; ++s) {
            const int32_t* row = data.row(s);
            joint[static_cast<int64_t>(row[a]) * db + row[b]] += 1;
        }
        double total = static_cast<double>(n) + smoothing * da * db;
        std::vector<double> pa(da, 0.0), pb(db, 0.0);
        for (int x = 0; x < da; ++x)
            for (int y = 0; y < db; ++y) {
                double pxy = (static_cast<double>(joint[static_cast<int64_t>(x) * db + y]) + smoothing) / total;
                pa[x] += pxy;
                pb[y] += pxy;
            }
        double info = 0.0;
        for (int x = 0; x < da; ++x)
            for (int y = 0; y < db; ++y) {
                double pxy = (static_cast<double>(joint[static_cast<int64_t>(x) * db + y]) + smoothing) / total;
                info += pxy * std::log(pxy / (pa[x] * pb[y]));
            }
        mi.set(a, b, info < 0.0 ? 0.0 : info);
    }
    return mi;
}

}  // namespace pcg
