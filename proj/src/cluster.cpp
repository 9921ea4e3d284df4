#include "pcgrow/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pcgrow/kernels.hpp"

namespace pcg {

namespace {

double sq_dist(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
        double t = a[d] - b[d];
        s += t * t;
    }
    return s;
}

}  // namespace

int ClusterMap::assign(const double* h) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
        double d = sq_dist(h, centroid(i), dim);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<int64_t> ClusterMap::sizes() const {
    std::vector<int64_t> s(k, 0);
    for (int z : labels) s[z] += 1;
    return s;
}

ClusterMap single_cluster_map(const EmbeddedDataset& data) {
    ClusterMap map;
    map.k = 1;
    map.dim = data.embed_dim;
    map.labels.assign(data.size(), 0);
    map.centroids.assign(map.dim, 0.0);
    recompute_centroids(map, data);
    return map;
}

void recompute_centroids(ClusterMap& map, const EmbeddedDataset& data) {
    std::vector<double> sums(static_cast<int64_t>(map.k) * map.dim, 0.0);
    std::vector<int64_t> counts(map.k, 0);
    for (int64_t i = 0; i < data.size(); ++i) {
        int z = map.labels[i];
        const double* h = data.embedding(i);
        double* s = sums.data() + static_cast<int64_t>(z) * map.dim;
        for (int d = 0; d < map.dim; ++d) s[d] += h[d];
        counts[z] += 1;
    }
    for (int i = 0; i < map.k; ++i) {
        if (counts[i] == 0) continue;
        double* c = map.centroids.data() + static_cast<int64_t>(i) * map.dim;
        const double* s = sums.data() + static_cast<int64_t>(i) * map.dim;
        for (int d = 0; d < map.dim; ++d) c[d] = s[d] / counts[i];
    }
}

void repair_empty_clusters(ClusterMap& map, const EmbeddedDataset& data) {
    for (int empty = 0; empty < map.k; ++empty) {
        std::vector<int64_t> counts = map.sizes();
        if (counts[empty] > 0) continue;
        int donor = 0;
        for (int i = 1; i < map.k; ++i)
            if (counts[i] > counts[donor]) donor = i;
        if (counts[donor] <= 1) continue;  // nothing left to steal
        int64_t victim = -1;
        double victim_d = -1.0;
        for (int64_t i = 0; i < data.size(); ++i) {
            if (map.labels[i] != donor) continue;
            double d = sq_dist(data.embedding(i), map.centroid(donor), map.dim);
            if (d > victim_d) {
                victim_d = d;
                victim = i;
            }
        }
        map.labels[victim] = empty;
    }
    recompute_centroids(map, data);
}

ClusterMap reassign_clusters(const Circuit& c, const EmbeddedDataset& data, const ClusterMap& map) {
    if (c.num_heads() != map.k) throw ArgError("circuit head count does not match cluster count");
    ClusterMap out = map;
    if (map.k == 1) return out;

    std::vector<double> scores = batch_root_scores(c, data.x);
    int k = map.k;
    for (int64_t i = 0; i < data.size(); ++i) {
        const double* row = scores.data() + i * k;
        int cur = map.labels[i];
        int best = 0;
        for (int j = 1; j < k; ++j)
            if (row[j] > row[best]) best = j;
        // ties go to the current label first, then the lowest index
        if (row[cur] == row[best]) best = cur;
        out.labels[i] = best;
    }
    recompute_centroids(out, data);
    return out;
}

std::vector<int> select_clusters(const std::vector<double>& per_cluster_ll,
                                 const std::vector<int64_t>& sizes, double capacity_fraction) {
    if (per_cluster_ll.size() != sizes.size()) throw ArgError("LL and size lists differ in length");
    if (per_cluster_ll.empty()) throw ArgError("select_clusters on zero clusters");

    int k = static_cast<int>(per_cluster_ll.size());
    int64_t total = std::accumulate(sizes.begin(), sizes.end(), int64_t{0});
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (per_cluster_ll[a] != per_cluster_ll[b]) return per_cluster_ll[a] < per_cluster_ll[b];
        return a < b;
    });

    std::vector<int> selected;
    int64_t members = 0;
    double capacity = capacity_fraction * static_cast<double>(total);
    for (int idx : order) {
        if (sizes[idx] == 0) continue;
        if (!selected.empty() && static_cast<double>(members + sizes[idx]) >= capacity) break;
        selected.push_back(idx);
        members += sizes[idx];
    }
    return selected;
}

}  // namespace pcg
