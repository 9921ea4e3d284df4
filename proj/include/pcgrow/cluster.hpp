#pragma once

#include <cstdint>
#include <vector>

#include "pcgrow/circuit.hpp"
#include "pcgrow/data.hpp"

namespace pcg {

// The discretization function: centroids in embedding space plus the current
// per-training-sample cluster labels. assign() maps any embedding to its
// nearest centroid, which is how held-out samples get labels.
struct ClusterMap {
    int k = 0;
    int dim = 0;
    std::vector<double> centroids;  // k * dim
    std::vector<int> labels;        // per training sample

    const double* centroid(int i) const { return centroids.data() + static_cast<int64_t>(i) * dim; }
    int assign(const double* h) const;
    std::vector<int64_t> sizes() const;
};

// Initial single-cluster map: every sample labeled 0, centroid = mean embedding.
ClusterMap single_cluster_map(const EmbeddedDataset& data);

// Centroid i := mean of embeddings labeled i. Empty clusters keep their old
// centroid.
void recompute_centroids(ClusterMap& map, const EmbeddedDataset& data);

// Give each empty cluster the member of the largest cluster farthest from
// that cluster's centroid, then recompute centroids.
void repair_empty_clusters(ClusterMap& map, const EmbeddedDataset& data);

// Pure argmax re-labeling: label := argmax_i log p(x | Z = i), ties broken
// toward the current label then the lowest index. Centroids recomputed for
// nonempty clusters; empties are left for the caller to repair so that the
// argmax-dominance property holds exactly on the returned map.
ClusterMap reassign_clusters(const Circuit& c, const EmbeddedDataset& data, const ClusterMap& map);

// Greedy low-likelihood cluster selection: sort ascending by mean LL (ties by
// lower index), add while the cumulative member count stays below
// capacity_fraction * N; always selects at least one. Returns indices in
// selection order. Clusters with no members never get selected.
std::vector<int> select_clusters(const std::vector<double>& per_cluster_ll,
                                 const std::vector<int64_t>& sizes, double capacity_fraction);

}  // namespace pcg
