#pragma once

#include <vector>

#include "pcgrow/circuit.hpp"
#include "pcgrow/cluster.hpp"
#include "pcgrow/data.hpp"
#include "pcgrow/em.hpp"
#include "pcgrow/rng.hpp"

namespace pcg {

struct GrowOptions {
    // The duplicated sum keeps the original weights scaled by (1 - cross_mass)
    // on its own copies and routes cross_mass to the mirrored copies,
    // proportionally to the original weights, so the parent distribution is
    // preserved exactly at hand-off when copy_jitter is zero.
    double cross_mass = 0.01;
    double copy_jitter = 0.05;  // relative jitter on the copy's weights
};

struct GrowStats {
    int64_t grown_set_size = 0;   // |G|
    int roots_split = 0;
    int inputs_copied = 0;
    int sums_split = 0;           // sums in G (two new units each)
    int sums_rebuilt = 0;         // sums outside G rebuilt over a union child set
    int products_rebuilt = 0;     // products rebuilt with distinct copy pairs
    int64_t units_added = 0;      // output unit count - input unit count
};

// Structure-growing operator: computes flows of `batch` (labels must cover
// only the clusters being grown), selects G = {n : F_n(D) >= epsilon}, and
// rebuilds the circuit child-before-parent where units in G are duplicated
// and everything else stays shared. Duplicated roots append their copies as
// new heads in root order.
Circuit grow_multihead(const Circuit& c, const LabeledBatch& batch, double epsilon, Rng& rng,
                       const GrowOptions& opts = {}, GrowStats* stats = nullptr);

struct GrowConfig {
    int target_clusters = 4;       // K for one progressive run (the inner N2)
    int outer_clusters = 100;      // N1 outer pre-clusters
    double capacity_fraction = 0.4;
    double epsilon_fraction = 0.01;  // flow threshold as a fraction of total routed flow
    int m_step = 0;                // cap on clusters added per iteration; 0 doubles the selected set
    bool prune_each_iteration = true;
    double prune_keep_fraction = 0.9;
    int hidden_size = 16;
    int kmeans_max_iters = 50;
    TrainConfig train;
    GrowOptions grow;
};

struct ProgressiveResult {
    ClusterMap map;
    Circuit circuit;
    bool reached_target = true;  // false when no cluster could be split further
    std::vector<double> final_trace;
};

// The four-step loop: (1) conditional EM on the labeled data, then optional
// pruning; (2) argmax re-labeling from the circuit heads; (3) greedy
// low-likelihood cluster selection under the capacity fraction; (4) seeded
// K-means over the selected clusters' embeddings plus the growing operator.
// Repeats until the cluster count reaches config.target_clusters.
ProgressiveResult progressive_grow(const EmbeddedDataset& data, Circuit initial,
                                   const GrowConfig& config, Rng& rng);

}  // namespace pcg
