#pragma once

#include <cstdint>
#include <vector>

#include "pcgrow/rng.hpp"

namespace pcg {

struct KMeansResult {
    int k = 0;
    int dim = 0;
    std::vector<int> labels;       // per point
    std::vector<double> centroids; // k * dim
    int iterations = 0;            // Lloyd iterations until assignments stabilized
    double objective = 0.0;        // sum of squared distances to assigned centroid
};

// Lloyd's algorithm with explicit seeding: the first |seeds| centers start at
// `seeds`, the rest are drawn from the point set with probability
// proportional to the squared distance to the nearest existing center (the
// first draw is uniform when there are no seeds). Empty clusters steal the
// farthest member of the largest cluster. Deterministic given the rng state;
// point assignment is parallel.
KMeansResult seeded_kmeans(const double* points, int64_t n, int dim, int k_new,
                           const std::vector<double>& seeds, int max_iters, Rng& rng);

}  // namespace pcg
