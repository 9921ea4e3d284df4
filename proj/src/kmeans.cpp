#include "pcgrow/kmeans.hpp"

#include <cmath>
#include <limits>

#include "pcgrow/errors.hpp"

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

// One Lloyd run from the given initial centroids.
KMeansResult lloyd(const double* points, int64_t n, int dim, int k, std::vector<double> centroids,
                   int max_iters) {
    KMeansResult res;
    res.k = k;
    res.dim = dim;
    res.centroids = std::move(centroids);
    res.labels.assign(n, -1);
    std::vector<int> prev(n, -1);
    std::vector<double> sums(static_cast<int64_t>(k) * dim);
    std::vector<int64_t> counts(k);

    for (int iter = 1; iter <= max_iters; ++iter) {
        res.iterations = iter;
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < n; ++i) {
            const double* p = points + i * dim;
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double d = sq_dist(p, res.centroids.data() + static_cast<int64_t>(c) * dim, dim);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            res.labels[i] = best;
        }
        if (res.labels == prev) break;
        prev = res.labels;

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (int64_t i = 0; i < n; ++i) {
            int c = res.labels[i];
            counts[c] += 1;
            const double* p = points + i * dim;
            double* s = sums.data() + static_cast<int64_t>(c) * dim;
            for (int d = 0; d < dim; ++d) s[d] += p[d];
        }
        // repair empties before the centroid update
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            int donor = 0;
            for (int j = 1; j < k; ++j)
                if (counts[j] > counts[donor]) donor = j;
            if (counts[donor] <= 1) continue;
            int64_t victim = -1;
            double victim_d = -1.0;
            const double* dc = res.centroids.data() + static_cast<int64_t>(donor) * dim;
            for (int64_t i = 0; i < n; ++i) {
                if (res.labels[i] != donor) continue;
                double d = sq_dist(points + i * dim, dc, dim);
                if (d > victim_d) {
                    victim_d = d;
                    victim = i;
                }
            }
            res.labels[victim] = c;
            counts[donor] -= 1;
            counts[c] += 1;
            const double* p = points + victim * dim;
            double* sd = sums.data() + static_cast<int64_t>(donor) * dim;
            double* sc = sums.data() + static_cast<int64_t>(c) * dim;
            for (int d = 0; d < dim; ++d) {
                sd[d] -= p[d];
                sc[d] += p[d];
            }
            prev = res.labels;  // force another assignment round
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            double* dst = res.centroids.data() + static_cast<int64_t>(c) * dim;
            const double* s = sums.data() + static_cast<int64_t>(c) * dim;
            for (int d = 0; d < dim; ++d) dst[d] = s[d] / static_cast<double>(counts[c]);
        }
    }

    res.objective = 0.0;
    for (int64_t i = 0; i < n; ++i)
        res.objective +=
            sq_dist(points + i * dim, res.centroids.data() + static_cast<int64_t>(res.labels[i]) * dim, dim);
    return res;
}

}  // namespace

KMeansResult seeded_kmeans(const double* points, int64_t n, int dim, int k_new,
                           const std::vector<double>& seeds, int max_iters, Rng& rng) {
    if (k_new < 1) throw ArgError("k must be at least 1");
    if (k_new > n) throw ArgError("k = " + std::to_string(k_new) + " exceeds point count " +
                                  std::to_string(n));
    int num_seeds = dim == 0 ? 0 : static_cast<int>(seeds.size()) / dim;
    if (num_seeds > k_new) throw ArgError("more seeds than clusters");

    // Unseeded centers come from squared-distance-weighted draws; Lloyd runs
    // from several inits (seeds held fixed) and the best objective wins. A
    // single run can stall with a seed stuck between two modes while a far
    // straggler group captures the fresh center.
    int restarts = num_seeds == k_new ? 1 : 4;
    KMeansResult best;
    bool have_best = false;
    std::vector<double> nearest(n);

    for (int attempt = 0; attempt < restarts; ++attempt) {
        std::vector<double> centroids(static_cast<int64_t>(k_new) * dim, 0.0);
        std::copy(seeds.begin(), seeds.end(), centroids.begin());
        std::fill(nearest.begin(), nearest.end(), std::numeric_limits<double>::infinity());
        auto account_center = [&](const double* c) {
#pragma omp parallel for schedule(static)
            for (int64_t i = 0; i < n; ++i) {
                double d = sq_dist(points + i * dim, c, dim);
                if (d < nearest[i]) nearest[i] = d;
            }
        };
        for (int c = 0; c < num_seeds; ++c)
            account_center(centroids.data() + static_cast<int64_t>(c) * dim);
        for (int c = num_seeds; c < k_new; ++c) {
            int64_t pick = 0;
            if (c == 0) {
                pick = rng.uniform_int(n);
            } else {
                double total = 0.0;
                for (int64_t i = 0; i < n; ++i) total += nearest[i];
                if (total > 0.0) {
                    double target = rng.u01() * total;
                    double cum = 0.0;
                    for (int64_t i = 0; i < n; ++i) {
                        if (nearest[i] == 0.0) continue;
                        pick = i;
                        cum += nearest[i];
                        if (cum >= target) break;
                    }
                }
            }
            double* dst = centroids.data() + static_cast<int64_t>(c) * dim;
            for (int d = 0; d < dim; ++d) dst[d] = points[pick * dim + d];
            account_center(dst);
        }

        KMeansResult run = lloyd(points, n, dim, k_new, std::move(centroids), max_iters);
        if (!have_best || run.objective < best.objective) {
            best = std::move(run);
            have_best = true;
        }
    }
    return best;
}

}  // namespace pcg
