#pragma once

#include <cstdint>
#include <vector>

#include "pcgrow/errors.hpp"

namespace pcg {

// Row-major matrix of discrete observations with per-variable domain sizes.
struct DiscreteData {
    int num_vars = 0;
    std::vector<int> domains;      // size num_vars
    std::vector<int32_t> values;   // num_samples * num_vars

    int64_t num_samples() const {
        return num_vars == 0 ? 0 : static_cast<int64_t>(values.size()) / num_vars;
    }
    const int32_t* row(int64_t i) const { return values.data() + i * num_vars; }
    int32_t* row(int64_t i) { return values.data() + i * num_vars; }

    void append_row(const int32_t* r) { values.insert(values.end(), r, r + num_vars); }

    // Every value must lie inside its variable's domain.
    void check_domains() const {
        int64_t n = num_samples();
        for (int64_t i = 0; i < n; ++i) {
            const int32_t* r = row(i);
            for (int v = 0; v < num_vars; ++v)
                if (r[v] < 0 || r[v] >= domains[v])
                    throw ArgError("value " + std::to_string(r[v]) + " outside domain of variable " +
                                   std::to_string(v) + " at sample " + std::to_string(i));
        }
    }
};

// Fully observed samples with a head label per sample.
struct LabeledBatch {
    DiscreteData data;
    std::vector<int> labels;

    int64_t size() const { return data.num_samples(); }
};

// Records (x, h): discrete observation paired with a continuous embedding.
struct EmbeddedDataset {
    DiscreteData x;
    int embed_dim = 0;
    std::vector<double> h;  // num_samples * embed_dim

    int64_t size() const { return x.num_samples(); }
    const double* embedding(int64_t i) const { return h.data() + i * embed_dim; }
};

// File-level container: images plus a per-position embedding grid (the
// teacher's output, ingested from disk; the teacher itself is external).
struct GridDataset {
    DiscreteData images;         // N x V pixels
    int embed_dim = 0;
    int grid_h = 0, grid_w = 0;
    std::vector<double> embeddings;  // N * grid_h*grid_w * embed_dim, position-major per sample

    int num_positions() const { return grid_h * grid_w; }
    const double* embedding(int64_t sample, int position) const {
        return embeddings.data() + (sample * num_positions() + position) * embed_dim;
    }
};

}  // namespace pcg
