#pragma once

#include <cstdint>
#include <vector>

#include "pcgrow/circuit.hpp"
#include "pcgrow/data.hpp"

namespace pcg {

// Flat log-space view of an immutable circuit, built once per batch pass so
// the per-sample kernels run over contiguous arrays without taking logs in
// the inner loop. Circuits must not be mutated while a view is live.
struct CompiledCircuit {
    int num_units = 0;
    int num_vars = 0;
    std::vector<UnitKind> kind;
    std::vector<int> var;          // input units only
    std::vector<int64_t> cell_off; // input units -> offset into log_table / leaf-flow cells
    std::vector<double> log_table;
    std::vector<int64_t> ch_off;   // CSR offsets into ch / log_w (size num_units + 1)
    std::vector<int> ch;
    std::vector<double> log_w;     // aligned with ch; meaningful for sum units
    std::vector<int64_t> edge_off; // sum units -> offset into the sum-edge flow array
    std::vector<int> roots;
    int64_t num_sum_edges = 0;
    int64_t num_leaf_cells = 0;

    explicit CompiledCircuit(const Circuit& c);

    // Fully observed forward pass; `values` has num_units slots.
    void forward(const int32_t* x, double* values) const;

    // Forward pass that also stores, per sum edge, exp(log_w + v_child - m)
    // and per sum unit the normalizer sum. The backward flow ratio for edge i
    // of unit u is then edge_terms[i] / unit_sums[u], with no further exp.
    void forward_flows(const int32_t* x, double* values, double* edge_terms,
                       double* unit_sums) const;
};

// log p_root(x) for every (sample, root) pair; row-major N x num_roots.
// OpenMP-parallel over samples.
std::vector<double> batch_root_scores(const Circuit& c, const DiscreteData& data);

// log p(x | Z = labels[i]) per sample.
std::vector<double> batch_log_likelihood(const Circuit& c, const DiscreteData& data,
                                         const std::vector<int>& labels);

// Same head for every sample.
std::vector<double> batch_log_likelihood(const Circuit& c, const DiscreteData& data, int head);

}  // namespace pcg
