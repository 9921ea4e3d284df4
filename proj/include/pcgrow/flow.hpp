#pragma once

#include <cstdint>
#include <vector>

#include "pcgrow/circuit.hpp"
#include "pcgrow/data.hpp"
#include "pcgrow/kernels.hpp"

namespace pcg {

// Flows accumulated over a batch: the EM sufficient statistics and the
// growth/pruning signal. Layout follows CompiledCircuit offsets.
struct FlowTable {
    std::vector<double> unit_flow;  // per unit
    std::vector<double> edge_flow;  // per sum edge (CompiledCircuit::edge_off)
    std::vector<double> leaf_flow;  // per input-unit table cell (CompiledCircuit::cell_off)
    int64_t num_samples = 0;

    void add(const FlowTable& other);
};

// Forward pass p_n(x), then top-down flow with root flow 1 at the labeled
// head and 0 elsewhere, accumulated over the batch. Per-sample results are
// merged shard-by-shard in thread order, so output is deterministic for a
// fixed thread count. Throws NumericError with the sample index when a
// sample has -inf likelihood under its labeled head.
FlowTable compute_flows(const Circuit& c, const LabeledBatch& batch,
                        std::vector<double>* sample_ll = nullptr);

}  // namespace pcg
