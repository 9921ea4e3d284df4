#pragma once

#include <cstdint>
#include <vector>

#include "pcgrow/circuit.hpp"

namespace pcg {

struct EvalStats {
    int64_t edges_visited = 0;
};

// Serial reference evaluator. One topological sweep per query: log-sum-exp at
// sum units, addition at product units, table lookup at inputs; unknown
// variables evaluate to log 1 = 0. The parallel batch kernels are tested
// against this path.
std::vector<double> eval_values(const Circuit& c, const Evidence& e, EvalStats* stats = nullptr);

// log p_head(x) for fully observed x.
double log_likelihood(const Circuit& c, const Evidence& x, int head, EvalStats* stats = nullptr);

// log of the sum over all completions of the unknowns. Requires a smooth and
// decomposable circuit; throws ArgError naming the offending units otherwise.
double log_marginal(const Circuit& c, const Evidence& e, int head);

}  // namespace pcg
