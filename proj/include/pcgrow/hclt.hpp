#pragma once

#include "pcgrow/chow_liu.hpp"
#include "pcgrow/circuit.hpp"
#include "pcgrow/data.hpp"
#include "pcgrow/rng.hpp"

namespace pcg {

// Compile a hidden Chow-Liu tree circuit: every tree node contributes one
// latent mixture of width hidden_size (per hidden state: a product of that
// variable's categorical leaf with one mixture over each tree child's hidden
// units), and num_heads root sum units mix the root node's hidden products.
//
// Sum weights start from Dirichlet(1) draws. Leaf tables start from smoothed
// empirical marginals of `marginal_data` (uniform when null), jittered by
// +-leaf_jitter and renormalized to break hidden-state symmetry.
Circuit build_hclt(const TreeStructure& tree, int hidden_size, int num_heads,
                   const std::vector<int>& domains, const DiscreteData* marginal_data, Rng& rng,
                   double leaf_smoothing = 1.0, double leaf_jitter = 0.05);

}  // namespace pcg
