#pragma once

#include <vector>

#include "pcgrow/mutual_info.hpp"

namespace pcg {

// Rooted spanning tree over variable indices. `order` visits the root first
// and every parent before its children.
struct TreeStructure {
    int root = 0;
    std::vector<int> parent;  // parent[root] == -1
    std::vector<int> order;
};

// Maximum-weight spanning tree under MI edge weights, rooted at `root`.
// Ties break toward the smaller (i, j) edge, so the result is deterministic.
TreeStructure chow_liu_tree(const MITable& mi, int root);

}  // namespace pcg
