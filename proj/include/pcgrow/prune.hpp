#pragma once

#include "pcgrow/circuit.hpp"
#include "pcgrow/data.hpp"

namespace pcg {

// Flow-based sparsification: rank sum edges by aggregate edge flow over the
// batch, drop the lowest-flow edges until keep_fraction of them remain (a
// unit never loses its last edge), renormalize survivors, and remove units
// that become unreachable from every root. keep_fraction must lie in (0, 1].
Circuit prune(const Circuit& c, const LabeledBatch& batch, double keep_fraction);

}  // namespace pcg
