#pragma once

#include <cstdint>
#include <vector>

#include "pcgrow/errors.hpp"

namespace pcg {

enum class UnitKind : uint8_t { Input, Sum, Product };

// One computation unit. Input units carry a categorical table over their
// variable's domain; sum units carry edge weights aligned with `children`
// (nonnegative, summing to one); product units carry children only.
struct Unit {
    UnitKind kind = UnitKind::Input;
    int var = -1;
    std::vector<int> children;
    std::vector<double> weights;
    std::vector<double> table;
};

// Multi-rooted DAG of units in topological order: every child id precedes its
// parent in `units` and ids equal list positions. Root i encodes the i-th
// head distribution p(x | Z = i).
struct Circuit {
    int num_vars = 0;
    std::vector<int> domains;
    std::vector<Unit> units;
    std::vector<int> roots;

    int num_units() const { return static_cast<int>(units.size()); }
    int num_heads() const { return static_cast<int>(roots.size()); }

    int64_t num_sum_edges() const {
        int64_t n = 0;
        for (const Unit& u : units)
            if (u.kind == UnitKind::Sum) n += static_cast<int64_t>(u.children.size());
        return n;
    }
    int64_t num_edges() const {
        int64_t n = 0;
        for (const Unit& u : units) n += static_cast<int64_t>(u.children.size());
        return n;
    }
};

// Per-variable observation state for marginal queries; kUnknown marginalizes
// the variable out.
struct Evidence {
    static constexpr int32_t kUnknown = -1;
    std::vector<int32_t> values;

    static Evidence observed(std::vector<int32_t> vals) {
        Evidence e;
        e.values = std::move(vals);
        return e;
    }
    static Evidence all_unknown(int num_vars) {
        Evidence e;
        e.values.assign(num_vars, kUnknown);
        return e;
    }

    bool fully_observed() const {
        for (int32_t v : values)
            if (v == kUnknown) return false;
        return true;
    }
};

struct StructureReport {
    bool smooth = true;
    bool decomposable = true;
    bool alternating = true;
    std::vector<int> offending;  // sorted, deduplicated unit ids

    bool ok() const { return smooth && decomposable && alternating; }
};

// Smoothness: every sum unit's children share its scope. Decomposability:
// every product unit's children have pairwise-disjoint scopes. Alternating:
// sum children are products, product children are sums or inputs (circuit
// flow is undefined otherwise, so such circuits are rejected here rather
// than given a guessed flow semantics).
StructureReport validate_structure(const Circuit& c);

// Variable scopes as sorted index lists, one per unit.
std::vector<std::vector<int>> unit_scopes(const Circuit& c);

// Structural well-formedness: ids in range and topologically ordered,
// weights/tables normalized within `tol`, roots nonempty and all sum units.
// Throws ArgError naming the first offending unit.
void check_well_formed(const Circuit& c, double tol = 1e-9);

// Redraw all sum weights and leaf tables (Dirichlet), keeping the structure.
class Rng;
void randomize_parameters(Circuit& c, Rng& rng);

}  // namespace pcg
