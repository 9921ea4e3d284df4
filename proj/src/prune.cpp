#include "pcgrow/prune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcgrow/flow.hpp"

namespace pcg {

Circuit prune(const Circuit& c, const LabeledBatch& batch, double keep_fraction) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw ArgError("keep_fraction must lie in (0, 1], got " + std::to_string(keep_fraction));

    FlowTable flows = compute_flows(c, batch);

    // Collect sum edges as (flow, unit, slot); ties resolve by unit then slot.
    struct EdgeRef {
        double flow;
        int unit;
        int slot;
    };
    std::vector<EdgeRef> edges;
    edges.reserve(flows.edge_flow.size());
    int64_t cursor = 0;
    for (int u = 0; u < c.num_units(); ++u) {
        const Unit& unit = c.units[u];
        if (unit.kind != UnitKind::Sum) continue;
        for (int i = 0; i < static_cast<int>(unit.children.size()); ++i)
            edges.push_back({flows.edge_flow[cursor + i], u, i});
        cursor += static_cast<int64_t>(unit.children.size());
    }

    int64_t total_edges = static_cast<int64_t>(edges.size());
    int64_t target_keep = static_cast<int64_t>(std::ceil(keep_fraction * static_cast<double>(total_edges)));
    int64_t to_remove = total_edges - target_keep;

    std::vector<std::vector<char>> removed(c.num_units());
    std::vector<int> remaining(c.num_units(), 0);
    for (int u = 0; u < c.num_units(); ++u) {
        removed[u].assign(c.units[u].children.size(), 0);
        remaining[u] = static_cast<int>(c.units[u].children.size());
    }

    if (to_remove > 0) {
        std::stable_sort(edges.begin(), edges.end(), [](const EdgeRef& a, const EdgeRef& b) {
            if (a.flow != b.flow) return a.flow < b.flow;
            if (a.unit != b.unit) return a.unit < b.unit;
            return a.slot < b.slot;
        });
        int64_t dropped = 0;
        for (const EdgeRef& e : edges) {
            if (dropped == to_remove) break;
            if (remaining[e.unit] <= 1) continue;  // never orphan a unit's last edge
            removed[e.unit][e.slot] = 1;
            remaining[e.unit] -= 1;
            ++dropped;
        }
    }

    // Drop removed edges, then anything unreachable from the roots.
    std::vector<char> reachable(c.num_units(), 0);
    for (int r : c.roots) reachable[r] = 1;
    for (int u = c.num_units() - 1; u >= 0; --u) {
        if (!reachable[u]) continue;
        const Unit& unit = c.units[u];
        for (int i = 0; i < static_cast<int>(unit.children.size()); ++i)
            if (!removed[u][i]) reachable[unit.children[i]] = 1;
    }

    Circuit out;
    out.num_vars = c.num_vars;
    out.domains = c.domains;
    std::vector<int> remap(c.num_units(), -1);
    for (int u = 0; u < c.num_units(); ++u) {
        if (!reachable[u]) continue;
        const Unit& unit = c.units[u];
        Unit nu;
        nu.kind = unit.kind;
        nu.var = unit.var;
        nu.table = unit.table;
        if (unit.kind != UnitKind::Input) {
            double total = 0.0;
            bool touched = remaining[u] != static_cast<int>(unit.children.size());
            for (int i = 0; i < static_cast<int>(unit.children.size()); ++i) {
                if (removed[u][i]) continue;
                nu.children.push_back(remap[unit.children[i]]);
                if (unit.kind == UnitKind::Sum) {
                    nu.weights.push_back(unit.weights[i]);
                    total += unit.weights[i];
                }
            }
            // untouched units keep their weights bit-for-bit
            if (unit.kind == UnitKind::Sum && touched) {
                if (total > 0.0) {
                    for (double& w : nu.weights) w /= total;
                } else {
                    // all surviving weights zero: fall back to uniform
                    for (double& w : nu.weights) w = 1.0 / static_cast<double>(nu.weights.size());
                }
            }
        }
        remap[u] = out.num_units();
        out.units.push_back(std::move(nu));
    }
    out.roots.reserve(c.roots.size());
    for (int r : c.roots) out.roots.push_back(remap[r]);
    return out;
}

}  // namespace pcg
