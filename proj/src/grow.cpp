#include "pcgrow/grow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pcgrow/flow.hpp"
#include "pcgrow/kernels.hpp"
#include "pcgrow/kmeans.hpp"
#include "pcgrow/logspace.hpp"
#include "pcgrow/prune.hpp"

namespace pcg {

namespace {

// Coalesced weighted child list for a rebuilt sum unit.
struct EdgeAccum {
    std::vector<int> children;
    std::vector<double> weights;

    void add(int child, double w) {
        for (size_t i = 0; i < children.size(); ++i) {
            if (children[i] == child) {
                weights[i] += w;
                return;
            }
        }
        children.push_back(child);
        weights.push_back(w);
    }

    void renormalize() {
        double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (total > 0.0)
            for (double& w : weights) w /= total;
        else
            for (double& w : weights) w = 1.0 / static_cast<double>(weights.size());
    }
};

}  // namespace

Circuit grow_multihead(const Circuit& c, const LabeledBatch& batch, double epsilon, Rng& rng,
                       const GrowOptions& opts, GrowStats* stats) {
    if (epsilon < 0.0) throw ArgError("flow threshold must be nonnegative");
    StructureReport rep = validate_structure(c);
    if (!rep.ok()) throw ArgError("grow_multihead requires a smooth, decomposable, alternating circuit");

    FlowTable flows = compute_flows(c, batch);
    std::vector<char> grown(c.num_units(), 0);
    int64_t g_size = 0;
    for (int u = 0; u < c.num_units(); ++u)
        if (flows.unit_flow[u] >= epsilon) {
            grown[u] = 1;
            ++g_size;
        }

    Circuit out;
    out.num_vars = c.num_vars;
    out.domains = c.domains;
    out.units.reserve(c.units.size() * 2);

    GrowStats local;
    local.grown_set_size = g_size;

    auto emit = [&out](Unit u) {
        out.units.push_back(std::move(u));
        return out.num_units() - 1;
    };

    // old unit id -> (primary, secondary) new ids; equal when not duplicated
    std::vector<int> prim(c.num_units()), sec(c.num_units());

    for (int u = 0; u < c.num_units(); ++u) {
        const Unit& unit = c.units[u];
        switch (unit.kind) {
            case UnitKind::Input: {
                int a = emit(unit);
                if (grown[u]) {
                    prim[u] = a;
                    sec[u] = emit(unit);
                    local.inputs_copied += 1;
                } else {
                    prim[u] = sec[u] = a;
                }
                break;
            }
            case UnitKind::Product: {
                bool pair_differs = false;
                for (int ch : unit.children)
                    if (prim[ch] != sec[ch]) pair_differs = true;
                Unit p1;
                p1.kind = UnitKind::Product;
                for (int ch : unit.children) p1.children.push_back(prim[ch]);
                int a = emit(std::move(p1));
                if (pair_differs) {
                    Unit p2;
                    p2.kind = UnitKind::Product;
                    for (int ch : unit.children) p2.children.push_back(sec[ch]);
                    prim[u] = a;
                    sec[u] = emit(std::move(p2));
                    local.products_rebuilt += 1;
                } else {
                    prim[u] = sec[u] = a;
                }
                break;
            }
            case UnitKind::Sum: {
                bool pair_differs = false;
                for (int ch : unit.children)
                    if (prim[ch] != sec[ch]) pair_differs = true;

                if (grown[u]) {
                    // two distinct sums over the union child set with
                    // independent parameters
                    EdgeAccum a, b;
                    std::vector<double> jittered(unit.weights);
                    for (double& w : jittered) w *= 1.0 + opts.copy_jitter * (2.0 * rng.u01() - 1.0);
                    for (size_t i = 0; i < unit.children.size(); ++i) {
                        int ch = unit.children[i];
                        double w = unit.weights[i], wj = jittered[i];
                        a.add(prim[ch], (1.0 - opts.cross_mass) * w);
                        a.add(sec[ch], opts.cross_mass * w);
                        b.add(sec[ch], (1.0 - opts.cross_mass) * wj);
                        b.add(prim[ch], opts.cross_mass * wj);
                    }
                    a.renormalize();
                    b.renormalize();
                    Unit s1;
                    s1.kind = UnitKind::Sum;
                    s1.children = std::move(a.children);
                    s1.weights = std::move(a.weights);
                    prim[u] = emit(std::move(s1));
                    Unit s2;
                    s2.kind = UnitKind::Sum;
                    s2.children = std::move(b.children);
                    s2.weights = std::move(b.weights);
                    sec[u] = emit(std::move(s2));
                    local.sums_split += 1;
                } else if (!pair_differs) {
                    // untouched subtree: shared as-is
                    Unit s;
                    s.kind = UnitKind::Sum;
                    s.weights = unit.weights;
                    for (int ch : unit.children) s.children.push_back(prim[ch]);
                    prim[u] = sec[u] = emit(std::move(s));
                } else {
                    // not grown itself, but some child was duplicated: one new
                    // sum absorbing both copies, the mirror side at cross_mass
                    EdgeAccum a;
                    for (size_t i = 0; i < unit.children.size(); ++i) {
                        int ch = unit.children[i];
                        a.add(prim[ch], (1.0 - opts.cross_mass) * unit.weights[i]);
                        a.add(sec[ch], opts.cross_mass * unit.weights[i]);
                    }
                    a.renormalize();
                    Unit s;
                    s.kind = UnitKind::Sum;
                    s.children = std::move(a.children);
                    s.weights = std::move(a.weights);
                    prim[u] = sec[u] = emit(std::move(s));
                    local.sums_rebuilt += 1;
                }
                break;
            }
        }
    }

    for (int r : c.roots) out.roots.push_back(prim[r]);
    for (int r : c.roots)
        if (sec[r] != prim[r]) {
            out.roots.push_back(sec[r]);
            local.roots_split += 1;
        }

    local.units_added = out.num_units() - c.num_units();
    if (stats) *stats = local;
    return out;
}

namespace {

// Mean log-likelihood per cluster under the labeled heads; empty clusters map
// to +inf so selection never picks them.
std::vector<double> per_cluster_mean_ll(const Circuit& c, const DiscreteData& data,
                                        const std::vector<int>& labels, int k) {
    std::vector<double> lls = batch_log_likelihood(c, data, labels);
    std::vector<double> sum(k, 0.0);
    std::vector<int64_t> count(k, 0);
    for (int64_t i = 0; i < static_cast<int64_t>(lls.size()); ++i) {
        sum[labels[i]] += lls[i];
        count[labels[i]] += 1;
    }
    std::vector<double> mean(k);
    for (int i = 0; i < k; ++i)
        mean[i] = count[i] ? sum[i] / static_cast<double>(count[i])
                           : std::numeric_limits<double>::infinity();
    return mean;
}

}  // namespace

ProgressiveResult progressive_grow(const EmbeddedDataset& data, Circuit initial,
                                   const GrowConfig& config, Rng& rng) {
    if (config.target_clusters < 1) throw ArgError("target cluster count must be at least 1");
    if (!(config.capacity_fraction > 0.0 && config.capacity_fraction < 1.0))
        throw ArgError("capacity_fraction must lie in (0, 1)");
    if (config.epsilon_fraction < 0.0 || config.epsilon_fraction >= 1.0)
        throw ArgError("epsilon_fraction must lie in [0, 1)");
    if (initial.num_heads() != 1) throw ArgError("progressive growing starts from a 1-headed circuit");
    if (data.size() == 0) throw ArgError("empty dataset");

    ProgressiveResult res;
    res.circuit = std::move(initial);
    res.map = single_cluster_map(data);
    const int target = config.target_clusters;

    while (true) {
        // Step 1: conditional EM on the current labels, then pruning.
        LabeledBatch batch{data.x, res.map.labels};
        res.final_trace = train_em(res.circuit, batch, config.train, rng);
        if (config.prune_each_iteration && config.prune_keep_fraction < 1.0)
            res.circuit = prune(res.circuit, batch, config.prune_keep_fraction);

        if (res.map.k >= target) break;

        // Step 2: re-label from the heads, repair any emptied cluster.
        res.map = reassign_clusters(res.circuit, data, res.map);
        repair_empty_clusters(res.map, data);

        // Step 3: pick low-likelihood clusters within the capacity budget.
        std::vector<int64_t> sizes = res.map.sizes();
        std::vector<double> mean_ll = per_cluster_mean_ll(res.circuit, data.x, res.map.labels, res.map.k);
        std::vector<int> selected = select_clusters(mean_ll, sizes, config.capacity_fraction);

        int64_t max_added = target - res.map.k;
        if (config.m_step > 0) max_added = std::min<int64_t>(max_added, config.m_step);
        if (static_cast<int64_t>(selected.size()) > max_added) selected.resize(max_added);

        // every selected root must clear the flow threshold so that head
        // count tracks cluster count
        auto member_total = [&sizes](const std::vector<int>& idx) {
            int64_t m = 0;
            for (int i : idx) m += sizes[i];
            return m;
        };
        double eps = config.epsilon_fraction * static_cast<double>(member_total(selected));
        {
            std::vector<int> kept;
            for (int i : selected)
                if (static_cast<double>(sizes[i]) >= eps) kept.push_back(i);
            if (kept.empty() && !selected.empty()) kept.push_back(selected[0]);
            selected = std::move(kept);
            eps = config.epsilon_fraction * static_cast<double>(member_total(selected));
        }
        // splitting in two needs at least two members per new cluster pair
        while (!selected.empty() && 2 * static_cast<int64_t>(selected.size()) > member_total(selected))
            selected.pop_back();
        if (selected.empty()) {
            res.reached_target = false;
            break;
        }
        // a zero threshold would duplicate zero-flow roots too; any value
        // below one sample's worth of flow selects the same units
        if (eps <= 0.0) eps = 0.5;

        // Step 4: seeded K-means over the selected members, then grow.
        std::vector<int64_t> members;
        for (int64_t i = 0; i < data.size(); ++i)
            if (std::find(selected.begin(), selected.end(), res.map.labels[i]) != selected.end())
                members.push_back(i);
        std::vector<double> points(members.size() * data.embed_dim);
        for (size_t m = 0; m < members.size(); ++m)
            std::copy(data.embedding(members[m]), data.embedding(members[m]) + data.embed_dim,
                      points.data() + m * data.embed_dim);
        std::vector<double> seeds;
        for (int i : selected)
            seeds.insert(seeds.end(), res.map.centroid(i), res.map.centroid(i) + res.map.dim);

        int added = static_cast<int>(selected.size());
        KMeansResult km = seeded_kmeans(points.data(), static_cast<int64_t>(members.size()),
                                        data.embed_dim, 2 * added, seeds, config.kmeans_max_iters, rng);

        LabeledBatch sub;
        sub.data.num_vars = data.x.num_vars;
        sub.data.domains = data.x.domains;
        for (int64_t m : members) {
            sub.data.append_row(data.x.row(m));
            sub.labels.push_back(res.map.labels[m]);
        }
        GrowStats gs;
        Circuit grownc = grow_multihead(res.circuit, sub, eps, rng, config.grow, &gs);
        if (gs.roots_split != added)
            throw std::logic_error("grown head count does not match new cluster count");
        res.circuit = std::move(grownc);

        int old_k = res.map.k;
        res.map.k = old_k + added;
        for (size_t m = 0; m < members.size(); ++m) {
            int j = km.labels[m];
            res.map.labels[members[m]] = j < added ? selected[j] : old_k + (j - added);
        }
        res.map.centroids.resize(static_cast<int64_t>(res.map.k) * res.map.dim, 0.0);
        recompute_centroids(res.map, data);
        repair_empty_clusters(res.map, data);
    }
    return res;
}

}  // namespace pcg
