#include "pcgrow/hclt.hpp"

#include <cmath>

namespace pcg {

namespace {

// Smoothed empirical marginal of one variable, jittered and renormalized.
std::vector<double> leaf_table(int var, int domain, const DiscreteData* data, double smoothing,
                               double jitter, Rng& rng) {
    std::vector<double> t(domain, smoothing);
    double total = smoothing * domain;
    if (data) {
        for (int64_t s = 0; s < data->num_samples(); ++s) t[data->row(s)[var]] += 1.0;
        total += static_cast<double>(data->num_samples());
    }
    double renorm = 0.0;
    for (double& p : t) {
        p /= total;
        p *= 1.0 + jitter * (2.0 * rng.u01() - 1.0);
        renorm += p;
    }
    for (double& p : t) p /= renorm;
    return t;
}

}  // namespace

Circuit build_hclt(const TreeStructure& tree, int hidden_size, int num_heads,
                   const std::vector<int>& domains, const DiscreteData* marginal_data, Rng& rng,
                   double leaf_smoothing, double leaf_jitter) {
    int nv = static_cast<int>(tree.parent.size());
    if (hidden_size < 1) throw ArgError("hidden_size must be at least 1");
    if (num_heads < 1) throw ArgError("num_heads must be at least 1");
    if (static_cast<int>(domains.size()) != nv) throw ArgError("domain list does not match tree size");
    if (marginal_data && marginal_data->num_vars != nv)
        throw ArgError("marginal data does not match tree size");

    Circuit c;
    c.num_vars = nv;
    c.domains = domains;

    std::vector<std::vector<int>> tree_children(nv);
    for (int v = 0; v < nv; ++v)
        if (tree.parent[v] >= 0) tree_children[tree.parent[v]].push_back(v);

    auto add_unit = [&c](Unit u) {
        c.units.push_back(std::move(u));
        return c.num_units() - 1;
    };

    // hidden_units[v][i]: product encoding p(x_subtree(v) | Z_v = i)
    std::vector<std::vector<int>> hidden_units(nv);

    for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
        int v = *it;
        hidden_units[v].resize(hidden_size);
        for (int i = 0; i < hidden_size; ++i) {
            Unit leaf;
            leaf.kind = UnitKind::Input;
            leaf.var = v;
            leaf.table = leaf_table(v, domains[v], marginal_data, leaf_smoothing, leaf_jitter, rng);
            int leaf_id = add_unit(std::move(leaf));

            Unit prod;
            prod.kind = UnitKind::Product;
            prod.children.push_back(leaf_id);
            for (int child : tree_children[v]) {
                Unit mix;
                mix.kind = UnitKind::Sum;
                mix.children = hidden_units[child];
                mix.weights = rng.dirichlet(hidden_size);
                prod.children.push_back(add_unit(std::move(mix)));
            }
            hidden_units[v][i] = add_unit(std::move(prod));
        }
    }

    for (int hd = 0; hd < num_heads; ++hd) {
        Unit head;
        head.kind = UnitKind::Sum;
        head.children = hidden_units[tree.root];
        head.weights = rng.dirichlet(hidden_size);
        c.roots.push_back(add_unit(std::move(head)));
    }
    return c;
}

}  // namespace pcg
