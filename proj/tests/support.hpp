#pragma once

// Test-only helpers: an independent brute-force evaluator used as the oracle
// for likelihood/marginal checks, plus random circuit and data generators.
// The oracle works in plain probability space by direct recursion, so it
// shares no code with the log-space sweep it is checking.

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "pcgrow/circuit.hpp"
#include "pcgrow/data.hpp"
#include "pcgrow/rng.hpp"

namespace testsupport {

// Recursive probability-space evaluation of one unit.
inline double oracle_prob(const pcg::Circuit& c, const pcg::Evidence& e, int unit,
                          std::map<int, double>& memo) {
    auto it = memo.find(unit);
    if (it != memo.end()) return it->second;
    const pcg::Unit& u = c.units[unit];
    double p = 0.0;
    switch (u.kind) {
        case pcg::UnitKind::Input:
            p = e.values[u.var] == pcg::Evidence::kUnknown ? 1.0 : u.table[e.values[u.var]];
            break;
        case pcg::UnitKind::Sum:
            for (size_t i = 0; i < u.children.size(); ++i)
                p += u.weights[i] * oracle_prob(c, e, u.children[i], memo);
            break;
        case pcg::UnitKind::Product:
            p = 1.0;
            for (int ch : u.children) p *= oracle_prob(c, e, ch, memo);
            break;
    }
    memo[unit] = p;
    return p;
}

inline double oracle_log_likelihood(const pcg::Circuit& c, const pcg::Evidence& e, int head) {
    std::map<int, double> memo;
    return std::log(oracle_prob(c, e, c.roots[head], memo));
}

// Brute-force marginal: enumerate every completion of the unknowns and sum
// the full-evidence probabilities.
inline double oracle_log_marginal(const pcg::Circuit& c, const pcg::Evidence& e, int head) {
    std::vector<int> unknown;
    for (int v = 0; v < c.num_vars; ++v)
        if (e.values[v] == pcg::Evidence::kUnknown) unknown.push_back(v);
    pcg::Evidence full = e;
    double total = 0.0;
    int64_t combos = 1;
    for (int v : unknown) combos *= c.domains[v];
    for (int64_t m = 0; m < combos; ++m) {
        int64_t rem = m;
        for (int v : unknown) {
            full.values[v] = static_cast<int32_t>(rem % c.domains[v]);
            rem /= c.domains[v];
        }
        std::map<int, double> memo;
        total += oracle_prob(c, full, c.roots[head], memo);
    }
    return std::log(total);
}

// Total mass of one head by enumerating the whole sample space.
inline double oracle_total_mass(const pcg::Circuit& c, int head) {
    return std::exp(oracle_log_marginal(c, pcg::Evidence::all_unknown(c.num_vars), head));
}

// Random smooth, decomposable, alternating circuit over binary variables:
// recursive scope splitting with sums of `width` products per scope and a
// reuse cache that makes the result a DAG rather than a tree.
struct RandomCircuitBuilder {
    pcg::Circuit c;
    pcg::Rng& rng;
    int width;
    double reuse_prob;
    std::map<std::vector<int>, std::vector<int>> cache;  // scope -> sum units seen

    RandomCircuitBuilder(pcg::Rng& r, int num_vars, int w = 2, double reuse = 0.5)
        : rng(r), width(w), reuse_prob(reuse) {
        c.num_vars = num_vars;
        c.domains.assign(num_vars, 2);
    }

    int add(pcg::Unit u) {
        c.units.push_back(std::move(u));
        return c.num_units() - 1;
    }

    int make_leaf(int var) {
        pcg::Unit leaf;
        leaf.kind = pcg::UnitKind::Input;
        leaf.var = var;
        leaf.table = rng.dirichlet(c.domains[var]);
        return add(std::move(leaf));
    }

    // child suitable for a product: a sum over the scope, or a leaf
    int make_component(const std::vector<int>& scope) {
        if (scope.size() == 1) return make_leaf(scope[0]);
        return make_sum(scope);
    }

    int make_sum(const std::vector<int>& scope, bool allow_reuse = true) {
        auto it = cache.find(scope);
        if (allow_reuse && it != cache.end() && !it->second.empty() && rng.u01() < reuse_prob)
            return it->second[rng.uniform_int(it->second.size())];

        pcg::Unit sum;
        sum.kind = pcg::UnitKind::Sum;
        for (int i = 0; i < width; ++i) {
            // random two-way split of the scope
            std::vector<int> left, right;
            do {
                left.clear();
                right.clear();
                for (int v : scope) (rng.u01() < 0.5 ? left : right).push_back(v);
            } while (left.empty() || right.empty());
            pcg::Unit prod;
            prod.kind = pcg::UnitKind::Product;
            int l = make_component(left);
            int r = make_component(right);
            prod.children = {l, r};
            sum.children.push_back(add(std::move(prod)));
        }
        sum.weights = rng.dirichlet(width);
        int id = add(std::move(sum));
        cache[scope].push_back(id);
        return id;
    }

    pcg::Circuit build(int num_heads = 1) {
        std::vector<int> all;
        for (int v = 0; v < c.num_vars; ++v) all.push_back(v);
        if (c.num_vars == 1) {
            for (int h = 0; h < num_heads; ++h) {
                pcg::Unit prod;
                prod.kind = pcg::UnitKind::Product;
                prod.children = {make_leaf(0)};
                int p = add(std::move(prod));
                pcg::Unit sum;
                sum.kind = pcg::UnitKind::Sum;
                sum.children = {p};
                sum.weights = {1.0};
                c.roots.push_back(add(std::move(sum)));
            }
        } else {
            // heads must be distinct units even when scopes repeat
            for (int h = 0; h < num_heads; ++h) c.roots.push_back(make_sum(all, false));
        }
        return std::move(c);
    }
};

inline pcg::Circuit random_circuit(pcg::Rng& rng, int num_vars, int num_heads = 1, int width = 2) {
    RandomCircuitBuilder b(rng, num_vars, width);
    return b.build(num_heads);
}

inline pcg::Evidence random_full_evidence(pcg::Rng& rng, const pcg::Circuit& c) {
    std::vector<int32_t> vals(c.num_vars);
    for (int v = 0; v < c.num_vars; ++v) vals[v] = static_cast<int32_t>(rng.uniform_int(c.domains[v]));
    return pcg::Evidence::observed(std::move(vals));
}

inline pcg::DiscreteData random_data(pcg::Rng& rng, const std::vector<int>& domains, int64_t n) {
    pcg::DiscreteData d;
    d.num_vars = static_cast<int>(domains.size());
    d.domains = domains;
    d.values.reserve(n * d.num_vars);
    for (int64_t i = 0; i < n; ++i)
        for (int v = 0; v < d.num_vars; ++v)
            d.values.push_back(static_cast<int32_t>(rng.uniform_int(domains[v])));
    return d;
}

}  // namespace testsupport
