#include "pcgrow/chow_liu.hpp"

#include <algorithm>
#include <numeric>

#include "pcgrow/errors.hpp"

namespace pcg {

TreeStructure chow_liu_tree(const MITable& mi, int root) {
    int n = mi.n;
    if (n < 1) throw ArgError("empty MI table");
    if (root < 0 || root >= n) throw ArgError("tree root out of range");

    TreeStructure tree;
    tree.root = root;
    tree.parent.assign(n, -1);
    tree.order.clear();
    if (n == 1) {
        tree.order.push_back(root);
        return tree;
    }

    // Kruskal over edges sorted by (weight desc, i asc, j asc).
    struct Edge {
        int i, j;
        double w;
    };
    std::vector<Edge> edges;
    edges.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.push_back({i, j, mi.at(i, j)});
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.w != b.w) return a.w > b.w;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    std::vector<int> comp(n);
    std::iota(comp.begin(), comp.end(), 0);
    auto find = [&](int x) {
        while (comp[x] != x) {
            comp[x] = comp[comp[x]];
            x = comp[x];
        }
        return x;
    };

    std::vector<std::vector<int>> adj(n);
    int taken = 0;
    for (const Edge& e : edges) {
        int a = find(e.i), b = find(e.j);
        if (a == b) continue;
        comp[a] = b;
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
        if (++taken == n - 1) break;
    }

    // Root the tree; BFS over sorted adjacency keeps the order deterministic.
    for (auto& nb : adj) std::sort(nb.begin(), nb.end());
    std::vector<char> seen(n, 0);
    tree.order.push_back(root);
    seen[root] = 1;
    for (size_t head = 0; head < tree.order.size(); ++head) {
        int u = tree.order[head];
        for (int v : adj[u]) {
            if (seen[v]) continue;
            seen[v] = 1;
            tree.parent[v] = u;
            tree.order.push_back(v);
        }
    }
    return tree;
}

}  // namespace pcg
