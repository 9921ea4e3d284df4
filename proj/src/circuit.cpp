#include "pcgrow/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "pcgrow/rng.hpp"

namespace pcg {

namespace {

// Scopes as fixed-width bitsets, one row per unit.
struct ScopeMatrix {
    int words;
    std::vector<uint64_t> bits;

    ScopeMatrix(int num_units, int num_vars)
        : words((num_vars + 63) / 64), bits(static_cast<size_t>(num_units) * words, 0) {}

    uint64_t* row(int u) { return bits.data() + static_cast<size_t>(u) * words; }
    const uint64_t* row(int u) const { return bits.data() + static_cast<size_t>(u) * words; }
};

bool rows_equal(const uint64_t* a, const uint64_t* b, int words) {
    return std::memcmp(a, b, sizeof(uint64_t) * words) == 0;
}

bool rows_intersect(const uint64_t* a, const uint64_t* b, int words) {
    for (int w = 0; w < words; ++w)
        if (a[w] & b[w]) return true;
    return false;
}

ScopeMatrix compute_scope_matrix(const Circuit& c) {
    ScopeMatrix scopes(c.num_units(), c.num_vars);
    for (int u = 0; u < c.num_units(); ++u) {
        const Unit& unit = c.units[u];
        uint64_t* r = scopes.row(u);
        if (unit.kind == UnitKind::Input) {
            r[unit.var / 64] |= uint64_t(1) << (unit.var % 64);
        } else {
            for (int ch : unit.children) {
                const uint64_t* cr = scopes.row(ch);
                for (int w = 0; w < scopes.words; ++w) r[w] |= cr[w];
            }
        }
    }
    return scopes;
}

}  // namespace

StructureReport validate_structure(const Circuit& c) {
    ScopeMatrix scopes = compute_scope_matrix(c);
    StructureReport rep;
    for (int u = 0; u < c.num_units(); ++u) {
        const Unit& unit = c.units[u];
        bool bad = false;
        if (unit.kind == UnitKind::Sum) {
            for (int ch : unit.children) {
                if (!rows_equal(scopes.row(u), scopes.row(ch), scopes.words)) {
                    rep.smooth = false;
                    bad = true;
                }
                if (c.units[ch].kind != UnitKind::Product) {
                    rep.alternating = false;
                    bad = true;
                }
            }
        } else if (unit.kind == UnitKind::Product) {
            const auto& ch = unit.children;
            for (size_t i = 0; i < ch.size(); ++i) {
                for (size_t j = i + 1; j < ch.size(); ++j) {
                    if (rows_intersect(scopes.row(ch[i]), scopes.row(ch[j]), scopes.words)) {
                        rep.decomposable = false;
                        bad = true;
                    }
                }
                if (c.units[ch[i]].kind == UnitKind::Product) {
                    rep.alternating = false;
                    bad = true;
                }
            }
        }
        if (bad) rep.offending.push_back(u);
    }
    return rep;
}

std::vector<std::vector<int>> unit_scopes(const Circuit& c) {
    ScopeMatrix scopes = compute_scope_matrix(c);
    std::vector<std::vector<int>> out(c.num_units());
    for (int u = 0; u < c.num_units(); ++u) {
        const uint64_t* r = scopes.row(u);
        for (int v = 0; v < c.num_vars; ++v)
            if (r[v / 64] >> (v % 64) & 1) out[u].push_back(v);
    }
    return out;
}

void check_well_formed(const Circuit& c, double tol) {
    if (c.num_vars <= 0) throw ArgError("circuit has no variables");
    if (static_cast<int>(c.domains.size()) != c.num_vars)
        throw ArgError("domain list size does not match num_vars");
    for (int v = 0; v < c.num_vars; ++v)
        if (c.domains[v] < 1) throw ArgError("variable " + std::to_string(v) + " has empty domain");
    if (c.roots.empty()) throw ArgError("circuit has no roots");

    for (int u = 0; u < c.num_units(); ++u) {
        const Unit& unit = c.units[u];
        std::string name = "unit " + std::to_string(u);
        for (int ch : unit.children)
            if (ch < 0 || ch >= u)
                throw ArgError(name + ": child id " + std::to_string(ch) +
                               " does not precede its parent");
        switch (unit.kind) {
            case UnitKind::Input: {
                if (unit.var < 0 || unit.var >= c.num_vars)
                    throw ArgError(name + ": variable index out of range");
                if (static_cast<int>(unit.table.size()) != c.domains[unit.var])
                    throw ArgError(name + ": table size does not match variable domain");
                double total = 0.0;
                for (double p : unit.table) {
                    if (p < 0.0) throw ArgError(name + ": negative table entry");
                    total += p;
                }
                if (std::fabs(total - 1.0) > tol)
                    throw ArgError(name + ": table sums to " + std::to_string(total));
                break;
            }
            case UnitKind::Sum: {
                if (unit.children.empty()) throw ArgError(name + ": sum unit has no children");
                if (unit.weights.size() != unit.children.size())
                    throw ArgError(name + ": weight count does not match child count");
                double total = 0.0;
                for (double w : unit.weights) {
                    if (w < 0.0) throw ArgError(name + ": negative edge weight");
                    total += w;
                }
                if (std::fabs(total - 1.0) > tol)
                    throw ArgError(name + ": weights sum to " + std::to_string(total));
                break;
            }
            case UnitKind::Product:
                if (unit.children.empty()) throw ArgError(name + ": product unit has no children");
                break;
        }
    }
    for (int r : c.roots) {
        if (r < 0 || r >= c.num_units()) throw ArgError("root id out of range");
        if (c.units[r].kind != UnitKind::Sum)
            throw ArgError("root " + std::to_string(r) + " is not a sum unit");
    }
}

void randomize_parameters(Circuit& c, Rng& rng) {
    for (Unit& u : c.units) {
        if (u.kind == UnitKind::Sum) {
            u.weights = rng.dirichlet(static_cast<int>(u.children.size()));
        } else if (u.kind == UnitKind::Input) {
            u.table = rng.dirichlet(static_cast<int>(u.table.size()));
        }
    }
}

}  // namespace pcg
