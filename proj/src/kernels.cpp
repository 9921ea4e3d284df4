#include "pcgrow/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pcgrow/logspace.hpp"

namespace pcg {

CompiledCircuit::CompiledCircuit(const Circuit& c) : num_units(c.num_units()), num_vars(c.num_vars) {
    kind.resize(num_units);
    var.assign(num_units, -1);
    cell_off.assign(num_units, -1);
    edge_off.assign(num_units, -1);
    ch_off.assign(num_units + 1, 0);
    roots = c.roots;

    int64_t total_children = 0;
    for (int u = 0; u < num_units; ++u) {
        const Unit& unit = c.units[u];
        kind[u] = unit.kind;
        ch_off[u] = total_children;
        total_children += static_cast<int64_t>(unit.children.size());
        if (unit.kind == UnitKind::Input) {
            var[u] = unit.var;
            cell_off[u] = num_leaf_cells;
            num_leaf_cells += static_cast<int64_t>(unit.table.size());
        } else if (unit.kind == UnitKind::Sum) {
            edge_off[u] = num_sum_edges;
            num_sum_edges += static_cast<int64_t>(unit.children.size());
        }
    }
    ch_off[num_units] = total_children;

    ch.resize(total_children);
    log_w.assign(total_children, 0.0);
    log_table.resize(num_leaf_cells);
    for (int u = 0; u < num_units; ++u) {
        const Unit& unit = c.units[u];
        int64_t off = ch_off[u];
        for (size_t i = 0; i < unit.children.size(); ++i) {
            ch[off + i] = unit.children[i];
            if (unit.kind == UnitKind::Sum) log_w[off + i] = safe_log(unit.weights[i]);
        }
        if (unit.kind == UnitKind::Input)
            for (size_t i = 0; i < unit.table.size(); ++i)
                log_table[cell_off[u] + i] = safe_log(unit.table[i]);
    }
}

void CompiledCircuit::forward(const int32_t* x, double* values) const {
    for (int u = 0; u < num_units; ++u) {
        switch (kind[u]) {
            case UnitKind::Input:
                values[u] = log_table[cell_off[u] + x[var[u]]];
                break;
            case UnitKind::Sum: {
                int64_t b = ch_off[u], e = ch_off[u + 1];
                double m = kNegInf;
                for (int64_t i = b; i < e; ++i) {
                    double t = log_w[i] + values[ch[i]];
                    if (t > m) m = t;
                }
                if (m == kNegInf) {
                    values[u] = kNegInf;
                } else {
                    double s = 0.0;
                    for (int64_t i = b; i < e; ++i) s += std::exp(log_w[i] + values[ch[i]] - m);
                    values[u] = m + std::log(s);
                }
                break;
            }
            case UnitKind::Product: {
                int64_t b = ch_off[u], e = ch_off[u + 1];
                double s = 0.0;
                for (int64_t i = b; i < e; ++i) s += values[ch[i]];
                values[u] = s;
                break;
            }
        }
    }
}

void CompiledCircuit::forward_flows(const int32_t* x, double* values, double* edge_terms,
                                    double* unit_sums) const {
    for (int u = 0; u < num_units; ++u) {
        switch (kind[u]) {
            case UnitKind::Input:
                values[u] = log_table[cell_off[u] + x[var[u]]];
                break;
            case UnitKind::Sum: {
                int64_t b = ch_off[u], e = ch_off[u + 1];
                double m = kNegInf;
                for (int64_t i = b; i < e; ++i) {
                    double t = log_w[i] + values[ch[i]];
                    if (t > m) m = t;
                }
                double* terms = edge_terms + edge_off[u];
                if (m == kNegInf) {
                    values[u] = kNegInf;
                    unit_sums[u] = 0.0;
                    for (int64_t i = b; i < e; ++i) terms[i - b] = 0.0;
                } else {
                    double s = 0.0;
                    for (int64_t i = b; i < e; ++i) {
                        double t = std::exp(log_w[i] + values[ch[i]] - m);
                        terms[i - b] = t;
                        s += t;
                    }
                    unit_sums[u] = s;
                    values[u] = m + std::log(s);
                }
                break;
            }
            case UnitKind::Product: {
                int64_t b = ch_off[u], e = ch_off[u + 1];
                double s = 0.0;
                for (int64_t i = b; i < e; ++i) s += values[ch[i]];
                values[u] = s;
                break;
            }
        }
    }
}

namespace {

template <typename HeadOf>
std::vector<double> eval_batch(const Circuit& c, const DiscreteData& data, HeadOf head_of,
                               int heads_per_sample) {
    if (data.num_vars != c.num_vars) throw ArgError("dataset arity does not match circuit");
    data.check_domains();
    CompiledCircuit plan(c);
    int64_t n = data.num_samples();
    std::vector<double> out(n * heads_per_sample);

#pragma omp parallel
    {
        std::vector<double> values(plan.num_units);
#pragma omp for schedule(static)
        for (int64_t i = 0; i < n; ++i) {
            plan.forward(data.row(i), values.data());
            head_of(i, values, out);
        }
    }
    return out;
}

}  // namespace

std::vector<double> batch_root_scores(const Circuit& c, const DiscreteData& data) {
    int r = c.num_heads();
    const auto& roots = c.roots;
    return eval_batch(
        c, data,
        [&roots, r](int64_t i, const std::vector<double>& values, std::vector<double>& out) {
            for (int j = 0; j < r; ++j) out[i * r + j] = values[roots[j]];
        },
        r);
}

std::vector<double> batch_log_likelihood(const Circuit& c, const DiscreteData& data,
                                         const std::vector<int>& labels) {
    if (static_cast<int64_t>(labels.size()) != data.num_samples())
        throw ArgError("label count does not match sample count");
    for (int z : labels)
        if (z < 0 || z >= c.num_heads()) throw ArgError("label " + std::to_string(z) + " out of range");
    const auto& roots = c.roots;
    return eval_batch(
        c, data,
        [&roots, &labels](int64_t i, const std::vector<double>& values, std::vector<double>& out) {
            out[i] = values[roots[labels[i]]];
        },
        1);
}

std::vector<double> batch_log_likelihood(const Circuit& c, const DiscreteData& data, int head) {
    if (head < 0 || head >= c.num_heads()) throw ArgError("head index out of range");
    int root = c.roots[head];
    return eval_batch(
        c, data,
        [root](int64_t i, const std::vector<double>& values, std::vector<double>& out) {
            out[i] = values[root];
        },
        1);
}

}  // namespace pcg
