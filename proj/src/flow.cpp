#include "pcgrow/flow.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pcgrow/logspace.hpp"

namespace pcg {

void FlowTable::add(const FlowTable& other) {
    for (size_t i = 0; i < unit_flow.size(); ++i) unit_flow[i] += other.unit_flow[i];
    for (size_t i = 0; i < edge_flow.size(); ++i) edge_flow[i] += other.edge_flow[i];
    for (size_t i = 0; i < leaf_flow.size(); ++i) leaf_flow[i] += other.leaf_flow[i];
    num_samples += other.num_samples;
}

namespace {

// Top-down pass for one sample. `flow` carries per-unit flow, zero-initialized
// by the caller; sum units route flow to children by theta p_c / p_n, taken
// from the terms the forward pass already computed; product units pass it
// through whole.
void backward_one(const CompiledCircuit& plan, const int32_t* x, const double* edge_terms,
                  const double* unit_sums, double* flow, FlowTable& acc) {
    for (int u = plan.num_units - 1; u >= 0; --u) {
        double f = flow[u];
        if (f == 0.0) continue;
        acc.unit_flow[u] += f;
        switch (plan.kind[u]) {
            case UnitKind::Sum: {
                int64_t b = plan.ch_off[u], e = plan.ch_off[u + 1];
                double inv = f / unit_sums[u];
                const double* terms = edge_terms + plan.edge_off[u];
                for (int64_t i = b; i < e; ++i) {
                    double contrib = terms[i - b] * inv;
                    if (contrib == 0.0) continue;
                    acc.edge_flow[plan.edge_off[u] + (i - b)] += contrib;
                    flow[plan.ch[i]] += contrib;
                }
                break;
            }
            case UnitKind::Product: {
                int64_t b = plan.ch_off[u], e = plan.ch_off[u + 1];
                for (int64_t i = b; i < e; ++i) flow[plan.ch[i]] += f;
                break;
            }
            case UnitKind::Input:
                acc.leaf_flow[plan.cell_off[u] + x[plan.var[u]]] += f;
                break;
        }
    }
}

FlowTable make_table(const CompiledCircuit& plan) {
    FlowTable t;
    t.unit_flow.assign(plan.num_units, 0.0);
    t.edge_flow.assign(plan.num_sum_edges, 0.0);
    t.leaf_flow.assign(plan.num_leaf_cells, 0.0);
    return t;
}

}  // namespace

FlowTable compute_flows(const Circuit& c, const LabeledBatch& batch, std::vector<double>* sample_ll) {
    if (batch.data.num_vars != c.num_vars) throw ArgError("batch arity does not match circuit");
    if (static_cast<int64_t>(batch.labels.size()) != batch.size())
        throw ArgError("label count does not match sample count");
    for (int z : batch.labels)
        if (z < 0 || z >= c.num_heads())
            throw ArgError("label " + std::to_string(z) + " out of range for " +
                           std::to_string(c.num_heads()) + " heads");
    batch.data.check_domains();

    CompiledCircuit plan(c);
    int64_t n = batch.size();
    if (sample_ll) sample_ll->assign(n, 0.0);

    int nthreads = 1;
#ifdef _OPENMP
    nthreads = omp_get_max_threads();
#endif
    std::vector<FlowTable> shards(nthreads, make_table(plan));
    int64_t bad_sample = -1;

#pragma omp parallel
    {
        int tid = 0;
#ifdef _OPENMP
        tid = omp_get_thread_num();
#endif
        FlowTable& local = shards[tid];
        std::vector<double> values(plan.num_units);
        std::vector<double> flow(plan.num_units);
        std::vector<double> edge_terms(plan.num_sum_edges);
        std::vector<double> unit_sums(plan.num_units);
#pragma omp for schedule(static)
        for (int64_t i = 0; i < n; ++i) {
            plan.forward_flows(batch.data.row(i), values.data(), edge_terms.data(),
                               unit_sums.data());
            int root = plan.roots[batch.labels[i]];
            double ll = values[root];
            if (sample_ll) (*sample_ll)[i] = ll;
            if (ll == kNegInf) {
#pragma omp critical
                if (bad_sample < 0 || i < bad_sample) bad_sample = i;
                continue;
            }
            std::fill(flow.begin(), flow.end(), 0.0);
            flow[root] = 1.0;
            backward_one(plan, batch.data.row(i), edge_terms.data(), unit_sums.data(), flow.data(),
                         local);
            local.num_samples += 1;
        }
    }
    if (bad_sample >= 0)
        throw NumericError("zero probability under labeled head; apply leaf smoothing", bad_sample);

    FlowTable total = std::move(shards[0]);
    for (int t = 1; t < nthreads; ++t) total.add(shards[t]);
    return total;
}

}  // namespace pcg
