#include "pcgrow/em.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "pcgrow/io.hpp"

namespace pcg {

void em_update(Circuit& c, const FlowTable& flows, double step_size, const EmStepConfig& cfg) {
    if (!(step_size > 0.0 && step_size <= 1.0))
        throw ArgError("EM step size must lie in (0, 1], got " + std::to_string(step_size));
    if (static_cast<int>(flows.unit_flow.size()) != c.num_units())
        throw ArgError("flow table does not match circuit");

    int64_t edge_cursor = 0;
    int64_t cell_cursor = 0;
    for (Unit& u : c.units) {
        if (u.kind == UnitKind::Sum) {
            int m = static_cast<int>(u.children.size());
            double total = 0.0;
            for (int i = 0; i < m; ++i) total += flows.edge_flow[edge_cursor + i] + cfg.edge_smoothing;
            double renorm = 0.0;
            for (int i = 0; i < m; ++i) {
                double target = (flows.edge_flow[edge_cursor + i] + cfg.edge_smoothing) / total;
                u.weights[i] = (1.0 - step_size) * u.weights[i] + step_size * target;
                renorm += u.weights[i];
            }
            for (int i = 0; i < m; ++i) u.weights[i] /= renorm;
            edge_cursor += m;
        } else if (u.kind == UnitKind::Input) {
            int m = static_cast<int>(u.table.size());
            double total = 0.0;
            for (int i = 0; i < m; ++i) total += flows.leaf_flow[cell_cursor + i] + cfg.leaf_pseudocount;
            if (total > 0.0) {
                double renorm = 0.0;
                for (int i = 0; i < m; ++i) {
                    double target = (flows.leaf_flow[cell_cursor + i] + cfg.leaf_pseudocount) / total;
                    u.table[i] = (1.0 - step_size) * u.table[i] + step_size * target;
                    renorm += u.table[i];
                }
                for (int i = 0; i < m; ++i) u.table[i] /= renorm;
            }
            cell_cursor += m;
        }
    }
}

std::vector<double> train_em(Circuit& c, const LabeledBatch& batch, const TrainConfig& cfg, Rng& rng) {
    if (cfg.epochs < 0) throw ArgError("epochs must be nonnegative");
    if (cfg.batch_size < 1) throw ArgError("batch size must be positive");
    std::vector<double> trace;
    int64_t n = batch.size();
    if (cfg.epochs == 0 || n == 0) return trace;

    std::vector<int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double eta = cfg.epochs == 1 ? cfg.lr_start
                                     : cfg.lr_start + (cfg.lr_end - cfg.lr_start) *
                                                          (static_cast<double>(epoch) / (cfg.epochs - 1));
        rng.shuffle(order);
        double ll_total = 0.0;
        for (int64_t start = 0; start < n; start += cfg.batch_size) {
            int64_t stop = std::min(n, start + cfg.batch_size);
            LabeledBatch mini;
            mini.data.num_vars = batch.data.num_vars;
            mini.data.domains = batch.data.domains;
            mini.labels.reserve(stop - start);
            for (int64_t i = start; i < stop; ++i) {
                mini.data.append_row(batch.data.row(order[i]));
                mini.labels.push_back(batch.labels[order[i]]);
            }
            std::vector<double> lls;
            FlowTable flows = compute_flows(c, mini, &lls);
            for (double v : lls) ll_total += v;
            em_update(c, flows, eta, cfg.step);
        }
        trace.push_back(ll_total / static_cast<double>(n));
    }
    return trace;
}

std::string format_ll_trace(const std::vector<double>& trace) {
    std::ostringstream out;
    out << "epoch,mean_ll_nats\n";
    for (size_t i = 0; i < trace.size(); ++i) out << i << ',' << format_double(trace[i]) << '\n';
    return out.str();
}

}  // namespace pcg
