#include "pcgrow/eval.hpp"

#include <cmath>
#include <string>

#include "pcgrow/logspace.hpp"

namespace pcg {

namespace {

void check_evidence(const Circuit& c, const Evidence& e) {
    if (static_cast<int>(e.values.size()) != c.num_vars)
        throw ArgError("evidence covers " + std::to_string(e.values.size()) + " variables, circuit has " +
                       std::to_string(c.num_vars));
    for (int v = 0; v < c.num_vars; ++v) {
        int32_t x = e.values[v];
        if (x == Evidence::kUnknown) continue;
        if (x < 0 || x >= c.domains[v])
            throw ArgError("observed value " + std::to_string(x) + " outside domain of variable " +
                           std::to_string(v));
    }
}

void check_head(const Circuit& c, int head) {
    if (head < 0 || head >= c.num_heads())
        throw ArgError("head index " + std::to_string(head) + " out of range (circuit has " +
                       std::to_string(c.num_heads()) + " heads)");
}

}  // namespace

std::vector<double> eval_values(const Circuit& c, const Evidence& e, EvalStats* stats) {
    check_evidence(c, e);
    std::vector<double> val(c.num_units());
    std::vector<double> buf;
    for (int u = 0; u < c.num_units(); ++u) {
        const Unit& unit = c.units[u];
        switch (unit.kind) {
            case UnitKind::Input: {
                int32_t x = e.values[unit.var];
                val[u] = (x == Evidence::kUnknown) ? 0.0 : safe_log(unit.table[x]);
                break;
            }
            case UnitKind::Sum: {
                buf.resize(unit.children.size());
                for (size_t i = 0; i < unit.children.size(); ++i)
                    buf[i] = safe_log(unit.weights[i]) + val[unit.children[i]];
                val[u] = log_sum_exp(buf.data(), static_cast<int64_t>(buf.size()));
                if (stats) stats->edges_visited += static_cast<int64_t>(unit.children.size());
                break;
            }
            case UnitKind::Product: {
                double s = 0.0;
                for (int ch : unit.children) s += val[ch];
                val[u] = s;
                if (stats) stats->edges_visited += static_cast<int64_t>(unit.children.size());
                break;
            }
        }
    }
    return val;
}

double log_likelihood(const Circuit& c, const Evidence& x, int head, EvalStats* stats) {
    check_head(c, head);
    if (!x.fully_observed()) throw ArgError("log_likelihood requires fully observed evidence");
    return eval_values(c, x, stats)[c.roots[head]];
}

double log_marginal(const Circuit& c, const Evidence& e, int head) {
    check_head(c, head);
    StructureReport rep = validate_structure(c);
    if (!rep.smooth || !rep.decomposable) {
        std::string ids;
        for (int id : rep.offending) ids += " " + std::to_string(id);
        throw ArgError(std::string("marginal query on a ") + (rep.smooth ? "" : "non-smooth ") +
                       (rep.decomposable ? "" : "non-decomposable ") + "circuit; offending units:" + ids);
    }
    return eval_values(c, e)[c.roots[head]];
}

}  // namespace pcg
