#include "pcgrow/lvd.hpp"

#include <algorithm>
#include <cmath>

#include "pcgrow/em.hpp"
#include "pcgrow/eval.hpp"
#include "pcgrow/flow.hpp"
#include "pcgrow/hclt.hpp"
#include "pcgrow/kernels.hpp"
#include "pcgrow/logspace.hpp"
#include "pcgrow/mutual_info.hpp"

namespace pcg {

TiedConditional tie_and_train_conditional(const std::vector<EmbeddedDataset>& patch_datasets,
                                          const GrowConfig& config, Rng& rng) {
    if (patch_datasets.empty()) throw ArgError("no patch datasets");
    int pv = patch_datasets[0].x.num_vars;
    int dim = patch_datasets[0].embed_dim;
    int64_t n = patch_datasets[0].size();
    for (const EmbeddedDataset& d : patch_datasets) {
        if (d.x.num_vars != pv) throw ArgError("patch datasets differ in shape");
        if (d.embed_dim != dim) throw ArgError("patch datasets differ in embedding dimension");
        if (d.size() != n) throw ArgError("patch datasets differ in sample count");
    }

    EmbeddedDataset agg;
    agg.x.num_vars = pv;
    agg.x.domains.assign(pv, 1);
    for (const EmbeddedDataset& d : patch_datasets)
        for (int j = 0; j < pv; ++j) agg.x.domains[j] = std::max(agg.x.domains[j], d.x.domains[j]);
    agg.embed_dim = dim;
    for (const EmbeddedDataset& d : patch_datasets) {
        agg.x.values.insert(agg.x.values.end(), d.x.values.begin(), d.x.values.end());
        agg.h.insert(agg.h.end(), d.h.begin(), d.h.end());
    }

    MITable mi = pairwise_mutual_information(agg.x);
    TreeStructure tree = chow_liu_tree(mi, 0);
    Circuit initial = build_hclt(tree, config.hidden_size, 1, agg.x.domains, &agg.x, rng);

    ProgressiveResult grown = progressive_grow(agg, std::move(initial), config, rng);

    TiedConditional out;
    out.circuit = std::move(grown.circuit);
    out.shared = std::move(grown.map);
    out.per_position.resize(patch_datasets.size());
    for (size_t p = 0; p < patch_datasets.size(); ++p) {
        ClusterMap& m = out.per_position[p];
        m.k = out.shared.k;
        m.dim = out.shared.dim;
        m.centroids = out.shared.centroids;
        m.labels.assign(out.shared.labels.begin() + static_cast<int64_t>(p) * n,
                        out.shared.labels.begin() + static_cast<int64_t>(p + 1) * n);
    }
    return out;
}

Circuit train_prior(const DiscreteData& z_data, const PriorConfig& config, Rng& rng) {
    if (z_data.num_samples() < 1) throw ArgError("empty label dataset");
    int positions = z_data.num_vars;

    Circuit prior;
    if (positions == 1) {
        // one latent position: a plain categorical, fit in closed form by EM
        TreeStructure tree;
        tree.root = 0;
        tree.parent = {-1};
        tree.order = {0};
        prior = build_hclt(tree, 1, 1, z_data.domains, &z_data, rng, 1.0, 0.0);
    } else {
        MITable mi = pairwise_mutual_information(z_data);
        TreeStructure tree = chow_liu_tree(mi, 0);
        prior = build_hclt(tree, config.hidden_size, 1, z_data.domains, &z_data, rng);
    }

    LabeledBatch batch{z_data, std::vector<int>(z_data.num_samples(), 0)};
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        FlowTable flows = compute_flows(prior, batch);
        em_update(prior, flows, 1.0, config.step);
    }
    return prior;
}

AssembledModel assemble(const Circuit& prior, const Circuit& conditional, const PatchLayout& layout) {
    int k = conditional.num_heads();
    if (prior.num_vars != layout.num_positions())
        throw ArgError("prior variable count does not match the number of latent positions");
    for (int v = 0; v < prior.num_vars; ++v)
        if (prior.domains[v] != k)
            throw ArgError("prior domain of Z_" + std::to_string(v) + " is " +
                           std::to_string(prior.domains[v]) + ", conditional has " + std::to_string(k) +
                           " heads");
    if (conditional.num_vars != layout.vars_per_patch())
        throw ArgError("conditional arity does not match the patch size");

    AssembledModel model;
    model.prior = prior;
    model.conditional = conditional;
    model.layout = layout;
    model.num_categories = k;

    Circuit& out = model.composed;
    out.num_vars = layout.num_vars();
    out.domains.assign(out.num_vars, 0);
    for (int p = 0; p < layout.num_positions(); ++p)
        for (int j = 0; j < layout.vars_per_patch(); ++j)
            out.domains[layout.patches[p][j]] = conditional.domains[j];

    auto emit = [&out](Unit u) {
        out.units.push_back(std::move(u));
        return out.num_units() - 1;
    };

    // one instance of the conditional per position, variables remapped;
    // parameters start tied (numerically identical copies)
    std::vector<std::vector<int>> pass(layout.num_positions(), std::vector<int>(k));
    for (int p = 0; p < layout.num_positions(); ++p) {
        std::vector<int> remap(conditional.num_units());
        for (int u = 0; u < conditional.num_units(); ++u) {
            Unit copy = conditional.units[u];
            if (copy.kind == UnitKind::Input) copy.var = layout.patches[p][copy.var];
            for (int& ch : copy.children) ch = remap[ch];
            remap[u] = emit(std::move(copy));
        }
        for (int c = 0; c < k; ++c) {
            Unit pt;
            pt.kind = UnitKind::Product;
            pt.children.push_back(remap[conditional.roots[c]]);
            pass[p][c] = emit(std::move(pt));
        }
    }

    std::vector<int> remap(prior.num_units());
    for (int u = 0; u < prior.num_units(); ++u) {
        const Unit& pu = prior.units[u];
        if (pu.kind == UnitKind::Input) {
            Unit gadget;
            gadget.kind = UnitKind::Sum;
            gadget.children = pass[pu.var];
            gadget.weights = pu.table;
            remap[u] = emit(std::move(gadget));
        } else {
            Unit copy = pu;
            for (int& ch : copy.children) ch = remap[ch];
            remap[u] = emit(std::move(copy));
        }
    }
    for (int r : prior.roots) out.roots.push_back(remap[r]);

    model.gadget_position.assign(out.num_units(), -1);
    for (int u = 0; u < prior.num_units(); ++u)
        if (prior.units[u].kind == UnitKind::Input)
            model.gadget_position[remap[u]] = prior.units[u].var;
    return model;
}

namespace {

// Forward pass over the composed circuit with every gadget clamped to its
// position's category.
double clamped_forward(const Circuit& c, const std::vector<int>& gadget_position, const int32_t* x,
                       const std::vector<int>& z, std::vector<double>& val, std::vector<double>& buf) {
    val.resize(c.num_units());
    for (int u = 0; u < c.num_units(); ++u) {
        const Unit& unit = c.units[u];
        switch (unit.kind) {
            case UnitKind::Input:
                val[u] = safe_log(unit.table[x[unit.var]]);
                break;
            case UnitKind::Sum:
                if (gadget_position[u] >= 0) {
                    int cat = z[gadget_position[u]];
                    val[u] = safe_log(unit.weights[cat]) + val[unit.children[cat]];
                } else {
                    buf.resize(unit.children.size());
                    for (size_t i = 0; i < unit.children.size(); ++i)
                        buf[i] = safe_log(unit.weights[i]) + val[unit.children[i]];
                    val[u] = log_sum_exp(buf.data(), static_cast<int64_t>(buf.size()));
                }
                break;
            case UnitKind::Product: {
                double s = 0.0;
                for (int ch : unit.children) s += val[ch];
                val[u] = s;
                break;
            }
        }
    }
    return val[c.roots[0]];
}

}  // namespace

double AssembledModel::joint_log_likelihood(const int32_t* x, const std::vector<int>& z) const {
    if (static_cast<int>(z.size()) != layout.num_positions())
        throw ArgError("latent assignment does not cover every position");
    for (int zc : z)
        if (zc < 0 || zc >= num_categories) throw ArgError("latent category out of range");
    std::vector<double> val, buf;
    return clamped_forward(composed, gadget_position, x, z, val, buf);
}

std::vector<double> finetune(AssembledModel& model, const DiscreteData& images, int epochs,
                             const EmStepConfig& step) {
    if (epochs < 0) throw ArgError("epochs must be nonnegative");
    LabeledBatch batch{images, std::vector<int>(images.num_samples(), 0)};
    std::vector<double> trace;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::vector<double> lls;
        FlowTable flows = compute_flows(model.composed, batch, &lls);
        double total = 0.0;
        for (double v : lls) total += v;
        trace.push_back(total / static_cast<double>(images.num_samples()));
        em_update(model.composed, flows, 1.0, step);
    }
    return trace;
}

GapReport gap_report(const AssembledModel& model, const DiscreteData& images,
                     const std::vector<std::vector<int>>& z_labels) {
    int64_t n = images.num_samples();
    int positions = model.layout.num_positions();
    if (static_cast<int>(z_labels.size()) != positions)
        throw ArgError("label lists must cover every latent position");
    for (const auto& l : z_labels)
        if (static_cast<int64_t>(l.size()) != n) throw ArgError("label list length mismatch");

    std::vector<double> marginal = batch_log_likelihood(model.composed, images, 0);

    GapReport rep;
    std::vector<double> joint(n);
#pragma omp parallel
    {
        std::vector<double> val, buf;
        std::vector<int> z(positions);
#pragma omp for schedule(static)
        for (int64_t i = 0; i < n; ++i) {
            for (int p = 0; p < positions; ++p) z[p] = z_labels[p][i];
            joint[i] =
                clamped_forward(model.composed, model.gadget_position, images.row(i), z, val, buf);
        }
    }
    for (int64_t i = 0; i < n; ++i) {
        rep.true_ll += marginal[i];
        rep.lvd_objective += joint[i];
    }
    rep.variational_gap = rep.true_ll - rep.lvd_objective;
    return rep;
}

double bits_per_dimension(const Circuit& model, const DiscreteData& test, int head) {
    if (test.num_samples() < 1) throw ArgError("empty evaluation set");
    std::vector<double> lls = batch_log_likelihood(model, test, head);
    double total = 0.0;
    for (double v : lls) total += v;
    double mean = total / static_cast<double>(test.num_samples());
    return -mean / (std::log(2.0) * static_cast<double>(model.num_vars));
}

double appendix_a_check(const Circuit& prior, const Circuit& conditional, const PatchLayout& layout,
                        const DiscreteData& images, const std::vector<std::vector<double>>& q,
                        int num_reparams, Rng& rng) {
    int positions = layout.num_positions();
    int k = conditional.num_heads();
    int64_t n = images.num_samples();
    if (static_cast<int64_t>(q.size()) != n) throw ArgError("q must cover every sample");
    for (const auto& qi : q)
        if (static_cast<int>(qi.size()) != positions * k)
            throw ArgError("q rows must be positions x K");
    double grids = std::pow(static_cast<double>(k), positions);
    if (grids > 1e6) throw ArgError("latent grid too large to enumerate");
    int num_grids = static_cast<int>(grids);

    Circuit prior_r = prior;
    Circuit cond_r = conditional;
    double max_dev = 0.0;

    for (int rep = 0; rep <= num_reparams; ++rep) {
        if (rep > 0) {
            randomize_parameters(prior_r, rng);
            randomize_parameters(cond_r, rng);
        }
        AssembledModel model = assemble(prior_r, cond_r, layout);

        // per-position conditional head scores for each sample
        std::vector<DiscreteData> patch_data(positions);
        for (int p = 0; p < positions; ++p) {
            patch_data[p].num_vars = layout.vars_per_patch();
            patch_data[p].domains = cond_r.domains;
            for (int64_t i = 0; i < n; ++i)
                for (int j = 0; j < layout.vars_per_patch(); ++j)
                    patch_data[p].values.push_back(images.row(i)[layout.patches[p][j]]);
        }
        std::vector<std::vector<double>> head_scores(positions);
        for (int p = 0; p < positions; ++p) head_scores[p] = batch_root_scores(cond_r, patch_data[p]);

        std::vector<double> val, buf;
        std::vector<int> z(positions);
        Evidence ez = Evidence::all_unknown(positions);
        for (int64_t i = 0; i < n; ++i) {
            double e_joint = 0.0, e_cond = 0.0, kl = 0.0, entropy = 0.0;
            for (int g = 0; g < num_grids; ++g) {
                int rem = g;
                double qz = 1.0;
                for (int p = 0; p < positions; ++p) {
                    z[p] = rem % k;
                    rem /= k;
                    qz *= q[i][p * k + z[p]];
                }
                if (qz == 0.0) continue;
                double log_qz = std::log(qz);
                double joint = clamped_forward(model.composed, model.gadget_position, images.row(i), z,
                                               val, buf);
                double cond_ll = 0.0;
                for (int p = 0; p < positions; ++p) cond_ll += head_scores[p][i * k + z[p]];
                for (int p = 0; p < positions; ++p) ez.values[p] = z[p];
                double log_pz = eval_values(prior_r, ez)[prior_r.roots[0]];
                e_joint += qz * joint;
                e_cond += qz * cond_ll;
                kl += qz * (log_qz - log_pz);
                entropy += qz * log_qz;
            }
            double diff = e_joint - (e_cond - kl);
            double dev = std::fabs(diff - entropy);
            if (dev > max_dev) max_dev = dev;
        }
    }
    return max_dev;
}

}  // namespace pcg
