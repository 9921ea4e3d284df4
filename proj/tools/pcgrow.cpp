// Batch front end for the circuit pipeline: validate, hclt, train, grow,
// assemble, eval, gaps. Every subcommand is a pure function of its inputs and
// --seed; outputs are written atomically and a single machine-readable
// `RESULT key=value ...` line goes to stdout.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "pcgrow/chow_liu.hpp"
#include "pcgrow/em.hpp"
#include "pcgrow/grow.hpp"
#include "pcgrow/hclt.hpp"
#include "pcgrow/io.hpp"
#include "pcgrow/kernels.hpp"
#include "pcgrow/kmeans.hpp"
#include "pcgrow/lvd.hpp"
#include "pcgrow/mutual_info.hpp"

using namespace pcg;

namespace {

constexpr int kExitNumeric = 1;
constexpr int kExitArgs = 2;
constexpr int kExitFormat = 3;

struct Options {
    std::string dataset, circuit_in, circuit_out, labels, prior_in, prior_out, trace_out;
    int K = 0;
    int n1 = 100, n2 = 4;  // outer/inner cluster schedule
    double capacity = 0.4;
    double epsilon_frac = 0.01;
    int epochs = 50;
    int batch = 256;
    std::string lr = "0.1:0.01";
    int hidden = 16;
    int heads = 1;
    int head = 0;
    uint64_t seed = 0;
    int threads = 0;
    int height = 0, width = 0, channels = 1;
    int prior_epochs = 50;
    bool no_prune = false;
    double prune_keep = 0.9;
};

std::pair<double, double> parse_lr(const std::string& s) {
    size_t colon = s.find(':');
    if (colon == std::string::npos) {
        double v = std::stod(s);
        return {v, v};
    }
    return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
}

void apply_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

TrainConfig train_config(const Options& opt) {
    TrainConfig cfg;
    cfg.epochs = opt.epochs;
    cfg.batch_size = opt.batch;
    auto [lo, hi] = parse_lr(opt.lr);
    cfg.lr_start = lo;
    cfg.lr_end = hi;
    return cfg;
}

// image geometry: explicit flags win, otherwise a square single-channel image
PatchLayout derive_layout(const GridDataset& ds, const Options& opt) {
    int v = ds.images.num_vars;
    int channels = opt.channels;
    int height = opt.height, width = opt.width;
    if (height == 0 && width == 0) {
        int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v) / channels)));
        if (side * side * channels != v)
            throw ArgError("cannot infer a square image from " + std::to_string(v) +
                           " variables; pass --height/--width");
        height = width = side;
    } else if (height == 0 || width == 0) {
        throw ArgError("--height and --width must be given together");
    }
    if (height % ds.grid_h != 0 || width % ds.grid_w != 0)
        throw ArgError("embedding grid does not divide the image shape");
    return PatchLayout::grid(height, width, channels, height / ds.grid_h, width / ds.grid_w);
}

GrowConfig grow_config(const Options& opt) {
    GrowConfig cfg;
    cfg.target_clusters = opt.n2;
    cfg.outer_clusters = opt.n1;
    cfg.capacity_fraction = opt.capacity;
    cfg.epsilon_fraction = opt.epsilon_frac;
    cfg.hidden_size = opt.hidden;
    cfg.prune_each_iteration = !opt.no_prune;
    cfg.prune_keep_fraction = opt.prune_keep;
    cfg.train = train_config(opt);
    return cfg;
}

int cmd_validate(const Options& opt) {
    Circuit c = load_circuit_file(opt.circuit_in);
    StructureReport rep = validate_structure(c);
    if (!rep.ok()) {
        std::ostringstream msg;
        msg << "structural validation failed:";
        if (!rep.smooth) msg << " not-smooth";
        if (!rep.decomposable) msg << " not-decomposable";
        if (!rep.alternating) msg << " not-alternating";
        msg << "; offending units:";
        for (int id : rep.offending) msg << ' ' << id;
        std::cerr << msg.str() << "\n";
        return kExitFormat;
    }
    std::cout << "RESULT smooth=1 decomposable=1 alternating=1 units=" << c.num_units()
              << " edges=" << c.num_edges() << "\n";
    return 0;
}

int cmd_hclt(const Options& opt) {
    GridDataset ds = load_dataset_file(opt.dataset);
    Rng rng(opt.seed);
    MITable mi = pairwise_mutual_information(ds.images);
    TreeStructure tree = chow_liu_tree(mi, 0);
    Circuit c = build_hclt(tree, opt.hidden, opt.heads, ds.images.domains, &ds.images, rng);
    save_circuit_file(opt.circuit_out, c);
    std::cout << "RESULT units=" << c.num_units() << " sum_edges=" << c.num_sum_edges()
              << " heads=" << c.num_heads() << "\n";
    return 0;
}

int cmd_train(const Options& opt) {
    GridDataset ds = load_dataset_file(opt.dataset);
    Circuit c = load_circuit_file(opt.circuit_in);
    std::vector<ClusterMap> maps = load_labels_file(opt.labels);
    if (maps.size() != 1) throw ArgError("train expects a single-position labels file");
    if (static_cast<int64_t>(maps[0].labels.size()) != ds.images.num_samples())
        throw ArgError("label count does not match dataset");

    ds.images.domains = c.domains;  // the circuit declares the variable domains
    LabeledBatch batch{ds.images, maps[0].labels};
    Rng rng(opt.seed);
    std::vector<double> trace = train_em(c, batch, train_config(opt), rng);
    save_circuit_file(opt.circuit_out, c);
    if (!opt.trace_out.empty()) atomic_write_file(opt.trace_out, format_ll_trace(trace));
    std::cout << "RESULT epochs=" << trace.size()
              << " final_ll=" << format_double(trace.empty() ? 0.0 : trace.back()) << "\n";
    return 0;
}

int cmd_grow(const Options& opt) {
    GridDataset ds = load_dataset_file(opt.dataset);
    PatchLayout layout = derive_layout(ds, opt);
    std::vector<EmbeddedDataset> parts = extract_patches(ds, layout);
    Rng rng(opt.seed);

    GrowConfig cfg = grow_config(opt);
    int n1 = opt.n1, n2 = opt.n2;
    if (opt.K > 0) {  // explicit total target: single-level growth
        n1 = 1;
        n2 = opt.K;
        cfg.target_clusters = opt.K;
    }

    // aggregate every position's records (position major)
    EmbeddedDataset agg;
    agg.x.num_vars = parts[0].x.num_vars;
    agg.x.domains.assign(agg.x.num_vars, 1);
    for (const auto& p : parts)
        for (int j = 0; j < agg.x.num_vars; ++j)
            agg.x.domains[j] = std::max(agg.x.domains[j], p.x.domains[j]);
    agg.embed_dim = ds.embed_dim;
    for (const auto& p : parts) {
        agg.x.values.insert(agg.x.values.end(), p.x.values.begin(), p.x.values.end());
        agg.h.insert(agg.h.end(), p.h.begin(), p.h.end());
    }

    Circuit merged;
    ClusterMap flat;
    flat.k = 0;
    flat.dim = agg.embed_dim;
    flat.labels.assign(agg.size(), 0);
    double final_ll = 0.0;

    if (n1 <= 1) {
        MITable mi = pairwise_mutual_information(agg.x);
        TreeStructure tree = chow_liu_tree(mi, 0);
        Circuit initial = build_hclt(tree, cfg.hidden_size, 1, agg.x.domains, &agg.x, rng);
        ProgressiveResult res = progressive_grow(agg, std::move(initial), cfg, rng);
        if (!res.reached_target)
            std::cerr << "warning: stopped at " << res.map.k << " clusters (unsplittable)\n";
        merged = std::move(res.circuit);
        flat = std::move(res.map);
        final_ll = res.final_trace.empty() ? 0.0 : res.final_trace.back();
    } else {
        // outer pre-clustering on embeddings, then inner progressive growth
        KMeansResult outer =
            seeded_kmeans(agg.h.data(), agg.size(), agg.embed_dim, n1, {}, cfg.kmeans_max_iters, rng);
        cfg.target_clusters = n2;
        int64_t weight = 0;
        for (int o = 0; o < n1; ++o) {
            EmbeddedDataset sub;
            sub.x.num_vars = agg.x.num_vars;
            sub.x.domains = agg.x.domains;
            sub.embed_dim = agg.embed_dim;
            std::vector<int64_t> members;
            for (int64_t i = 0; i < agg.size(); ++i)
                if (outer.labels[i] == o) {
                    sub.x.append_row(agg.x.row(i));
                    sub.h.insert(sub.h.end(), agg.embedding(i), agg.embedding(i) + agg.embed_dim);
                    members.push_back(i);
                }
            if (members.empty()) continue;
            MITable mi = pairwise_mutual_information(sub.x);
            TreeStructure tree = chow_liu_tree(mi, 0);
            Circuit initial = build_hclt(tree, cfg.hidden_size, 1, sub.x.domains, &sub.x, rng);
            ProgressiveResult res = progressive_grow(sub, std::move(initial), cfg, rng);

            int base = flat.k;
            int offset = merged.num_units();
            if (merged.num_units() == 0) {
                merged = res.circuit;
            } else {
                for (Unit u : res.circuit.units) {
                    for (int& ch : u.children) ch += offset;
                    merged.units.push_back(std::move(u));
                }
                for (int r : res.circuit.roots) merged.roots.push_back(r + offset);
            }
            flat.k += res.map.k;
            flat.centroids.insert(flat.centroids.end(), res.map.centroids.begin(),
                                  res.map.centroids.end());
            for (size_t m = 0; m < members.size(); ++m)
                flat.labels[members[m]] = base + res.map.labels[m];
            final_ll += (res.final_trace.empty() ? 0.0 : res.final_trace.back()) *
                        static_cast<double>(members.size());
            weight += static_cast<int64_t>(members.size());
        }
        if (weight > 0) final_ll /= static_cast<double>(weight);
        merged.num_vars = agg.x.num_vars;
        merged.domains = agg.x.domains;
    }

    save_circuit_file(opt.circuit_out, merged);

    // per-position cluster maps share the flat discretization
    int64_t n = ds.images.num_samples();
    std::vector<ClusterMap> per_position(parts.size());
    for (size_t p = 0; p < parts.size(); ++p) {
        per_position[p].k = flat.k;
        per_position[p].dim = flat.dim;
        per_position[p].centroids = flat.centroids;
        per_position[p].labels.assign(flat.labels.begin() + static_cast<int64_t>(p) * n,
                                      flat.labels.begin() + static_cast<int64_t>(p + 1) * n);
    }
    save_labels_file(opt.labels, per_position);
    std::cout << "RESULT heads=" << merged.num_heads() << " units=" << merged.num_units()
              << " sum_edges=" << merged.num_sum_edges() << " final_ll=" << format_double(final_ll)
              << "\n";
    return 0;
}

int cmd_assemble(const Options& opt) {
    GridDataset ds = load_dataset_file(opt.dataset);
    PatchLayout layout = derive_layout(ds, opt);
    Circuit cond = load_circuit_file(opt.circuit_in);
    std::vector<ClusterMap> maps = load_labels_file(opt.labels);
    if (static_cast<int>(maps.size()) != layout.num_positions())
        throw ArgError("labels file covers " + std::to_string(maps.size()) + " positions, layout has " +
                       std::to_string(layout.num_positions()));

    int64_t n = ds.images.num_samples();
    DiscreteData z;
    z.num_vars = layout.num_positions();
    z.domains.assign(z.num_vars, cond.num_heads());
    z.values.resize(n * z.num_vars);
    for (int p = 0; p < z.num_vars; ++p) {
        if (static_cast<int64_t>(maps[p].labels.size()) != n)
            throw ArgError("labels for position " + std::to_string(p) + " do not match dataset");
        for (int64_t i = 0; i < n; ++i) z.values[i * z.num_vars + p] = maps[p].labels[i];
    }

    Rng rng(opt.seed);
    PriorConfig pcfg;
    pcfg.hidden_size = opt.hidden;
    pcfg.epochs = opt.prior_epochs;
    Circuit prior = train_prior(z, pcfg, rng);
    AssembledModel model = assemble(prior, cond, layout);
    if (!opt.prior_out.empty()) save_circuit_file(opt.prior_out, prior);
    save_circuit_file(opt.circuit_out, model.composed);
    std::cout << "RESULT composed_units=" << model.composed.num_units()
              << " prior_units=" << prior.num_units() << " categories=" << model.num_categories
              << "\n";
    return 0;
}

int cmd_eval(const Options& opt) {
    GridDataset ds = load_dataset_file(opt.dataset);
    Circuit c = load_circuit_file(opt.circuit_in);
    ds.images.domains = c.domains;
    double bpd = bits_per_dimension(c, ds.images, opt.head);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", bpd);
    std::cout << "RESULT bpd=" << buf << " samples=" << ds.images.num_samples() << "\n";
    return 0;
}

int cmd_gaps(const Options& opt) {
    GridDataset ds = load_dataset_file(opt.dataset);
    PatchLayout layout = derive_layout(ds, opt);
    Circuit cond = load_circuit_file(opt.circuit_in);
    Circuit prior = load_circuit_file(opt.prior_in);
    std::vector<ClusterMap> maps = load_labels_file(opt.labels);
    if (static_cast<int>(maps.size()) != layout.num_positions())
        throw ArgError("labels file does not cover every latent position");

    AssembledModel model = assemble(prior, cond, layout);
    int64_t n = ds.images.num_samples();
    std::vector<std::vector<int>> z(layout.num_positions());
    for (int p = 0; p < layout.num_positions(); ++p) {
        if (static_cast<int64_t>(maps[p].labels.size()) != n)
            throw ArgError("labels for position " + std::to_string(p) + " do not match dataset");
        z[p] = maps[p].labels;
    }
    ds.images.domains = model.composed.domains;
    GapReport rep = gap_report(model, ds.images, z);
    std::cout << "RESULT lvd_objective=" << format_double(rep.lvd_objective)
              << " true_ll=" << format_double(rep.true_ll)
              << " variational_gap=" << format_double(rep.variational_gap) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic-circuit growing toolchain"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", opt.seed, "pseudorandom seed");
        sub->add_option("--threads", opt.threads, "worker threads (default: all cores)");
        return sub;
    };
    auto add_geometry = [&](CLI::App* sub) {
        sub->add_option("--height", opt.height, "image height (default: square)");
        sub->add_option("--width", opt.width, "image width");
        sub->add_option("--channels", opt.channels, "channels per pixel");
        return sub;
    };

    CLI::App* validate = add_common(app.add_subcommand("validate", "check circuit structure"));
    validate->add_option("--circuit-in", opt.circuit_in)->required();

    CLI::App* hclt = add_common(app.add_subcommand("hclt", "build an HCLT circuit from data"));
    hclt->add_option("--dataset", opt.dataset)->required();
    hclt->add_option("--circuit-out", opt.circuit_out)->required();
    hclt->add_option("--hidden", opt.hidden, "latent mixture width");
    hclt->add_option("--heads", opt.heads, "number of root heads");

    CLI::App* train = add_common(app.add_subcommand("train", "mini-batch EM on labeled data"));
    train->add_option("--dataset", opt.dataset)->required();
    train->add_option("--labels", opt.labels)->required();
    train->add_option("--circuit-in", opt.circuit_in)->required();
    train->add_option("--circuit-out", opt.circuit_out)->required();
    train->add_option("--epochs", opt.epochs);
    train->add_option("--batch", opt.batch);
    train->add_option("--lr", opt.lr, "start:end step size");
    train->add_option("--trace-out", opt.trace_out, "per-epoch LL trace CSV");

    CLI::App* grow = add_geometry(add_common(
        app.add_subcommand("grow", "progressive growing of the tied conditional circuit")));
    grow->add_option("--dataset", opt.dataset)->required();
    grow->add_option("--circuit-out", opt.circuit_out)->required();
    grow->add_option("--labels", opt.labels, "per-position labels output")->required();
    grow->add_option("--K", opt.K, "total clusters (overrides --n1/--n2 with a single level)");
    grow->add_option("--n1", opt.n1, "outer pre-clusters");
    grow->add_option("--n2", opt.n2, "inner clusters per outer cluster");
    grow->add_option("--capacity", opt.capacity, "growth capacity fraction");
    grow->add_option("--epsilon-frac", opt.epsilon_frac, "flow threshold fraction");
    grow->add_option("--epochs", opt.epochs);
    grow->add_option("--batch", opt.batch);
    grow->add_option("--lr", opt.lr);
    grow->add_option("--hidden", opt.hidden);
    grow->add_flag("--no-prune", opt.no_prune, "skip per-iteration pruning");
    grow->add_option("--prune-keep", opt.prune_keep, "sum-edge fraction kept when pruning");

    CLI::App* assemble_cmd = add_geometry(add_common(
        app.add_subcommand("assemble", "train the latent prior and compose the full model")));
    assemble_cmd->add_option("--dataset", opt.dataset)->required();
    assemble_cmd->add_option("--labels", opt.labels)->required();
    assemble_cmd->add_option("--circuit-in", opt.circuit_in, "conditional circuit")->required();
    assemble_cmd->add_option("--circuit-out", opt.circuit_out, "composed circuit")->required();
    assemble_cmd->add_option("--prior-out", opt.prior_out, "latent prior circuit");
    assemble_cmd->add_option("--hidden", opt.hidden, "prior mixture width");
    assemble_cmd->add_option("--prior-epochs", opt.prior_epochs);

    CLI::App* eval = add_common(app.add_subcommand("eval", "bits per dimension on a dataset"));
    eval->add_option("--dataset", opt.dataset)->required();
    eval->add_option("--circuit-in", opt.circuit_in)->required();
    eval->add_option("--head", opt.head);

    CLI::App* gaps = add_geometry(add_common(
        app.add_subcommand("gaps", "LVD objective, true LL and variational gap")));
    gaps->add_option("--dataset", opt.dataset)->required();
    gaps->add_option("--labels", opt.labels)->required();
    gaps->add_option("--circuit-in", opt.circuit_in, "conditional circuit")->required();
    gaps->add_option("--prior-in", opt.prior_in, "latent prior circuit")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitArgs;
    }

    try {
        apply_threads(opt.threads);
        if (validate->parsed()) return cmd_validate(opt);
        if (hclt->parsed()) return cmd_hclt(opt);
        if (train->parsed()) return cmd_train(opt);
        if (grow->parsed()) return cmd_grow(opt);
        if (assemble_cmd->parsed()) return cmd_assemble(opt);
        if (eval->parsed()) return cmd_eval(opt);
        if (gaps->parsed()) return cmd_gaps(opt);
        std::cerr << "no subcommand\n";
        return kExitArgs;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ArgError& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return kExitArgs;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
