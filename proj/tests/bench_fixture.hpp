#pragma once

// Synthetic patch benchmark shared by the LVD tests and the acceptance suite:
// images whose patches are drawn from a ground-truth mixture shared across
// positions, paired with noisy embeddings of the mixture component.

#include <vector>

#include "pcgrow/data.hpp"
#include "pcgrow/patch.hpp"
#include "pcgrow/rng.hpp"

namespace testsupport {

struct PatchWorld {
    int num_components;
    int pixels_per_patch;
    int domain;
    int embed_dim;
    std::vector<double> mix;                      // component frequencies
    std::vector<std::vector<double>> pixel_table; // per component: pixels x domain
    std::vector<std::vector<double>> center;      // per component: embed_dim
    double noise;

    // `sharpness` is the mass on each pixel's preferred value.
    static PatchWorld make(pcg::Rng& rng, int num_components, int pixels, int domain, int embed_dim,
                           double center_scale, double noise, double sharpness) {
        PatchWorld w;
        w.num_components = num_components;
        w.pixels_per_patch = pixels;
        w.domain = domain;
        w.embed_dim = embed_dim;
        w.noise = noise;
        w.mix = rng.dirichlet(num_components);
        for (double& m : w.mix) m = 0.3 / num_components + 0.7 * m;  // uneven but never tiny
        double total = 0.0;
        for (double m : w.mix) total += m;
        for (double& m : w.mix) m /= total;

        double off = (1.0 - sharpness) / (domain - 1);
        for (int c = 0; c < num_components; ++c) {
            std::vector<double> table(pixels * domain, off);
            for (int p = 0; p < pixels; ++p)
                table[p * domain + rng.uniform_int(domain)] = sharpness;
            w.pixel_table.push_back(std::move(table));
            std::vector<double> ctr(embed_dim);
            for (double& v : ctr) v = center_scale * rng.u01();
            w.center.push_back(std::move(ctr));
        }
        return w;
    }

    // `bases` pixel patterns, each appearing as two embedding variants with
    // uneven frequencies: the components of one base share a pixel table but
    // sit at unrelated embedding locations (pair_offset >= 0 places them that
    // far apart instead). Recovering a base means merging its variant pair,
    // which geometry-only clustering cannot see.
    static PatchWorld make_paired(pcg::Rng& rng, int bases, int pixels, int domain, int embed_dim,
                                  double center_scale, double pair_offset, double noise,
                                  double sharpness) {
        PatchWorld w;
        w.num_components = 2 * bases;
        w.pixels_per_patch = pixels;
        w.domain = domain;
        w.embed_dim = embed_dim;
        w.noise = noise;

        // uneven frequencies, but no base heavy enough to exceed the
        // growth capacity rule
        std::vector<double> base_mix = rng.dirichlet(bases);
        double off = (1.0 - sharpness) / (domain - 1);
        for (int b = 0; b < bases; ++b) {
            std::vector<double> table(pixels * domain, off);
            for (int p = 0; p < pixels; ++p)
                table[p * domain + rng.uniform_int(domain)] = sharpness;
            std::vector<double> ctr(embed_dim);
            for (double& v : ctr) v = center_scale * rng.u01();
            std::vector<double> dir(embed_dim);
            double norm = 0.0;
            for (double& v : dir) {
                v = rng.normal();
                norm += v * v;
            }
            norm = std::sqrt(norm);
            double base_weight = 0.6 / bases + 0.4 * base_mix[b];
            for (int variant = 0; variant < 2; ++variant) {
                w.pixel_table.push_back(table);
                std::vector<double> c(embed_dim);
                if (pair_offset < 0.0) {
                    for (double& v : c) v = center_scale * rng.u01();
                } else {
                    c = ctr;
                    double sign = variant == 0 ? 0.5 : -0.5;
                    for (int d = 0; d < embed_dim; ++d) c[d] += sign * pair_offset * dir[d] / norm;
                }
                w.center.push_back(std::move(c));
                w.mix.push_back(base_weight * (variant == 0 ? 0.7 : 0.3));
            }
        }
        double total = 0.0;
        for (double m : w.mix) total += m;
        for (double& m : w.mix) m /= total;
        return w;
    }

    int sample_component(pcg::Rng& rng) const {
        double u = rng.u01();
        double cum = 0.0;
        for (int c = 0; c < num_components; ++c) {
            cum += mix[c];
            if (u < cum) return c;
        }
        return num_components - 1;
    }

    void sample_patch(pcg::Rng& rng, int component, int32_t* pixels_out, double* h_out) const {
        const std::vector<double>& table = pixel_table[component];
        for (int p = 0; p < pixels_per_patch; ++p) {
            double u = rng.u01();
            double cum = 0.0;
            int32_t v = domain - 1;
            for (int d = 0; d < domain; ++d) {
                cum += table[p * domain + d];
                if (u < cum) {
                    v = d;
                    break;
                }
            }
            pixels_out[p] = v;
        }
        for (int d = 0; d < embed_dim; ++d) h_out[d] = center[component][d] + noise * rng.normal();
    }

    // grid of positions, every patch drawn independently from the mixture;
    // patch pixels are scattered through the layout's variable mapping
    pcg::GridDataset sample_grid(pcg::Rng& rng, int64_t n, const pcg::PatchLayout& layout,
                                 std::vector<int>* components_out = nullptr) const {
        pcg::GridDataset ds;
        int positions = layout.num_positions();
        ds.images.num_vars = layout.num_vars();
        ds.images.domains.assign(ds.images.num_vars, domain);
        ds.embed_dim = embed_dim;
        ds.grid_h = layout.grid_h;
        ds.grid_w = layout.grid_w;
        ds.images.values.resize(n * ds.images.num_vars);
        ds.embeddings.resize(n * positions * embed_dim);
        std::vector<int32_t> patch(pixels_per_patch);
        for (int64_t i = 0; i < n; ++i)
            for (int p = 0; p < positions; ++p) {
                int c = sample_component(rng);
                if (components_out) components_out->push_back(c);
                sample_patch(rng, c, patch.data(),
                             ds.embeddings.data() + (i * positions + p) * embed_dim);
                for (int j = 0; j < pixels_per_patch; ++j)
                    ds.images.values[i * ds.images.num_vars + layout.patches[p][j]] = patch[j];
            }
        return ds;
    }
};

}  // namespace testsupport
