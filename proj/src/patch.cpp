#include "pcgrow/patch.hpp"

#include <algorithm>

namespace pcg {

PatchLayout PatchLayout::grid(int height, int width, int channels, int patch_h, int patch_w) {
    if (height < 1 || width < 1 || channels < 1) throw ArgError("invalid image shape");
    if (patch_h < 1 || patch_w < 1 || height % patch_h != 0 || width % patch_w != 0)
        throw ArgError("patch shape must evenly divide the image");
    PatchLayout l;
    l.height = height;
    l.width = width;
    l.channels = channels;
    l.patch_h = patch_h;
    l.patch_w = patch_w;
    l.grid_h = height / patch_h;
    l.grid_w = width / patch_w;
    l.patches.resize(l.num_positions());
    for (int gr = 0; gr < l.grid_h; ++gr)
        for (int gc = 0; gc < l.grid_w; ++gc) {
            std::vector<int>& vars = l.patches[gr * l.grid_w + gc];
            for (int r = gr * patch_h; r < (gr + 1) * patch_h; ++r)
                for (int c = gc * patch_w; c < (gc + 1) * patch_w; ++c)
                    for (int ch = 0; ch < channels; ++ch)
                        vars.push_back((r * width + c) * channels + ch);
        }
    return l;
}

std::vector<EmbeddedDataset> extract_patches(const GridDataset& ds, const PatchLayout& layout) {
    if (ds.grid_h != layout.grid_h || ds.grid_w != layout.grid_w)
        throw ArgError("embedding grid shape does not match the patch layout");
    if (ds.images.num_vars != layout.num_vars())
        throw ArgError("image variable count does not match the patch layout");

    int64_t n = ds.images.num_samples();
    int pv = layout.vars_per_patch();
    std::vector<EmbeddedDataset> out(layout.num_positions());
    for (int p = 0; p < layout.num_positions(); ++p) {
        EmbeddedDataset& d = out[p];
        d.x.num_vars = pv;
        d.x.domains.resize(pv);
        for (int j = 0; j < pv; ++j) d.x.domains[j] = ds.images.domains[layout.patches[p][j]];
        d.embed_dim = ds.embed_dim;
        d.x.values.reserve(n * pv);
        d.h.reserve(n * ds.embed_dim);
        for (int64_t i = 0; i < n; ++i) {
            const int32_t* row = ds.images.row(i);
            for (int j = 0; j < pv; ++j) d.x.values.push_back(row[layout.patches[p][j]]);
            const double* h = ds.embedding(i, p);
            d.h.insert(d.h.end(), h, h + ds.embed_dim);
        }
    }
    return out;
}

}  // namespace pcg
