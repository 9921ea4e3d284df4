#pragma once

#include <vector>

#include "pcgrow/data.hpp"

namespace pcg {

// Partition of the image variables into disjoint patches, one latent position
// per patch, in row-major grid order matching the embedding grid.
struct PatchLayout {
    int height = 0, width = 0, channels = 1;
    int patch_h = 0, patch_w = 0;
    int grid_h = 0, grid_w = 0;
    std::vector<std::vector<int>> patches;  // variable indices per position

    static PatchLayout grid(int height, int width, int channels, int patch_h, int patch_w);

    int num_positions() const { return grid_h * grid_w; }
    int vars_per_patch() const { return patch_h * patch_w * channels; }
    int num_vars() const { return height * width * channels; }
};

// Position i's dataset pairs the patch pixels x_i (in the patch's variable
// order) with the embedding h_i at that grid position.
std::vector<EmbeddedDataset> extract_patches(const GridDataset& ds, const PatchLayout& layout);

}  // namespace pcg
