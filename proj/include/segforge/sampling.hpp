#ifndef SEGFORGE_SAMPLING_HPP
#define SEGFORGE_SAMPLING_HPP

#include <vector>

#include "segforge/rng.hpp"
#include "segforge/volume.hpp"

namespace segforge {

// A fixed-size training window. Out-of-bounds intensity voxels hold -1.0
// (normalized air), out-of-bounds label voxels hold 0.
struct Patch {
    Index3 origin; // corner index in the source lattice, may be negative
    Index3 size;
    std::vector<float> values;
    std::vector<std::uint8_t> labels;
};

constexpr float kPatchPadValue = -1.0f;

Patch extract_patch(const Volume& v, const Segmentation& s, Index3 origin, Index3 size);

struct PatchBatch {
    std::vector<Patch> patches;
    std::vector<std::uint8_t> fg_centered; // 1 where the foreground branch was taken
    bool foreground_fallback = false;      // fg_bias > 0 on an all-background segmentation
};

// Draws n patches; with probability fg_bias a patch is centered on a uniformly
// chosen foreground voxel, otherwise its center is uniform over the lattice.
// Deterministic given the rng state. fg_bias = 1 on an all-background
// segmentation throws NoForeground; 0 < fg_bias < 1 falls back to uniform
// centers with foreground_fallback set.
PatchBatch sample_patches(const Volume& v, const Segmentation& s, int n, Index3 size,
                          double fg_bias, Rng& rng);

} // namespace segforge

#endif
