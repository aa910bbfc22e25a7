#ifndef SEGFORGE_EVAL_HPP
#define SEGFORGE_EVAL_HPP

#include <map>
#include <vector>

#include "segforge/volume.hpp"

namespace segforge {

// Binary mask over a voxel lattice (0/1 per voxel).
struct Mask {
    Index3 dims;
    std::vector<std::uint8_t> on;
};

Mask organ_mask(const Segmentation& s, int organ_id);
// Mask of voxels whose label is any of the given ids (for grouped schemas).
Mask group_mask(const Segmentation& s, const std::vector<int>& organ_ids);

// 2|A∩B| / (|A|+|B|); both masks empty is defined as 1.0.
double dsc(const Mask& pred, const Mask& truth);

struct OrganDice {
    double dsc = 0.0;
    bool both_empty = false; // 0/0 case, value pinned to 1.0 and flagged
};

std::map<int, OrganDice> per_organ_dsc(const Segmentation& pred, const Segmentation& truth,
                                       const std::vector<int>& organs);

// Mean DSC over organs present in the truth (both-empty organs are skipped);
// returns 1.0 when the truth is all background.
double mean_foreground_dsc(const Segmentation& pred, const Segmentation& truth,
                           const std::vector<int>& organs);

} // namespace segforge

#endif
