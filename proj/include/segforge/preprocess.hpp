#ifndef SEGFORGE_PREPROCESS_HPP
#define SEGFORGE_PREPROCESS_HPP

#include <optional>

#include "segforge/volume.hpp"

namespace segforge {

struct PreprocessConfig {
    Vec3 target_spacing_mm{2.5f, 2.5f, 5.0f};
    float hu_lo = -1000.f;
    float hu_hi = 800.f;
};

enum class Interp { trilinear, nearest };

// Resamples onto a grid with the target spacing. Output dims are
// round(dims*spacing/target), at least 1 per axis; voxel (0,0,0) centers stay
// aligned (continuous source index = i * target/spacing) and out-of-bounds
// samples clamp to the edge. Resampling happens in raw intensity space.
Volume resample(const Volume& v, Vec3 target_spacing, Interp interp);
// Label grids only permit nearest; trilinear requests throw InterpMismatch.
Segmentation resample(const Segmentation& s, Vec3 target_spacing, Interp interp);

// clamp to [lo, hi], then map affinely so lo -> -1 and hi -> +1.
Volume window_normalize(const Volume& v, float lo, float hi);

// resample(trilinear) + window_normalize on the CT; resample(nearest) on the
// segmentation. Outputs share geometry.
std::pair<Volume, std::optional<Segmentation>> preprocess_case(
    const Volume& ct, const std::optional<Segmentation>& seg, const PreprocessConfig& cfg);

} // namespace segforge

#endif
