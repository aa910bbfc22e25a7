#include "segforge/volume.hpp"

#include <cmath>

namespace segforge {

void validate(const Volume& v) {
    if (v.dims.x < 1 || v.dims.y < 1 || v.dims.z < 1)
        throw InvalidSpec("volume dims must be >= 1 per axis");
    if (!(v.spacing_mm.x > 0.f) || !(v.spacing_mm.y > 0.f) || !(v.spacing_mm.z > 0.f))
        throw NonPositiveSpacing("volume spacing must be positive");
    if (v.voxels.size() != voxel_count(v.dims))
        throw InvalidSpec("voxel count does not match dims");
    for (float x : v.voxels)
        if (!std::isfinite(x)) throw InvalidSpec("volume contains non-finite voxel");
}

void validate(const Segmentation& s) {
    if (s.dims.x < 1 || s.dims.y < 1 || s.dims.z < 1)
        throw InvalidSpec("segmentation dims must be >= 1 per axis");
    if (!(s.spacing_mm.x > 0.f) || !(s.spacing_mm.y > 0.f) || !(s.spacing_mm.z > 0.f))
        throw NonPositiveSpacing("segmentation spacing must be positive");
    if (s.labels.size() != voxel_count(s.dims))
        throw InvalidSpec("label count does not match dims");
}

Volume make_volume(Index3 dims, Vec3 spacing, float fill) {
    Volume v;
    v.dims = dims;
    v.spacing_mm = spacing;
    v.voxels.assign(voxel_count(dims), fill);
    return v;
}

Segmentation make_segmentation(Index3 dims, Vec3 spacing, std::uint8_t fill) {
    Segmentation s;
    s.dims = dims;
    s.spacing_mm = spacing;
    s.labels.assign(voxel_count(dims), fill);
    return s;
}

} // namespace segforge
