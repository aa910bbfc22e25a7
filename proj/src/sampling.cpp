#include "segforge/sampling.hpp"

#include <algorithm>
#include <cstring>

namespace segforge {

Patch extract_patch(const Volume& v, const Segmentation& s, Index3 origin, Index3 size) {
    if (!same_geometry(v, s)) throw GeometryMismatch("patch source volume/segmentation geometry differs");
    if (size.x < 1 || size.y < 1 || size.z < 1) throw InvalidSpec("patch size must be >= 1 per axis");

    Patch p;
    p.origin = origin;
    p.size = size;
    p.values.assign(voxel_count(size), kPatchPadValue);
    p.labels.assign(voxel_count(size), 0);

    // in-bounds overlap of [origin, origin+size) with the lattice, per axis
    int x0 = std::max(0, -origin.x), x1 = std::min(size.x, v.dims.x - origin.x);
    int y0 = std::max(0, -origin.y), y1 = std::min(size.y, v.dims.y - origin.y);
    int z0 = std::max(0, -origin.z), z1 = std::min(size.z, v.dims.z - origin.z);
    if (x0 >= x1 || y0 >= y1 || z0 >= z1) return p; // fully outside: pure padding

    const std::size_t run = static_cast<std::size_t>(x1 - x0);
    for (int z = z0; z < z1; ++z) {
        for (int y = y0; y < y1; ++y) {
            std::size_t src = voxel_index(v.dims, origin.x + x0, origin.y + y, origin.z + z);
            std::size_t dst = voxel_index(size, x0, y, z);
            std::memcpy(p.values.data() + dst, v.voxels.data() + src, run * sizeof(float));
            std::memcpy(p.labels.data() + dst, s.labels.data() + src, run);
        }
    }
    return p;
}

PatchBatch sample_patches(const Volume& v, const Segmentation& s, int n, Index3 size,
                          double fg_bias, Rng& rng) {
    if (n < 1) throw InvalidSpec("patch count must be >= 1");
    if (fg_bias < 0.0 || fg_bias > 1.0) throw InvalidSpec("fg_bias must lie in [0, 1]");
    if (!same_geometry(v, s)) throw GeometryMismatch("patch source volume/segmentation geometry differs");

    std::vector<std::size_t> fg;
    if (fg_bias > 0.0)
        for (std::size_t i = 0; i < s.labels.size(); ++i)
            if (s.labels[i] != 0) fg.push_back(i);

    PatchBatch batch;
    batch.patches.reserve(static_cast<std::size_t>(n));
    batch.fg_centered.assign(static_cast<std::size_t>(n), 0);
    if (fg_bias > 0.0 && fg.empty()) {
        if (fg_bias >= 1.0) throw NoForeground("fg_bias = 1 requested on an all-background segmentation");
        batch.foreground_fallback = true;
    }

    const std::size_t nx = static_cast<std::size_t>(v.dims.x);
    const std::size_t nxy = nx * static_cast<std::size_t>(v.dims.y);
    for (int t = 0; t < n; ++t) {
        Index3 center;
        bool take_fg = fg_bias > 0.0 && rng.uniform() < fg_bias && !fg.empty();
        if (take_fg) {
            std::size_t idx = fg[rng.uniform_index(fg.size())];
            center = {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % static_cast<std::size_t>(v.dims.y)),
                      static_cast<int>(idx / nxy)};
            batch.fg_centered[static_cast<std::size_t>(t)] = 1;
        } else {
            center = {static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(v.dims.x))),
                      static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(v.dims.y))),
                      static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(v.dims.z)))};
        }
        Index3 origin{center.x - size.x / 2, center.y - size.y / 2, center.z - size.z / 2};
        batch.patches.push_back(extract_patch(v, s, origin, size));
    }
    return batch;
}

} // namespace segforge
