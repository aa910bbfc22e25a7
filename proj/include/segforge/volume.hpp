#ifndef SEGFORGE_VOLUME_HPP
#define SEGFORGE_VOLUME_HPP

#include <cstdint>
#include <cstddef>
#include <vector>

#include "segforge/errors.hpp"

namespace segforge {

struct Index3 {
    int x = 0, y = 0, z = 0;
    bool operator==(const Index3&) const = default;
};

struct Vec3 {
    float x = 0.f, y = 0.f, z = 0.f;
    bool operator==(const Vec3&) const = default;
};

inline std::size_t voxel_count(Index3 d) {
    return static_cast<std::size_t>(d.x) * static_cast<std::size_t>(d.y) * static_cast<std::size_t>(d.z);
}

// x-fastest linearization: voxel (i,j,k) lives at i + nx*(j + ny*k)
inline std::size_t voxel_index(Index3 d, int i, int j, int k) {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(d.x) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(d.y) * static_cast<std::size_t>(k));
}

// 3D scalar grid with physical spacing (mm). Coordinates follow the usual
// convention: the center of voxel (0,0,0) sits at origin_mm and voxel (i,j,k)
// at origin + (i*sx, j*sy, k*sz).
struct Volume {
    Index3 dims;
    Vec3 spacing_mm{1.f, 1.f, 1.f};
    Vec3 origin_mm{0.f, 0.f, 0.f};
    std::vector<float> voxels;

    float& at(int i, int j, int k) { return voxels[voxel_index(dims, i, j, k)]; }
    float at(int i, int j, int k) const { return voxels[voxel_index(dims, i, j, k)]; }

    bool operator==(const Volume&) const = default;
};

// Organ-id grid over the same lattice as its paired Volume. Id 0 is background.
struct Segmentation {
    Index3 dims;
    Vec3 spacing_mm{1.f, 1.f, 1.f};
    Vec3 origin_mm{0.f, 0.f, 0.f};
    std::vector<std::uint8_t> labels;

    std::uint8_t& at(int i, int j, int k) { return labels[voxel_index(dims, i, j, k)]; }
    std::uint8_t at(int i, int j, int k) const { return labels[voxel_index(dims, i, j, k)]; }

    bool operator==(const Segmentation&) const = default;
};

template <typename T>
bool same_geometry(const T& a, const T& b) {
    return a.dims == b.dims && a.spacing_mm == b.spacing_mm && a.origin_mm == b.origin_mm;
}

inline bool same_geometry(const Volume& a, const Segmentation& b) {
    return a.dims == b.dims && a.spacing_mm == b.spacing_mm && a.origin_mm == b.origin_mm;
}

void validate(const Volume& v);       // throws InvalidSpec on broken invariants
void validate(const Segmentation& s);

Volume make_volume(Index3 dims, Vec3 spacing = {1.f, 1.f, 1.f}, float fill = 0.f);
Segmentation make_segmentation(Index3 dims, Vec3 spacing = {1.f, 1.f, 1.f}, std::uint8_t fill = 0);

} // namespace segforge

#endif
