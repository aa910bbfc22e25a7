#include "segforge/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace segforge {

namespace {

int out_dim(int n, float spacing, float target) {
    double exact = static_cast<double>(n) * static_cast<double>(spacing) / static_cast<double>(target);
    int d = static_cast<int>(std::floor(exact + 0.5)); // round half away from zero (all inputs positive)
    return std::max(d, 1);
}

Index3 out_dims(Index3 dims, Vec3 spacing, Vec3 target) {
    return {out_dim(dims.x, spacing.x, target.x), out_dim(dims.y, spacing.y, target.y),
            out_dim(dims.z, spacing.z, target.z)};
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

void check_target(Vec3 t) {
    if (!(t.x > 0.f) || !(t.y > 0.f) || !(t.z > 0.f))
        throw NonPositiveSpacing("target spacing must be positive");
}

} // namespace

Volume resample(const Volume& v, Vec3 target, Interp interp) {
    validate(v);
    check_target(target);

    Volume out;
    out.dims = out_dims(v.dims, v.spacing_mm, target);
    out.spacing_mm = target;
    out.origin_mm = v.origin_mm;
    out.voxels.resize(voxel_count(out.dims));

    const double rx = static_cast<double>(target.x) / v.spacing_mm.x;
    const double ry = static_cast<double>(target.y) / v.spacing_mm.y;
    const double rz = static_cast<double>(target.z) / v.spacing_mm.z;
    const int nx = v.dims.x, ny = v.dims.y, nz = v.dims.z;

    std::size_t o = 0;
    for (int k = 0; k < out.dims.z; ++k) {
        double sz = k * rz;
        for (int j = 0; j < out.dims.y; ++j) {
            double sy = j * ry;
            for (int i = 0; i < out.dims.x; ++i, ++o) {
                double sx = i * rx;
                if (interp == Interp::nearest) {
                    int ii = clampi(static_cast<int>(std::floor(sx + 0.5)), 0, nx - 1);
                    int jj = clampi(static_cast<int>(std::floor(sy + 0.5)), 0, ny - 1);
                    int kk = clampi(static_cast<int>(std::floor(sz + 0.5)), 0, nz - 1);
                    out.voxels[o] = v.at(ii, jj, kk);
                } else {
                    int x0 = static_cast<int>(std::floor(sx));
                    int y0 = static_cast<int>(std::floor(sy));
                    int z0 = static_cast<int>(std::floor(sz));
                    double fx = sx - x0, fy = sy - y0, fz = sz - z0;
                    int x0c = clampi(x0, 0, nx - 1), x1c = clampi(x0 + 1, 0, nx - 1);
                    int y0c = clampi(y0, 0, ny - 1), y1c = clampi(y0 + 1, 0, ny - 1);
                    int z0c = clampi(z0, 0, nz - 1), z1c = clampi(z0 + 1, 0, nz - 1);
                    double c00 = v.at(x0c, y0c, z0c) * (1 - fx) + v.at(x1c, y0c, z0c) * fx;
                    double c10 = v.at(x0c, y1c, z0c) * (1 - fx) + v.at(x1c, y1c, z0c) * fx;
                    double c01 = v.at(x0c, y0c, z1c) * (1 - fx) + v.at(x1c, y0c, z1c) * fx;
                    double c11 = v.at(x0c, y1c, z1c) * (1 - fx) + v.at(x1c, y1c, z1c) * fx;
                    double c0 = c00 * (1 - fy) + c10 * fy;
                    double c1 = c01 * (1 - fy) + c11 * fy;
                    out.voxels[o] = static_cast<float>(c0 * (1 - fz) + c1 * fz);
                }
            }
        }
    }
    return out;
}

Segmentation resample(const Segmentation& s, Vec3 target, Interp interp) {
    if (interp != Interp::nearest)
        throw InterpMismatch("segmentations must be resampled with nearest interpolation");
    validate(s);
    check_target(target);

    Segmentation out;
    out.dims = out_dims(s.dims, s.spacing_mm, target);
    out.spacing_mm = target;
    out.origin_mm = s.origin_mm;
    out.labels.resize(voxel_count(out.dims));

    const double rx = static_cast<double>(target.x) / s.spacing_mm.x;
    const double ry = static_cast<double>(target.y) / s.spacing_mm.y;
    const double rz = static_cast<double>(target.z) / s.spacing_mm.z;

    std::size_t o = 0;
    for (int k = 0; k < out.dims.z; ++k) {
        int kk = clampi(static_cast<int>(std::floor(k * rz + 0.5)), 0, s.dims.z - 1);
        for (int j = 0; j < out.dims.y; ++j) {
            int jj = clampi(static_cast<int>(std::floor(j * ry + 0.5)), 0, s.dims.y - 1);
            for (int i = 0; i < out.dims.x; ++i, ++o) {
                int ii = clampi(static_cast<int>(std::floor(i * rx + 0.5)), 0, s.dims.x - 1);
                out.labels[o] = s.at(ii, jj, kk);
            }
        }
    }
    return out;
}

Volume window_normalize(const Volume& v, float lo, float hi) {
    if (!(lo < hi)) throw DegenerateWindow("window lo must be < hi");
    validate(v);
    Volume out = v;
    const float scale = 2.f / (hi - lo);
    for (float& x : out.voxels) {
        float c = std::clamp(x, lo, hi);
        x = (c - lo) * scale - 1.f;
    }
    return out;
}

std::pair<Volume, std::optional<Segmentation>> preprocess_case(
    const Volume& ct, const std::optional<Segmentation>& seg, const PreprocessConfig& cfg) {
    if (seg && !same_geometry(ct, *seg))
        throw GeometryMismatch("segmentation geometry differs from CT");
    Volume v = resample(ct, cfg.target_spacing_mm, Interp::trilinear);
    v = window_normalize(v, cfg.hu_lo, cfg.hu_hi);
    std::optional<Segmentation> s;
    if (seg) s = resample(*seg, cfg.target_spacing_mm, Interp::nearest);
    return {std::move(v), std::move(s)};
}

} // namespace segforge
