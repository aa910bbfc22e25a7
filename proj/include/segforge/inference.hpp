#ifndef SEGFORGE_INFERENCE_HPP
#define SEGFORGE_INFERENCE_HPP

#include <functional>

#include "segforge/model.hpp"
#include "segforge/tensor.hpp"
#include "segforge/volume.hpp"

namespace segforge {

// Per-voxel class probability grid, class-major (class stride = nx*ny*nz).
struct ProbVolume {
    Index3 dims;
    Vec3 spacing_mm, origin_mm;
    int num_classes = 0;
    std::vector<double> probs;

    double at(int cls, std::size_t voxel) const {
        return probs[static_cast<std::size_t>(cls) * voxel_count(dims) + voxel];
    }
};

// Window placements at stride multiples, final window clamped flush to the
// boundary; every voxel is covered at least once. Volumes smaller than the
// window get a single window at the origin (the overhang is padded).
std::vector<Index3> window_origins(Index3 dims, Index3 window, Index3 stride);

// Maps a padded window (1, 1, w...) to per-class probabilities (1, K, w...).
using WindowPredictor = std::function<Tensor5(const Tensor5&)>;

struct SlidingResult {
    ProbVolume probs;
    std::vector<std::uint32_t> coverage; // windows covering each voxel
};

// Overlap fusion by arithmetic mean of probabilities. Window predictions may
// run in parallel; accumulation happens serially in window order, so the
// result does not depend on the worker count.
SlidingResult sliding_window_fuse(const Volume& v, Index3 window, Index3 stride, int num_classes,
                                  const WindowPredictor& predict, int workers = 1);

ProbVolume sliding_window_infer(const ModelParams& p, const Volume& v, Index3 window, Index3 stride,
                                int workers = 1);

// Maximal-probability class per voxel; ties go to the smallest class id.
Segmentation argmax_labels(const ProbVolume& pv);

} // namespace segforge

#endif
