#include "segforge/inference.hpp"

#include <algorithm>

#include "segforge/nn_ops.hpp"
#include "segforge/parallel.hpp"
#include "segforge/sampling.hpp"

namespace segforge {

namespace {

std::vector<int> axis_origins(int dim, int window, int stride) {
    std::vector<int> out;
    if (window >= dim) return {0};
    for (int o = 0; o + window < dim; o += stride) out.push_back(o);
    out.push_back(dim - window); // flush to the boundary
    return out;
}

} // namespace

std::vector<Index3> window_origins(Index3 dims, Index3 window, Index3 stride) {
    if (window.x < 1 || window.y < 1 || window.z < 1) throw InvalidSpec("window must be >= 1 per axis");
    if (stride.x < 1 || stride.y < 1 || stride.z < 1 || stride.x > window.x || stride.y > window.y ||
        stride.z > window.z)
        throw InvalidSpec("stride must lie in [1, window] per axis");
    auto xs = axis_origins(dims.x, window.x, stride.x);
    auto ys = axis_origins(dims.y, window.y, stride.y);
    auto zs = axis_origins(dims.z, window.z, stride.z);
    std::vector<Index3> out;
    out.reserve(xs.size() * ys.size() * zs.size());
    for (int z : zs)
        for (int y : ys)
            for (int x : xs) out.push_back({x, y, z});
    return out;
}

SlidingResult sliding_window_fuse(const Volume& v, Index3 window, Index3 stride, int num_classes,
                                  const WindowPredictor& predict, int workers) {
    validate(v);
    if (num_classes < 2) throw InvalidSpec("num_classes must be >= 2");
    auto origins = window_origins(v.dims, window, stride);

    // dummy all-background segmentation so patch extraction handles padding
    Segmentation zero;
    zero.dims = v.dims;
    zero.spacing_mm = v.spacing_mm;
    zero.origin_mm = v.origin_mm;
    zero.labels.assign(voxel_count(v.dims), 0);

    std::vector<Tensor5> preds(origins.size());
    parallel_for(origins.size(), workers, [&](std::size_t w) {
        Patch patch = extract_patch(v, zero, origins[w], window);
        Tensor5 x(1, 1, window.x, window.y, window.z);
        for (std::size_t i = 0; i < patch.values.size(); ++i) x.v[i] = patch.values[i];
        Tensor5 p = predict(x);
        if (p.c != num_classes || p.nx != window.x || p.ny != window.y || p.nz != window.z)
            throw ShapeMismatch("window predictor returned wrong shape");
        preds[w] = std::move(p);
    });

    SlidingResult res;
    res.probs.dims = v.dims;
    res.probs.spacing_mm = v.spacing_mm;
    res.probs.origin_mm = v.origin_mm;
    res.probs.num_classes = num_classes;
    const std::size_t nvox = voxel_count(v.dims);
    res.probs.probs.assign(nvox * static_cast<std::size_t>(num_classes), 0.0);
    res.coverage.assign(nvox, 0);

    // serial accumulation in window order keeps fusion order-independent of
    // the parallel schedule above
    for (std::size_t w = 0; w < origins.size(); ++w) {
        const Index3 o = origins[w];
        const Tensor5& p = preds[w];
        int x0 = std::max(0, -o.x), x1 = std::min(window.x, v.dims.x - o.x);
        int y0 = std::max(0, -o.y), y1 = std::min(window.y, v.dims.y - o.y);
        int z0 = std::max(0, -o.z), z1 = std::min(window.z, v.dims.z - o.z);
        for (int z = z0; z < z1; ++z) {
            for (int y = y0; y < y1; ++y) {
                std::size_t dst = voxel_index(v.dims, o.x + x0, o.y + y, o.z + z);
                std::size_t src = voxel_index(window, x0, y, z);
                for (int c = 0; c < num_classes; ++c) {
                    const double* pc = p.plane(0, c) + src;
                    double* out = res.probs.probs.data() + static_cast<std::size_t>(c) * nvox + dst;
                    for (int x = 0; x < x1 - x0; ++x) out[x] += pc[x];
                }
                std::uint32_t* cov = res.coverage.data() + dst;
                for (int x = 0; x < x1 - x0; ++x) cov[x] += 1;
            }
        }
        preds[w] = Tensor5(); // free
    }

    for (std::size_t i = 0; i < nvox; ++i) {
        double inv = 1.0 / static_cast<double>(res.coverage[i]);
        for (int c = 0; c < num_classes; ++c)
            res.probs.probs[static_cast<std::size_t>(c) * nvox + i] *= inv;
    }
    return res;
}

ProbVolume sliding_window_infer(const ModelParams& p, const Volume& v, Index3 window, Index3 stride,
                                int workers) {
    WindowPredictor predict = [&p](const Tensor5& x) { return softmax_channels(forward(p, x)); };
    return sliding_window_fuse(v, window, stride, p.cfg.num_classes, predict, workers).probs;
}

Segmentation argmax_labels(const ProbVolume& pv) {
    Segmentation s;
    s.dims = pv.dims;
    s.spacing_mm = pv.spacing_mm;
    s.origin_mm = pv.origin_mm;
    const std::size_t nvox = voxel_count(pv.dims);
    s.labels.assign(nvox, 0);
    for (std::size_t i = 0; i < nvox; ++i) {
        int best = 0;
        double bp = pv.probs[i];
        for (int c = 1; c < pv.num_classes; ++c) {
            double p = pv.probs[static_cast<std::size_t>(c) * nvox + i];
            if (p > bp) { // strict: ties keep the smaller id
                bp = p;
                best = c;
            }
        }
        s.labels[i] = static_cast<std::uint8_t>(best);
    }
    return s;
}

} // namespace segforge
