#ifndef SEGFORGE_NN_OPS_HPP
#define SEGFORGE_NN_OPS_HPP

#include <cstdint>
#include <span>

#include "segforge/tensor.hpp"

namespace segforge {

// Direct 3D convolution, zero "same" padding. Kernel layout is
// w[(((co*cin + ci)*k + kz)*k + ky)*k + kx], bias one per output channel.
// stride 1 keeps the spatial dims; stride 2 requires even dims and halves them.
Tensor5 conv3d_forward(const Tensor5& x, std::span<const double> w, std::span<const double> bias,
                       int cout, int k, int stride);
// Accumulates into gw/gb; gx is overwritten.
void conv3d_backward(const Tensor5& x, std::span<const double> w, const Tensor5& gy,
                     int cout, int k, int stride,
                     Tensor5& gx, std::span<double> gw, std::span<double> gb);

constexpr double kInormEps = 1e-5;

// Per (batch, channel) normalization over spatial voxels, then scale/shift.
// Caches mean and 1/sqrt(var+eps) per plane for the backward pass.
struct InormCache {
    std::vector<double> mean, istd; // one entry per (b, c) plane
};
Tensor5 inorm_forward(const Tensor5& x, std::span<const double> gamma, std::span<const double> beta,
                      InormCache& cache);
void inorm_backward(const Tensor5& x, std::span<const double> gamma, const InormCache& cache,
                    const Tensor5& gy, Tensor5& gx, std::span<double> ggamma, std::span<double> gbeta);

Tensor5 relu_forward(const Tensor5& x);
void relu_backward(const Tensor5& x, const Tensor5& gy, Tensor5& gx);

// 2x2x2 max pooling, stride 2; requires even spatial dims. Ties go to the
// first voxel in scan order so the backward scatter is deterministic.
Tensor5 maxpool2_forward(const Tensor5& x, std::vector<std::uint32_t>& argmax);
void maxpool2_backward(const Tensor5& x, const std::vector<std::uint32_t>& argmax, const Tensor5& gy,
                       Tensor5& gx);

// Nearest-neighbor 2x upsampling; backward sums gradients over each 2x2x2 block.
Tensor5 upsample2_forward(const Tensor5& x);
void upsample2_backward(const Tensor5& gy, Tensor5& gx);

Tensor5 concat_forward(const Tensor5& a, const Tensor5& b);
void concat_backward(const Tensor5& gy, Tensor5& ga, Tensor5& gb);

// Channel softmax per voxel (numerically stable).
Tensor5 softmax_channels(const Tensor5& logits);

// Mean voxel cross-entropy plus (1 - mean soft-Dice over foreground classes),
// equally weighted. Targets are organ ids, x-fastest, length b * nx*ny*nz.
// Returns the gradient with respect to the logits.
struct LossTerms {
    double total = 0, cross_entropy = 0, dice = 0;
};
LossTerms ce_dice_loss(const Tensor5& logits, std::span<const std::uint8_t> target, Tensor5& glogits);

constexpr double kDiceSmooth = 1.0;

} // namespace segforge

#endif
