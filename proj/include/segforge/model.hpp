#ifndef SEGFORGE_MODEL_HPP
#define SEGFORGE_MODEL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "segforge/rng.hpp"
#include "segforge/tensor.hpp"

namespace segforge {

enum class Arch { unet, densevnet_lite };

std::string arch_name(Arch a);
Arch arch_from_name(const std::string& s);

struct ModelConfig {
    Arch arch = Arch::unet;
    int in_channels = 1;
    int num_classes = 23; // taxonomy size + background
    // unet
    int levels = 3;
    int base_channels = 8;
    // densevnet_lite
    int growth = 4;
    int block_depth = 2;
    std::uint64_t seed = 1;

    bool operator==(const ModelConfig&) const = default;
};

// Flat parameter layout. Segments are emitted in graph construction order, so
// the layout (and the parameter count) is a pure function of the config.
struct ParamSeg {
    enum class Kind { conv_w, conv_b, inorm_gamma, inorm_beta };
    std::string name;
    Kind kind;
    std::vector<int> shape;
    std::size_t offset = 0, count = 0;
};

struct Node {
    enum class Op { input, conv, inorm, relu, maxpool2, upsample2, concat };
    Op op;
    int in0 = -1, in1 = -1;
    int cin = 0, cout = 0, k = 3, stride = 1;
    int wseg = -1, bseg = -1; // indices into GraphDef::segs
};

struct GraphDef {
    std::vector<Node> nodes;
    std::vector<ParamSeg> segs;
    int output = -1;
    std::size_t param_count = 0;
    int pool_levels = 0; // spatial dims must divide 2^pool_levels

    static GraphDef build(const ModelConfig& cfg);
};

// Parameters are stored float32, exactly as checkpointed; all math runs in
// double. Adam moment slots live here but never enter the checkpoint.
struct ModelParams {
    ModelConfig cfg;
    std::vector<float> values;
    std::vector<double> adam_m, adam_v;
    std::int64_t adam_steps = 0;
};

ModelParams init_model(const ModelConfig& cfg, Rng& rng);
inline ModelParams init_model(const ModelConfig& cfg) {
    Rng rng(cfg.seed);
    return init_model(cfg, rng);
}

// Per-class logits with the input's spatial dims.
Tensor5 forward(const ModelParams& p, const Tensor5& x);

struct LossGrad {
    double loss = 0, cross_entropy = 0, dice = 0;
    std::vector<double> grads;
};
LossGrad loss_and_grad(const ModelParams& p, const Tensor5& x, std::span<const std::uint8_t> target);

// Adam with beta1=0.9, beta2=0.999, eps=1e-8; bias correction from
// step_index (1-based). Updates moments in place.
void adam_step(ModelParams& p, std::span<const double> grads, double lr, std::int64_t step_index);

// Checkpoint: tag + canonical config echo + layout descriptor + little-endian
// float32 payload. Byte-exact round trip.
void save_checkpoint(const ModelParams& p, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

std::string param_hash(const ModelParams& p); // fnv1a-64 over payload, hex

std::string to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

} // namespace segforge

#endif
