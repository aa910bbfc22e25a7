#include "segforge/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "segforge/nn_ops.hpp"

namespace segforge {

using nlohmann::json;

std::string arch_name(Arch a) { return a == Arch::unet ? "unet" : "densevnet_lite"; }

Arch arch_from_name(const std::string& s) {
    if (s == "unet") return Arch::unet;
    if (s == "densevnet_lite") return Arch::densevnet_lite;
    throw InvalidConfig("unknown architecture '" + s + "'");
}

namespace {

class GraphBuilder {
public:
    explicit GraphBuilder(GraphDef& g) : g_(g) {}

    int input(int channels) {
        Node n;
        n.op = Node::Op::input;
        n.cout = channels;
        return push(n);
    }

    int conv(int in, int cout, int k, int stride, const std::string& name) {
        Node n;
        n.op = Node::Op::conv;
        n.in0 = in;
        n.cin = g_.nodes[static_cast<std::size_t>(in)].cout;
        n.cout = cout;
        n.k = k;
        n.stride = stride;
        n.wseg = add_seg(name + ".w", ParamSeg::Kind::conv_w, {cout, n.cin, k, k, k});
        n.bseg = add_seg(name + ".b", ParamSeg::Kind::conv_b, {cout});
        return push(n);
    }

    int inorm(int in, const std::string& name) {
        Node n;
        n.op = Node::Op::inorm;
        n.in0 = in;
        n.cin = n.cout = g_.nodes[static_cast<std::size_t>(in)].cout;
        n.wseg = add_seg(name + ".gamma", ParamSeg::Kind::inorm_gamma, {n.cout});
        n.bseg = add_seg(name + ".beta", ParamSeg::Kind::inorm_beta, {n.cout});
        return push(n);
    }

    int relu(int in) {
        Node n;
        n.op = Node::Op::relu;
        n.in0 = in;
        n.cin = n.cout = g_.nodes[static_cast<std::size_t>(in)].cout;
        return push(n);
    }

    int maxpool2(int in) {
        Node n;
        n.op = Node::Op::maxpool2;
        n.in0 = in;
        n.cin = n.cout = g_.nodes[static_cast<std::size_t>(in)].cout;
        return push(n);
    }

    int upsample2(int in) {
        Node n;
        n.op = Node::Op::upsample2;
        n.in0 = in;
        n.cin = n.cout = g_.nodes[static_cast<std::size_t>(in)].cout;
        return push(n);
    }

    int concat(int a, int b) {
        Node n;
        n.op = Node::Op::concat;
        n.in0 = a;
        n.in1 = b;
        n.cout = g_.nodes[static_cast<std::size_t>(a)].cout + g_.nodes[static_cast<std::size_t>(b)].cout;
        return push(n);
    }

    // conv3 + instance norm + relu
    int cir(int in, int cout, const std::string& name, int stride = 1) {
        int c = conv(in, cout, 3, stride, name);
        int i = inorm(c, name + ".in");
        return relu(i);
    }

private:
    int push(const Node& n) {
        g_.nodes.push_back(n);
        return static_cast<int>(g_.nodes.size()) - 1;
    }

    int add_seg(const std::string& name, ParamSeg::Kind kind, std::vector<int> shape) {
        ParamSeg s;
        s.name = name;
        s.kind = kind;
        s.shape = std::move(shape);
        s.count = 1;
        for (int d : s.shape) s.count *= static_cast<std::size_t>(d);
        s.offset = g_.param_count;
        g_.param_count += s.count;
        g_.segs.push_back(std::move(s));
        return static_cast<int>(g_.segs.size()) - 1;
    }

    GraphDef& g_;
};

void check_config(const ModelConfig& cfg) {
    if (cfg.in_channels < 1) throw InvalidConfig("in_channels must be >= 1");
    if (cfg.num_classes < 2) throw InvalidConfig("num_classes must be >= 2");
    if (cfg.arch == Arch::unet) {
        if (cfg.levels < 1) throw InvalidConfig("unet levels must be >= 1");
        if (cfg.base_channels < 1) throw InvalidConfig("unet base_channels must be >= 1");
    } else {
        if (cfg.growth < 1) throw InvalidConfig("growth must be >= 1");
        if (cfg.block_depth < 1) throw InvalidConfig("block_depth must be >= 1");
    }
}

GraphDef build_unet(const ModelConfig& cfg) {
    GraphDef g;
    GraphBuilder b(g);
    int cur = b.input(cfg.in_channels);

    std::vector<int> skips;
    for (int l = 0; l < cfg.levels; ++l) {
        int ch = cfg.base_channels << l;
        std::string tag = "enc" + std::to_string(l);
        cur = b.cir(cur, ch, tag + ".conv1");
        cur = b.cir(cur, ch, tag + ".conv2");
        skips.push_back(cur);
        if (l + 1 < cfg.levels) cur = b.maxpool2(cur);
    }
    for (int l = cfg.levels - 2; l >= 0; --l) {
        int ch = cfg.base_channels << l;
        std::string tag = "dec" + std::to_string(l);
        cur = b.upsample2(cur);
        cur = b.cir(cur, ch, tag + ".up");
        cur = b.concat(skips[static_cast<std::size_t>(l)], cur);
        cur = b.cir(cur, ch, tag + ".conv1");
        cur = b.cir(cur, ch, tag + ".conv2");
    }
    g.output = b.conv(cur, cfg.num_classes, 1, 1, "head");
    g.pool_levels = cfg.levels - 1;
    return g;
}

GraphDef build_densevnet_lite(const ModelConfig& cfg) {
    GraphDef g;
    GraphBuilder b(g);
    int cur = b.input(cfg.in_channels);

    auto dense_block = [&](int in, const std::string& tag) {
        int c = in;
        for (int j = 0; j < cfg.block_depth; ++j) {
            int y = b.cir(c, cfg.growth, tag + ".l" + std::to_string(j));
            c = b.concat(c, y);
        }
        return c;
    };

    cur = b.cir(cur, 2 * cfg.growth, "stem");
    int db0 = dense_block(cur, "db0");
    int c0 = g.nodes[static_cast<std::size_t>(db0)].cout;
    int down1 = b.cir(db0, c0, "down1", /*stride=*/2);
    int db1 = dense_block(down1, "db1");
    int c1 = g.nodes[static_cast<std::size_t>(db1)].cout;
    int down2 = b.cir(db1, c1, "down2", /*stride=*/2);
    int db2 = dense_block(down2, "db2");

    int u1 = b.upsample2(db1);
    int u2 = b.upsample2(b.upsample2(db2));
    int cat = b.concat(db0, b.concat(u1, u2));
    g.output = b.conv(cat, cfg.num_classes, 1, 1, "head");
    g.pool_levels = 2;
    return g;
}

std::span<const double> seg_span(const std::vector<double>& pd, const GraphDef& g, int seg) {
    const ParamSeg& s = g.segs[static_cast<std::size_t>(seg)];
    return {pd.data() + s.offset, s.count};
}

std::span<double> seg_span(std::vector<double>& pd, const GraphDef& g, int seg) {
    const ParamSeg& s = g.segs[static_cast<std::size_t>(seg)];
    return {pd.data() + s.offset, s.count};
}

struct Tape {
    std::vector<Tensor5> acts;
    std::vector<InormCache> inorms;
    std::vector<std::vector<std::uint32_t>> argmax;
};

void check_input(const GraphDef& g, const ModelConfig& cfg, const Tensor5& x) {
    if (x.c != cfg.in_channels)
        throw ShapeMismatch("input has " + std::to_string(x.c) + " channels, model expects " +
                            std::to_string(cfg.in_channels));
    int div = 1 << g.pool_levels;
    if (x.nx % div || x.ny % div || x.nz % div)
        throw ShapeMismatch("spatial dims must be divisible by " + std::to_string(div) + " for " +
                            arch_name(cfg.arch));
    if (x.b < 1 || x.nx < div || x.ny < div || x.nz < div)
        throw ShapeMismatch("input too small for the network depth");
}

void run_forward(const GraphDef& g, const std::vector<double>& pd, const Tensor5& x, Tape& tape) {
    tape.acts.resize(g.nodes.size());
    tape.inorms.resize(g.nodes.size());
    tape.argmax.resize(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const Node& n = g.nodes[i];
        const Tensor5& a = n.in0 >= 0 ? tape.acts[static_cast<std::size_t>(n.in0)] : x;
        switch (n.op) {
        case Node::Op::input:
            tape.acts[i] = x;
            break;
        case Node::Op::conv:
            tape.acts[i] = conv3d_forward(a, seg_span(pd, g, n.wseg), seg_span(pd, g, n.bseg), n.cout,
                                          n.k, n.stride);
            break;
        case Node::Op::inorm:
            tape.acts[i] = inorm_forward(a, seg_span(pd, g, n.wseg), seg_span(pd, g, n.bseg), tape.inorms[i]);
            break;
        case Node::Op::relu:
            tape.acts[i] = relu_forward(a);
            break;
        case Node::Op::maxpool2:
            tape.acts[i] = maxpool2_forward(a, tape.argmax[i]);
            break;
        case Node::Op::upsample2:
            tape.acts[i] = upsample2_forward(a);
            break;
        case Node::Op::concat:
            tape.acts[i] = concat_forward(a, tape.acts[static_cast<std::size_t>(n.in1)]);
            break;
        }
    }
}

void run_backward(const GraphDef& g, const std::vector<double>& pd, const Tape& tape,
                  const Tensor5& gout, std::vector<double>& gparams) {
    std::vector<Tensor5> grad(g.nodes.size());
    auto add_grad = [&](int node, Tensor5&& t) {
        Tensor5& dst = grad[static_cast<std::size_t>(node)];
        if (dst.size() == 0) {
            dst = std::move(t);
        } else {
            for (std::size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += t.v[i];
        }
    };
    grad[static_cast<std::size_t>(g.output)] = gout;

    for (std::size_t ri = g.nodes.size(); ri-- > 0;) {
        const Node& n = g.nodes[ri];
        Tensor5& gy = grad[ri];
        if (gy.size() == 0 || n.op == Node::Op::input) continue;
        const Tensor5& a = tape.acts[static_cast<std::size_t>(n.in0)];
        switch (n.op) {
        case Node::Op::conv: {
            Tensor5 gx;
            conv3d_backward(a, seg_span(pd, g, n.wseg), gy, n.cout, n.k, n.stride, gx,
                            seg_span(gparams, g, n.wseg), seg_span(gparams, g, n.bseg));
            add_grad(n.in0, std::move(gx));
            break;
        }
        case Node::Op::inorm: {
            Tensor5 gx;
            inorm_backward(a, seg_span(pd, g, n.wseg), tape.inorms[ri], gy, gx,
                           seg_span(gparams, g, n.wseg), seg_span(gparams, g, n.bseg));
            add_grad(n.in0, std::move(gx));
            break;
        }
        case Node::Op::relu: {
            Tensor5 gx;
            relu_backward(a, gy, gx);
            add_grad(n.in0, std::move(gx));
            break;
        }
        case Node::Op::maxpool2: {
            Tensor5 gx;
            maxpool2_backward(a, tape.argmax[ri], gy, gx);
            add_grad(n.in0, std::move(gx));
            break;
        }
        case Node::Op::upsample2: {
            Tensor5 gx;
            upsample2_backward(gy, gx);
            add_grad(n.in0, std::move(gx));
            break;
        }
        case Node::Op::concat: {
            const Tensor5& b = tape.acts[static_cast<std::size_t>(n.in1)];
            Tensor5 ga = zeros_like(a), gb = zeros_like(b);
            concat_backward(gy, ga, gb);
            add_grad(n.in0, std::move(ga));
            add_grad(n.in1, std::move(gb));
            break;
        }
        default:
            break;
        }
        grad[ri] = Tensor5(); // free as we go
    }
}

std::vector<double> to_double(const std::vector<float>& v) {
    return std::vector<double>(v.begin(), v.end());
}

constexpr char kCkptMagic[4] = {'S', 'F', 'C', 'K'};
constexpr std::uint32_t kCkptVersion = 1;

std::string layout_json(const GraphDef& g) {
    json j = json::array();
    for (const auto& s : g.segs) {
        j.push_back({{"name", s.name},
                     {"kind", static_cast<int>(s.kind)},
                     {"shape", s.shape},
                     {"offset", s.offset},
                     {"count", s.count}});
    }
    return j.dump();
}

} // namespace

GraphDef GraphDef::build(const ModelConfig& cfg) {
    check_config(cfg);
    return cfg.arch == Arch::unet ? build_unet(cfg) : build_densevnet_lite(cfg);
}

ModelParams init_model(const ModelConfig& cfg, Rng& rng) {
    GraphDef g = GraphDef::build(cfg);
    ModelParams p;
    p.cfg = cfg;
    p.values.assign(g.param_count, 0.f);
    for (const auto& s : g.segs) {
        switch (s.kind) {
        case ParamSeg::Kind::conv_w: {
            // fan-in scaled uniform
            int fan_in = s.shape[1] * s.shape[2] * s.shape[3] * s.shape[4];
            double bound = std::sqrt(1.0 / fan_in);
            for (std::size_t i = 0; i < s.count; ++i)
                p.values[s.offset + i] = static_cast<float>(rng.uniform(-bound, bound));
            break;
        }
        case ParamSeg::Kind::inorm_gamma:
            for (std::size_t i = 0; i < s.count; ++i) p.values[s.offset + i] = 1.f;
            break;
        case ParamSeg::Kind::conv_b:
        case ParamSeg::Kind::inorm_beta:
            break; // zero
        }
    }
    p.adam_m.assign(g.param_count, 0.0);
    p.adam_v.assign(g.param_count, 0.0);
    return p;
}

Tensor5 forward(const ModelParams& p, const Tensor5& x) {
    GraphDef g = GraphDef::build(p.cfg);
    check_input(g, p.cfg, x);
    if (p.values.size() != g.param_count) throw LengthMismatch("parameter vector does not match config");
    std::vector<double> pd = to_double(p.values);
    Tape tape;
    run_forward(g, pd, x, tape);
    return std::move(tape.acts[static_cast<std::size_t>(g.output)]);
}

LossGrad loss_and_grad(const ModelParams& p, const Tensor5& x, std::span<const std::uint8_t> target) {
    GraphDef g = GraphDef::build(p.cfg);
    check_input(g, p.cfg, x);
    if (p.values.size() != g.param_count) throw LengthMismatch("parameter vector does not match config");
    std::vector<double> pd = to_double(p.values);
    Tape tape;
    run_forward(g, pd, x, tape);
    const Tensor5& logits = tape.acts[static_cast<std::size_t>(g.output)];

    Tensor5 glogits;
    LossTerms terms = ce_dice_loss(logits, target, glogits);

    LossGrad out;
    out.loss = terms.total;
    out.cross_entropy = terms.cross_entropy;
    out.dice = terms.dice;
    out.grads.assign(g.param_count, 0.0);
    run_backward(g, pd, tape, glogits, out.grads);
    return out;
}

void adam_step(ModelParams& p, std::span<const double> grads, double lr, std::int64_t step_index) {
    if (grads.size() != p.values.size()) throw LengthMismatch("gradient length does not match parameters");
    if (step_index < 1) throw InvalidConfig("Adam step index is 1-based");
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_index));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_index));
    for (std::size_t i = 0; i < grads.size(); ++i) {
        double gv = grads[i];
        p.adam_m[i] = b1 * p.adam_m[i] + (1 - b1) * gv;
        p.adam_v[i] = b2 * p.adam_v[i] + (1 - b2) * gv * gv;
        double mhat = p.adam_m[i] / c1;
        double vhat = p.adam_v[i] / c2;
        p.values[i] = static_cast<float>(static_cast<double>(p.values[i]) - lr * mhat / (std::sqrt(vhat) + eps));
    }
    p.adam_steps = step_index;
}

void save_checkpoint(const ModelParams& p, const std::string& path) {
    GraphDef g = GraphDef::build(p.cfg);
    if (p.values.size() != g.param_count) throw LengthMismatch("parameter vector does not match config");
    std::string cfg_json = to_json(p.cfg);
    std::string layout = layout_json(g);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    auto write_u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
    f.write(kCkptMagic, 4);
    write_u32(kCkptVersion);
    write_u32(static_cast<std::uint32_t>(cfg_json.size()));
    f.write(cfg_json.data(), static_cast<std::streamsize>(cfg_json.size()));
    write_u32(static_cast<std::uint32_t>(layout.size()));
    f.write(layout.data(), static_cast<std::streamsize>(layout.size()));
    std::uint64_t count = p.values.size();
    f.write(reinterpret_cast<const char*>(&count), 8);
    f.write(reinterpret_cast<const char*>(p.values.data()),
            static_cast<std::streamsize>(p.values.size() * 4));
    if (!f) throw IoError("short write to " + path);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (f.gcount() != 4 || std::memcmp(magic, kCkptMagic, 4) != 0)
        throw FormatVersionMismatch(path + ": not a checkpoint file");
    auto read_u32 = [&]() {
        std::uint32_t v = 0;
        f.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    if (read_u32() != kCkptVersion) throw FormatVersionMismatch(path + ": checkpoint version mismatch");

    std::uint32_t cfg_len = read_u32();
    std::string cfg_json(cfg_len, '\0');
    f.read(cfg_json.data(), cfg_len);
    ModelConfig cfg = model_config_from_json(cfg_json);

    std::uint32_t layout_len = read_u32();
    std::string layout(layout_len, '\0');
    f.read(layout.data(), layout_len);

    GraphDef g = GraphDef::build(cfg);
    if (layout != layout_json(g))
        throw FormatVersionMismatch(path + ": layout descriptor does not match config");

    std::uint64_t count = 0;
    f.read(reinterpret_cast<char*>(&count), 8);
    if (count != g.param_count) throw FormatVersionMismatch(path + ": parameter count mismatch");

    ModelParams p;
    p.cfg = cfg;
    p.values.resize(count);
    f.read(reinterpret_cast<char*>(p.values.data()), static_cast<std::streamsize>(count * 4));
    if (f.gcount() != static_cast<std::streamsize>(count * 4))
        throw IoError(path + ": truncated parameter payload");
    p.adam_m.assign(count, 0.0);
    p.adam_v.assign(count, 0.0);
    return p;
}

std::string param_hash(const ModelParams& p) {
    std::uint64_t h = 1469598103934665603ull;
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(p.values.data());
    for (std::size_t i = 0; i < p.values.size() * 4; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string to_json(const ModelConfig& cfg) {
    json j;
    j["arch"] = arch_name(cfg.arch);
    j["in_channels"] = cfg.in_channels;
    j["num_classes"] = cfg.num_classes;
    j["levels"] = cfg.levels;
    j["base_channels"] = cfg.base_channels;
    j["growth"] = cfg.growth;
    j["block_depth"] = cfg.block_depth;
    j["seed"] = cfg.seed;
    return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
    json j = json::parse(text);
    ModelConfig cfg;
    cfg.arch = arch_from_name(j.value("arch", std::string("unet")));
    cfg.in_channels = j.value("in_channels", 1);
    cfg.num_classes = j.value("num_classes", 23);
    cfg.levels = j.value("levels", 3);
    cfg.base_channels = j.value("base_channels", 8);
    cfg.growth = j.value("growth", 4);
    cfg.block_depth = j.value("block_depth", 2);
    cfg.seed = j.value("seed", std::uint64_t{1});
    return cfg;
}

} // namespace segforge
