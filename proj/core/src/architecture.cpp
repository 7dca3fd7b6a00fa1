#include "ctnet/architecture.hpp"

#include <stdexcept>

namespace ctnet {

ArchKind arch_kind_from_string(const std::string& s) {
    if (s == "squeezenet_plain") return ArchKind::SqueezenetPlain;
    if (s == "squeezenet_simple_bypass") return ArchKind::SqueezenetSimpleBypass;
    if (s == "proposed") return ArchKind::Proposed;
    throw UsageError("unknown architecture variant '" + s + "'");
}

std::string arch_kind_to_string(ArchKind k) {
    switch (k) {
        case ArchKind::SqueezenetPlain: return "squeezenet_plain";
        case ArchKind::SqueezenetSimpleBypass: return "squeezenet_simple_bypass";
        case ArchKind::Proposed: return "proposed";
    }
    return "?";
}

namespace {

int add_activation(NetworkGraph& g, const std::string& name, int input, bool custom) {
    return custom ? g.add_elu(name, input) : g.add_relu(name, input);
}

struct TrunkNodes {
    int fire3 = -1;
    int fire9 = -1;
};

// conv1 + pools + fire2..fire9 with the v1.0 pooling schedule. When bypass is
// set, identity skips are added around fire3/5/7/9: each module's input is
// added to its output (the fire4-5 pair sits across pool4, so that skip
// source is the pooled tensor).
TrunkNodes build_trunk(NetworkGraph& g, const ArchVariant& v, bool custom, bool bypass,
                       Rng& rng) {
    TrunkNodes t;
    const int input = g.add_input(v.in_channels, v.in_height, v.in_width);
    int x = g.add_conv("conv1", input, 96, 7, 2, 3, rng);
    x = add_activation(g, "conv1_act", x, custom);
    x = g.add_maxpool("pool1", x, 3, 2, 1);

    int skip = build_fire(g, "fire2", x, {16, 64, 64, custom}, rng);
    int f3 = build_fire(g, "fire3", skip, {16, 64, 64, custom}, rng);
    t.fire3 = bypass ? g.add_add("bypass3", f3, skip) : f3;

    x = build_fire(g, "fire4", t.fire3, {32, 128, 128, custom}, rng);
    skip = g.add_maxpool("pool4", x, 3, 2, 1);
    int f5 = build_fire(g, "fire5", skip, {32, 128, 128, custom}, rng);
    x = bypass ? g.add_add("bypass5", f5, skip) : f5;

    skip = build_fire(g, "fire6", x, {48, 192, 192, custom}, rng);
    int f7 = build_fire(g, "fire7", skip, {48, 192, 192, custom}, rng);
    x = bypass ? g.add_add("bypass7", f7, skip) : f7;

    x = build_fire(g, "fire8", x, {64, 256, 256, custom}, rng);
    skip = g.add_maxpool("pool8", x, 3, 2, 1);
    int f9 = build_fire(g, "fire9", skip, {64, 256, 256, custom}, rng);
    t.fire9 = bypass ? g.add_add("bypass9", f9, skip) : f9;
    return t;
}

void check_input(const ArchVariant& v) {
    if (v.in_channels < 1 || v.in_height < 32 || v.in_width < 32)
        throw ShapeError("architecture: implausible input spec " + std::to_string(v.in_channels) +
                         "x" + std::to_string(v.in_height) + "x" + std::to_string(v.in_width));
}

}  // namespace

int build_fire(NetworkGraph& g, const std::string& name, int input, const FireConfig& cfg,
               Rng& rng) {
    if (cfg.squeeze < 1 || cfg.expand1x1 < 1 || cfg.expand3x3 < 1)
        throw UsageError("fire '" + name + "': filter counts must be positive");
    int s = g.add_conv(name + ".squeeze", input, cfg.squeeze, 1, 1, 0, rng);
    if (cfg.custom) s = g.add_batchnorm(name + ".bn", s);
    s = add_activation(g, name + ".squeeze_act", s, cfg.custom);
    int e1 = g.add_conv(name + ".expand1x1", s, cfg.expand1x1, 1, 1, 0, rng);
    e1 = add_activation(g, name + ".expand1x1_act", e1, cfg.custom);
    int e3 = g.add_conv(name + ".expand3x3", s, cfg.expand3x3, 3, 1, 1, rng);
    e3 = add_activation(g, name + ".expand3x3_act", e3, cfg.custom);
    return g.add_concat(name + ".concat", {e1, e3});
}

NetworkGraph build_squeezenet(const ArchVariant& v, std::uint64_t seed) {
    if (v.kind == ArchKind::Proposed)
        throw UsageError("build_squeezenet: use build_proposed for the fusion network");
    check_input(v);
    NetworkGraph g;
    g.variant = arch_kind_to_string(v.kind);
    g.class_count = 2;
    g.head_style = HeadStyle::ConvHead;
    Rng rng(seed);

    const bool bypass = v.kind == ArchKind::SqueezenetSimpleBypass;
    const TrunkNodes t = build_trunk(g, v, v.custom_fire, bypass, rng);

    const int head = g.add_conv("conv10", t.fire9, g.class_count, 1, 1, 0, rng);
    g.feature_node = head;  // per-class maps pre-GAP; CAM reads channel c
    const int gap = g.add_global_avg_pool("gap", head);
    g.logits_node = gap;
    g.softmax_node = g.add_softmax("softmax", gap);
    return g;
}

NetworkGraph build_proposed(const ArchVariant& v, std::uint64_t seed) {
    check_input(v);
    NetworkGraph g;
    g.variant = arch_kind_to_string(ArchKind::Proposed);
    g.class_count = 2;
    g.head_style = HeadStyle::DenseHead;
    Rng rng(seed);

    // All-custom trunk, no bypass, truncated after fire9.
    const TrunkNodes t = build_trunk(g, v, /*custom=*/true, /*bypass=*/false, rng);

    const int up = g.add_conv_transpose("upsample", t.fire9, 64, 4, 4, 0, rng);
    const Shape up_shape = g.infer_shapes(1)[up];
    const Shape f3_shape = g.infer_shapes(1)[t.fire3];
    if (up_shape.h != f3_shape.h || up_shape.w != f3_shape.w)
        throw ShapeError("proposed: upsampled fire9 " + up_shape.str() +
                         " does not align with fire3 " + f3_shape.str() +
                         " (input extents must be multiples of 16)");

    const int cat1 = g.add_concat("skip_concat", {up, t.fire3});
    int fused = g.add_conv("fuse", cat1, 128, 1, 1, 0, rng);
    fused = g.add_elu("fuse_act", fused);
    const int stack = g.add_concat("feature_stack", {fused, up, t.fire3});
    g.feature_node = stack;
    const int gap = g.add_global_avg_pool("gap", stack);
    const int head = g.add_dense("head", gap, g.class_count, rng);
    g.logits_node = head;
    g.softmax_node = g.add_softmax("softmax", head);
    return g;
}

NetworkGraph build_network(const ArchVariant& v, std::uint64_t seed) {
    if (v.kind == ArchKind::Proposed) return build_proposed(v, seed);
    return build_squeezenet(v, seed);
}

std::int64_t count_params(const NetworkGraph& g) {
    return g.count_params();
}

}  // namespace ctnet
