#pragma once

#include <cstdint>
#include <string>

#include "ctnet/graph.hpp"

namespace ctnet {

// Fire block configuration: a 1x1 squeeze convolution feeding parallel 1x1
// and 3x3 expand convolutions whose outputs are depth-concatenated. The
// custom variant inserts BatchNorm after the squeeze and uses ELU everywhere.
struct FireConfig {
    int squeeze = 0;
    int expand1x1 = 0;
    int expand3x3 = 0;
    bool custom = false;

    int out_channels() const { return expand1x1 + expand3x3; }
};

enum class ArchKind { SqueezenetPlain, SqueezenetSimpleBypass, Proposed };

struct ArchVariant {
    ArchKind kind = ArchKind::Proposed;
    bool custom_fire = true;  // forced true for Proposed
    int in_channels = 3;
    int in_height = 224;
    int in_width = 224;
};

ArchKind arch_kind_from_string(const std::string& s);
std::string arch_kind_to_string(ArchKind k);

// Appends one fire block to the graph; returns the concat node id.
int build_fire(NetworkGraph& g, const std::string& name, int input, const FireConfig& cfg,
               Rng& rng);

// Reference trunk for a 3x224x224 input (conv1 pad 3, pools pad 1):
//   conv1 7x7/2 (96)        -> 96  @112x112
//   pool1 3/2               -> 96  @56x56
//   fire2 (16,64,64)        -> 128 @56x56
//   fire3 (16,64,64)        -> 128 @56x56
//   fire4 (32,128,128)      -> 256 @56x56
//   pool4 3/2               -> 256 @28x28
//   fire5 (32,128,128)      -> 256 @28x28
//   fire6 (48,192,192)      -> 384 @28x28
//   fire7 (48,192,192)      -> 384 @28x28
//   fire8 (64,256,256)      -> 512 @28x28
//   pool8 3/2               -> 512 @14x14
//   fire9 (64,256,256)      -> 512 @14x14
// Baselines append: conv10 1x1 -> classes, GAP, softmax. Simple bypass adds
// identity skips around fire3, fire5, fire7 and fire9.
NetworkGraph build_squeezenet(const ArchVariant& v, std::uint64_t seed);

// Fusion network: all-custom trunk truncated after fire9, then
//   up    = conv_transpose(fire9, 512 -> 64, k4, s4)   -> 64  @56x56
//   cat1  = concat(up, fire3)                          -> 192 @56x56
//   fused = elu(conv 1x1, 128 filters)                 -> 128 @56x56
//   stack = concat(fused, up, fire3)                   -> 320 @56x56
//   GAP -> dense(2) -> softmax; the dense rows are the CAM weights.
NetworkGraph build_proposed(const ArchVariant& v, std::uint64_t seed);

// Dispatches on v.kind.
NetworkGraph build_network(const ArchVariant& v, std::uint64_t seed);

std::int64_t count_params(const NetworkGraph& g);

}  // namespace ctnet
