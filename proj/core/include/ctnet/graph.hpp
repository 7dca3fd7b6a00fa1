#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctnet/ops.hpp"
#include "ctnet/rng.hpp"
#include "ctnet/tensor.hpp"

namespace ctnet {

enum class OpKind {
    Input,
    Conv,
    ConvTranspose,
    BatchNorm,
    Relu,
    Elu,
    MaxPool,
    Concat,
    Add,
    GlobalAvgPool,
    Dense,
    Softmax,
};

const char* op_kind_name(OpKind k);

// Named parameter tensor. Running statistics are stored here too but flagged
// non-trainable so the optimizer and count_params skip them.
struct Param {
    std::string name;
    Tensor value;
    bool trainable = true;
};

struct Node {
    OpKind kind = OpKind::Input;
    std::string name;
    std::vector<int> inputs;
    // Conv / pool configuration.
    int stride = 1;
    int padding = 0;
    int window = 0;
    float alpha = 1.0f;  // elu
    float bn_eps = 1e-5f;
    float bn_momentum = 0.9f;
    // Indices into the parameter store, -1 when absent.
    int weight = -1;
    int bias = -1;
    int gamma = -1;
    int beta = -1;
    int run_mean = -1;
    int run_var = -1;
};

// Classification head flavor; decides where CAM weights come from.
enum class HeadStyle { DenseHead, ConvHead };

// Per-batch caches retained by a training forward pass for the backward pass.
// Reusable across batches.
struct Tape {
    std::vector<Tensor> act;
    std::vector<BatchNormCache> bn;
    std::vector<std::vector<std::int32_t>> pool_argmax;
    int batch = 0;
};

// Directed acyclic layer graph. Nodes are stored in topological order by
// construction; parameters live in a flat named store.
class NetworkGraph {
public:
    // --- builder API (used by the architecture module) ---
    int add_input(int channels, int height, int width);
    int add_conv(const std::string& name, int input, int out_channels, int kernel, int stride,
                 int padding, Rng& rng);
    int add_conv_transpose(const std::string& name, int input, int out_channels, int kernel,
                           int stride, int padding, Rng& rng);
    int add_batchnorm(const std::string& name, int input, float eps = 1e-5f,
                      float momentum = 0.9f);
    int add_relu(const std::string& name, int input);
    int add_elu(const std::string& name, int input, float alpha = 1.0f);
    int add_maxpool(const std::string& name, int input, int window, int stride, int padding = 0);
    int add_concat(const std::string& name, const std::vector<int>& inputs);
    int add_add(const std::string& name, int a, int b);
    int add_global_avg_pool(const std::string& name, int input);
    int add_dense(const std::string& name, int input, int out_dim, Rng& rng);
    int add_softmax(const std::string& name, int input);

    // --- introspection ---
    const std::vector<Node>& nodes() const { return nodes_; }
    int find_node(const std::string& name) const;  // -1 when absent
    Shape input_spec() const { return input_spec_; }
    // Propagates shapes for the given batch size without touching data.
    std::vector<Shape> infer_shapes(int batch) const;
    Shape node_shape(const std::string& name, int batch = 1) const;

    std::vector<Param>& params() { return params_; }
    const std::vector<Param>& params() const { return params_; }
    Param* find_param(const std::string& name);
    const Param* find_param(const std::string& name) const;
    std::int64_t count_params() const;

    // --- execution ---
    // Inference-mode forward (running statistics, no caches); returns class
    // probabilities of shape (N, classes, 1, 1). Optionally captures the
    // pre-GAP feature stack and the logits. Thread-safe on a const graph.
    Tensor forward(const Tensor& x, Tensor* features = nullptr, Tensor* logits = nullptr) const;

    // Training-mode forward up to the logits node; fills the tape and updates
    // batch-norm running statistics.
    const Tensor& forward_train(const Tensor& x, Tape& tape);

    // Backpropagates dlogits through the taped forward pass, accumulating into
    // the parameters' gradient buffers.
    void backward(Tape& tape, const Tensor& dlogits);

    void ensure_grads();
    void zero_grads();

    // --- metadata ---
    std::string variant;
    int class_count = 2;
    HeadStyle head_style = HeadStyle::DenseHead;
    int logits_node = -1;
    int softmax_node = -1;
    int feature_node = -1;  // pre-GAP stack feeding CAM

private:
    int add_node(Node n);
    int add_param(const std::string& name, Shape shape, bool trainable);
    void run_node(int i, const std::vector<const Tensor*>& in, Tensor& out, bool training,
                  Tape* tape);
    Shape node_out_shape(const Node& n, const std::vector<Shape>& shapes) const;

    std::vector<Node> nodes_;
    std::vector<Param> params_;
    Shape input_spec_{1, 0, 0, 0};
};

}  // namespace ctnet
