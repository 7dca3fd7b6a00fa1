#include "ctnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctnet {

const char* op_kind_name(OpKind k) {
    switch (k) {
        case OpKind::Input: return "input";
        case OpKind::Conv: return "conv";
        case OpKind::ConvTranspose: return "conv_transpose";
        case OpKind::BatchNorm: return "batchnorm";
        case OpKind::Relu: return "relu";
        case OpKind::Elu: return "elu";
        case OpKind::MaxPool: return "maxpool";
        case OpKind::Concat: return "concat";
        case OpKind::Add: return "add";
        case OpKind::GlobalAvgPool: return "global_avg_pool";
        case OpKind::Dense: return "dense";
        case OpKind::Softmax: return "softmax";
    }
    return "?";
}

namespace {

void he_normal_init(Tensor& t, int fan_in, Rng& rng) {
    const double std = std::sqrt(2.0 / static_cast<double>(fan_in < 1 ? 1 : fan_in));
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<float>(rng.normal() * std);
}

void accumulate(Tensor& dst, const Tensor& src) {
    float* d = dst.data();
    const float* s = src.data();
    for (std::size_t i = 0; i < src.size(); ++i) d[i] += s[i];
}

void accumulate_grad_buffer(float* grad, const Tensor& src) {
    const float* s = src.data();
    for (std::size_t i = 0; i < src.size(); ++i) grad[i] += s[i];
}

}  // namespace

int NetworkGraph::add_node(Node n) {
    for (int in : n.inputs) {
        if (in < 0 || in >= static_cast<int>(nodes_.size()))
            throw std::logic_error("graph: node '" + n.name + "' references unknown input");
    }
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int NetworkGraph::add_param(const std::string& name, Shape shape, bool trainable) {
    params_.push_back({name, Tensor(shape), trainable});
    return static_cast<int>(params_.size()) - 1;
}

int NetworkGraph::add_input(int channels, int height, int width) {
    if (!nodes_.empty()) throw std::logic_error("graph: input must be the first node");
    input_spec_ = {1, channels, height, width};
    Node n;
    n.kind = OpKind::Input;
    n.name = "input";
    return add_node(std::move(n));
}

int NetworkGraph::add_conv(const std::string& name, int input, int out_channels, int kernel,
                           int stride, int padding, Rng& rng) {
    const Shape in_shape = infer_shapes(1)[input];
    Node n;
    n.kind = OpKind::Conv;
    n.name = name;
    n.inputs = {input};
    n.stride = stride;
    n.padding = padding;
    n.weight = add_param(name + ".weight", {out_channels, in_shape.c, kernel, kernel}, true);
    n.bias = add_param(name + ".bias", {out_channels, 1, 1, 1}, true);
    he_normal_init(params_[n.weight].value, in_shape.c * kernel * kernel, rng);
    return add_node(std::move(n));
}

int NetworkGraph::add_conv_transpose(const std::string& name, int input, int out_channels,
                                     int kernel, int stride, int padding, Rng& rng) {
    const Shape in_shape = infer_shapes(1)[input];
    Node n;
    n.kind = OpKind::ConvTranspose;
    n.name = name;
    n.inputs = {input};
    n.stride = stride;
    n.padding = padding;
    // Transpose-conv weight layout: (Cin, Cout, kH, kW).
    n.weight = add_param(name + ".weight", {in_shape.c, out_channels, kernel, kernel}, true);
    n.bias = add_param(name + ".bias", {out_channels, 1, 1, 1}, true);
    // Effective fan-in per output element: Cin * (k/stride)^2 taps.
    const int taps = std::max(1, (kernel / std::max(1, stride)) * (kernel / std::max(1, stride)));
    he_normal_init(params_[n.weight].value, in_shape.c * taps, rng);
    return add_node(std::move(n));
}

int NetworkGraph::add_batchnorm(const std::string& name, int input, float eps, float momentum) {
    const Shape in_shape = infer_shapes(1)[input];
    Node n;
    n.kind = OpKind::BatchNorm;
    n.name = name;
    n.inputs = {input};
    n.bn_eps = eps;
    n.bn_momentum = momentum;
    const Shape vec{in_shape.c, 1, 1, 1};
    n.gamma = add_param(name + ".gamma", vec, true);
    n.beta = add_param(name + ".beta", vec, true);
    n.run_mean = add_param(name + ".running_mean", vec, false);
    n.run_var = add_param(name + ".running_var", vec, false);
    params_[n.gamma].value.fill(1.0f);
    params_[n.run_var].value.fill(1.0f);
    return add_node(std::move(n));
}

int NetworkGraph::add_relu(const std::string& name, int input) {
    Node n;
    n.kind = OpKind::Relu;
    n.name = name;
    n.inputs = {input};
    return add_node(std::move(n));
}

int NetworkGraph::add_elu(const std::string& name, int input, float alpha) {
    Node n;
    n.kind = OpKind::Elu;
    n.name = name;
    n.inputs = {input};
    n.alpha = alpha;
    return add_node(std::move(n));
}

int NetworkGraph::add_maxpool(const std::string& name, int input, int window, int stride,
                              int padding) {
    Node n;
    n.kind = OpKind::MaxPool;
    n.name = name;
    n.inputs = {input};
    n.window = window;
    n.stride = stride;
    n.padding = padding;
    return add_node(std::move(n));
}

int NetworkGraph::add_concat(const std::string& name, const std::vector<int>& inputs) {
    Node n;
    n.kind = OpKind::Concat;
    n.name = name;
    n.inputs = inputs;
    const int id = add_node(std::move(n));
    infer_shapes(1);  // validates spatial agreement at build time
    return id;
}

int NetworkGraph::add_add(const std::string& name, int a, int b) {
    Node n;
    n.kind = OpKind::Add;
    n.name = name;
    n.inputs = {a, b};
    const int id = add_node(std::move(n));
    const auto shapes = infer_shapes(1);
    (void)shapes;
    return id;
}

int NetworkGraph::add_global_avg_pool(const std::string& name, int input) {
    Node n;
    n.kind = OpKind::GlobalAvgPool;
    n.name = name;
    n.inputs = {input};
    return add_node(std::move(n));
}

int NetworkGraph::add_dense(const std::string& name, int input, int out_dim, Rng& rng) {
    const Shape in_shape = infer_shapes(1)[input];
    const int in_dim = in_shape.c * in_shape.h * in_shape.w;
    Node n;
    n.kind = OpKind::Dense;
    n.name = name;
    n.inputs = {input};
    n.weight = add_param(name + ".weight", {out_dim, in_dim, 1, 1}, true);
    n.bias = add_param(name + ".bias", {out_dim, 1, 1, 1}, true);
    he_normal_init(params_[n.weight].value, in_dim, rng);
    return add_node(std::move(n));
}

int NetworkGraph::add_softmax(const std::string& name, int input) {
    Node n;
    n.kind = OpKind::Softmax;
    n.name = name;
    n.inputs = {input};
    return add_node(std::move(n));
}

int NetworkGraph::find_node(const std::string& name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].name == name) return static_cast<int>(i);
    return -1;
}

Param* NetworkGraph::find_param(const std::string& name) {
    for (auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

const Param* NetworkGraph::find_param(const std::string& name) const {
    for (const auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

std::int64_t NetworkGraph::count_params() const {
    std::int64_t total = 0;
    for (const auto& p : params_)
        if (p.trainable) total += static_cast<std::int64_t>(p.value.size());
    return total;
}

Shape NetworkGraph::node_out_shape(const Node& n, const std::vector<Shape>& shapes) const {
    switch (n.kind) {
        case OpKind::Input:
            return input_spec_;
        case OpKind::Conv:
            return conv2d_out_shape(shapes[n.inputs[0]], params_[n.weight].value.shape(), n.stride,
                                    n.padding);
        case OpKind::ConvTranspose:
            return conv_transpose2d_out_shape(shapes[n.inputs[0]],
                                              params_[n.weight].value.shape(), n.stride,
                                              n.padding);
        case OpKind::BatchNorm:
        case OpKind::Relu:
        case OpKind::Elu:
        case OpKind::Softmax:
            return shapes[n.inputs[0]];
        case OpKind::MaxPool:
            return maxpool2d_out_shape(shapes[n.inputs[0]], {n.window, n.stride, n.padding});
        case OpKind::Concat: {
            Shape s = shapes[n.inputs[0]];
            int channels = 0;
            for (int in : n.inputs) {
                const Shape& si = shapes[in];
                if (si.h != s.h || si.w != s.w || si.n != s.n)
                    throw ShapeError("concat '" + n.name + "': spatial mismatch " + si.str() +
                                     " vs " + s.str());
                channels += si.c;
            }
            s.c = channels;
            return s;
        }
        case OpKind::Add: {
            const Shape& a = shapes[n.inputs[0]];
            const Shape& b = shapes[n.inputs[1]];
            if (!(a == b))
                throw ShapeError("add '" + n.name + "': operand shapes " + a.str() + " vs " +
                                 b.str());
            return a;
        }
        case OpKind::GlobalAvgPool: {
            Shape s = shapes[n.inputs[0]];
            return {s.n, s.c, 1, 1};
        }
        case OpKind::Dense: {
            const Shape& s = shapes[n.inputs[0]];
            return {s.n, params_[n.weight].value.shape().n, 1, 1};
        }
    }
    throw std::logic_error("graph: unknown node kind");
}

std::vector<Shape> NetworkGraph::infer_shapes(int batch) const {
    std::vector<Shape> shapes(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        shapes[i] = node_out_shape(nodes_[i], shapes);
        shapes[i].n = batch;
    }
    return shapes;
}

Shape NetworkGraph::node_shape(const std::string& name, int batch) const {
    const int id = find_node(name);
    if (id < 0) throw std::logic_error("graph: no node named '" + name + "'");
    return infer_shapes(batch)[id];
}

void NetworkGraph::ensure_grads() {
    for (auto& p : params_)
        if (p.trainable) p.value.ensure_grad();
}

void NetworkGraph::zero_grads() {
    for (auto& p : params_)
        if (p.trainable) p.value.zero_grad();
}

Tensor NetworkGraph::forward(const Tensor& x, Tensor* features, Tensor* logits) const {
    const Shape in = x.shape();
    if (in.c != input_spec_.c || in.h != input_spec_.h || in.w != input_spec_.w)
        throw ShapeError("forward: input " + in.str() + " does not match spec " +
                         input_spec_.str());

    // Reference counts let activations be released as soon as consumed.
    std::vector<int> pending(nodes_.size(), 0);
    for (const Node& n : nodes_)
        for (int i : n.inputs) pending[i]++;

    std::vector<Tensor> act(nodes_.size());
    Tensor out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        switch (n.kind) {
            case OpKind::Input:
                act[i] = x;
                break;
            case OpKind::Conv:
                act[i] = conv2d_forward(act[n.inputs[0]], params_[n.weight].value,
                                        params_[n.bias].value, n.stride, n.padding);
                break;
            case OpKind::ConvTranspose:
                act[i] = conv_transpose2d_forward(act[n.inputs[0]], params_[n.weight].value,
                                                  params_[n.bias].value, n.stride, n.padding);
                break;
            case OpKind::BatchNorm:
                act[i] = batchnorm_infer(act[n.inputs[0]], params_[n.gamma].value,
                                         params_[n.beta].value, params_[n.run_mean].value,
                                         params_[n.run_var].value, n.bn_eps);
                break;
            case OpKind::Relu:
                act[i] = relu(act[n.inputs[0]]);
                break;
            case OpKind::Elu:
                act[i] = elu(act[n.inputs[0]], n.alpha);
                break;
            case OpKind::MaxPool:
                act[i] = maxpool2d(act[n.inputs[0]], {n.window, n.stride, n.padding});
                break;
            case OpKind::Concat: {
                std::vector<const Tensor*> xs;
                xs.reserve(n.inputs.size());
                for (int in_id : n.inputs) xs.push_back(&act[in_id]);
                act[i] = concat_depth(xs);
                break;
            }
            case OpKind::Add:
                act[i] = add(act[n.inputs[0]], act[n.inputs[1]]);
                break;
            case OpKind::GlobalAvgPool:
                act[i] = global_avg_pool(act[n.inputs[0]]);
                break;
            case OpKind::Dense:
                act[i] = dense_forward(act[n.inputs[0]], params_[n.weight].value,
                                       params_[n.bias].value);
                break;
            case OpKind::Softmax:
                act[i] = softmax_rows(act[n.inputs[0]]);
                break;
        }
        if (features && static_cast<int>(i) == feature_node) *features = act[i];
        if (logits && static_cast<int>(i) == logits_node) *logits = act[i];
        if (static_cast<int>(i) == softmax_node) out = act[i];
        for (int in_id : n.inputs) {
            if (--pending[in_id] == 0) act[in_id] = Tensor();
        }
    }
    if (softmax_node < 0) throw std::logic_error("graph: no softmax output node");
    return out;
}

const Tensor& NetworkGraph::forward_train(const Tensor& x, Tape& tape) {
    const Shape in = x.shape();
    if (in.c != input_spec_.c || in.h != input_spec_.h || in.w != input_spec_.w)
        throw ShapeError("forward_train: input " + in.str() + " does not match spec " +
                         input_spec_.str());
    if (logits_node < 0) throw std::logic_error("graph: logits node not set");

    tape.act.resize(nodes_.size());
    tape.bn.resize(nodes_.size());
    tape.pool_argmax.resize(nodes_.size());
    tape.batch = in.n;

    for (int i = 0; i <= logits_node; ++i) {
        const Node& n = nodes_[i];
        switch (n.kind) {
            case OpKind::Input:
                tape.act[i] = x;
                break;
            case OpKind::Conv:
                tape.act[i] = conv2d_forward(tape.act[n.inputs[0]], params_[n.weight].value,
                                             params_[n.bias].value, n.stride, n.padding);
                break;
            case OpKind::ConvTranspose:
                tape.act[i] =
                    conv_transpose2d_forward(tape.act[n.inputs[0]], params_[n.weight].value,
                                             params_[n.bias].value, n.stride, n.padding);
                break;
            case OpKind::BatchNorm:
                tape.act[i] = batchnorm_forward(
                    tape.act[n.inputs[0]], params_[n.gamma].value, params_[n.beta].value,
                    params_[n.run_mean].value, params_[n.run_var].value, n.bn_eps, n.bn_momentum,
                    /*training=*/true, &tape.bn[i]);
                break;
            case OpKind::Relu:
                tape.act[i] = relu(tape.act[n.inputs[0]]);
                break;
            case OpKind::Elu:
                tape.act[i] = elu(tape.act[n.inputs[0]], n.alpha);
                break;
            case OpKind::MaxPool:
                tape.act[i] =
                    maxpool2d(tape.act[n.inputs[0]], {n.window, n.stride, n.padding},
                              &tape.pool_argmax[i]);
                break;
            case OpKind::Concat: {
                std::vector<const Tensor*> xs;
                xs.reserve(n.inputs.size());
                for (int in_id : n.inputs) xs.push_back(&tape.act[in_id]);
                tape.act[i] = concat_depth(xs);
                break;
            }
            case OpKind::Add:
                tape.act[i] = add(tape.act[n.inputs[0]], tape.act[n.inputs[1]]);
                break;
            case OpKind::GlobalAvgPool:
                tape.act[i] = global_avg_pool(tape.act[n.inputs[0]]);
                break;
            case OpKind::Dense:
                tape.act[i] = dense_forward(tape.act[n.inputs[0]], params_[n.weight].value,
                                            params_[n.bias].value);
                break;
            case OpKind::Softmax:
                throw std::logic_error("graph: softmax before logits node");
        }
    }
    return tape.act[logits_node];
}

void NetworkGraph::backward(Tape& tape, const Tensor& dlogits) {
    if (logits_node < 0) throw std::logic_error("graph: logits node not set");
    check_same_shape(dlogits.shape(), tape.act[logits_node].shape(), "backward dlogits");
    ensure_grads();

    std::vector<Tensor> dact(nodes_.size());
    dact[logits_node] = dlogits;

    auto fan_in_grad = [&](int node_id, Tensor&& g) {
        if (dact[node_id].empty())
            dact[node_id] = std::move(g);
        else
            accumulate(dact[node_id], g);
    };

    for (int i = logits_node; i >= 0; --i) {
        if (dact[i].empty()) continue;
        const Node& n = nodes_[i];
        const Tensor& dy = dact[i];
        switch (n.kind) {
            case OpKind::Input:
                break;
            case OpKind::Conv: {
                const bool need_dx = nodes_[n.inputs[0]].kind != OpKind::Input;
                ConvGrads g = conv2d_backward(tape.act[n.inputs[0]], params_[n.weight].value,
                                              n.stride, n.padding, dy, need_dx);
                accumulate_grad_buffer(params_[n.weight].value.grad(), g.dw);
                accumulate_grad_buffer(params_[n.bias].value.grad(), g.db);
                if (need_dx) fan_in_grad(n.inputs[0], std::move(g.dx));
                break;
            }
            case OpKind::ConvTranspose: {
                const bool need_dx = nodes_[n.inputs[0]].kind != OpKind::Input;
                ConvGrads g = conv_transpose2d_backward(tape.act[n.inputs[0]],
                                                        params_[n.weight].value, n.stride,
                                                        n.padding, dy, need_dx);
                accumulate_grad_buffer(params_[n.weight].value.grad(), g.dw);
                accumulate_grad_buffer(params_[n.bias].value.grad(), g.db);
                if (need_dx) fan_in_grad(n.inputs[0], std::move(g.dx));
                break;
            }
            case OpKind::BatchNorm: {
                BatchNormGrads g = batchnorm_backward(params_[n.gamma].value, tape.bn[i], dy);
                accumulate_grad_buffer(params_[n.gamma].value.grad(), g.dgamma);
                accumulate_grad_buffer(params_[n.beta].value.grad(), g.dbeta);
                fan_in_grad(n.inputs[0], std::move(g.dx));
                break;
            }
            case OpKind::Relu:
                fan_in_grad(n.inputs[0], relu_backward(tape.act[i], dy));
                break;
            case OpKind::Elu:
                fan_in_grad(n.inputs[0], elu_backward(tape.act[i], dy, n.alpha));
                break;
            case OpKind::MaxPool:
                fan_in_grad(n.inputs[0], maxpool2d_backward(tape.act[n.inputs[0]].shape(),
                                                            tape.pool_argmax[i], dy));
                break;
            case OpKind::Concat: {
                std::vector<Shape> in_shapes;
                in_shapes.reserve(n.inputs.size());
                for (int in_id : n.inputs) in_shapes.push_back(tape.act[in_id].shape());
                std::vector<Tensor> gs = concat_depth_backward(in_shapes, dy);
                for (std::size_t j = 0; j < gs.size(); ++j)
                    fan_in_grad(n.inputs[j], std::move(gs[j]));
                break;
            }
            case OpKind::Add: {
                Tensor copy = dy;
                fan_in_grad(n.inputs[0], std::move(copy));
                Tensor copy2 = dy;
                fan_in_grad(n.inputs[1], std::move(copy2));
                break;
            }
            case OpKind::GlobalAvgPool:
                fan_in_grad(n.inputs[0],
                            global_avg_pool_backward(tape.act[n.inputs[0]].shape(), dy));
                break;
            case OpKind::Dense: {
                DenseGrads g = dense_backward(tape.act[n.inputs[0]], params_[n.weight].value, dy);
                accumulate_grad_buffer(params_[n.weight].value.grad(), g.dw);
                accumulate_grad_buffer(params_[n.bias].value.grad(), g.db);
                fan_in_grad(n.inputs[0], std::move(g.dx));
                break;
            }
            case OpKind::Softmax:
                throw std::logic_error("graph: softmax inside training subgraph");
        }
        dact[i] = Tensor();  // release as soon as consumed
    }
}

}  // namespace ctnet
