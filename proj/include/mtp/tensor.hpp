#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtp {

using Shape = std::vector<std::size_t>;

// Dense row-major tensor of doubles.
struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(std::move(s)), data(numel_of(shape), 0.0) {}
    Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != numel_of(shape))
            throw std::invalid_argument("tensor data size does not match shape");
    }

    static std::size_t numel_of(const Shape& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    double& at(std::size_t i) { return data[i]; }
    double at(std::size_t i) const { return data[i]; }

    // Row-major [r, c] access for rank-2 tensors.
    double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    bool all_finite() const;
};

std::string shape_str(const Shape& s);

// A trainable parameter: value, accumulated gradient and Adam moment slots,
// all shape-identical. `step` counts Adam updates applied to this parameter
// (bias correction is per-parameter because the curriculum trains shallow
// layers more often than deep ones).
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor m;
    Tensor v;
    std::int64_t step = 0;

    Param() = default;
    Param(std::string n, Shape s)
        : name(std::move(n)), value(s), grad(s), m(s), v(std::move(s)) {}

    void zero_grad() { grad.fill(0.0); }
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

// Bias-corrected Adam update over `params`; increments each param's step
// count and zeroes its gradient afterwards.
void adam_step(std::vector<Param*>& params, const AdamConfig& cfg);

// ---------------------------------------------------------------------------
// Forward kernels (no gradient bookkeeping). The tape ops below reuse these,
// so the gradient-free scoring path and the training path share arithmetic
// exactly.
// ---------------------------------------------------------------------------

// input [*, d_in] x weights [d_in, d_out] + bias [d_out] -> [*, d_out]
Tensor fc_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

// input [T, c_in], kernels [k, c_in, c_out], bias [c_out] -> [T-k+1, c_out].
// Valid convolution, stride 1. The accumulation order per output element is
// independent of the output position, so sliding-window evaluation is
// bitwise identical to full-sequence evaluation.
Tensor conv1d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias);

Tensor relu_forward(const Tensor& input);

// pred/truth [n, f*50], weights [n, f*25] -> [n, f]: per (row, frame)
// confidence-weighted squared error over 25 (x, y) pairs.
Tensor row_frame_errors_forward(const Tensor& pred, const Tensor& truth,
                                const Tensor& weights);

// Single-frame weighted squared error: pred/truth [50], weights [25].
double weighted_sq_error(const Tensor& pred, const Tensor& truth, const Tensor& weights);

// ---------------------------------------------------------------------------
// Reverse-mode tape
// ---------------------------------------------------------------------------

// Records the forward computation as a flat list of nodes; backward() walks
// the list in reverse (creation order is already topological). Parameter
// gradients accumulate into Param::grad, so several tapes (e.g. windows in a
// batch) can contribute to one optimizer step.
class Tape {
public:
    using NodeId = std::size_t;

    NodeId input(Tensor value);
    NodeId use(Param& p);

    NodeId fully_connected(NodeId x, NodeId w, NodeId b);
    NodeId conv1d_valid(NodeId x, NodeId k, NodeId b);
    NodeId relu(NodeId x);
    // pred on tape; truth/weights are constants.
    NodeId row_frame_errors(NodeId pred, Tensor truth, Tensor weights);
    // sum(x * coeff), coeff constant; result scalar.
    NodeId weighted_sum(NodeId x, Tensor coeff);
    NodeId add(NodeId a, NodeId b);
    NodeId scale(NodeId a, double c);

    const Tensor& value(NodeId id) const { return nodes_[id].value; }
    const Tensor& grad(NodeId id) const { return nodes_[id].grad; }

    // Seeds d(loss)/d(loss)=1 and propagates to every input and Param that
    // participated. `loss` must be scalar. May be called more than once;
    // gradients accumulate.
    void backward(NodeId loss);

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&, NodeId)> back;  // null for inputs
        Param* param = nullptr;
    };

    NodeId push(Tensor value, std::function<void(Tape&, NodeId)> back);
    Tensor& grad_mut(NodeId id) { return nodes_[id].grad; }

    std::vector<Node> nodes_;
};

}  // namespace mtp
