#pragma once

#include <map>
#include <string>
#include <vector>

#include "mtp/tensor.hpp"

namespace mtp {

enum class Direction { Future, Past };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

// Architecture hyperparameters. The receptive-field law ties kernel sizes to
// the supervised timescales: RF_j = 1 + sum_{m<=j}(k_m - 1), and every
// supervised layer's RF must equal its timescale.
struct ModelConfig {
    std::size_t width = 1024;  // channel count D; desk-scale tests use 64
    std::vector<std::size_t> kernel_sizes = {3, 3, 5, 5, 5, 5, 5};
    // (1-based conv layer, timescale), strictly increasing in both.
    std::vector<std::pair<int, int>> supervised = {{1, 3}, {2, 5}, {4, 13}, {7, 25}};
    std::uint64_t seed = 0;

    std::size_t n_layers() const { return kernel_sizes.size(); }
    void validate() const;
    int timescale_of(int layer) const;  // throws if layer is unsupervised
    bool is_supervised(int layer) const;
};

std::size_t receptive_field(const ModelConfig& cfg, int layer);

// One node of a supervised layer: which input frames it reads and which
// trajectory positions it predicts (0-based, inclusive spans).
struct NodeSpan {
    int layer;
    std::size_t node;
    std::size_t input_begin, input_end;  // [i, i + t_k - 1]
    std::size_t pred_begin, pred_end;    // [i + t_k, i + 2*t_k - 1]
};
NodeSpan node_span(const ModelConfig& cfg, int layer, std::size_t node);

// One direction's predictor: frame-local encoder (50 -> D -> D), seven
// valid-conv layers (D channels each), and a two-layer decoder per
// supervised timescale (D -> D -> t_k*50, linear output).
class MtpModel {
public:
    MtpModel(Direction direction, ModelConfig config);

    const ModelConfig& config() const { return cfg_; }
    Direction direction() const { return direction_; }

    // Per-frame encoding of [T, 50] poses -> [T, D].
    Tensor encode(const Tensor& poses) const;

    // Activations of the supervised layers: layer j -> [T - RF_j + 1, D].
    // Layers whose receptive field exceeds T are simply absent. Throws if
    // T < RF of the shallowest supervised layer.
    std::map<int, Tensor> forward(const Tensor& poses) const;

    // Decode node activations [M, D] (or [D]) of supervised layer j into
    // predictions [M, t_k*50].
    Tensor decode(int layer, const Tensor& activation) const;

    // Single-window prediction: input must be exactly [RF_j, 50]; returns
    // [t_k, 50]. Equal to forward + decode of the one node it produces.
    Tensor predict_window(const Tensor& input, int layer) const;

    // Tape-building counterparts used for training. `depth_layer` limits the
    // conv stack; returns supervised layer -> activation node id.
    std::map<int, Tape::NodeId> forward_tape(Tape& tape, Tape::NodeId poses,
                                             int depth_layer);
    Tape::NodeId decode_tape(Tape& tape, int layer, Tape::NodeId activation);

    // All parameters, or only those trained when the stack is limited to
    // `depth_layer` (encoder + conv <= depth + decoders of supervised
    // layers <= depth).
    std::vector<Param*> params();
    std::vector<Param*> params_up_to(int depth_layer);
    std::size_t param_count() const;

    // Closed-form parameter count for a config (checked against the actual
    // allocation in tests).
    static std::size_t expected_param_count(const ModelConfig& cfg);

    void save_checkpoint(const std::string& path) const;
    static MtpModel load_checkpoint(const std::string& path);

    Param& param(const std::string& name);

private:
    void init_params();

    Direction direction_;
    ModelConfig cfg_;
    std::map<std::string, Param> params_;

    Param& p(const std::string& name) { return params_.at(name); }
    const Param& p(const std::string& name) const { return params_.at(name); }
};

}  // namespace mtp
