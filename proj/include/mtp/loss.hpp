#pragma once

#include <optional>
#include <vector>

#include "mtp/model.hpp"
#include "mtp/tensor.hpp"
#include "mtp/trajectory.hpp"

namespace mtp {

// Per-node prediction errors of one supervised layer. Node i predicts
// trajectory positions [pred_begin(i), pred_begin(i) + t_k - 1]; entries are
// defined exactly on that span (clipped to the available truth).
struct NodeErrorMatrix {
    int layer = 0;
    int timescale = 0;
    std::size_t horizon = 0;  // number of trajectory positions considered

    struct NodeErrors {
        std::size_t pred_begin;       // first predicted trajectory position
        std::vector<double> errors;   // e(t, i) for t = pred_begin..
    };
    std::vector<NodeErrors> nodes;

    bool covers(std::size_t t, std::size_t node) const;
    std::size_t coverage(std::size_t t) const;  // n_j(t)
};

// Per-position averaged layer errors L2(t) with coverage counts.
struct LayerErrorSeries {
    int timescale = 0;
    std::vector<double> values;        // defined where coverage > 0
    std::vector<std::size_t> coverage;
};

// e(t, i) for every node of `layer`, given decoded predictions [M, t_k*50]
// against the trajectory's truth. Nodes whose span exceeds the truth have
// their trailing entries dropped; `truth` is [T, 50], `weights` [T, 25].
NodeErrorMatrix node_errors(const ModelConfig& cfg, int layer, const Tensor& predictions,
                            const Tensor& truth, const Tensor& weights);

// Eq.-style reductions over the matrix.
double node_loss(const NodeErrorMatrix& m, std::size_t node);            // L1(i)
double layer_loss_at(const NodeErrorMatrix& m, std::size_t t);           // L2(t)
LayerErrorSeries layer_series(const NodeErrorMatrix& m);
double layer_total(const NodeErrorMatrix& m);                            // sum L1 + sum L2
double model_loss(const std::vector<NodeErrorMatrix>& layers);

// Differentiable training loss of one window at curriculum depth
// `depth_layer`: runs the model over the window input, decodes every node of
// every active supervised layer, and forms sum_j [ sum_i L1(i) + sum_t L2(t) ]
// as a weighted sum of per-(node, instant) errors, coefficient
// 1 + 1/n_j(t). Returns the scalar node id.
Tape::NodeId window_loss_tape(Tape& tape, MtpModel& model, const Window& window,
                              int depth_layer);

}  // namespace mtp
