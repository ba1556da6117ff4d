#include "mtp/loss.hpp"

#include <algorithm>

namespace mtp {

bool NodeErrorMatrix::covers(std::size_t t, std::size_t node) const {
    const NodeErrors& n = nodes[node];
    return t >= n.pred_begin && t < n.pred_begin + n.errors.size();
}

std::size_t NodeErrorMatrix::coverage(std::size_t t) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (covers(t, i)) ++n;
    return n;
}

NodeErrorMatrix node_errors(const ModelConfig& cfg, int layer, const Tensor& predictions,
                            const Tensor& truth, const Tensor& weights) {
    const std::size_t tk = static_cast<std::size_t>(cfg.timescale_of(layer));
    if (predictions.rank() != 2 || predictions.dim(1) != tk * kPoseDim)
        throw std::invalid_argument("node_errors: predictions must be [M, t_k*50]");
    const std::size_t M = predictions.dim(0);
    const std::size_t T = truth.dim(0);

    NodeErrorMatrix out;
    out.layer = layer;
    out.timescale = static_cast<int>(tk);
    out.horizon = T;
    out.nodes.reserve(M);
    for (std::size_t i = 0; i < M; ++i) {
        NodeErrorMatrix::NodeErrors ne;
        ne.pred_begin = i + tk;
        for (std::size_t o = 0; o < tk; ++o) {
            const std::size_t t = i + tk + o;
            if (t >= T) break;  // truth exhausted: trailing entries dropped
            Tensor pred({1, kPoseDim});
            std::copy_n(predictions.data.begin() + (i * tk + o) * kPoseDim, kPoseDim,
                        pred.data.begin());
            Tensor tru({1, kPoseDim});
            std::copy_n(truth.data.begin() + t * kPoseDim, kPoseDim, tru.data.begin());
            Tensor w({1, kNumJoints});
            std::copy_n(weights.data.begin() + t * kNumJoints, kNumJoints, w.data.begin());
            ne.errors.push_back(row_frame_errors_forward(pred, tru, w).data[0]);
        }
        out.nodes.push_back(std::move(ne));
    }
    return out;
}

double node_loss(const NodeErrorMatrix& m, std::size_t node) {
    const auto& e = m.nodes.at(node).errors;
    double s = 0.0;
    for (double v : e) s += v;
    return s;
}

double layer_loss_at(const NodeErrorMatrix& m, std::size_t t) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        if (m.covers(t, i)) {
            sum += m.nodes[i].errors[t - m.nodes[i].pred_begin];
            ++n;
        }
    }
    if (n == 0)
        throw std::invalid_argument("layer_loss_at: no node covers instant " +
                                    std::to_string(t));
    return sum / static_cast<double>(n);
}

LayerErrorSeries layer_series(const NodeErrorMatrix& m) {
    LayerErrorSeries out;
    out.timescale = m.timescale;
    out.values.assign(m.horizon, 0.0);
    out.coverage.assign(m.horizon, 0);
    for (std::size_t t = 0; t < m.horizon; ++t) {
        const std::size_t n = m.coverage(t);
        out.coverage[t] = n;
        if (n > 0) out.values[t] = layer_loss_at(m, t);
    }
    return out;
}

double layer_total(const NodeErrorMatrix& m) {
    double total = 0.0;
    for (std::size_t i = 0; i < m.nodes.size(); ++i) total += node_loss(m, i);
    for (std::size_t t = 0; t < m.horizon; ++t)
        if (m.coverage(t) > 0) total += layer_loss_at(m, t);
    return total;
}

double model_loss(const std::vector<NodeErrorMatrix>& layers) {
    bool any = false;
    double total = 0.0;
    for (const NodeErrorMatrix& m : layers) {
        for (std::size_t t = 0; t < m.horizon && !any; ++t)
            if (m.coverage(t) > 0) any = true;
        total += layer_total(m);
    }
    if (!any) throw std::invalid_argument("model_loss: no supervised layer has coverage");
    return total;
}

Tape::NodeId window_loss_tape(Tape& tape, MtpModel& model, const Window& window,
                              int depth_layer) {
    const ModelConfig& cfg = model.config();
    const std::size_t l_in = window.input.dim(0);
    const std::size_t l_out = window.target.dim(0);
    const std::size_t total = l_in + l_out;

    // Truth and weights over the whole window: shallow layers predict
    // positions that still lie inside the input half.
    Tensor truth({total, kPoseDim});
    std::copy(window.input.data.begin(), window.input.data.end(), truth.data.begin());
    std::copy(window.target.data.begin(), window.target.data.end(),
              truth.data.begin() + l_in * kPoseDim);
    Tensor wts({total, kNumJoints});
    std::copy(window.input_weights.data.begin(), window.input_weights.data.end(),
              wts.data.begin());
    std::copy(window.weights.data.begin(), window.weights.data.end(),
              wts.data.begin() + l_in * kNumJoints);

    const Tape::NodeId poses = tape.input(window.input);
    const std::map<int, Tape::NodeId> acts = model.forward_tape(tape, poses, depth_layer);
    if (acts.empty())
        throw std::invalid_argument("window_loss_tape: no supervised layer fits input of length " +
                                    std::to_string(l_in));

    std::optional<Tape::NodeId> loss;
    for (const auto& [layer, act] : acts) {
        const std::size_t tk = static_cast<std::size_t>(cfg.timescale_of(layer));
        const std::size_t m_all = tape.value(act).dim(0);
        // Only nodes whose full prediction span has truth participate.
        std::size_t m = 0;
        while (m < m_all && m + 2 * tk <= total) ++m;
        if (m == 0) continue;

        const Tape::NodeId pred_all = model.decode_tape(tape, layer, act);  // [m_all, tk*50]
        Tape::NodeId pred = pred_all;
        Tensor node_truth({m, tk * kPoseDim});
        Tensor node_wts({m, tk * kNumJoints});
        for (std::size_t i = 0; i < m; ++i) {
            std::copy_n(truth.data.begin() + (i + tk) * kPoseDim, tk * kPoseDim,
                        node_truth.data.begin() + i * tk * kPoseDim);
            std::copy_n(wts.data.begin() + (i + tk) * kNumJoints, tk * kNumJoints,
                        node_wts.data.begin() + i * tk * kNumJoints);
        }

        // Coverage per instant within this layer.
        std::vector<std::size_t> cov(total, 0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t o = 0; o < tk; ++o) ++cov[i + tk + o];

        // L1 contributes e(t,i) once per (node, instant); L2 contributes
        // e(t,i)/n(t). Folded into one weighted sum.
        Tensor coeff({m, tk});
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t o = 0; o < tk; ++o)
                coeff.at(i, o) = 1.0 + 1.0 / static_cast<double>(cov[i + tk + o]);

        if (m < m_all) {
            // Excess nodes are rare (only when l_out < t_k); recompute a
            // trimmed error matrix against truncated truth.
            Tensor pad_truth({m_all, tk * kPoseDim});
            Tensor pad_wts({m_all, tk * kNumJoints});
            Tensor pad_coeff({m_all, tk});
            std::copy(node_truth.data.begin(), node_truth.data.end(),
                      pad_truth.data.begin());
            std::copy(node_wts.data.begin(), node_wts.data.end(), pad_wts.data.begin());
            std::copy(coeff.data.begin(), coeff.data.end(), pad_coeff.data.begin());
            // zero coefficients on dropped nodes: their (arbitrary) errors
            // cannot influence the loss or the gradient
            const Tape::NodeId errs = tape.row_frame_errors(pred, std::move(pad_truth),
                                                            std::move(pad_wts));
            const Tape::NodeId lj = tape.weighted_sum(errs, std::move(pad_coeff));
            loss = loss ? tape.add(*loss, lj) : lj;
            continue;
        }

        const Tape::NodeId errs =
            tape.row_frame_errors(pred, std::move(node_truth), std::move(node_wts));
        const Tape::NodeId lj = tape.weighted_sum(errs, std::move(coeff));
        loss = loss ? tape.add(*loss, lj) : lj;
    }
    if (!loss)
        throw std::invalid_argument("window_loss_tape: no layer produced a usable node");
    return *loss;
}

}  // namespace mtp
