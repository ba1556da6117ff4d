#include "mtp/tensor.hpp"

#include <cmath>
#include <sstream>

namespace mtp {

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ", ";
        os << s[i];
    }
    os << ']';
    return os.str();
}

void AdamConfig::validate() const {
    if (lr <= 0.0) throw std::invalid_argument("adam: lr must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw std::invalid_argument("adam: betas must lie in [0, 1)");
    if (eps <= 0.0) throw std::invalid_argument("adam: eps must be > 0");
}

void adam_step(std::vector<Param*>& params, const AdamConfig& cfg) {
    cfg.validate();
    for (Param* p : params) {
        p->step += 1;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
        const std::size_t n = p->value.numel();
        for (std::size_t i = 0; i < n; ++i) {
            const double g = p->grad.data[i];
            p->m.data[i] = cfg.beta1 * p->m.data[i] + (1.0 - cfg.beta1) * g;
            p->v.data[i] = cfg.beta2 * p->v.data[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = p->m.data[i] / bc1;
            const double vhat = p->v.data[i] / bc2;
            p->value.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
        p->zero_grad();
    }
}

// ---------------------------------------------------------------------------
// Forward kernels
// ---------------------------------------------------------------------------

static void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

Tensor fc_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    require(weights.rank() == 2, "fc: weights must be rank 2");
    require(input.rank() >= 1, "fc: input must have at least one axis");
    const std::size_t d_in = weights.dim(0);
    const std::size_t d_out = weights.dim(1);
    require(input.shape.back() == d_in,
            "fc: inner dims disagree, input " + shape_str(input.shape) + " vs weights " +
                shape_str(weights.shape));
    require(bias.numel() == d_out, "fc: bias size must equal d_out");

    const std::size_t rows = input.numel() / d_in;
    Shape out_shape = input.shape;
    out_shape.back() = d_out;
    Tensor out(out_shape);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = input.data.data() + r * d_in;
        double* y = out.data.data() + r * d_out;
        for (std::size_t j = 0; j < d_out; ++j) y[j] = bias.data[j];
        for (std::size_t i = 0; i < d_in; ++i) {
            const double xi = x[i];
            const double* w = weights.data.data() + i * d_out;
            for (std::size_t j = 0; j < d_out; ++j) y[j] += xi * w[j];
        }
    }
    return out;
}

Tensor conv1d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
    require(input.rank() == 2, "conv1d: input must be [T, c_in]");
    require(kernels.rank() == 3, "conv1d: kernels must be [k, c_in, c_out]");
    const std::size_t T = input.dim(0);
    const std::size_t c_in = input.dim(1);
    const std::size_t k = kernels.dim(0);
    const std::size_t c_out = kernels.dim(2);
    require(kernels.dim(1) == c_in,
            "conv1d: channel mismatch, input " + shape_str(input.shape) + " vs kernels " +
                shape_str(kernels.shape));
    require(bias.numel() == c_out, "conv1d: bias size must equal c_out");
    if (T < k)
        throw std::invalid_argument("conv1d: input length " + std::to_string(T) +
                                    " shorter than kernel " + std::to_string(k));

    const std::size_t T_out = T - k + 1;
    Tensor out({T_out, c_out});
    for (std::size_t t = 0; t < T_out; ++t) {
        double* y = out.data.data() + t * c_out;
        for (std::size_t j = 0; j < c_out; ++j) y[j] = bias.data[j];
        for (std::size_t kt = 0; kt < k; ++kt) {
            const double* x = input.data.data() + (t + kt) * c_in;
            const double* w = kernels.data.data() + kt * c_in * c_out;
            for (std::size_t c = 0; c < c_in; ++c) {
                const double xc = x[c];
                const double* wc = w + c * c_out;
                for (std::size_t j = 0; j < c_out; ++j) y[j] += xc * wc[j];
            }
        }
    }
    return out;
}

Tensor relu_forward(const Tensor& input) {
    Tensor out(input.shape);
    for (std::size_t i = 0; i < input.numel(); ++i)
        out.data[i] = input.data[i] > 0.0 ? input.data[i] : 0.0;
    return out;
}

Tensor row_frame_errors_forward(const Tensor& pred, const Tensor& truth,
                                const Tensor& weights) {
    require(pred.same_shape(truth), "row_frame_errors: pred/truth shapes differ");
    require(pred.rank() == 2 && pred.dim(1) % 50 == 0,
            "row_frame_errors: pred must be [n, f*50]");
    const std::size_t n = pred.dim(0);
    const std::size_t f = pred.dim(1) / 50;
    require(weights.rank() == 2 && weights.dim(0) == n && weights.dim(1) == f * 25,
            "row_frame_errors: weights must be [n, f*25]");

    Tensor out({n, f});
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t t = 0; t < f; ++t) {
            const double* p = pred.data.data() + r * f * 50 + t * 50;
            const double* g = truth.data.data() + r * f * 50 + t * 50;
            const double* w = weights.data.data() + r * f * 25 + t * 25;
            double e = 0.0;
            for (std::size_t j = 0; j < 25; ++j) {
                const double dx = p[2 * j] - g[2 * j];
                const double dy = p[2 * j + 1] - g[2 * j + 1];
                e += w[j] * (dx * dx + dy * dy);
            }
            out.at(r, t) = e;
        }
    }
    return out;
}

double weighted_sq_error(const Tensor& pred, const Tensor& truth, const Tensor& weights) {
    require(pred.numel() == 50 && truth.numel() == 50 && weights.numel() == 25,
            "weighted_sq_error: expects pred/truth [50], weights [25]");
    Tensor p({1, 50}, pred.data), g({1, 50}, truth.data), w({1, 25}, weights.data);
    return row_frame_errors_forward(p, g, w).data[0];
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Tape::NodeId Tape::push(Tensor value, std::function<void(Tape&, NodeId)> back) {
    Node n;
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

Tape::NodeId Tape::input(Tensor value) { return push(std::move(value), nullptr); }

Tape::NodeId Tape::use(Param& p) {
    NodeId id = push(p.value, nullptr);
    nodes_[id].param = &p;
    return id;
}

Tape::NodeId Tape::fully_connected(NodeId x, NodeId w, NodeId b) {
    Tensor out = fc_forward(value(x), value(w), value(b));
    return push(std::move(out), [x, w, b](Tape& t, NodeId self) {
        const Tensor& gy = t.grad(self);
        const Tensor& xin = t.value(x);
        const Tensor& wv = t.value(w);
        const std::size_t d_in = wv.dim(0), d_out = wv.dim(1);
        const std::size_t rows = xin.numel() / d_in;
        Tensor& gx = t.grad_mut(x);
        Tensor& gw = t.grad_mut(w);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* xr = xin.data.data() + r * d_in;
            const double* gr = gy.data.data() + r * d_out;
            for (std::size_t j = 0; j < d_out; ++j) gb.data[j] += gr[j];
            for (std::size_t i = 0; i < d_in; ++i) {
                const double* wr = wv.data.data() + i * d_out;
                double acc = 0.0;
                double* gwr = gw.data.data() + i * d_out;
                for (std::size_t j = 0; j < d_out; ++j) {
                    acc += wr[j] * gr[j];
                    gwr[j] += xr[i] * gr[j];
                }
                gx.data[r * d_in + i] += acc;
            }
        }
    });
}

Tape::NodeId Tape::conv1d_valid(NodeId x, NodeId k, NodeId b) {
    Tensor out = conv1d_forward(value(x), value(k), value(b));
    return push(std::move(out), [x, k, b](Tape& t, NodeId self) {
        const Tensor& gy = t.grad(self);
        const Tensor& xin = t.value(x);
        const Tensor& kv = t.value(k);
        const std::size_t c_in = xin.dim(1);
        const std::size_t ksz = kv.dim(0), c_out = kv.dim(2);
        const std::size_t T_out = gy.dim(0);
        Tensor& gx = t.grad_mut(x);
        Tensor& gk = t.grad_mut(k);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t to = 0; to < T_out; ++to) {
            const double* gr = gy.data.data() + to * c_out;
            for (std::size_t j = 0; j < c_out; ++j) gb.data[j] += gr[j];
            for (std::size_t kt = 0; kt < ksz; ++kt) {
                const double* xr = xin.data.data() + (to + kt) * c_in;
                double* gxr = gx.data.data() + (to + kt) * c_in;
                for (std::size_t c = 0; c < c_in; ++c) {
                    const double* wr = kv.data.data() + (kt * c_in + c) * c_out;
                    double* gwr = gk.data.data() + (kt * c_in + c) * c_out;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < c_out; ++j) {
                        acc += wr[j] * gr[j];
                        gwr[j] += xr[c] * gr[j];
                    }
                    gxr[c] += acc;
                }
            }
        }
    });
}

Tape::NodeId Tape::relu(NodeId x) {
    Tensor out = relu_forward(value(x));
    return push(std::move(out), [x](Tape& t, NodeId self) {
        const Tensor& gy = t.grad(self);
        const Tensor& xin = t.value(x);
        Tensor& gx = t.grad_mut(x);
        // subgradient at 0 is 0
        for (std::size_t i = 0; i < xin.numel(); ++i)
            if (xin.data[i] > 0.0) gx.data[i] += gy.data[i];
    });
}

Tape::NodeId Tape::row_frame_errors(NodeId pred, Tensor truth, Tensor weights) {
    Tensor out = row_frame_errors_forward(value(pred), truth, weights);
    auto back = [pred, truth = std::move(truth), weights = std::move(weights)](
                    Tape& t, NodeId self) {
        const Tensor& gy = t.grad(self);
        const Tensor& p = t.value(pred);
        Tensor& gp = t.grad_mut(pred);
        const std::size_t n = p.dim(0), f = p.dim(1) / 50;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t tt = 0; tt < f; ++tt) {
                const double g = gy.data[r * f + tt];
                const std::size_t off = r * f * 50 + tt * 50;
                const double* wr = weights.data.data() + r * f * 25 + tt * 25;
                for (std::size_t j = 0; j < 25; ++j) {
                    gp.data[off + 2 * j] +=
                        g * 2.0 * wr[j] * (p.data[off + 2 * j] - truth.data[off + 2 * j]);
                    gp.data[off + 2 * j + 1] +=
                        g * 2.0 * wr[j] *
                        (p.data[off + 2 * j + 1] - truth.data[off + 2 * j + 1]);
                }
            }
        }
    };
    return push(std::move(out), std::move(back));
}

Tape::NodeId Tape::weighted_sum(NodeId x, Tensor coeff) {
    const Tensor& xv = value(x);
    require(xv.numel() == coeff.numel(), "weighted_sum: coeff size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < xv.numel(); ++i) s += xv.data[i] * coeff.data[i];
    Tensor out({1});
    out.data[0] = s;
    auto back = [x, coeff = std::move(coeff)](Tape& t, NodeId self) {
        const double g = t.grad(self).data[0];
        Tensor& gx = t.grad_mut(x);
        for (std::size_t i = 0; i < gx.numel(); ++i) gx.data[i] += g * coeff.data[i];
    };
    return push(std::move(out), std::move(back));
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    require(av.same_shape(bv), "add: shape mismatch");
    Tensor out(av.shape);
    for (std::size_t i = 0; i < av.numel(); ++i) out.data[i] = av.data[i] + bv.data[i];
    return push(std::move(out), [a, b](Tape& t, NodeId self) {
        const Tensor& gy = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < gy.numel(); ++i) {
            ga.data[i] += gy.data[i];
            gb.data[i] += gy.data[i];
        }
    });
}

Tape::NodeId Tape::scale(NodeId a, double c) {
    const Tensor& av = value(a);
    Tensor out(av.shape);
    for (std::size_t i = 0; i < av.numel(); ++i) out.data[i] = av.data[i] * c;
    return push(std::move(out), [a, c](Tape& t, NodeId self) {
        const Tensor& gy = t.grad(self);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < gy.numel(); ++i) ga.data[i] += c * gy.data[i];
    });
}

void Tape::backward(NodeId loss) {
    if (value(loss).numel() != 1)
        throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                    shape_str(value(loss).shape));
    for (Node& n : nodes_)
        if (n.grad.shape != n.value.shape) n.grad = Tensor(n.value.shape);
    nodes_[loss].grad.data[0] += 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (n.back) n.back(*this, i);
        if (n.param) {
            for (std::size_t j = 0; j < n.grad.numel(); ++j)
                n.param->grad.data[j] += n.grad.data[j];
        }
    }
}

}  // namespace mtp
