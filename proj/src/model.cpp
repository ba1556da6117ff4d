#include "mtp/model.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "mtp/trajectory.hpp"

namespace mtp {

using nlohmann::json;

std::string to_string(Direction d) { return d == Direction::Future ? "future" : "past"; }

Direction direction_from_string(const std::string& s) {
    if (s == "future") return Direction::Future;
    if (s == "past") return Direction::Past;
    throw std::invalid_argument("unknown direction '" + s + "'");
}

std::size_t receptive_field(const ModelConfig& cfg, int layer) {
    if (layer < 1 || static_cast<std::size_t>(layer) > cfg.n_layers())
        throw std::invalid_argument("receptive_field: layer out of range");
    std::size_t rf = 1;
    for (int m = 0; m < layer; ++m) rf += cfg.kernel_sizes[m] - 1;
    return rf;
}

void ModelConfig::validate() const {
    if (width < 1) throw std::invalid_argument("config: width must be >= 1");
    if (kernel_sizes.empty()) throw std::invalid_argument("config: no conv layers");
    for (std::size_t k : kernel_sizes)
        if (k < 1) throw std::invalid_argument("config: kernel size must be >= 1");
    if (supervised.empty()) throw std::invalid_argument("config: no supervised layers");
    int prev_layer = 0, prev_ts = 0;
    for (const auto& [layer, ts] : supervised) {
        if (layer <= prev_layer || ts <= prev_ts)
            throw std::invalid_argument(
                "config: supervised layers must be strictly increasing in layer and timescale");
        if (layer < 1 || static_cast<std::size_t>(layer) > n_layers())
            throw std::invalid_argument("config: supervised layer " +
                                        std::to_string(layer) + " out of range");
        const std::size_t rf = receptive_field(*this, layer);
        if (rf != static_cast<std::size_t>(ts))
            throw std::invalid_argument(
                "config: layer " + std::to_string(layer) + " has receptive field " +
                std::to_string(rf) + " but is mapped to timescale " + std::to_string(ts));
        prev_layer = layer;
        prev_ts = ts;
    }
}

int ModelConfig::timescale_of(int layer) const {
    for (const auto& [l, ts] : supervised)
        if (l == layer) return ts;
    throw std::invalid_argument("layer " + std::to_string(layer) + " is not supervised");
}

bool ModelConfig::is_supervised(int layer) const {
    for (const auto& [l, ts] : supervised)
        if (l == layer) return true;
    return false;
}

NodeSpan node_span(const ModelConfig& cfg, int layer, std::size_t node) {
    const std::size_t tk = static_cast<std::size_t>(cfg.timescale_of(layer));
    NodeSpan s;
    s.layer = layer;
    s.node = node;
    s.input_begin = node;
    s.input_end = node + tk - 1;
    s.pred_begin = node + tk;
    s.pred_end = node + 2 * tk - 1;
    return s;
}

MtpModel::MtpModel(Direction direction, ModelConfig config)
    : direction_(direction), cfg_(std::move(config)) {
    cfg_.validate();
    init_params();
}

void MtpModel::init_params() {
    const std::size_t D = cfg_.width;
    auto declare = [&](const std::string& name, Shape shape) {
        params_.emplace(name, Param(name, std::move(shape)));
    };
    declare("enc.fc1.w", {kPoseDim, D});
    declare("enc.fc1.b", {D});
    declare("enc.fc2.w", {D, D});
    declare("enc.fc2.b", {D});
    for (std::size_t j = 0; j < cfg_.n_layers(); ++j) {
        const std::string base = "conv." + std::to_string(j + 1);
        declare(base + ".k", {cfg_.kernel_sizes[j], D, D});
        declare(base + ".b", {D});
    }
    for (const auto& [layer, ts] : cfg_.supervised) {
        const std::string base = "dec." + std::to_string(ts);
        declare(base + ".fc1.w", {D, D});
        declare(base + ".fc1.b", {D});
        declare(base + ".fc2.w", {D, static_cast<std::size_t>(ts) * kPoseDim});
        declare(base + ".fc2.b", {static_cast<std::size_t>(ts) * kPoseDim});
    }

    // Fan-in-scaled uniform init, seeded; the past model gets a distinct
    // stream so the two directions never share weights.
    std::mt19937_64 rng(cfg_.seed * 2 + (direction_ == Direction::Past ? 1 : 0));
    auto init = [&](Param& param, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& v : param.value.data) v = dist(rng);
    };
    // Fixed iteration order (declaration order) keeps init deterministic.
    init(p("enc.fc1.w"), kPoseDim);
    init(p("enc.fc2.w"), D);
    for (std::size_t j = 0; j < cfg_.n_layers(); ++j)
        init(p("conv." + std::to_string(j + 1) + ".k"), cfg_.kernel_sizes[j] * D);
    for (const auto& [layer, ts] : cfg_.supervised) {
        init(p("dec." + std::to_string(ts) + ".fc1.w"), D);
        init(p("dec." + std::to_string(ts) + ".fc2.w"), D);
    }
    // ReLU-followed layers get a small positive bias so no unit starts dead
    // (or, worse, exactly on the kink); linear output biases start at zero.
    auto bias = [&](const std::string& name) { p(name).value.fill(0.01); };
    bias("enc.fc1.b");
    bias("enc.fc2.b");
    for (std::size_t j = 0; j < cfg_.n_layers(); ++j)
        bias("conv." + std::to_string(j + 1) + ".b");
    for (const auto& [layer, ts] : cfg_.supervised)
        bias("dec." + std::to_string(ts) + ".fc1.b");
}

Param& MtpModel::param(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end())
        throw std::invalid_argument("unknown parameter '" + name + "'");
    return it->second;
}

Tensor MtpModel::encode(const Tensor& poses) const {
    if (poses.rank() != 2 || poses.dim(1) != kPoseDim)
        throw std::invalid_argument("encode: expected [T, 50], got " +
                                    shape_str(poses.shape));
    Tensor h = relu_forward(fc_forward(poses, p("enc.fc1.w").value, p("enc.fc1.b").value));
    return relu_forward(fc_forward(h, p("enc.fc2.w").value, p("enc.fc2.b").value));
}

std::map<int, Tensor> MtpModel::forward(const Tensor& poses) const {
    const std::size_t T = poses.dim(0);
    const std::size_t min_rf = receptive_field(cfg_, cfg_.supervised.front().first);
    if (T < min_rf)
        throw std::invalid_argument("forward: trajectory length " + std::to_string(T) +
                                    " below the shallowest receptive field " +
                                    std::to_string(min_rf));
    std::map<int, Tensor> out;
    Tensor h = encode(poses);
    for (std::size_t j = 0; j < cfg_.n_layers(); ++j) {
        const int layer = static_cast<int>(j + 1);
        if (receptive_field(cfg_, layer) > T) break;
        const std::string base = "conv." + std::to_string(layer);
        h = relu_forward(conv1d_forward(h, p(base + ".k").value, p(base + ".b").value));
        if (cfg_.is_supervised(layer)) out.emplace(layer, h);
    }
    return out;
}

Tensor MtpModel::decode(int layer, const Tensor& activation) const {
    const int ts = cfg_.timescale_of(layer);
    const std::string base = "dec." + std::to_string(ts);
    Tensor h = relu_forward(
        fc_forward(activation, p(base + ".fc1.w").value, p(base + ".fc1.b").value));
    return fc_forward(h, p(base + ".fc2.w").value, p(base + ".fc2.b").value);
}

Tensor MtpModel::predict_window(const Tensor& input, int layer) const {
    const std::size_t rf = receptive_field(cfg_, layer);
    if (!cfg_.is_supervised(layer))
        throw std::invalid_argument("predict_window: layer " + std::to_string(layer) +
                                    " is not supervised");
    if (input.rank() != 2 || input.dim(0) != rf || input.dim(1) != kPoseDim)
        throw std::invalid_argument("predict_window: expected [" + std::to_string(rf) +
                                    ", 50], got " + shape_str(input.shape));
    const std::map<int, Tensor> acts = forward(input);
    const Tensor& act = acts.at(layer);  // exactly one node
    Tensor pred = decode(layer, act);    // [1, t_k*50]
    return Tensor({static_cast<std::size_t>(cfg_.timescale_of(layer)), kPoseDim},
                  std::move(pred.data));
}

std::map<int, Tape::NodeId> MtpModel::forward_tape(Tape& tape, Tape::NodeId poses,
                                                   int depth_layer) {
    std::map<int, Tape::NodeId> out;
    const std::size_t T = tape.value(poses).dim(0);
    Tape::NodeId h = tape.relu(tape.fully_connected(poses, tape.use(p("enc.fc1.w")),
                                                    tape.use(p("enc.fc1.b"))));
    h = tape.relu(
        tape.fully_connected(h, tape.use(p("enc.fc2.w")), tape.use(p("enc.fc2.b"))));
    for (int layer = 1; layer <= depth_layer; ++layer) {
        if (receptive_field(cfg_, layer) > T) break;
        const std::string base = "conv." + std::to_string(layer);
        h = tape.relu(tape.conv1d_valid(h, tape.use(p(base + ".k")),
                                        tape.use(p(base + ".b"))));
        if (cfg_.is_supervised(layer)) out.emplace(layer, h);
    }
    return out;
}

Tape::NodeId MtpModel::decode_tape(Tape& tape, int layer, Tape::NodeId activation) {
    const int ts = cfg_.timescale_of(layer);
    const std::string base = "dec." + std::to_string(ts);
    Tape::NodeId h = tape.relu(tape.fully_connected(
        activation, tape.use(p(base + ".fc1.w")), tape.use(p(base + ".fc1.b"))));
    return tape.fully_connected(h, tape.use(p(base + ".fc2.w")),
                                tape.use(p(base + ".fc2.b")));
}

std::vector<Param*> MtpModel::params() {
    std::vector<Param*> out;
    for (auto& [name, param] : params_) out.push_back(&param);
    return out;
}

std::vector<Param*> MtpModel::params_up_to(int depth_layer) {
    std::vector<Param*> out;
    for (auto& [name, param] : params_) {
        if (name.rfind("enc.", 0) == 0) {
            out.push_back(&param);
        } else if (name.rfind("conv.", 0) == 0) {
            const int layer = std::stoi(name.substr(5));
            if (layer <= depth_layer) out.push_back(&param);
        } else if (name.rfind("dec.", 0) == 0) {
            const int ts = std::stoi(name.substr(4));
            for (const auto& [layer, t] : cfg_.supervised)
                if (t == ts && layer <= depth_layer) out.push_back(&param);
        }
    }
    return out;
}

std::size_t MtpModel::param_count() const {
    std::size_t n = 0;
    for (const auto& [name, param] : params_) n += param.value.numel();
    return n;
}

std::size_t MtpModel::expected_param_count(const ModelConfig& cfg) {
    const std::size_t D = cfg.width;
    std::size_t n = kPoseDim * D + D + D * D + D;  // encoder
    for (std::size_t k : cfg.kernel_sizes) n += k * D * D + D;
    for (const auto& [layer, ts] : cfg.supervised) {
        const std::size_t out = static_cast<std::size_t>(ts) * kPoseDim;
        n += D * D + D + D * out + out;
    }
    return n;
}

// Checkpoint: JSON container with a version field, the config sidecar, and
// per-parameter shape + flat data + Adam state so resumed training continues
// the optimizer trajectory.
static constexpr int kCheckpointVersion = 1;

void MtpModel::save_checkpoint(const std::string& path) const {
    json out;
    out["version"] = kCheckpointVersion;
    out["direction"] = to_string(direction_);
    out["config"] = {{"width", cfg_.width},
                     {"kernel_sizes", cfg_.kernel_sizes},
                     {"supervised", cfg_.supervised},
                     {"seed", cfg_.seed}};
    json params = json::object();
    for (const auto& [name, param] : params_) {
        params[name] = {{"shape", param.value.shape},
                        {"data", param.value.data},
                        {"m", param.m.data},
                        {"v", param.v.data},
                        {"step", param.step}};
    }
    out["params"] = std::move(params);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write checkpoint " + path);
    f << out.dump() << '\n';
}

MtpModel MtpModel::load_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open checkpoint " + path);
    json in = json::parse(f);
    if (!in.contains("version") || in["version"].get<int>() != kCheckpointVersion)
        throw std::runtime_error("checkpoint " + path + ": unsupported version");
    ModelConfig cfg;
    cfg.width = in["config"]["width"].get<std::size_t>();
    cfg.kernel_sizes = in["config"]["kernel_sizes"].get<std::vector<std::size_t>>();
    cfg.supervised = in["config"]["supervised"].get<std::vector<std::pair<int, int>>>();
    cfg.seed = in["config"]["seed"].get<std::uint64_t>();
    MtpModel model(direction_from_string(in["direction"].get<std::string>()), cfg);
    for (auto& [name, param] : model.params_) {
        if (!in["params"].contains(name))
            throw std::runtime_error("checkpoint " + path + ": missing parameter " + name);
        const json& pj = in["params"][name];
        const Shape shape = pj["shape"].get<Shape>();
        if (shape != param.value.shape)
            throw std::runtime_error("checkpoint " + path + ": shape mismatch for " + name);
        param.value.data = pj["data"].get<std::vector<double>>();
        param.m.data = pj["m"].get<std::vector<double>>();
        param.v.data = pj["v"].get<std::vector<double>>();
        param.step = pj["step"].get<std::int64_t>();
        if (param.value.data.size() != param.value.numel())
            throw std::runtime_error("checkpoint " + path + ": data size mismatch for " +
                                     name);
    }
    return model;
}

}  // namespace mtp
