#include "mtp/trainer.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace mtp {

using nlohmann::json;

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(lr_decay > 0.0) || lr_decay > 1.0)
        throw std::invalid_argument("train: lr_decay must be in (0, 1]");
    adam.validate();
}

std::string TrainReport::to_json() const {
    json out;
    out["epoch_loss"] = epoch_loss;
    json subs = json::array();
    for (const SubEpochStats& s : sub_epochs) {
        subs.push_back({{"epoch", s.epoch},
                        {"sub_epoch", s.sub_epoch},
                        {"timescale", s.timescale},
                        {"mean_loss", s.mean_loss},
                        {"windows", s.window_count},
                        {"wall_seconds", s.wall_seconds},
                        {"skipped", s.skipped}});
    }
    out["sub_epochs"] = std::move(subs);
    return out.dump(2);
}

std::string TrainReport::to_csv() const {
    std::ostringstream os;
    os << "epoch,sub_epoch,timescale,mean_loss,windows,skipped\n";
    for (const SubEpochStats& s : sub_epochs)
        os << s.epoch << ',' << s.sub_epoch << ',' << s.timescale << ',' << s.mean_loss
           << ',' << s.window_count << ',' << (s.skipped ? 1 : 0) << '\n';
    return os.str();
}

std::vector<Window> make_subepoch_windows(const std::vector<PoseTrajectory>& trajs,
                                          int timescale, std::size_t stride) {
    const std::size_t tk = static_cast<std::size_t>(timescale);
    const std::size_t step = stride == 0 ? 2 * tk : stride;
    std::vector<Window> out;
    for (const PoseTrajectory& traj : trajs) {
        std::vector<Window> w = windows(traj, tk, tk, step);
        out.insert(out.end(), std::make_move_iterator(w.begin()),
                   std::make_move_iterator(w.end()));
    }
    return out;
}

double train_subepoch(MtpModel& model, std::vector<Window> wins, int depth,
                      const TrainConfig& cfg, std::mt19937_64& rng) {
    const ModelConfig& mc = model.config();
    if (depth < 1 || static_cast<std::size_t>(depth) > mc.supervised.size())
        throw std::invalid_argument("train_subepoch: depth out of range");
    const int depth_layer = mc.supervised[depth - 1].first;
    if (wins.empty()) return 0.0;

    std::shuffle(wins.begin(), wins.end(), rng);
    std::vector<Param*> active = model.params_up_to(depth_layer);

    double loss_sum = 0.0;
    std::size_t done = 0;
    while (done < wins.size()) {
        const std::size_t batch =
            std::min(cfg.batch_size, wins.size() - done);
        double batch_loss = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            Tape tape;
            const Tape::NodeId loss = window_loss_tape(tape, model, wins[done + b],
                                                       depth_layer);
            // batch mean: scale each window's gradient by 1/batch
            const Tape::NodeId scaled = tape.scale(loss, 1.0 / static_cast<double>(batch));
            tape.backward(scaled);
            batch_loss += tape.value(loss).data[0];
        }
        batch_loss /= static_cast<double>(batch);
        if (!std::isfinite(batch_loss))
            throw std::runtime_error("train_subepoch: non-finite loss at depth " +
                                     std::to_string(depth));
        adam_step(active, cfg.adam);
        loss_sum += batch_loss * static_cast<double>(batch);
        done += batch;
    }
    return loss_sum / static_cast<double>(wins.size());
}

TrainReport train_into(MtpModel& model, const Dataset& dataset, const TrainConfig& cfg) {
    cfg.validate();
    const ModelConfig& mc = model.config();

    std::vector<PoseTrajectory> trajs;
    trajs.reserve(dataset.trajectories.size());
    for (const PoseTrajectory& t : dataset.trajectories) {
        PoseTrajectory u = cfg.normalize_input ? normalize(t) : t;
        trajs.push_back(model.direction() == Direction::Past ? u.reversed() : std::move(u));
    }

    // Window sets are identical every epoch; build them once per timescale.
    std::vector<std::vector<Window>> per_scale;
    bool any = false;
    for (const auto& [layer, ts] : mc.supervised) {
        per_scale.push_back(make_subepoch_windows(trajs, ts, cfg.window_stride));
        if (!per_scale.back().empty()) any = true;
    }
    if (!any)
        throw std::runtime_error("train: no trajectory long enough for any timescale");

    std::mt19937_64 rng(cfg.shuffle_seed);
    TrainReport report;
    TrainConfig ecfg = cfg;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        ecfg.adam.lr = cfg.adam.lr * std::pow(cfg.lr_decay, static_cast<double>(epoch - 1));
        double last_loss = 0.0;
        for (std::size_t s = 1; s <= mc.supervised.size(); ++s) {
            SubEpochStats st;
            st.epoch = epoch;
            st.sub_epoch = s;
            st.timescale = mc.supervised[s - 1].second;
            st.window_count = per_scale[s - 1].size();
            if (per_scale[s - 1].empty()) {
                st.skipped = true;
                std::cerr << "warning: sub-epoch " << s << " (timescale " << st.timescale
                          << ") skipped: no windows\n";
                report.sub_epochs.push_back(st);
                continue;
            }
            const auto t0 = std::chrono::steady_clock::now();
            st.mean_loss = train_subepoch(model, per_scale[s - 1], static_cast<int>(s),
                                          ecfg, rng);
            st.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            last_loss = st.mean_loss;
            report.sub_epochs.push_back(st);
        }
        report.epoch_loss.push_back(last_loss);
        if (!cfg.checkpoint_path.empty() && cfg.checkpoint_interval > 0 &&
            epoch % cfg.checkpoint_interval == 0)
            model.save_checkpoint(cfg.checkpoint_path);
    }
    return report;
}

std::pair<MtpModel, TrainReport> train(const Dataset& dataset, const ModelConfig& model_cfg,
                                       const TrainConfig& train_cfg, Direction direction) {
    MtpModel model(direction, model_cfg);
    TrainReport report = train_into(model, dataset, train_cfg);
    return {std::move(model), std::move(report)};
}

}  // namespace mtp
