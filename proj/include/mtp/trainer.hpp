#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mtp/loss.hpp"
#include "mtp/model.hpp"
#include "mtp/trajectory.hpp"

namespace mtp {

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    AdamConfig adam;
    // Per-epoch multiplicative learning-rate decay; 1.0 keeps the rate fixed.
    double lr_decay = 1.0;
    // 0 means the per-timescale default stride 2*t_k (non-overlapping).
    std::size_t window_stride = 0;
    std::uint64_t shuffle_seed = 0;
    std::string checkpoint_path;      // empty disables periodic checkpoints
    std::size_t checkpoint_interval = 0;  // epochs; 0 disables
    bool normalize_input = true;

    void validate() const;
};

struct SubEpochStats {
    std::size_t epoch = 0;
    std::size_t sub_epoch = 0;  // 1-based depth into the timescale schedule
    int timescale = 0;
    double mean_loss = 0.0;
    std::size_t window_count = 0;
    double wall_seconds = 0.0;
    bool skipped = false;
};

struct TrainReport {
    std::vector<SubEpochStats> sub_epochs;
    std::vector<double> epoch_loss;  // loss of the last sub-epoch of each epoch

    std::string to_json() const;
    std::string to_csv() const;
};

// Sub-epoch window construction: L_in = L_out = t_k, default stride 2*t_k,
// remainder dropped. The dataset is expected to be pre-normalized (and
// pre-reversed for the past direction).
std::vector<Window> make_subepoch_windows(const std::vector<PoseTrajectory>& trajs,
                                          int timescale, std::size_t stride);

// One sub-epoch at curriculum depth `depth` (1-based index into the
// supervised schedule): shuffles windows, batches them, and applies Adam to
// the parameters of layers <= schedule[depth-1]. Returns the mean window
// loss; NaN/Inf aborts with a diagnostic.
double train_subepoch(MtpModel& model, std::vector<Window> windows, int depth,
                      const TrainConfig& cfg, std::mt19937_64& rng);

// Full curriculum training of one direction. For Direction::Past every
// trajectory is reversed before windowing. Deterministic given seeds.
std::pair<MtpModel, TrainReport> train(const Dataset& dataset, const ModelConfig& model_cfg,
                                       const TrainConfig& train_cfg, Direction direction);

// Resume variant used by the CLI: continues optimizer state from `model`.
TrainReport train_into(MtpModel& model, const Dataset& dataset, const TrainConfig& cfg);

}  // namespace mtp
