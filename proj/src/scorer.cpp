#include "mtp/scorer.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace mtp {

static int layer_of_timescale(const ModelConfig& cfg, int timescale) {
    for (const auto& [layer, ts] : cfg.supervised)
        if (ts == timescale) return layer;
    throw std::invalid_argument("no supervised layer at timescale " +
                                std::to_string(timescale));
}

LayerErrorSeries timescale_errors(const MtpModel& model, const PoseTrajectory& traj,
                                  int layer, std::size_t stride, bool normalize_input) {
    const ModelConfig& cfg = model.config();
    const std::size_t tk = static_cast<std::size_t>(cfg.timescale_of(layer));
    const std::size_t T = traj.length();

    LayerErrorSeries out;
    out.timescale = static_cast<int>(tk);
    out.values.assign(T, 0.0);
    out.coverage.assign(T, 0);
    if (T < 2 * tk) return out;  // too short for this timescale

    PoseTrajectory work = normalize_input ? normalize(traj) : traj;
    if (model.direction() == Direction::Past) work = work.reversed();

    const Tensor poses = work.stack();
    Tensor weights({T, kNumJoints});
    for (std::size_t t = 0; t < T; ++t) {
        const Tensor w = confidence_weights(work.frames[t]).weights;
        std::copy(w.data.begin(), w.data.end(), weights.data.begin() + t * kNumJoints);
    }

    // One batched forward; node o equals the window starting at offset o.
    const std::map<int, Tensor> acts = model.forward(poses);
    const Tensor preds = model.decode(layer, acts.at(layer));  // [M, tk*50]

    // Accumulate Eq.-3-style averages over windows at offsets 0, stride, ...
    std::vector<double> sums(T, 0.0);
    std::vector<std::size_t> counts(T, 0);
    for (std::size_t o = 0; o + 2 * tk <= T; o += stride) {
        for (std::size_t j = 0; j < tk; ++j) {
            const std::size_t t = o + tk + j;
            Tensor pred({1, kPoseDim});
            std::copy_n(preds.data.begin() + (o * tk + j) * kPoseDim, kPoseDim,
                        pred.data.begin());
            Tensor tru({1, kPoseDim});
            std::copy_n(poses.data.begin() + t * kPoseDim, kPoseDim, tru.data.begin());
            Tensor w({1, kNumJoints});
            std::copy_n(weights.data.begin() + t * kNumJoints, kNumJoints, w.data.begin());
            sums[t] += row_frame_errors_forward(pred, tru, w).data[0];
            ++counts[t];
        }
    }

    const bool reversed = model.direction() == Direction::Past;
    for (std::size_t t = 0; t < T; ++t) {
        if (counts[t] == 0) continue;
        const std::size_t orig = reversed ? T - 1 - t : t;
        out.values[orig] = sums[t] / static_cast<double>(counts[t]);
        out.coverage[orig] = counts[t];
    }
    return out;
}

PersonErrors person_errors(const MtpModel* future_model, const MtpModel* past_model,
                           const PoseTrajectory& traj, const ScoringOptions& opts) {
    PersonErrors out;
    out.video_id = traj.video_id;
    out.track_id = traj.track_id;
    out.start_frame = traj.start_frame();
    out.length = traj.length();

    auto run = [&](const MtpModel* model, Direction dir) {
        if (!model) return;
        const ModelConfig& cfg = model->config();
        for (const auto& [layer, ts] : cfg.supervised) {
            if (!opts.timescales.empty() &&
                std::find(opts.timescales.begin(), opts.timescales.end(), ts) ==
                    opts.timescales.end())
                continue;
            PersonErrors::Entry e;
            e.direction = dir;
            e.timescale = ts;
            e.series = timescale_errors(*model, traj, layer, opts.stride,
                                        opts.normalize_input);
            out.entries.push_back(std::move(e));
        }
    };
    if (opts.use_future) run(future_model, Direction::Future);
    if (opts.use_past) run(past_model, Direction::Past);
    return out;
}

CombinedSeries combine(const PersonErrors& person) {
    CombinedSeries out;
    out.values.assign(person.length, 0.0);
    out.coverage.assign(person.length, 0);
    for (std::size_t t = 0; t < person.length; ++t) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& e : person.entries) {
            if (e.series.coverage[t] > 0) {
                sum += e.series.values[t];
                ++n;
            }
        }
        out.coverage[t] = n;
        if (n > 0) out.values[t] = sum / static_cast<double>(n);
    }
    return out;
}

ScoreSeries score_dataset(const MtpModel* future_model, const MtpModel* past_model,
                          const Dataset& dataset, const ScoringOptions& opts) {
    const std::size_t n = dataset.trajectories.size();
    std::vector<PersonErrors> persons(n);

    const std::size_t workers = std::max<std::size_t>(1, opts.threads);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i)
            persons[i] = person_errors(future_model, past_model, dataset.trajectories[i],
                                       opts);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < std::min(workers, n); ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    persons[i] = person_errors(future_model, past_model,
                                               dataset.trajectories[i], opts);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    // Per (video, frame, direction, timescale): max over persons (Eq. 8's max
    // sits inside the voting sum).
    struct Slot {
        std::map<std::pair<int, int>, double> max_by_series;  // (dir, ts) -> max error
    };
    std::map<FrameKey, Slot> slots;
    for (const PersonErrors& p : persons) {
        for (const auto& e : p.entries) {
            const std::pair<int, int> key{e.direction == Direction::Future ? 0 : 1,
                                          e.timescale};
            for (std::size_t t = 0; t < p.length; ++t) {
                if (e.series.coverage[t] == 0) continue;
                const FrameKey fk{p.video_id, p.start_frame + static_cast<std::int64_t>(t)};
                auto& slot = slots[fk].max_by_series;
                auto it = slot.find(key);
                if (it == slot.end())
                    slot.emplace(key, e.series.values[t]);
                else
                    it->second = std::max(it->second, e.series.values[t]);
            }
        }
    }

    ScoreSeries out;
    for (const auto& [fk, slot] : slots) {
        ScoreEntry entry;
        entry.coverage = slot.max_by_series.size();
        double sum = 0.0;
        for (const auto& [key, v] : slot.max_by_series) sum += v;
        entry.score = sum / static_cast<double>(entry.coverage);
        out.entries.emplace(fk, entry);
    }
    return out;
}

void apply_threshold(ScoreSeries& scores, double threshold) {
    if (threshold < 0.0)
        throw std::invalid_argument("apply_threshold: threshold must be >= 0");
    for (auto& [fk, e] : scores.entries) e.flag = e.score > threshold;
}

void save_scores_csv(const ScoreSeries& scores, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "video_id,frame,score,coverage,flag\n";
    out.precision(17);
    for (const auto& [fk, e] : scores.entries)
        out << fk.first << ',' << fk.second << ',' << e.score << ',' << e.coverage << ','
            << (e.flag ? 1 : 0) << '\n';
}

ScoreSeries load_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    ScoreSeries out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("video_id", 0) == 0) continue;
        std::istringstream ss(line);
        std::string video, frame_s, score_s, cov_s, flag_s;
        if (!std::getline(ss, video, ',') || !std::getline(ss, frame_s, ',') ||
            !std::getline(ss, score_s, ',') || !std::getline(ss, cov_s, ',') ||
            !std::getline(ss, flag_s))
            throw IoError("scores line " + std::to_string(line_no) + ": expected 5 fields");
        ScoreEntry e;
        e.score = std::stod(score_s);
        e.coverage = std::stoul(cov_s);
        e.flag = flag_s == "1";
        out.entries[{video, std::stoll(frame_s)}] = e;
    }
    return out;
}

void save_timescale_csv(const std::vector<PersonErrors>& persons, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "video_id,frame,track_id,direction,timescale,error\n";
    out.precision(17);
    for (const PersonErrors& p : persons) {
        for (const auto& e : p.entries) {
            for (std::size_t t = 0; t < p.length; ++t) {
                if (e.series.coverage[t] == 0) continue;
                out << p.video_id << ',' << p.start_frame + static_cast<std::int64_t>(t)
                    << ',' << p.track_id << ',' << to_string(e.direction) << ','
                    << e.timescale << ',' << e.series.values[t] << '\n';
            }
        }
    }
}

}  // namespace mtp
