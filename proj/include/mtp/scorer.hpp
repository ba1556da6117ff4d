#pragma once

#include <map>
#include <string>
#include <vector>

#include "mtp/loss.hpp"
#include "mtp/model.hpp"
#include "mtp/trajectory.hpp"

namespace mtp {

struct ScoringOptions {
    std::size_t stride = 1;            // test-time sliding stride
    std::vector<int> timescales;       // empty = every supervised timescale
    bool use_future = true;
    bool use_past = true;
    double no_person_score = 0.0;      // score of frames nobody was tracked in
    bool normalize_input = true;
    std::size_t threads = 1;
};

// Per-timescale sliding-window errors of one model over one trajectory,
// aligned to the trajectory's own frame order. For a past-direction model
// the trajectory is reversed internally and the result mapped back, so
// index t always refers to the original timeline.
LayerErrorSeries timescale_errors(const MtpModel& model, const PoseTrajectory& traj,
                                  int layer, std::size_t stride = 1,
                                  bool normalize_input = true);

// All (direction, timescale) series of one person.
struct PersonErrors {
    std::string video_id;
    std::string track_id;
    std::int64_t start_frame = 0;
    std::size_t length = 0;

    struct Entry {
        Direction direction;
        int timescale;
        LayerErrorSeries series;
    };
    std::vector<Entry> entries;
};

PersonErrors person_errors(const MtpModel* future_model, const MtpModel* past_model,
                           const PoseTrajectory& traj, const ScoringOptions& opts);

// Voting combination for a single person: per frame, the mean over all
// covering (direction, timescale) series.
struct CombinedSeries {
    std::vector<double> values;
    std::vector<std::size_t> coverage;  // |S(t)|
};
CombinedSeries combine(const PersonErrors& person);

struct ScoreEntry {
    double score = 0.0;
    std::size_t coverage = 0;  // |S(t)| after person fusion
    bool flag = false;
};

struct ScoreSeries {
    std::map<FrameKey, ScoreEntry> entries;
};

// Scene-level scoring: per (video, frame) the per-(direction, timescale)
// max over persons, then the voting average. Frames covered by nothing get
// no entry (the evaluator substitutes the no-person score).
ScoreSeries score_dataset(const MtpModel* future_model, const MtpModel* past_model,
                          const Dataset& dataset, const ScoringOptions& opts);

void apply_threshold(ScoreSeries& scores, double threshold);

void save_scores_csv(const ScoreSeries& scores, const std::string& path);
ScoreSeries load_scores_csv(const std::string& path);

// Diagnostic dump: one row per (video, frame, track, direction, timescale)
// with a defined error; reproduces per-timescale error curves.
void save_timescale_csv(const std::vector<PersonErrors>& persons, const std::string& path);

}  // namespace mtp
