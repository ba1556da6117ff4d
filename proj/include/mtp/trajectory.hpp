#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtp/tensor.hpp"

namespace mtp {

constexpr std::size_t kNumJoints = 25;
constexpr std::size_t kPoseDim = 2 * kNumJoints;  // flattened (x1,y1,...,x25,y25)

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double c = 0.0;  // detector confidence in [0, 1]
};

struct PoseFrame {
    std::int64_t frame_index = 0;
    std::vector<Keypoint> keypoints;  // exactly 25

    // Flattened coordinates (x1,y1,...,x25,y25) as a [50] tensor.
    Tensor flatten() const;
    // Confidences as a [25] tensor.
    Tensor confidences() const;
};

struct PoseTrajectory {
    std::string track_id;
    std::string video_id;
    std::vector<PoseFrame> frames;  // contiguous frame indices, T >= 1
    std::size_t width = 0;
    std::size_t height = 0;

    std::size_t length() const { return frames.size(); }
    std::int64_t start_frame() const { return frames.front().frame_index; }

    // Poses as a [T, 50] tensor.
    Tensor stack() const;
    // Time-reversed copy (frame indices re-numbered to stay contiguous and
    // increasing; start_frame preserved).
    PoseTrajectory reversed() const;
};

using FrameKey = std::pair<std::string, std::int64_t>;  // (video_id, frame)

struct Dataset {
    std::vector<PoseTrajectory> trajectories;
    std::map<FrameKey, int> labels;  // optional, binary
};

// One training/scoring slice of a trajectory. `input` is [L_in, 50],
// `target` [L_out, 50], `weights` [L_out, 25] confidence weights of the
// target frames.
struct Window {
    std::string track_id;
    std::string video_id;
    std::size_t offset = 0;  // index of the first input frame in the trajectory
    Tensor input;
    Tensor target;
    Tensor weights;
    // Confidence weights of the input frames [L_in, 25]; shallow timescales
    // predict positions inside the input half during training.
    Tensor input_weights;
};

// Parse/validation failures carry the offending line where applicable.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// JSON Lines reader: one pose-frame object per line, keys video_id,
// track_id, frame, width, height, keypoints [[x,y,c] x 25]. Frames are
// grouped by (video_id, track_id), sorted by frame, and split into
// contiguous runs; a gap starts a new trajectory.
Dataset load_jsonl(const std::string& path);
void save_jsonl(const Dataset& ds, const std::string& path);

// Labels CSV with header video_id,frame,label.
std::map<FrameKey, int> load_labels_csv(const std::string& path);
void save_labels_csv(const std::map<FrameKey, int>& labels, const std::string& path);

// Coordinate scaling by frame dimensions. Confidences unchanged.
PoseTrajectory normalize(const PoseTrajectory& traj);
PoseTrajectory denormalize(const PoseTrajectory& traj);

// Eq-style confidence weights w_k = c_k / sum(c). A zero-confidence frame
// falls back to uniform 1/25 and reports degenerate = true.
struct ConfidenceWeights {
    Tensor weights;  // [25]
    bool degenerate = false;
};
ConfidenceWeights confidence_weights(const PoseFrame& frame);

// Slices `traj` into windows at offsets 0, stride, 2*stride, ... with
// offset + L_in + L_out <= T. Short trajectories yield an empty list.
std::vector<Window> windows(const PoseTrajectory& traj, std::size_t l_in,
                            std::size_t l_out, std::size_t stride);

}  // namespace mtp
