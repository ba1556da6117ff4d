#include "mtp/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mtp {

using nlohmann::json;

Tensor PoseFrame::flatten() const {
    Tensor out({kPoseDim});
    for (std::size_t j = 0; j < kNumJoints; ++j) {
        out.data[2 * j] = keypoints[j].x;
        out.data[2 * j + 1] = keypoints[j].y;
    }
    return out;
}

Tensor PoseFrame::confidences() const {
    Tensor out({kNumJoints});
    for (std::size_t j = 0; j < kNumJoints; ++j) out.data[j] = keypoints[j].c;
    return out;
}

Tensor PoseTrajectory::stack() const {
    Tensor out({frames.size(), kPoseDim});
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const Tensor row = frames[t].flatten();
        std::copy(row.data.begin(), row.data.end(), out.data.begin() + t * kPoseDim);
    }
    return out;
}

PoseTrajectory PoseTrajectory::reversed() const {
    PoseTrajectory out = *this;
    std::reverse(out.frames.begin(), out.frames.end());
    const std::int64_t base = frames.front().frame_index;
    for (std::size_t t = 0; t < out.frames.size(); ++t)
        out.frames[t].frame_index = base + static_cast<std::int64_t>(t);
    return out;
}

static void validate_keypoint(const Keypoint& kp, std::size_t line_no) {
    if (!std::isfinite(kp.x) || !std::isfinite(kp.y))
        throw IoError("line " + std::to_string(line_no) + ": non-finite coordinate");
    if (!(kp.c >= 0.0 && kp.c <= 1.0))
        throw IoError("line " + std::to_string(line_no) + ": confidence " +
                      std::to_string(kp.c) + " outside [0, 1]");
}

Dataset load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    struct Rec {
        std::int64_t frame;
        PoseFrame pose;
        std::size_t width, height;
    };
    std::map<std::pair<std::string, std::string>, std::vector<Rec>> groups;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw IoError("line " + std::to_string(line_no) + ": " + e.what());
        }
        for (const char* key : {"video_id", "track_id", "frame", "width", "height", "keypoints"})
            if (!obj.contains(key))
                throw IoError("line " + std::to_string(line_no) + ": missing key '" +
                              key + "'");
        const auto& kps = obj["keypoints"];
        if (!kps.is_array() || kps.size() != kNumJoints)
            throw IoError("line " + std::to_string(line_no) + ": expected 25 keypoints, got " +
                          std::to_string(kps.size()));
        Rec rec;
        rec.frame = obj["frame"].get<std::int64_t>();
        rec.width = obj["width"].get<std::size_t>();
        rec.height = obj["height"].get<std::size_t>();
        rec.pose.frame_index = rec.frame;
        rec.pose.keypoints.reserve(kNumJoints);
        for (const auto& kp : kps) {
            if (!kp.is_array() || kp.size() != 3)
                throw IoError("line " + std::to_string(line_no) +
                              ": keypoint must be [x, y, c]");
            Keypoint k{kp[0].get<double>(), kp[1].get<double>(), kp[2].get<double>()};
            validate_keypoint(k, line_no);
            rec.pose.keypoints.push_back(k);
        }
        groups[{obj["video_id"].get<std::string>(), obj["track_id"].get<std::string>()}]
            .push_back(std::move(rec));
    }

    Dataset ds;
    for (auto& [key, recs] : groups) {
        std::stable_sort(recs.begin(), recs.end(),
                         [](const Rec& a, const Rec& b) { return a.frame < b.frame; });
        PoseTrajectory cur;
        auto flush = [&]() {
            if (!cur.frames.empty()) ds.trajectories.push_back(std::move(cur));
            cur = PoseTrajectory{};
        };
        for (const Rec& r : recs) {
            if (!cur.frames.empty() &&
                r.frame != cur.frames.back().frame_index + 1)
                flush();
            if (cur.frames.empty()) {
                cur.video_id = key.first;
                cur.track_id = key.second;
                cur.width = r.width;
                cur.height = r.height;
            }
            cur.frames.push_back(r.pose);
        }
        flush();
    }
    return ds;
}

void save_jsonl(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const PoseTrajectory& traj : ds.trajectories) {
        for (const PoseFrame& f : traj.frames) {
            json obj;
            obj["video_id"] = traj.video_id;
            obj["track_id"] = traj.track_id;
            obj["frame"] = f.frame_index;
            obj["width"] = traj.width;
            obj["height"] = traj.height;
            json kps = json::array();
            for (const Keypoint& k : f.keypoints) kps.push_back({k.x, k.y, k.c});
            obj["keypoints"] = std::move(kps);
            out << obj.dump() << '\n';
        }
    }
}

std::map<FrameKey, int> load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::map<FrameKey, int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("video_id", 0) == 0) continue;
        std::istringstream ss(line);
        std::string video, frame_s, label_s;
        if (!std::getline(ss, video, ',') || !std::getline(ss, frame_s, ',') ||
            !std::getline(ss, label_s))
            throw IoError("labels line " + std::to_string(line_no) + ": expected 3 fields");
        const int label = std::stoi(label_s);
        if (label != 0 && label != 1)
            throw IoError("labels line " + std::to_string(line_no) + ": label must be 0 or 1");
        labels[{video, std::stoll(frame_s)}] = label;
    }
    return labels;
}

void save_labels_csv(const std::map<FrameKey, int>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "video_id,frame,label\n";
    for (const auto& [key, label] : labels)
        out << key.first << ',' << key.second << ',' << label << '\n';
}

PoseTrajectory normalize(const PoseTrajectory& traj) {
    if (traj.width == 0 || traj.height == 0)
        throw std::invalid_argument("normalize: frame dimensions must be positive");
    PoseTrajectory out = traj;
    const double w = static_cast<double>(traj.width);
    const double h = static_cast<double>(traj.height);
    for (PoseFrame& f : out.frames)
        for (Keypoint& k : f.keypoints) {
            k.x /= w;
            k.y /= h;
        }
    return out;
}

PoseTrajectory denormalize(const PoseTrajectory& traj) {
    if (traj.width == 0 || traj.height == 0)
        throw std::invalid_argument("denormalize: frame dimensions must be positive");
    PoseTrajectory out = traj;
    const double w = static_cast<double>(traj.width);
    const double h = static_cast<double>(traj.height);
    for (PoseFrame& f : out.frames)
        for (Keypoint& k : f.keypoints) {
            k.x *= w;
            k.y *= h;
        }
    return out;
}

ConfidenceWeights confidence_weights(const PoseFrame& frame) {
    ConfidenceWeights out;
    out.weights = Tensor({kNumJoints});
    double sum = 0.0;
    for (const Keypoint& k : frame.keypoints) sum += k.c;
    if (sum <= 0.0) {
        out.degenerate = true;
        out.weights.fill(1.0 / static_cast<double>(kNumJoints));
        return out;
    }
    for (std::size_t j = 0; j < kNumJoints; ++j)
        out.weights.data[j] = frame.keypoints[j].c / sum;
    return out;
}

std::vector<Window> windows(const PoseTrajectory& traj, std::size_t l_in,
                            std::size_t l_out, std::size_t stride) {
    if (l_in < 1 || l_out < 1 || stride < 1)
        throw std::invalid_argument("windows: l_in, l_out, stride must be >= 1");
    std::vector<Window> out;
    const std::size_t T = traj.length();
    if (T < l_in + l_out) return out;
    for (std::size_t off = 0; off + l_in + l_out <= T; off += stride) {
        Window w;
        w.track_id = traj.track_id;
        w.video_id = traj.video_id;
        w.offset = off;
        w.input = Tensor({l_in, kPoseDim});
        w.target = Tensor({l_out, kPoseDim});
        w.weights = Tensor({l_out, kNumJoints});
        w.input_weights = Tensor({l_in, kNumJoints});
        for (std::size_t t = 0; t < l_in; ++t) {
            const Tensor row = traj.frames[off + t].flatten();
            std::copy(row.data.begin(), row.data.end(),
                      w.input.data.begin() + t * kPoseDim);
            const Tensor cw = confidence_weights(traj.frames[off + t]).weights;
            std::copy(cw.data.begin(), cw.data.end(),
                      w.input_weights.data.begin() + t * kNumJoints);
        }
        for (std::size_t t = 0; t < l_out; ++t) {
            const PoseFrame& f = traj.frames[off + l_in + t];
            const Tensor row = f.flatten();
            std::copy(row.data.begin(), row.data.end(),
                      w.target.data.begin() + t * kPoseDim);
            const Tensor cw = confidence_weights(f).weights;
            std::copy(cw.data.begin(), cw.data.end(),
                      w.weights.data.begin() + t * kNumJoints);
        }
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace mtp
