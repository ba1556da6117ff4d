#include "mtp/synthgen.hpp"

#include <algorithm>
#include <cmath>

namespace mtp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 25-joint template (BODY_25-style ordering is irrelevant here; only the
// body plan matters). Offsets from the root in pixels, y grows downward.
struct JointTemplate {
    double ox, oy;
    double swing;  // limb-swing multiplier, signed for phase
};

const JointTemplate kSkeleton[25] = {
    {0, -80, 0.0},    // head
    {0, -60, 0.0},    // neck
    {-18, -55, 0.0},  // r shoulder
    {-22, -30, -0.6}, // r elbow
    {-24, -5, -1.0},  // r wrist
    {18, -55, 0.0},   // l shoulder
    {22, -30, 0.6},   // l elbow
    {24, -5, 1.0},    // l wrist
    {0, 0, 0.0},      // mid hip
    {-10, 0, 0.0},    // r hip
    {-12, 40, -0.8},  // r knee
    {-13, 80, -1.2},  // r ankle
    {10, 0, 0.0},     // l hip
    {12, 40, 0.8},    // l knee
    {13, 80, 1.2},    // l ankle
    {-5, -85, 0.0},   // r eye
    {5, -85, 0.0},    // l eye
    {-9, -82, 0.0},   // r ear
    {9, -82, 0.0},    // l ear
    {11, 86, 1.2},    // l big toe
    {15, 86, 1.2},    // l small toe
    {13, 82, 1.2},    // l heel
    {-11, 86, -1.2},  // r big toe
    {-15, 86, -1.2},  // r small toe
    {-13, 82, -1.2},  // r heel
};

std::size_t min_duration(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::Jump: return 3;
        case AnomalyKind::Run: return 10;
        case AnomalyKind::Loiter: return 25;
    }
    return 0;
}

std::size_t max_duration(AnomalyKind k) {
    return k == AnomalyKind::Jump ? 7 : static_cast<std::size_t>(-1);
}

}  // namespace

std::string to_string(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::Jump: return "jump";
        case AnomalyKind::Loiter: return "loiter";
        case AnomalyKind::Run: return "run";
    }
    return "?";
}

AnomalyKind anomaly_kind_from_string(const std::string& s) {
    if (s == "jump") return AnomalyKind::Jump;
    if (s == "loiter") return AnomalyKind::Loiter;
    if (s == "run") return AnomalyKind::Run;
    throw std::invalid_argument("unknown anomaly kind '" + s + "'");
}

void SynthConfig::validate() const {
    if (width == 0 || height == 0)
        throw std::invalid_argument("synth: frame dimensions must be positive");
    if (trajectory_length < 1)
        throw std::invalid_argument("synth: trajectory_length must be >= 1");
    if (stride_px < 0 || osc_amplitude < 0 || noise_std < 0 || osc_period <= 0)
        throw std::invalid_argument("synth: gait parameters must be non-negative");
    for (const AnomalySpec& a : anomalies) {
        if (a.onset + a.duration > trajectory_length)
            throw std::invalid_argument("synth: anomaly [" + to_string(a.kind) + " at " +
                                        std::to_string(a.onset) + " for " +
                                        std::to_string(a.duration) +
                                        "] exceeds trajectory length " +
                                        std::to_string(trajectory_length));
        if (a.duration < min_duration(a.kind) || a.duration > max_duration(a.kind))
            throw std::invalid_argument("synth: " + to_string(a.kind) + " duration " +
                                        std::to_string(a.duration) + " outside allowed range");
    }
}

PoseTrajectory gen_normal(const SynthConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    const std::size_t T = cfg.trajectory_length;
    const double margin = 120.0;
    std::uniform_real_distribution<double> ux(margin, static_cast<double>(cfg.width) - margin);
    std::uniform_real_distribution<double> uy(margin + 100.0,
                                              static_cast<double>(cfg.height) - margin);
    std::uniform_real_distribution<double> uh(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> uconf(0.5, 1.0);
    std::normal_distribution<double> jitter(0.0, cfg.noise_std);

    double rx = ux(rng), ry = uy(rng);
    double heading = uh(rng);

    PoseTrajectory traj;
    traj.width = cfg.width;
    traj.height = cfg.height;
    traj.frames.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        PoseFrame f;
        f.frame_index = static_cast<std::int64_t>(t);
        f.keypoints.resize(kNumJoints);
        const double phase = 2.0 * kPi * static_cast<double>(t) / cfg.osc_period;
        const double swing = cfg.osc_amplitude * std::sin(phase);
        const double bob = 0.25 * cfg.osc_amplitude * std::sin(2.0 * phase);
        for (std::size_t j = 0; j < kNumJoints; ++j) {
            const JointTemplate& jt = kSkeleton[j];
            Keypoint& k = f.keypoints[j];
            k.x = rx + jt.ox + jt.swing * swing + jitter(rng);
            k.y = ry + jt.oy + bob + jitter(rng);
            k.c = uconf(rng);
        }
        traj.frames.push_back(std::move(f));

        // advance root, reflecting off margins
        double nx = rx + cfg.stride_px * std::cos(heading);
        double ny = ry + cfg.stride_px * std::sin(heading);
        if (nx < margin || nx > static_cast<double>(cfg.width) - margin)
            heading = kPi - heading;
        if (ny < margin || ny > static_cast<double>(cfg.height) - margin)
            heading = -heading;
        rx += cfg.stride_px * std::cos(heading);
        ry += cfg.stride_px * std::sin(heading);
    }
    return traj;
}

std::vector<int> inject_anomaly(PoseTrajectory& traj, const AnomalySpec& spec,
                                std::mt19937_64& rng) {
    const std::size_t T = traj.length();
    if (spec.onset + spec.duration > T)
        throw std::invalid_argument("inject_anomaly: window exceeds trajectory");
    std::vector<int> labels(T, 0);
    for (std::size_t t = spec.onset; t < spec.onset + spec.duration; ++t) labels[t] = 1;

    if (spec.kind == AnomalyKind::Jump) {
        // vertical impulse on all joints, peak well above gait oscillation
        const double amp = 40.0;
        for (std::size_t t = spec.onset; t < spec.onset + spec.duration; ++t) {
            const double progress = static_cast<double>(t - spec.onset + 1) /
                                    static_cast<double>(spec.duration + 1);
            const double dy = -amp * std::sin(kPi * progress);
            for (Keypoint& k : traj.frames[t].keypoints) k.y += dy;
        }
        return labels;
    }

    // Root-path edits: derive per-frame root displacements, modify them inside
    // the window, reintegrate, and translate each frame rigidly. Limb motion
    // relative to the root stays untouched (locally normal gait).
    std::vector<double> rxs(T), rys(T);
    for (std::size_t t = 0; t < T; ++t) {
        double sx = 0.0, sy = 0.0;
        for (const Keypoint& k : traj.frames[t].keypoints) {
            sx += k.x;
            sy += k.y;
        }
        rxs[t] = sx / static_cast<double>(kNumJoints);
        rys[t] = sy / static_cast<double>(kNumJoints);
    }
    std::vector<double> dx(T - 1), dy(T - 1);
    for (std::size_t t = 0; t + 1 < T; ++t) {
        dx[t] = rxs[t + 1] - rxs[t];
        dy[t] = rys[t + 1] - rys[t];
    }

    const std::size_t last = std::min(spec.onset + spec.duration - 1, T - 2);
    if (spec.kind == AnomalyKind::Run) {
        for (std::size_t t = spec.onset; t <= last; ++t) {
            dx[t] *= 3.0;
            dy[t] *= 3.0;
        }
    } else {  // Loiter
        // Circular milling at unchanged speed: per-frame displacements stay
        // normal, but the persistent turn curls the path into a small circle
        // (radius ~ speed/rate), collapsing net displacement over the window.
        std::uniform_real_distribution<double> rate(0.10, 0.15);
        std::uniform_real_distribution<double> jitter(-0.05, 0.05);
        const double omega = (rng() & 1 ? 1.0 : -1.0) * rate(rng);
        double heading = spec.onset > 0 ? std::atan2(dy[spec.onset - 1], dx[spec.onset - 1])
                                        : std::atan2(dy[spec.onset], dx[spec.onset]);
        for (std::size_t t = spec.onset; t <= last; ++t) {
            heading += omega + jitter(rng);
            const double speed = std::hypot(dx[t], dy[t]);
            dx[t] = speed * std::cos(heading);
            dy[t] = speed * std::sin(heading);
        }
    }

    // reintegrate and shift frames so the path stays continuous after the window
    double cx = rxs[0], cy = rys[0];
    for (std::size_t t = 0; t < T; ++t) {
        const double ox = cx - rxs[t];
        const double oy = cy - rys[t];
        for (Keypoint& k : traj.frames[t].keypoints) {
            k.x += ox;
            k.y += oy;
        }
        if (t + 1 < T) {
            cx += dx[t];
            cy += dy[t];
        }
    }
    return labels;
}

Dataset generate_dataset(const SynthConfig& cfg) {
    cfg.validate();
    // overlap check across the spec list
    std::vector<AnomalySpec> sorted = cfg.anomalies;
    std::sort(sorted.begin(), sorted.end(),
              [](const AnomalySpec& a, const AnomalySpec& b) { return a.onset < b.onset; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].onset < sorted[i - 1].onset + sorted[i - 1].duration)
            throw std::invalid_argument("synth: overlapping anomaly specs");
    if (cfg.n_anomalous > 0 && cfg.anomalies.empty())
        throw std::invalid_argument("synth: anomalous trajectories requested without specs");

    Dataset ds;
    std::size_t idx = 0;
    auto make = [&](bool anomalous, std::size_t i) {
        std::mt19937_64 rng(cfg.seed * 1000003ULL + idx);
        PoseTrajectory traj = gen_normal(cfg, rng);
        traj.video_id = (anomalous ? "anom_" : "norm_") + std::to_string(i);
        traj.track_id = "0";
        std::vector<int> labels(traj.length(), 0);
        if (anomalous) {
            const AnomalySpec& spec = cfg.anomalies[i % cfg.anomalies.size()];
            labels = inject_anomaly(traj, spec, rng);
        }
        for (std::size_t t = 0; t < traj.length(); ++t)
            ds.labels[{traj.video_id, traj.frames[t].frame_index}] = labels[t];
        ds.trajectories.push_back(std::move(traj));
        ++idx;
    };
    for (std::size_t i = 0; i < cfg.n_normal; ++i) make(false, i);
    for (std::size_t i = 0; i < cfg.n_anomalous; ++i) make(true, i);
    return ds;
}

}  // namespace mtp
