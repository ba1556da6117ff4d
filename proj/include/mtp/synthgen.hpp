#pragma once

#include <random>
#include <string>
#include <vector>

#include "mtp/trajectory.hpp"

namespace mtp {

enum class AnomalyKind { Jump, Loiter, Run };

std::string to_string(AnomalyKind k);
AnomalyKind anomaly_kind_from_string(const std::string& s);

struct AnomalySpec {
    AnomalyKind kind = AnomalyKind::Jump;
    std::size_t onset = 0;     // first anomalous frame (0-based)
    std::size_t duration = 0;  // frames
};

// Durations are constrained so each anomaly kind aligns with one of the
// model's timescales: jumps are short (3-7), runs medium (>= 10), loitering
// long (>= 25).
struct SynthConfig {
    std::uint64_t seed = 0;
    std::size_t n_normal = 10;
    std::size_t n_anomalous = 0;
    std::size_t trajectory_length = 100;
    double stride_px = 6.0;         // root displacement per frame
    double osc_amplitude = 3.0;     // limb swing amplitude (px)
    double osc_period = 8.0;        // limb swing period (frames)
    double noise_std = 0.4;         // per-coordinate Gaussian jitter (px)
    std::size_t width = 1920;
    std::size_t height = 1080;
    std::vector<AnomalySpec> anomalies;  // cycled over the anomalous trajectories

    void validate() const;
};

// One normal walking trajectory: a 25-joint template translated at constant
// velocity (reflecting off the frame margins) with sinusoidal limb
// oscillation and Gaussian jitter; confidences ~ U(0.5, 1).
PoseTrajectory gen_normal(const SynthConfig& cfg, std::mt19937_64& rng);

// Applies one anomaly in place and returns per-frame labels for the whole
// trajectory (1 inside the window). jump: vertical impulse on all joints;
// run: root velocity x3 in the window; loiter: circular milling at unchanged
// speed (low net displacement, locally normal gait).
std::vector<int> inject_anomaly(PoseTrajectory& traj, const AnomalySpec& spec,
                                std::mt19937_64& rng);

// Full dataset: n_normal clean + n_anomalous trajectories (one video and one
// track each), every frame labeled. Deterministic given (seed, cfg);
// trajectories use per-index derived seeds.
Dataset generate_dataset(const SynthConfig& cfg);

}  // namespace mtp
