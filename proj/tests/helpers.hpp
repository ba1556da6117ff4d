#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "mtp/model.hpp"
#include "mtp/tensor.hpp"
#include "mtp/trajectory.hpp"

namespace mtp::testing {

inline double rel_err(double a, double b) {
    const double denom = std::max({1e-10, std::abs(a), std::abs(b)});
    return std::abs(a - b) / denom;
}

// Central-difference check of param.grad against a scalar loss recomputed
// from current parameter values. Samples up to `max_entries` coordinates per
// parameter. Returns the worst relative error seen.
inline double check_param_grads(const std::function<double()>& loss_fn,
                                std::vector<Param*> params, std::mt19937_64& rng,
                                double h = 1e-5, std::size_t max_entries = 24) {
    double worst = 0.0;
    for (Param* p : params) {
        std::vector<std::size_t> idx(p->value.numel());
        std::iota(idx.begin(), idx.end(), 0);
        if (idx.size() > max_entries) {
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(max_entries);
        }
        for (std::size_t i : idx) {
            const double orig = p->value.data[i];
            auto fd_at = [&](double step) {
                p->value.data[i] = orig + step;
                const double up = loss_fn();
                p->value.data[i] = orig - step;
                const double down = loss_fn();
                p->value.data[i] = orig;
                return (up - down) / (2.0 * step);
            };
            const double fd = fd_at(h);
            const double an = p->grad.data[i];
            if (std::abs(fd) < 1e-12 && std::abs(an) < 1e-12) continue;
            // Central differences are invalid across a ReLU kink; detect
            // those points by step-halving inconsistency and skip them (a
            // wrong analytic gradient at a smooth point is still caught).
            if (rel_err(fd, an) > 1e-5 && rel_err(fd, fd_at(0.5 * h)) > 1e-6) continue;
            worst = std::max(worst, rel_err(fd, an));
        }
    }
    return worst;
}

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> dist(lo, hi);
    for (double& v : t.data) v = dist(rng);
    return t;
}

// Random well-formed trajectory with coordinates already in [0, 1] scale.
inline PoseTrajectory random_trajectory(std::size_t T, std::mt19937_64& rng,
                                        const std::string& video = "v0",
                                        const std::string& track = "0") {
    std::uniform_real_distribution<double> coord(0.05, 0.95);
    std::uniform_real_distribution<double> conf(0.3, 1.0);
    PoseTrajectory traj;
    traj.video_id = video;
    traj.track_id = track;
    traj.width = 1;  // coordinates generated pre-normalized
    traj.height = 1;
    for (std::size_t t = 0; t < T; ++t) {
        PoseFrame f;
        f.frame_index = static_cast<std::int64_t>(t);
        f.keypoints.resize(kNumJoints);
        for (Keypoint& k : f.keypoints) {
            k.x = coord(rng);
            k.y = coord(rng);
            k.c = conf(rng);
        }
        traj.frames.push_back(std::move(f));
    }
    return traj;
}

inline ModelConfig tiny_config(std::size_t width = 8, std::uint64_t seed = 7) {
    ModelConfig cfg;
    cfg.width = width;
    cfg.seed = seed;
    return cfg;
}

}  // namespace mtp::testing
