#include <doctest.h>

#include <algorithm>
#include <cstdio>

#include "mtp/synthgen.hpp"
#include "mtp/trajectory.hpp"

using namespace mtp;

namespace {

double root_x(const PoseFrame& f) {
    double s = 0.0;
    for (const auto& k : f.keypoints) s += k.x;
    return s / 25.0;
}

double root_y(const PoseFrame& f) {
    double s = 0.0;
    for (const auto& k : f.keypoints) s += k.y;
    return s / 25.0;
}

double displacement(const PoseTrajectory& t, std::size_t a, std::size_t b) {
    return std::hypot(root_x(t.frames[b]) - root_x(t.frames[a]),
                      root_y(t.frames[b]) - root_y(t.frames[a]));
}

}  // namespace

TEST_CASE("gen_normal: determinism and linear paths without noise") {
    SynthConfig cfg;
    cfg.trajectory_length = 50;
    cfg.noise_std = 0.0;
    cfg.osc_amplitude = 0.0;
    std::mt19937_64 r1(3), r2(3);
    PoseTrajectory a = gen_normal(cfg, r1);
    PoseTrajectory b = gen_normal(cfg, r2);
    CHECK(a.stack().data == b.stack().data);

    // zero noise + zero oscillation: joint paths are exactly linear until a
    // wall reflection; check second differences vanish early on
    for (std::size_t t = 2; t < 10; ++t) {
        const double d2 = root_x(a.frames[t]) - 2 * root_x(a.frames[t - 1]) +
                          root_x(a.frames[t - 2]);
        CHECK(std::abs(d2) < 1e-9);
    }
}

TEST_CASE("gen_normal: mean per-frame displacement near configured stride") {
    SynthConfig cfg;
    cfg.trajectory_length = 1000;
    cfg.noise_std = 0.2;
    std::mt19937_64 rng(4);
    PoseTrajectory t = gen_normal(cfg, rng);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < t.length(); ++i) total += displacement(t, i, i + 1);
    const double mean = total / static_cast<double>(t.length() - 1);
    CHECK(mean == doctest::Approx(cfg.stride_px).epsilon(0.1));
}

TEST_CASE("gen_normal: confidences in [0.5, 1]") {
    SynthConfig cfg;
    std::mt19937_64 rng(5);
    PoseTrajectory t = gen_normal(cfg, rng);
    for (const auto& f : t.frames)
        for (const auto& k : f.keypoints) {
            CHECK(k.c >= 0.5);
            CHECK(k.c <= 1.0);
        }
}

TEST_CASE("inject_anomaly: empty spec list leaves labels all zero") {
    SynthConfig cfg;
    cfg.n_normal = 2;
    Dataset ds = generate_dataset(cfg);
    for (const auto& [fk, l] : ds.labels) CHECK(l == 0);
}

TEST_CASE("inject_anomaly: jump produces a large vertical deviation") {
    SynthConfig cfg;
    cfg.trajectory_length = 60;
    cfg.noise_std = 0.0;
    std::mt19937_64 rng(6);
    PoseTrajectory t = gen_normal(cfg, rng);
    PoseTrajectory orig = t;
    AnomalySpec spec{AnomalyKind::Jump, 20, 5};
    auto labels = inject_anomaly(t, spec, rng);
    CHECK(std::count(labels.begin(), labels.end(), 1) == 5);
    double peak = 0.0;
    for (std::size_t f = 20; f < 25; ++f)
        peak = std::max(peak, std::abs(root_y(orig.frames[f]) - root_y(t.frames[f])));
    CHECK(peak > 5.0 * cfg.osc_amplitude);
}

TEST_CASE("inject_anomaly: loiter has low net displacement, normal local gait") {
    SynthConfig cfg;
    cfg.trajectory_length = 200;
    std::mt19937_64 rng(7);
    PoseTrajectory normal = gen_normal(cfg, rng);
    PoseTrajectory t = normal;
    AnomalySpec spec{AnomalyKind::Loiter, 60, 60};
    std::mt19937_64 arng(8);
    auto labels = inject_anomaly(t, spec, arng);

    // net displacement over the window well below an equal-duration walk
    const double loiter_net = displacement(t, 60, 119);
    const double walk_net = displacement(normal, 60, 119);
    CHECK(loiter_net < 0.35 * walk_net);

    // local 3-frame displacements stay inside the normal-walk 99% range
    std::vector<double> walk3;
    for (std::size_t i = 0; i + 3 < normal.length(); ++i)
        walk3.push_back(displacement(normal, i, i + 3));
    std::sort(walk3.begin(), walk3.end());
    const double lo = walk3[static_cast<std::size_t>(0.005 * walk3.size())];
    const double hi = walk3[static_cast<std::size_t>(0.995 * (walk3.size() - 1))];
    double mean3 = 0.0;
    std::size_t n3 = 0;
    for (std::size_t i = 60; i + 3 < 120; ++i) {
        mean3 += displacement(t, i, i + 3);
        ++n3;
    }
    mean3 /= static_cast<double>(n3);
    CHECK(mean3 >= lo);
    CHECK(mean3 <= hi);
}

TEST_CASE("inject_anomaly: run triples velocity inside the window") {
    SynthConfig cfg;
    cfg.trajectory_length = 120;
    cfg.noise_std = 0.0;
    std::mt19937_64 rng(9);
    PoseTrajectory t = gen_normal(cfg, rng);
    PoseTrajectory orig = t;
    AnomalySpec spec{AnomalyKind::Run, 30, 20};
    auto labels = inject_anomaly(t, spec, rng);
    (void)labels;
    for (std::size_t f = 30; f < 49; ++f) {
        const double v_new = displacement(t, f, f + 1);
        const double v_old = displacement(orig, f, f + 1);
        CHECK(v_new == doctest::Approx(3.0 * v_old).epsilon(1e-6));
    }
    // outside the window speed is unchanged
    CHECK(displacement(t, 5, 6) == doctest::Approx(displacement(orig, 5, 6)).epsilon(1e-9));
}

TEST_CASE("spec validation: windows must fit and durations must match kinds") {
    SynthConfig cfg;
    cfg.trajectory_length = 50;
    cfg.anomalies.push_back({AnomalyKind::Jump, 48, 5});
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.anomalies = {{AnomalyKind::Jump, 10, 9}};  // jump too long
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.anomalies = {{AnomalyKind::Loiter, 10, 20}};  // loiter too short
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.anomalies = {{AnomalyKind::Run, 10, 12}};
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("generate_dataset: overlapping specs rejected") {
    SynthConfig cfg;
    cfg.trajectory_length = 100;
    cfg.n_anomalous = 1;
    cfg.anomalies = {{AnomalyKind::Run, 10, 15}, {AnomalyKind::Jump, 20, 5}};
    CHECK_THROWS_AS(generate_dataset(cfg), std::invalid_argument);
}

TEST_CASE("generate_dataset: reproducible and round-trips through jsonl") {
    SynthConfig cfg;
    cfg.seed = 42;
    cfg.n_normal = 2;
    cfg.n_anomalous = 1;
    cfg.trajectory_length = 60;
    cfg.anomalies = {{AnomalyKind::Jump, 30, 5}};
    Dataset a = generate_dataset(cfg);
    Dataset b = generate_dataset(cfg);
    REQUIRE(a.trajectories.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(a.trajectories[i].stack().data == b.trajectories[i].stack().data);
    CHECK(a.labels == b.labels);

    save_jsonl(a, "test_synth.jsonl");
    Dataset c = load_jsonl("test_synth.jsonl");
    std::remove("test_synth.jsonl");
    REQUIRE(c.trajectories.size() == 3);
    std::size_t total = 0;
    for (const auto& t : c.trajectories) total += t.length();
    CHECK(total == 180);
}
