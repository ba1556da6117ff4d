#include <doctest.h>

#include <random>

#include "mtp/evaluator.hpp"

using namespace mtp;

namespace {

// All-pairs comparison oracle with half credit for ties.
double oracle_auc(const std::vector<double>& s, const std::vector<int>& l) {
    double correct = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!l[i]) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (l[j]) continue;
            ++pairs;
            if (s[i] > s[j]) correct += 1.0;
            else if (s[i] == s[j]) correct += 0.5;
        }
    }
    return correct / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("auc: analytic cases") {
    CHECK(auc_from_samples({0.9, 0.8, 0.1, 0.2}, {1, 1, 0, 0}) == 1.0);
    CHECK(auc_from_samples({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
    CHECK(auc_from_samples({0.8, 0.4, 0.6, 0.2}, {1, 1, 0, 0}) == doctest::Approx(0.75));
}

TEST_CASE("auc: one-class labels rejected with explanation") {
    CHECK_THROWS_WITH_AS(auc_from_samples({0.1, 0.2}, {1, 1}),
                         doctest::Contains("one class"), std::invalid_argument);
}

TEST_CASE("auc: matches all-pairs oracle on random instances") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 2 + rng() % 199;
        std::vector<double> s(n);
        std::vector<int> l(n);
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            // quantized scores force plenty of ties
            s[i] = std::round(u(rng) * 8.0) / 8.0;
            l[i] = rng() % 2;
            (l[i] ? pos : neg) = true;
        }
        if (!pos || !neg) continue;
        CHECK(std::abs(auc_from_samples(s, l) - oracle_auc(s, l)) < 1e-12);
    }
}

TEST_CASE("auc: invariant under strictly increasing transforms") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(60);
    std::vector<int> l(60);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = u(rng);
        l[i] = rng() % 2;
    }
    l[0] = 1;
    l[1] = 0;
    std::vector<double> mapped = s;
    for (double& v : mapped) v = std::exp(3.0 * v) + 1.0;
    CHECK(auc_from_samples(s, l) == doctest::Approx(auc_from_samples(mapped, l)));
}

TEST_CASE("auc: swapping labels maps auc to 1 - auc") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(50);
    std::vector<int> l(50);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = u(rng);
        l[i] = rng() % 2;
    }
    l[0] = 1;
    l[1] = 0;
    std::vector<int> swapped = l;
    for (int& v : swapped) v = 1 - v;
    CHECK(auc_from_samples(s, l) ==
          doctest::Approx(1.0 - auc_from_samples(s, swapped)).epsilon(1e-12));
}

TEST_CASE("frame_auc: unscored labeled frames get the fallback score and are counted") {
    ScoreSeries scores;
    scores.entries[{"v", 0}] = {0.9, 8, false};
    scores.entries[{"v", 1}] = {0.8, 8, false};
    std::map<FrameKey, int> labels{{{"v", 0}, 1}, {{"v", 1}, 1}, {{"v", 2}, 0}, {{"v", 3}, 0}};
    EvalReport r = frame_auc(scores, labels, 0.0);
    CHECK(r.frame_auc == 1.0);  // fallback 0 below both positives
    CHECK(r.unscored_labeled == 2);
    CHECK(r.positives == 2);
    CHECK(r.negatives == 2);
    CHECK(r.per_video_auc.at("v") == 1.0);
}

TEST_CASE("roc curve endpoints") {
    std::vector<double> s{0.9, 0.1, 0.8, 0.3};
    std::vector<int> l{1, 0, 1, 0};
    auto roc = roc_curve(s, l);
    CHECK(roc.front().fpr == 0.0);
    CHECK(roc.front().tpr == 0.0);
    CHECK(roc.back().fpr == 1.0);
    CHECK(roc.back().tpr == 1.0);
}
