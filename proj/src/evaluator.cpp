#include "mtp/evaluator.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace mtp {

using nlohmann::json;

std::string EvalReport::to_json() const {
    json out;
    out["frame_auc"] = frame_auc;
    out["positives"] = positives;
    out["negatives"] = negatives;
    out["unscored_labeled"] = unscored_labeled;
    out["per_video_auc"] = per_video_auc;
    return out.dump(2);
}

double auc_from_samples(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auc: scores/labels size mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += l != 0;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument(
            "auc undefined: labels contain only one class (" + std::to_string(n_pos) +
            " positives, " + std::to_string(n_neg) + " negatives)");

    // Midranks over the pooled sample.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }
    double rank_sum_pos = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (labels[k] != 0) rank_sum_pos += rank[k];
    const double u = rank_sum_pos - static_cast<double>(n_pos) *
                                        (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

EvalReport frame_auc(const ScoreSeries& scores, const std::map<FrameKey, int>& labels,
                     double no_person_score) {
    if (labels.empty()) throw std::invalid_argument("frame_auc: no labels");
    EvalReport report;
    std::vector<double> s;
    std::vector<int> l;
    std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> per_video;
    for (const auto& [fk, label] : labels) {
        double score = no_person_score;
        auto it = scores.entries.find(fk);
        if (it != scores.entries.end())
            score = it->second.score;
        else
            ++report.unscored_labeled;
        s.push_back(score);
        l.push_back(label);
        per_video[fk.first].first.push_back(score);
        per_video[fk.first].second.push_back(label);
        if (label) ++report.positives; else ++report.negatives;
    }
    report.frame_auc = auc_from_samples(s, l);
    for (const auto& [video, sl] : per_video) {
        const bool has_pos = std::find(sl.second.begin(), sl.second.end(), 1) != sl.second.end();
        const bool has_neg = std::find(sl.second.begin(), sl.second.end(), 0) != sl.second.end();
        if (has_pos && has_neg)
            report.per_video_auc[video] = auc_from_samples(sl.first, sl.second);
    }
    return report;
}

std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += l != 0;
    const std::size_t n_neg = n - n_pos;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<RocPoint> out;
    out.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]]) ++tp; else ++fp;
        }
        out.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                       static_cast<double>(tp) / static_cast<double>(n_pos),
                       scores[order[i]]});
        i = j + 1;
    }
    return out;
}

void save_roc_csv(const std::vector<RocPoint>& roc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "fpr,tpr,threshold\n";
    out.precision(17);
    for (const RocPoint& p : roc) out << p.fpr << ',' << p.tpr << ',' << p.threshold << '\n';
}

}  // namespace mtp
