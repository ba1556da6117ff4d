#pragma once

#include <map>
#include <string>
#include <vector>

#include "mtp/scorer.hpp"
#include "mtp/trajectory.hpp"

namespace mtp {

struct EvalReport {
    double frame_auc = 0.0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::size_t unscored_labeled = 0;  // labeled frames that got the fallback score
    std::map<std::string, double> per_video_auc;  // only videos with both classes

    std::string to_json() const;
};

struct RocPoint {
    double fpr, tpr, threshold;
};

// Rank-statistic (Mann-Whitney) AUC with midrank ties; equivalent to
// trapezoidal ROC integration. Labeled frames missing from `scores` are
// scored with `no_person_score` and counted. Throws if only one class is
// present among labeled frames.
EvalReport frame_auc(const ScoreSeries& scores, const std::map<FrameKey, int>& labels,
                     double no_person_score = 0.0);

double auc_from_samples(const std::vector<double>& scores, const std::vector<int>& labels);

std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                const std::vector<int>& labels);
void save_roc_csv(const std::vector<RocPoint>& roc, const std::string& path);

}  // namespace mtp
