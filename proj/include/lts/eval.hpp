#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lts/videoio.hpp"

// Change-detection scoring: ground-truth Other pixels are excluded, predicted
// Other counts as Background.

namespace lts::eval {

struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    std::int64_t scored() const { return tp + fp + fn + tn; }
};

ConfusionCounts confusion(const videoio::LabelMask& pred, const videoio::LabelMask& gt);

double precision(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);

// Conventions: TP=0 with any FP/FN -> 0; TP=FP=FN=0 -> 1.
double f_measure(const ConfusionCounts& c);

struct VideoScore {
    std::string category;
    std::string video;
    double f = 0.0;
};

struct AggregateSummary {
    std::vector<std::pair<std::string, double>> category_means;  // sorted by category
    double overall = 0.0;
};

// Unweighted mean of per-video F within each category, then the unweighted
// mean of category means. Values are sorted before summation so the result
// is bit-identical under input permutation.
AggregateSummary aggregate(const std::vector<VideoScore>& scores);

}  // namespace lts::eval
