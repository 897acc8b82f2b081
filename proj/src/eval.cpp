#include "lts/eval.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace lts::eval {

using videoio::Label;

ConfusionCounts confusion(const videoio::LabelMask& pred, const videoio::LabelMask& gt) {
    if (pred.height != gt.height || pred.width != gt.width)
        throw std::invalid_argument("confusion: dimension mismatch");
    ConfusionCounts c;
    const std::size_t n = gt.labels.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Label g = gt.labels[i];
        if (g == Label::Other) continue;
        const bool pfg = pred.labels[i] == Label::Foreground;  // Other scores as Background
        const bool gfg = g == Label::Foreground;
        if (pfg && gfg)
            ++c.tp;
        else if (pfg && !gfg)
            ++c.fp;
        else if (!pfg && gfg)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

double precision(const ConfusionCounts& c) {
    return c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

double recall(const ConfusionCounts& c) {
    return c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double f_measure(const ConfusionCounts& c) {
    if (c.tp == 0) return (c.fp + c.fn > 0) ? 0.0 : 1.0;
    const double p = precision(c);
    const double r = recall(c);
    return 2.0 * p * r / (p + r);
}

AggregateSummary aggregate(const std::vector<VideoScore>& scores) {
    if (scores.empty()) throw std::invalid_argument("aggregate: empty input");
    std::map<std::string, std::vector<double>> by_category;
    for (const auto& s : scores) by_category[s.category].push_back(s.f);

    AggregateSummary out;
    std::vector<double> means;
    for (auto& [category, fs] : by_category) {
        std::sort(fs.begin(), fs.end());
        double total = 0.0;
        for (double f : fs) total += f;
        out.category_means.emplace_back(category, total / static_cast<double>(fs.size()));
        means.push_back(out.category_means.back().second);
    }
    std::sort(means.begin(), means.end());
    double total = 0.0;
    for (double m : means) total += m;
    out.overall = total / static_cast<double>(means.size());
    return out;
}

}  // namespace lts::eval
