#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lts/grid.hpp"
#include "lts/videoio.hpp"

// Per-pixel temporal difference histograms: for a reference frame t, each
// pixel/channel gets the distribution of |I_i - I_t| over all frames i,
// weighted 1/T. Near-duplicate labeled instances are pruned by squared
// Euclidean distance against the kept set.

namespace lts::hist {

using grid::kBins;
using videoio::Label;

struct TemporalHistogram {
    std::array<float, kBins> mass{};
    std::int16_t x = 0;
    std::int16_t y = 0;
    std::int8_t channel = 0;
    std::int32_t frame = 0;
};

struct LabeledInstance {
    std::array<float, 3 * kBins> mass{};  // channel-major: c*201 + bin
    Label label = Label::Background;
    std::int16_t x = 0;
    std::int16_t y = 0;
    std::int32_t frame = 0;

    const float* channel_mass(int c) const { return mass.data() + c * kBins; }
};

struct InstancePool {
    std::vector<LabeledInstance> instances;

    std::size_t size() const { return instances.size(); }
    std::array<std::size_t, 3> class_counts() const {
        std::array<std::size_t, 3> counts{0, 0, 0};
        for (const auto& inst : instances) counts[static_cast<int>(inst.label)]++;
        return counts;
    }
};

// All histograms of one reference frame, laid out (y, x, channel, bin).
struct HistogramGrid {
    int height = 0;
    int width = 0;
    std::int32_t frame = 0;
    std::vector<float> mass;

    const float* at(int x, int y, int c) const {
        return &mass[((static_cast<std::size_t>(y) * width + x) * 3 + c) * kBins];
    }
    TemporalHistogram histogram(int x, int y, int c) const;
};

// round((value+1)/0.01); nullopt = Overflow; throws on non-finite input.
inline std::optional<int> bin_index(double value) { return grid::bin_index(value); }

HistogramGrid extract_histograms(const videoio::FrameSequence& seq, int t);

InstancePool label_instances(const HistogramGrid& grid, const videoio::LabelMask& gt);

// Sum of squared bin differences (Eq.-style distance: no square root).
double euclidean_distance(const TemporalHistogram& a, const TemporalHistogram& b);

// Distance between instances: the per-channel distances summed.
double instance_distance(const LabeledInstance& a, const LabeledInstance& b);

// Sequential scan in input order, sharded by label: an instance is dropped
// when some earlier kept instance of the same label is closer than tau.
InstancePool prune_similar(const InstancePool& pool, double tau = 0.7);

void save_pool(const InstancePool& pool, const std::string& path);
InstancePool load_pool(const std::string& path);

}  // namespace lts::hist
