#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

// Frame-sequence and mask I/O plus the synthetic scene generator. Frames are
// stored as interleaved RGB floats in [0,1]; grayscale inputs are replicated
// to three channels so downstream code has a single layout.

namespace lts::videoio {

enum class Label : std::uint8_t { Background = 0, Foreground = 1, Other = 2 };
enum class Provenance : std::uint8_t { GroundTruth = 0, Predicted = 1 };

struct LabelMask {
    int height = 0;
    int width = 0;
    std::vector<Label> labels;
    Provenance provenance = Provenance::GroundTruth;

    LabelMask() = default;
    LabelMask(int h, int w, Provenance p)
        : height(h), width(w), labels(static_cast<std::size_t>(h) * w, Label::Background),
          provenance(p) {}

    Label at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    Label& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
};

struct FrameSequence {
    int height = 0;
    int width = 0;
    int channels = 3;
    std::vector<std::vector<float>> frames;  // each height*width*3, interleaved

    int frame_count() const { return static_cast<int>(frames.size()); }
    float at(int t, int x, int y, int c) const {
        return frames[t][(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
};

struct SceneObject {
    double x0 = 0, y0 = 0;  // top-left at frame 0
    double vx = 0, vy = 0;  // per-frame velocity
    int width = 0, height = 0;
    std::array<float, 3> intensity{1.0f, 1.0f, 1.0f};
};

struct SyntheticSceneSpec {
    int height = 0;
    int width = 0;
    int frame_count = 0;
    std::array<float, 3> background{0.0f, 0.0f, 0.0f};
    std::vector<SceneObject> objects;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

using ValueMap = std::map<int, Label>;

// CDNet convention: 0 static, 50 hard shadow -> Background; 255 -> Foreground;
// 85 outside ROI, 170 unknown -> Other.
const ValueMap& default_gt_value_map();

// Inverse of write_mask's encoding, for round-tripping predicted masks.
const ValueMap& mask_roundtrip_value_map();

FrameSequence load_frames(const std::string& directory, const std::string& pattern = "in%06d.png");

std::vector<LabelMask> load_gt_masks(const std::string& directory,
                                     const std::string& pattern = "gt%06d.png",
                                     const ValueMap& value_map = default_gt_value_map());

LabelMask load_mask(const std::string& path, const ValueMap& value_map = default_gt_value_map());

std::pair<FrameSequence, std::vector<LabelMask>> generate_synthetic(const SyntheticSceneSpec& spec);

// Background -> 0, Foreground -> 255, Other -> 128, 8-bit single channel.
void write_mask(const LabelMask& mask, const std::string& path);

// round(v * 255) per pixel, 8-bit single channel.
void write_heatmap(const std::vector<float>& values, int height, int width,
                   const std::string& path);

void write_frame_png(const std::vector<float>& rgb, int height, int width,
                     const std::string& path);

// Files matching a pattern with a single %d-style placeholder, sorted by the
// parsed index. Exposed for tests.
std::vector<std::pair<int, std::string>> list_indexed_files(const std::string& directory,
                                                            const std::string& pattern);

}  // namespace lts::videoio
