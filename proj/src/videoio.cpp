#include "lts/videoio.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace fs = std::filesystem;

namespace lts::videoio {

const ValueMap& default_gt_value_map() {
    static const ValueMap m{{0, Label::Background},
                            {50, Label::Background},
                            {255, Label::Foreground},
                            {85, Label::Other},
                            {170, Label::Other}};
    return m;
}

const ValueMap& mask_roundtrip_value_map() {
    static const ValueMap m{
        {0, Label::Background}, {255, Label::Foreground}, {128, Label::Other}};
    return m;
}

namespace {

struct PatternParts {
    std::string prefix;
    std::string suffix;
};

PatternParts split_pattern(const std::string& pattern) {
    const auto pos = pattern.find('%');
    if (pos == std::string::npos)
        throw std::invalid_argument("pattern must contain a %d-style placeholder: " + pattern);
    std::size_t end = pos + 1;
    while (end < pattern.size() && std::isdigit(static_cast<unsigned char>(pattern[end]))) ++end;
    if (end >= pattern.size() || pattern[end] != 'd')
        throw std::invalid_argument("pattern placeholder must end in 'd': " + pattern);
    return {pattern.substr(0, pos), pattern.substr(end + 1)};
}

}  // namespace

std::vector<std::pair<int, std::string>> list_indexed_files(const std::string& directory,
                                                            const std::string& pattern) {
    if (!fs::is_directory(directory))
        throw std::runtime_error("directory not found: " + directory);
    const PatternParts parts = split_pattern(pattern);
    std::vector<std::pair<int, std::string>> out;
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() <= parts.prefix.size() + parts.suffix.size()) continue;
        if (name.compare(0, parts.prefix.size(), parts.prefix) != 0) continue;
        if (name.compare(name.size() - parts.suffix.size(), parts.suffix.size(), parts.suffix) != 0)
            continue;
        const std::string digits =
            name.substr(parts.prefix.size(), name.size() - parts.prefix.size() - parts.suffix.size());
        if (digits.empty() ||
            !std::all_of(digits.begin(), digits.end(),
                         [](unsigned char c) { return std::isdigit(c); }))
            continue;
        out.emplace_back(std::stoi(digits), entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Decode to interleaved RGB floats in [0,1]. 8- and 16-bit, 1 or 3 channels.
std::vector<float> decode_image(const std::string& path, int& height, int& width) {
    cv::Mat img = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (img.empty()) throw std::runtime_error("failed to read image: " + path);
    const int depth = img.depth();
    if (depth != CV_8U && depth != CV_16U)
        throw std::runtime_error("unsupported bit depth (need 8- or 16-bit): " + path);
    if (img.channels() != 1 && img.channels() != 3)
        throw std::runtime_error("unsupported channel count: " + path);
    const float scale = depth == CV_8U ? 1.0f / 255.0f : 1.0f / 65535.0f;
    height = img.rows;
    width = img.cols;
    std::vector<float> out(static_cast<std::size_t>(height) * width * 3);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            float r, g, b;
            if (img.channels() == 1) {
                const float v = depth == CV_8U ? img.at<std::uint8_t>(y, x) * scale
                                               : img.at<std::uint16_t>(y, x) * scale;
                r = g = b = v;
            } else if (depth == CV_8U) {
                const auto px = img.at<cv::Vec3b>(y, x);  // BGR
                b = px[0] * scale;
                g = px[1] * scale;
                r = px[2] * scale;
            } else {
                const auto px = img.at<cv::Vec3w>(y, x);
                b = px[0] * scale;
                g = px[1] * scale;
                r = px[2] * scale;
            }
            float* dst = &out[(static_cast<std::size_t>(y) * width + x) * 3];
            dst[0] = r;
            dst[1] = g;
            dst[2] = b;
        }
    return out;
}

}  // namespace

FrameSequence load_frames(const std::string& directory, const std::string& pattern) {
    const auto files = list_indexed_files(directory, pattern);
    if (files.empty())
        throw std::runtime_error("no files matching '" + pattern + "' in " + directory);
    FrameSequence seq;
    for (const auto& [index, path] : files) {
        int h = 0, w = 0;
        auto frame = decode_image(path, h, w);
        if (seq.frames.empty()) {
            seq.height = h;
            seq.width = w;
        } else if (h != seq.height || w != seq.width) {
            throw std::runtime_error("mixed frame dimensions at " + path);
        }
        seq.frames.push_back(std::move(frame));
    }
    return seq;
}

LabelMask load_mask(const std::string& path, const ValueMap& value_map) {
    cv::Mat img = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (img.empty()) throw std::runtime_error("failed to read mask: " + path);
    if (img.channels() != 1 || img.depth() != CV_8U)
        throw std::runtime_error("mask must be single-channel 8-bit: " + path);
    LabelMask mask(img.rows, img.cols, Provenance::GroundTruth);
    for (int y = 0; y < img.rows; ++y)
        for (int x = 0; x < img.cols; ++x) {
            const int raw = img.at<std::uint8_t>(y, x);
            const auto it = value_map.find(raw);
            if (it == value_map.end())
                throw std::runtime_error("unmapped value " + std::to_string(raw) + " in " + path);
            mask.at(x, y) = it->second;
        }
    return mask;
}

std::vector<LabelMask> load_gt_masks(const std::string& directory, const std::string& pattern,
                                     const ValueMap& value_map) {
    const auto files = list_indexed_files(directory, pattern);
    if (files.empty())
        throw std::runtime_error("no files matching '" + pattern + "' in " + directory);
    std::vector<LabelMask> masks;
    masks.reserve(files.size());
    for (const auto& [index, path] : files) {
        masks.push_back(load_mask(path, value_map));
        if (masks.size() > 1 && (masks.back().height != masks.front().height ||
                                 masks.back().width != masks.front().width))
            throw std::runtime_error("mixed mask dimensions at " + path);
    }
    return masks;
}

std::pair<FrameSequence, std::vector<LabelMask>> generate_synthetic(
    const SyntheticSceneSpec& spec) {
    if (spec.height < 1 || spec.width < 1 || spec.frame_count < 1)
        throw std::invalid_argument("generate_synthetic: canvas and frame count must be positive");
    if (spec.noise_sigma < 0)
        throw std::invalid_argument("generate_synthetic: noise sigma must be non-negative");

    FrameSequence seq;
    seq.height = spec.height;
    seq.width = spec.width;
    std::vector<LabelMask> masks;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);

    for (int t = 0; t < spec.frame_count; ++t) {
        std::vector<float> frame(static_cast<std::size_t>(spec.height) * spec.width * 3);
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x)
                for (int c = 0; c < 3; ++c)
                    frame[(static_cast<std::size_t>(y) * spec.width + x) * 3 + c] =
                        spec.background[c];
        LabelMask mask(spec.height, spec.width, Provenance::GroundTruth);
        for (const auto& obj : spec.objects) {
            const int ox = static_cast<int>(std::lround(obj.x0 + obj.vx * t));
            const int oy = static_cast<int>(std::lround(obj.y0 + obj.vy * t));
            const int x_lo = std::max(0, ox), x_hi = std::min(spec.width, ox + obj.width);
            const int y_lo = std::max(0, oy), y_hi = std::min(spec.height, oy + obj.height);
            for (int y = y_lo; y < y_hi; ++y)
                for (int x = x_lo; x < x_hi; ++x) {
                    for (int c = 0; c < 3; ++c)
                        frame[(static_cast<std::size_t>(y) * spec.width + x) * 3 + c] =
                            obj.intensity[c];
                    mask.at(x, y) = Label::Foreground;
                }
        }
        if (spec.noise_sigma > 0) {
            for (auto& v : frame)
                v = std::clamp(v + static_cast<float>(noise(rng)), 0.0f, 1.0f);
        }
        seq.frames.push_back(std::move(frame));
        masks.push_back(std::move(mask));
    }
    return {std::move(seq), std::move(masks)};
}

void write_mask(const LabelMask& mask, const std::string& path) {
    cv::Mat img(mask.height, mask.width, CV_8UC1);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            const Label l = mask.at(x, y);
            img.at<std::uint8_t>(y, x) =
                l == Label::Foreground ? 255 : (l == Label::Other ? 128 : 0);
        }
    if (!cv::imwrite(path, img)) throw std::runtime_error("failed to write mask: " + path);
}

void write_heatmap(const std::vector<float>& values, int height, int width,
                   const std::string& path) {
    if (values.size() != static_cast<std::size_t>(height) * width)
        throw std::invalid_argument("write_heatmap: size mismatch");
    cv::Mat img(height, width, CV_8UC1);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const float v = std::clamp(values[static_cast<std::size_t>(y) * width + x], 0.0f, 1.0f);
            img.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(std::lround(v * 255.0f));
        }
    if (!cv::imwrite(path, img)) throw std::runtime_error("failed to write heatmap: " + path);
}

void write_frame_png(const std::vector<float>& rgb, int height, int width,
                     const std::string& path) {
    if (rgb.size() != static_cast<std::size_t>(height) * width * 3)
        throw std::invalid_argument("write_frame_png: size mismatch");
    cv::Mat img(height, width, CV_8UC3);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const float* src = &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
            auto& px = img.at<cv::Vec3b>(y, x);  // BGR on disk
            for (int c = 0; c < 3; ++c)
                px[2 - c] = static_cast<std::uint8_t>(
                    std::lround(std::clamp(src[c], 0.0f, 1.0f) * 255.0f));
        }
    if (!cv::imwrite(path, img)) throw std::runtime_error("failed to write frame: " + path);
}

}  // namespace lts::videoio
