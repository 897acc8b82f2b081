#include "lts/hist.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace lts::hist {

TemporalHistogram HistogramGrid::histogram(int x, int y, int c) const {
    TemporalHistogram h;
    std::memcpy(h.mass.data(), at(x, y, c), sizeof(float) * kBins);
    h.x = static_cast<std::int16_t>(x);
    h.y = static_cast<std::int16_t>(y);
    h.channel = static_cast<std::int8_t>(c);
    h.frame = frame;
    return h;
}

HistogramGrid extract_histograms(const videoio::FrameSequence& seq, int t) {
    const int T = seq.frame_count();
    if (t < 0 || t >= T) throw std::out_of_range("extract_histograms: t out of range");
    HistogramGrid grid;
    grid.height = seq.height;
    grid.width = seq.width;
    grid.frame = t;
    grid.mass.assign(static_cast<std::size_t>(seq.height) * seq.width * 3 * kBins, 0.0f);

    const float inv_t = 1.0f / static_cast<float>(T);
    std::array<std::uint32_t, kBins> counts;
    const std::vector<float>& ref = seq.frames[t];
    for (int y = 0; y < seq.height; ++y)
        for (int x = 0; x < seq.width; ++x)
            for (int c = 0; c < 3; ++c) {
                counts.fill(0);
                const std::size_t px = (static_cast<std::size_t>(y) * seq.width + x) * 3 + c;
                const float rv = ref[px];
                for (int i = 0; i < T; ++i) {
                    const double d = std::abs(static_cast<double>(seq.frames[i][px]) - rv);
                    // d is in [0,1], so the bin always exists
                    ++counts[*grid::bin_index(d)];
                }
                float* dst = &grid.mass[px * kBins];
                for (int b = 0; b < kBins; ++b)
                    dst[b] = static_cast<float>(counts[b]) * inv_t;
            }
    return grid;
}

InstancePool label_instances(const HistogramGrid& grid, const videoio::LabelMask& gt) {
    if (grid.height < 1 || grid.width < 1 || grid.mass.empty())
        throw std::invalid_argument("label_instances: empty histogram grid");
    if (grid.height != gt.height || grid.width != gt.width)
        throw std::invalid_argument("label_instances: dimension mismatch");
    InstancePool pool;
    pool.instances.reserve(static_cast<std::size_t>(grid.height) * grid.width);
    for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x) {
            LabeledInstance inst;
            for (int c = 0; c < 3; ++c)
                std::memcpy(inst.mass.data() + c * kBins, grid.at(x, y, c), sizeof(float) * kBins);
            inst.label = gt.at(x, y);
            inst.x = static_cast<std::int16_t>(x);
            inst.y = static_cast<std::int16_t>(y);
            inst.frame = grid.frame;
            pool.instances.push_back(inst);
        }
    return pool;
}

double euclidean_distance(const TemporalHistogram& a, const TemporalHistogram& b) {
    double s = 0;
    for (int i = 0; i < kBins; ++i) {
        const double d = static_cast<double>(a.mass[i]) - b.mass[i];
        s += d * d;
    }
    return s;
}

double instance_distance(const LabeledInstance& a, const LabeledInstance& b) {
    double s = 0;
    for (int i = 0; i < 3 * kBins; ++i) {
        const double d = static_cast<double>(a.mass[i]) - b.mass[i];
        s += d * d;
    }
    return s;
}

namespace {

// Distance with early exit once the partial sum reaches the cap.
bool closer_than(const LabeledInstance& a, const LabeledInstance& b, double cap) {
    double s = 0;
    for (int i = 0; i < 3 * kBins; ++i) {
        const double d = static_cast<double>(a.mass[i]) - b.mass[i];
        s += d * d;
        if (s >= cap) return false;
    }
    return true;
}

}  // namespace

InstancePool prune_similar(const InstancePool& pool, double tau) {
    if (tau < 0) throw std::invalid_argument("prune_similar: tau must be >= 0");
    const std::size_t n = pool.instances.size();
    std::vector<char> keep(n, 0);
    std::array<std::vector<std::size_t>, 3> shard_kept;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& inst = pool.instances[i];
        auto& kept = shard_kept[static_cast<int>(inst.label)];
        bool removed = false;
        if (tau > 0) {
            for (std::size_t k : kept)
                if (closer_than(pool.instances[k], inst, tau)) {
                    removed = true;
                    break;
                }
        }
        if (!removed) {
            keep[i] = 1;
            kept.push_back(i);
        }
    }
    InstancePool out;
    for (std::size_t i = 0; i < n; ++i)
        if (keep[i]) out.instances.push_back(pool.instances[i]);
    return out;
}

namespace {

constexpr char kMagic[4] = {'L', 'T', 'S', 'H'};
constexpr std::uint32_t kVersion = 1;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

template <typename T>
void write_raw(std::FILE* f, const T& v) {
    if (std::fwrite(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("pool write failed");
}

template <typename T>
T read_raw(std::FILE* f) {
    T v;
    if (std::fread(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("pool read failed");
    return v;
}

}  // namespace

void save_pool(const InstancePool& pool, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    if (std::fwrite(kMagic, 1, 4, f.get()) != 4) throw std::runtime_error("pool write failed");
    write_raw(f.get(), kVersion);
    write_raw(f.get(), static_cast<std::uint64_t>(pool.instances.size()));
    write_raw(f.get(), static_cast<std::uint32_t>(kBins));
    write_raw(f.get(), static_cast<std::uint32_t>(3));
    for (const auto& inst : pool.instances) {
        write_raw(f.get(), static_cast<std::uint8_t>(inst.label));
        if (std::fwrite(inst.mass.data(), sizeof(float), inst.mass.size(), f.get()) !=
            inst.mass.size())
            throw std::runtime_error("pool write failed");
    }
}

InstancePool load_pool(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("cannot open pool file: " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a histogram pool file: " + path);
    if (read_raw<std::uint32_t>(f.get()) != kVersion)
        throw std::runtime_error("unsupported pool version: " + path);
    const auto count = read_raw<std::uint64_t>(f.get());
    if (read_raw<std::uint32_t>(f.get()) != kBins ||
        read_raw<std::uint32_t>(f.get()) != 3)
        throw std::runtime_error("unexpected pool geometry: " + path);
    InstancePool pool;
    pool.instances.resize(count);
    for (auto& inst : pool.instances) {
        const auto raw = read_raw<std::uint8_t>(f.get());
        if (raw > 2) throw std::runtime_error("bad label byte in " + path);
        inst.label = static_cast<Label>(raw);
        if (std::fread(inst.mass.data(), sizeof(float), inst.mass.size(), f.get()) !=
            inst.mass.size())
            throw std::runtime_error("pool read failed");
    }
    return pool;
}

}  // namespace lts::hist
