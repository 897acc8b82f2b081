#include "lts/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace lts::checkpoint {

namespace {

constexpr char kMagic[4] = {'L', 'T', 'S', 'M'};
constexpr std::uint32_t kVersion = 1;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

template <typename T>
void write_raw(std::FILE* f, const T& v) {
    if (std::fwrite(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("checkpoint write failed");
}

template <typename T>
T read_raw(std::FILE* f) {
    T v;
    if (std::fread(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("checkpoint read failed");
    return v;
}

}  // namespace

void save(const std::string& path, const std::vector<TensorRecord>& tensors) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    if (std::fwrite(kMagic, 1, 4, f.get()) != 4) throw std::runtime_error("checkpoint write failed");
    write_raw(f.get(), kVersion);
    write_raw(f.get(), static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        write_raw(f.get(), static_cast<std::uint32_t>(t.name.size()));
        if (std::fwrite(t.name.data(), 1, t.name.size(), f.get()) != t.name.size())
            throw std::runtime_error("checkpoint write failed");
        write_raw(f.get(), static_cast<std::uint32_t>(t.dims.size()));
        std::uint64_t numel = 1;
        for (std::uint32_t d : t.dims) {
            write_raw(f.get(), d);
            numel *= d;
        }
        if (numel != t.data.size()) throw std::runtime_error("tensor size/dims mismatch: " + t.name);
        if (std::fwrite(t.data.data(), sizeof(float), t.data.size(), f.get()) != t.data.size())
            throw std::runtime_error("checkpoint write failed");
    }
}

std::vector<TensorRecord> load(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    if (read_raw<std::uint32_t>(f.get()) != kVersion)
        throw std::runtime_error("unsupported checkpoint version: " + path);
    const auto count = read_raw<std::uint32_t>(f.get());
    std::vector<TensorRecord> out(count);
    for (auto& t : out) {
        const auto name_len = read_raw<std::uint32_t>(f.get());
        t.name.resize(name_len);
        if (name_len > 0 && std::fread(t.name.data(), 1, name_len, f.get()) != name_len)
            throw std::runtime_error("checkpoint read failed");
        const auto rank = read_raw<std::uint32_t>(f.get());
        t.dims.resize(rank);
        std::uint64_t numel = 1;
        for (auto& d : t.dims) {
            d = read_raw<std::uint32_t>(f.get());
            numel *= d;
        }
        t.data.resize(numel);
        if (std::fread(t.data.data(), sizeof(float), numel, f.get()) != numel)
            throw std::runtime_error("checkpoint read failed");
    }
    return out;
}

}  // namespace lts::checkpoint
