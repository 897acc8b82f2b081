#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Model checkpoints: named f32 tensors behind a small binary header. Shared
// by the classifier and the refinement network.

namespace lts::checkpoint {

struct TensorRecord {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<float> data;
};

void save(const std::string& path, const std::vector<TensorRecord>& tensors);
std::vector<TensorRecord> load(const std::string& path);

}  // namespace lts::checkpoint
