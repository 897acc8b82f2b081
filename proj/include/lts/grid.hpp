#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

// The shared discretization grid: 201 bins covering [-1, 1] with step 0.01.
// Bin i represents the value -1 + 0.01*i; bin 100 is the value 0.

namespace lts::grid {

inline constexpr int kBins = 201;
inline constexpr int kZeroBin = 100;
inline constexpr double kDelta = 0.01;
inline constexpr int kKernelEntries = 202;  // 201 on-grid + 1 overflow slot
inline constexpr int kOverflowSlot = 201;

inline double bin_value(int i) { return (i - kZeroBin) / 100.0; }

// Nearest bin for a finite value, or nullopt when the value falls outside
// [-1, 1] (Overflow). Rounding is half-away-from-zero; a tiny symmetric
// epsilon keeps values that are exact multiples of half a bin width from
// flipping on decimal-to-binary representation error.
inline std::optional<int> bin_index(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("bin_index: non-finite value");
    const double t = value * 100.0;  // signed offset from the zero bin
    const long long off = std::llround(t + std::copysign(1e-9, t));
    if (off < -kZeroBin || off > kBins - 1 - kZeroBin) return std::nullopt;
    return static_cast<int>(off) + kZeroBin;
}

}  // namespace lts::grid
