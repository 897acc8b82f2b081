#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "lts/grid.hpp"

// Arithmetic distribution layers. Kernels and activations are histograms over
// the shared [-1,1] grid; the product layer evaluates the density of Z = X*W
// and the sum layer the density of Z = X+B. Values are density samples, so
// every accumulation carries an explicit bin width Delta.
//
// The product layer's zero output bin follows the improved rule: each factor
// with mass at zero contributes (its zero density) * E(1/|other|) evaluated
// over the other factor's nonzero bins, and the doubly-degenerate both-at-zero
// term (divergent in the continuum) is capped at w(0)*x(0)/Delta.

namespace lts::distlayer {

using grid::kBins;
using grid::kDelta;
using grid::kKernelEntries;
using grid::kOverflowSlot;
using grid::kZeroBin;

template <typename T>
struct DensityVector {
    std::array<T, kBins> density{};
};

template <typename T>
struct DistributionKernel {
    std::array<T, kKernelEntries> entries{};
    std::array<T, kKernelEntries> grad{};

    void zero_grad() { grad.fill(T(0)); }
};

template <typename T>
struct SumResult {
    DensityVector<T> density;
    T overflow = T(0);  // mass shifted off the grid, dropped from the 201 bins
};

namespace detail {

// idx(j,i): input bin hit by z_j / w_i, or -1 when |z_j/w_i| > 1.
// coef(i):  Delta / |w_i| = 1 / |i - 100|. Both are pure grid geometry.
struct ProductTables {
    std::vector<std::int16_t> idx;   // kBins * kBins, row j
    std::array<double, kBins> coef;  // undefined at the zero bin

    ProductTables() : idx(static_cast<std::size_t>(kBins) * kBins, -1) {
        for (int j = 0; j < kBins; ++j)
            for (int i = 0; i < kBins; ++i) {
                if (i == kZeroBin) continue;
                const double ratio = 100.0 * (j - kZeroBin) / static_cast<double>(i - kZeroBin);
                const long long off = std::llround(ratio + std::copysign(1e-9, ratio));
                if (off >= -kZeroBin && off <= kZeroBin)
                    idx[static_cast<std::size_t>(j) * kBins + i] =
                        static_cast<std::int16_t>(off + kZeroBin);
            }
        for (int i = 0; i < kBins; ++i)
            coef[i] = i == kZeroBin ? 0.0 : 1.0 / std::abs(i - kZeroBin);
    }
};

inline const ProductTables& product_tables() {
    static const ProductTables t;
    return t;
}

template <typename T>
void require_finite(const T* v, std::size_t n, const char* what) {
    for (std::size_t k = 0; k < n; ++k)
        if (!std::isfinite(static_cast<double>(v[k])))
            throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

// E(1/|x|) over the nonzero on-grid bins plus the capped zero-bin term; the
// shared building block of the zero-bin rule and its kernel gradient.
template <typename T>
T zero_bin_expectation(const T* x) {
    const auto& tb = product_tables();
    T s = T(0);
    for (int k = 0; k < kBins; ++k)
        if (k != kZeroBin) s += x[k] * static_cast<T>(tb.coef[k]);
    return s;
}

}  // namespace detail

template <typename T>
DensityVector<T> mass_to_density(const std::array<float, kBins>& mass) {
    DensityVector<T> d;
    for (int i = 0; i < kBins; ++i) d.density[i] = static_cast<T>(mass[i]) / static_cast<T>(kDelta);
    return d;
}

// ---------------------------------------------------------------------------
// product distribution layer
// ---------------------------------------------------------------------------

template <typename T>
DensityVector<T> product_forward(const DensityVector<T>& x, const DistributionKernel<T>& w) {
    detail::require_finite(x.density.data(), kBins, "product_forward input");
    detail::require_finite(w.entries.data(), kKernelEntries, "product_forward kernel");
    const auto& tb = detail::product_tables();
    DensityVector<T> out;
    for (int j = 0; j < kBins; ++j) {
        const std::int16_t* row = &tb.idx[static_cast<std::size_t>(j) * kBins];
        T acc = T(0);
        for (int i = 0; i < kBins; ++i) {
            if (i == kZeroBin) continue;
            const std::int16_t b = row[i];
            if (b >= 0) acc += w.entries[i] * static_cast<T>(tb.coef[i]) * x.density[b];
        }
        out.density[j] = acc;
    }
    out.density[kZeroBin] +=
        w.entries[kZeroBin] * (detail::zero_bin_expectation(x.density.data()) +
                               x.density[kZeroBin] / static_cast<T>(kDelta));
    return out;
}

template <typename T>
std::array<T, kKernelEntries> product_backward_kernel(const DensityVector<T>& x,
                                                      const DensityVector<T>& grad_z) {
    const auto& tb = detail::product_tables();
    std::array<T, kKernelEntries> g{};
    for (int i = 0; i < kBins; ++i) {
        if (i == kZeroBin) continue;
        T acc = T(0);
        for (int j = 0; j < kBins; ++j) {
            const std::int16_t b = tb.idx[static_cast<std::size_t>(j) * kBins + i];
            if (b >= 0) acc += grad_z.density[j] * x.density[b];
        }
        g[i] = static_cast<T>(tb.coef[i]) * acc;
    }
    g[kZeroBin] = grad_z.density[kZeroBin] * (detail::zero_bin_expectation(x.density.data()) +
                                              x.density[kZeroBin] / static_cast<T>(kDelta));
    g[kOverflowSlot] = T(0);  // no on-grid forward path exists through the slot
    return g;
}

// ---------------------------------------------------------------------------
// sum distribution layer (discrete convolution)
// ---------------------------------------------------------------------------

template <typename T>
SumResult<T> sum_forward(const DensityVector<T>& x, const DistributionKernel<T>& b) {
    detail::require_finite(x.density.data(), kBins, "sum_forward input");
    detail::require_finite(b.entries.data(), kKernelEntries, "sum_forward kernel");
    SumResult<T> r;
    for (int j = 0; j < kBins; ++j) {
        T acc = T(0);
        // input index m = j - k + 100 must lie in [0, 200]
        for (int k = std::max(0, j - kZeroBin); k <= std::min(kBins - 1, j + kZeroBin); ++k)
            acc += b.entries[k] * x.density[j - k + kZeroBin];
        r.density[j] = acc * static_cast<T>(kDelta);
    }
    // mass whose shifted coordinate leaves [-1,1]
    T total_x = T(0);
    std::array<T, kBins + 1> prefix{};
    for (int m = 0; m < kBins; ++m) {
        total_x += x.density[m];
        prefix[m + 1] = prefix[m] + x.density[m];
    }
    T ovf = T(0);
    for (int k = 0; k < kBins; ++k) {
        const int m_lo = std::max(0, kZeroBin - k);
        const int m_hi = std::min(kBins - 1, 3 * kZeroBin - k);
        const T window = prefix[m_hi + 1] - prefix[m_lo];
        ovf += b.entries[k] * (total_x - window);
    }
    r.overflow = ovf * static_cast<T>(kDelta);
    return r;
}

template <typename T>
std::array<T, kKernelEntries> sum_backward_kernel(const DensityVector<T>& x,
                                                  const DensityVector<T>& grad_z) {
    std::array<T, kKernelEntries> g{};
    for (int k = 0; k < kBins; ++k) {
        T acc = T(0);
        for (int j = std::max(0, k - kZeroBin); j <= std::min(kBins - 1, k + kZeroBin); ++j)
            acc += grad_z.density[j] * x.density[j - k + kZeroBin];
        g[k] = acc * static_cast<T>(kDelta);
    }
    g[kOverflowSlot] = T(0);
    return g;
}

// ---------------------------------------------------------------------------
// packed multi-kernel paths. These evaluate all K kernels of a layer in one
// sweep with the kernel axis innermost; per kernel the accumulation order is
// identical to the single-kernel ops above, so results match them exactly.
// ---------------------------------------------------------------------------

template <typename T>
struct PackedKernels {
    int count = 0;
    std::vector<T> scaled;      // [kBins][count]: entries[i] * coef(i), zero row at i=100
    std::vector<T> delta;       // [kBins][count]: entries[i] * Delta (sum layer)
    std::vector<T> zero_entry;  // [count]: entries[100]
};

// Kernels given as raw pointers to their kKernelEntries-long entry arrays.
template <typename T>
PackedKernels<T> pack_product_kernels(const std::vector<const T*>& ks) {
    const auto& tb = detail::product_tables();
    PackedKernels<T> p;
    p.count = static_cast<int>(ks.size());
    p.scaled.assign(static_cast<std::size_t>(kBins) * p.count, T(0));
    p.zero_entry.resize(p.count);
    for (int i = 0; i < kBins; ++i)
        for (int k = 0; k < p.count; ++k)
            if (i != kZeroBin)
                p.scaled[static_cast<std::size_t>(i) * p.count + k] =
                    ks[k][i] * static_cast<T>(tb.coef[i]);
    for (int k = 0; k < p.count; ++k) p.zero_entry[k] = ks[k][kZeroBin];
    return p;
}

template <typename T>
PackedKernels<T> pack_sum_kernels(const std::vector<const T*>& ks) {
    PackedKernels<T> p;
    p.count = static_cast<int>(ks.size());
    p.delta.assign(static_cast<std::size_t>(kBins) * p.count, T(0));
    for (int m = 0; m < kBins; ++m)
        for (int k = 0; k < p.count; ++k)
            p.delta[static_cast<std::size_t>(m) * p.count + k] = ks[k][m] * static_cast<T>(kDelta);
    return p;
}

// out[j*K + k] = product_forward(x, kernel_k)[j]
template <typename T>
void product_forward_multi(const T* x, const PackedKernels<T>& p, T* out) {
    const auto& tb = detail::product_tables();
    const int K = p.count;
    for (int j = 0; j < kBins; ++j) {
        const std::int16_t* row = &tb.idx[static_cast<std::size_t>(j) * kBins];
        T* o = out + static_cast<std::size_t>(j) * K;
        for (int k = 0; k < K; ++k) o[k] = T(0);
        for (int i = 0; i < kBins; ++i) {
            const std::int16_t b = row[i];
            if (b < 0) continue;  // covers i == 100: its scaled row is zero anyway
            const T xv = x[b];
            const T* w = &p.scaled[static_cast<std::size_t>(i) * K];
            for (int k = 0; k < K; ++k) o[k] += w[k] * xv;
        }
    }
    const T zx = detail::zero_bin_expectation(x) + x[kZeroBin] / static_cast<T>(kDelta);
    T* oz = out + static_cast<std::size_t>(kZeroBin) * K;
    for (int k = 0; k < K; ++k) oz[k] += p.zero_entry[k] * zx;
}

// grad_out[j*K + k] -> accumulate into per-kernel gradient arrays (each
// kKernelEntries long).
template <typename T>
void product_backward_multi(const T* x, const T* grad_out, const std::vector<T*>& kernel_grads) {
    const auto& tb = detail::product_tables();
    const int K = static_cast<int>(kernel_grads.size());
    std::vector<T> acc(static_cast<std::size_t>(kBins) * K, T(0));
    for (int j = 0; j < kBins; ++j) {
        const std::int16_t* row = &tb.idx[static_cast<std::size_t>(j) * kBins];
        const T* g = grad_out + static_cast<std::size_t>(j) * K;
        for (int i = 0; i < kBins; ++i) {
            const std::int16_t b = row[i];
            if (b < 0 || i == kZeroBin) continue;
            const T xv = x[b];
            T* a = &acc[static_cast<std::size_t>(i) * K];
            for (int k = 0; k < K; ++k) a[k] += g[k] * xv;
        }
    }
    const T zx = detail::zero_bin_expectation(x) + x[kZeroBin] / static_cast<T>(kDelta);
    const T* gz = grad_out + static_cast<std::size_t>(kZeroBin) * K;
    for (int k = 0; k < K; ++k) {
        for (int i = 0; i < kBins; ++i)
            if (i != kZeroBin)
                kernel_grads[k][i] +=
                    static_cast<T>(tb.coef[i]) * acc[static_cast<std::size_t>(i) * K + k];
        kernel_grads[k][kZeroBin] += gz[k] * zx;
    }
}

// out[j*K + k] = sum_forward(x, kernel_k).density[j]
template <typename T>
void sum_forward_multi(const T* x, const PackedKernels<T>& p, T* out) {
    const int K = p.count;
    for (int j = 0; j < kBins; ++j) {
        T* o = out + static_cast<std::size_t>(j) * K;
        for (int k = 0; k < K; ++k) o[k] = T(0);
        for (int m = std::max(0, j - kZeroBin); m <= std::min(kBins - 1, j + kZeroBin); ++m) {
            const T xv = x[j - m + kZeroBin];
            const T* w = &p.delta[static_cast<std::size_t>(m) * K];
            for (int k = 0; k < K; ++k) o[k] += w[k] * xv;
        }
    }
}

template <typename T>
void sum_backward_multi(const T* x, const T* grad_out, const std::vector<T*>& kernel_grads) {
    const int K = static_cast<int>(kernel_grads.size());
    std::vector<T> acc(static_cast<std::size_t>(kBins) * K, T(0));
    for (int j = 0; j < kBins; ++j) {
        const T* g = grad_out + static_cast<std::size_t>(j) * K;
        for (int m = std::max(0, j - kZeroBin); m <= std::min(kBins - 1, j + kZeroBin); ++m) {
            const T xv = x[j - m + kZeroBin];
            T* a = &acc[static_cast<std::size_t>(m) * K];
            for (int k = 0; k < K; ++k) a[k] += g[k] * xv;
        }
    }
    for (int k = 0; k < K; ++k)
        for (int m = 0; m < kBins; ++m)
            kernel_grads[k][m] += static_cast<T>(kDelta) * acc[static_cast<std::size_t>(m) * K + k];
}

// ---------------------------------------------------------------------------
// Monte Carlo verification
// ---------------------------------------------------------------------------

using Sampler = std::function<double(std::mt19937_64&)>;

inline DensityVector<double> monte_carlo_product(const Sampler& x_sampler, const Sampler& w_sampler,
                                                 std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("monte_carlo_product: n_samples >= 1 required");
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> counts(kBins, 0);
    for (std::int64_t s = 0; s < n_samples; ++s) {
        const double z = x_sampler(rng) * w_sampler(rng);
        if (auto b = grid::bin_index(z)) ++counts[*b];
    }
    DensityVector<double> d;
    for (int i = 0; i < kBins; ++i)
        d.density[i] = static_cast<double>(counts[i]) / (static_cast<double>(n_samples) * kDelta);
    return d;
}

struct ZeroBinReport {
    double measured_zero_density = 0;
    double predicted_zero_density = 0;
    double relative_error = 0;
    double fx0_measured = 0;    // measured zero-bin density of X
    double e_inv_abs_w = 0;     // sample mean of 1/|w|
    DensityVector<double> z_histogram;
};

// The bimodal experiment: X ~ N(0,1), W ~ half N(-4,1) + half N(4,1). The
// measured zero-bin density of Z = XW is compared against f_X(0) * E(1/|w|),
// both sides estimated from the same sample stream.
inline ZeroBinReport verify_zero_bin_rule(std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("verify_zero_bin_rule: n_samples >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::int64_t> zc(kBins, 0);
    std::int64_t x_zero = 0;
    double inv_sum = 0.0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        const double x = unit(rng);
        const double w = unit(rng) + (coin(rng) ? 4.0 : -4.0);
        inv_sum += 1.0 / std::abs(w);
        if (auto bx = grid::bin_index(x); bx && *bx == kZeroBin) ++x_zero;
        if (auto bz = grid::bin_index(x * w)) ++zc[*bz];
    }
    ZeroBinReport r;
    const double norm = static_cast<double>(n_samples) * kDelta;
    for (int i = 0; i < kBins; ++i) r.z_histogram.density[i] = static_cast<double>(zc[i]) / norm;
    r.measured_zero_density = r.z_histogram.density[kZeroBin];
    r.fx0_measured = static_cast<double>(x_zero) / norm;
    r.e_inv_abs_w = inv_sum / static_cast<double>(n_samples);
    r.predicted_zero_density = r.fx0_measured * r.e_inv_abs_w;
    r.relative_error = std::abs(r.measured_zero_density - r.predicted_zero_density) /
                       r.predicted_zero_density;
    return r;
}

struct DivergenceReport {
    double zero_bin_density = 0;
    double median_nonzero_density = 0;
    DensityVector<double> z_histogram;
};

// Both factors standard normal: the zero bin dominates every other bin,
// the discrete signature of the divergent continuum density at 0.
inline DivergenceReport run_divergence_experiment(std::int64_t n_samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const Sampler gauss = [&unit](std::mt19937_64& r) { return unit(r); };
    DivergenceReport rep;
    rep.z_histogram = monte_carlo_product(gauss, gauss, n_samples, seed);
    rep.zero_bin_density = rep.z_histogram.density[kZeroBin];
    std::vector<double> others;
    others.reserve(kBins - 1);
    for (int i = 0; i < kBins; ++i)
        if (i != kZeroBin) others.push_back(rep.z_histogram.density[i]);
    std::nth_element(others.begin(), others.begin() + others.size() / 2, others.end());
    rep.median_nonzero_density = others[others.size() / 2];
    return rep;
}

template <typename T>
double l1_density_distance(const DensityVector<T>& a, const DensityVector<T>& b) {
    double s = 0;
    for (int i = 0; i < kBins; ++i)
        s += std::abs(static_cast<double>(a.density[i]) - static_cast<double>(b.density[i]));
    return s * kDelta;
}

}  // namespace lts::distlayer
