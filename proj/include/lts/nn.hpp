#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

// Minimal differentiable-compute kernel. Every op is a pure function of its
// inputs; backward passes are wired explicitly by the models that use them.

namespace lts::nn {

struct Shape {
    std::array<std::int64_t, 4> dim{1, 1, 1, 1};
    int rank = 0;

    Shape() = default;
    explicit Shape(std::int64_t a) : dim{a, 1, 1, 1}, rank(1) {}
    Shape(std::int64_t a, std::int64_t b) : dim{a, b, 1, 1}, rank(2) {}
    Shape(std::int64_t a, std::int64_t b, std::int64_t c) : dim{a, b, c, 1}, rank(3) {}
    Shape(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d)
        : dim{a, b, c, d}, rank(4) {}

    std::int64_t numel() const { return dim[0] * dim[1] * dim[2] * dim[3]; }
    bool operator==(const Shape& o) const { return rank == o.rank && dim == o.dim; }
    bool operator!=(const Shape& o) const { return !(*this == o); }
};

template <typename T>
struct ValueGrid {
    Shape shape;
    std::vector<T> data;

    ValueGrid() = default;
    explicit ValueGrid(Shape s) : shape(s), data(static_cast<std::size_t>(s.numel()), T(0)) {}

    std::int64_t numel() const { return shape.numel(); }

    T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
        return data[((n * shape.dim[1] + c) * shape.dim[2] + h) * shape.dim[3] + w];
    }
    T at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
        return data[((n * shape.dim[1] + c) * shape.dim[2] + h) * shape.dim[3] + w];
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

template <typename T>
struct Parameter {
    std::string name;
    ValueGrid<T> value;
    ValueGrid<T> grad;

    Parameter() = default;
    Parameter(std::string n, Shape s) : name(std::move(n)), value(s), grad(s) {}

    void zero_grad() { grad.fill(T(0)); }
};

namespace detail {
template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapM = Eigen::Map<const MatRM<T>>;

inline void check(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}
}  // namespace detail

template <typename T>
void uniform_init(ValueGrid<T>& g, T lo, T hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(static_cast<double>(lo), static_cast<double>(hi));
    for (auto& v : g.data) v = static_cast<T>(dist(rng));
}

// ---------------------------------------------------------------------------
// conv2d: cross-correlation, NCHW input, OCkk weights.
// ---------------------------------------------------------------------------

inline std::int64_t conv_out_dim(std::int64_t in, std::int64_t k, std::int64_t stride,
                                 std::int64_t pad) {
    return (in + 2 * pad - k) / stride + 1;
}

namespace detail {
template <typename T>
void im2col(const ValueGrid<T>& x, std::int64_t n, std::int64_t kh, std::int64_t kw,
            std::int64_t stride, std::int64_t pad, std::vector<T>& col) {
    const std::int64_t C = x.shape.dim[1], H = x.shape.dim[2], W = x.shape.dim[3];
    const std::int64_t Ho = conv_out_dim(H, kh, stride, pad);
    const std::int64_t Wo = conv_out_dim(W, kw, stride, pad);
    col.assign(static_cast<std::size_t>(C * kh * kw * Ho * Wo), T(0));
    for (std::int64_t c = 0; c < C; ++c)
        for (std::int64_t i = 0; i < kh; ++i)
            for (std::int64_t j = 0; j < kw; ++j) {
                T* dst = col.data() + ((c * kh + i) * kw + j) * Ho * Wo;
                for (std::int64_t oh = 0; oh < Ho; ++oh) {
                    const std::int64_t ih = oh * stride + i - pad;
                    if (ih < 0 || ih >= H) continue;
                    const T* src = &x.data[((n * C + c) * H + ih) * W];
                    for (std::int64_t ow = 0; ow < Wo; ++ow) {
                        const std::int64_t iw = ow * stride + j - pad;
                        if (iw >= 0 && iw < W) dst[oh * Wo + ow] = src[iw];
                    }
                }
            }
}

template <typename T>
void col2im_add(const std::vector<T>& col, std::int64_t n, std::int64_t kh, std::int64_t kw,
                std::int64_t stride, std::int64_t pad, ValueGrid<T>& x) {
    const std::int64_t C = x.shape.dim[1], H = x.shape.dim[2], W = x.shape.dim[3];
    const std::int64_t Ho = conv_out_dim(H, kh, stride, pad);
    const std::int64_t Wo = conv_out_dim(W, kw, stride, pad);
    for (std::int64_t c = 0; c < C; ++c)
        for (std::int64_t i = 0; i < kh; ++i)
            for (std::int64_t j = 0; j < kw; ++j) {
                const T* src = col.data() + ((c * kh + i) * kw + j) * Ho * Wo;
                for (std::int64_t oh = 0; oh < Ho; ++oh) {
                    const std::int64_t ih = oh * stride + i - pad;
                    if (ih < 0 || ih >= H) continue;
                    T* dst = &x.data[((n * C + c) * H + ih) * W];
                    for (std::int64_t ow = 0; ow < Wo; ++ow) {
                        const std::int64_t iw = ow * stride + j - pad;
                        if (iw >= 0 && iw < W) dst[iw] += src[oh * Wo + ow];
                    }
                }
            }
}
}  // namespace detail

template <typename T>
ValueGrid<T> conv2d_forward(const ValueGrid<T>& x, const ValueGrid<T>& w, const ValueGrid<T>& b,
                            std::int64_t stride = 1, std::int64_t pad = 0) {
    detail::check(x.shape.rank == 4 && w.shape.rank == 4, "conv2d: rank-4 input/weights required");
    detail::check(x.shape.dim[1] == w.shape.dim[1], "conv2d: channel mismatch");
    detail::check(b.numel() == w.shape.dim[0], "conv2d: bias size mismatch");
    const std::int64_t N = x.shape.dim[0], O = w.shape.dim[0];
    const std::int64_t kh = w.shape.dim[2], kw = w.shape.dim[3];
    const std::int64_t Ho = conv_out_dim(x.shape.dim[2], kh, stride, pad);
    const std::int64_t Wo = conv_out_dim(x.shape.dim[3], kw, stride, pad);
    detail::check(Ho >= 1 && Wo >= 1, "conv2d: output would be empty");

    ValueGrid<T> y(Shape(N, O, Ho, Wo));
    const std::int64_t K = w.shape.dim[1] * kh * kw;
    std::vector<T> col;
    detail::CMapM<T> wm(w.data.data(), O, K);
    for (std::int64_t n = 0; n < N; ++n) {
        detail::im2col(x, n, kh, kw, stride, pad, col);
        detail::CMapM<T> cm(col.data(), K, Ho * Wo);
        detail::MapM<T> ym(&y.data[n * O * Ho * Wo], O, Ho * Wo);
        ym.noalias() = wm * cm;
        for (std::int64_t o = 0; o < O; ++o) ym.row(o).array() += b.data[o];
    }
    return y;
}

template <typename T>
struct Conv2dGrads {
    ValueGrid<T> input;
    ValueGrid<T> weights;
    ValueGrid<T> bias;
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const ValueGrid<T>& x, const ValueGrid<T>& w,
                               const ValueGrid<T>& grad_y, std::int64_t stride = 1,
                               std::int64_t pad = 0) {
    const std::int64_t N = x.shape.dim[0], O = w.shape.dim[0];
    const std::int64_t kh = w.shape.dim[2], kw = w.shape.dim[3];
    const std::int64_t Ho = grad_y.shape.dim[2], Wo = grad_y.shape.dim[3];
    detail::check(grad_y.shape.dim[0] == N && grad_y.shape.dim[1] == O,
                  "conv2d_backward: grad shape mismatch");

    Conv2dGrads<T> g{ValueGrid<T>(x.shape), ValueGrid<T>(w.shape),
                     ValueGrid<T>(Shape(O))};
    const std::int64_t K = w.shape.dim[1] * kh * kw;
    std::vector<T> col, gcol(static_cast<std::size_t>(K * Ho * Wo));
    detail::CMapM<T> wm(w.data.data(), O, K);
    detail::MapM<T> gwm(g.weights.data.data(), O, K);
    for (std::int64_t n = 0; n < N; ++n) {
        detail::im2col(x, n, kh, kw, stride, pad, col);
        detail::CMapM<T> cm(col.data(), K, Ho * Wo);
        detail::CMapM<T> gym(&grad_y.data[n * O * Ho * Wo], O, Ho * Wo);
        gwm.noalias() += gym * cm.transpose();
        for (std::int64_t o = 0; o < O; ++o) g.bias.data[o] += gym.row(o).sum();
        detail::MapM<T> gcm(gcol.data(), K, Ho * Wo);
        gcm.noalias() = wm.transpose() * gym;
        detail::col2im_add(gcol, n, kh, kw, stride, pad, g.input);
    }
    return g;
}

// ---------------------------------------------------------------------------
// maxpool 2x2 (stride 2). Ties break to the first index in scan order.
// ---------------------------------------------------------------------------

template <typename T>
struct MaxPoolResult {
    ValueGrid<T> output;
    ValueGrid<std::int32_t> argmax;  // flat offset within the input HxW plane
};

template <typename T>
MaxPoolResult<T> maxpool2x2_forward(const ValueGrid<T>& x) {
    const std::int64_t N = x.shape.dim[0], C = x.shape.dim[1];
    const std::int64_t H = x.shape.dim[2], W = x.shape.dim[3];
    detail::check(H % 2 == 0 && W % 2 == 0, "maxpool2x2: spatial dims must be even");
    MaxPoolResult<T> r{ValueGrid<T>(Shape(N, C, H / 2, W / 2)),
                       ValueGrid<std::int32_t>(Shape(N, C, H / 2, W / 2))};
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t c = 0; c < C; ++c) {
            const T* plane = &x.data[(n * C + c) * H * W];
            for (std::int64_t i = 0; i < H / 2; ++i)
                for (std::int64_t j = 0; j < W / 2; ++j) {
                    std::int32_t best = static_cast<std::int32_t>(2 * i * W + 2 * j);
                    T bv = plane[best];
                    const std::int32_t cand[3] = {
                        static_cast<std::int32_t>(2 * i * W + 2 * j + 1),
                        static_cast<std::int32_t>((2 * i + 1) * W + 2 * j),
                        static_cast<std::int32_t>((2 * i + 1) * W + 2 * j + 1)};
                    for (std::int32_t k : cand)
                        if (plane[k] > bv) { bv = plane[k]; best = k; }
                    r.output.at(n, c, i, j) = bv;
                    r.argmax.at(n, c, i, j) = best;
                }
        }
    return r;
}

template <typename T>
ValueGrid<T> maxpool2x2_backward(const ValueGrid<T>& grad_y, const ValueGrid<std::int32_t>& argmax,
                                 Shape input_shape) {
    ValueGrid<T> gx(input_shape);
    const std::int64_t N = grad_y.shape.dim[0], C = grad_y.shape.dim[1];
    const std::int64_t Ho = grad_y.shape.dim[2], Wo = grad_y.shape.dim[3];
    const std::int64_t HW = input_shape.dim[2] * input_shape.dim[3];
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t c = 0; c < C; ++c) {
            T* plane = &gx.data[(n * C + c) * HW];
            for (std::int64_t i = 0; i < Ho; ++i)
                for (std::int64_t j = 0; j < Wo; ++j)
                    plane[argmax.at(n, c, i, j)] += grad_y.at(n, c, i, j);
        }
    return gx;
}

// ---------------------------------------------------------------------------
// transpose conv, kernel 2, stride 2 (doubles spatial dims). Weight layout
// (C_in, C_out, 2, 2).
// ---------------------------------------------------------------------------

template <typename T>
ValueGrid<T> transpose_conv2d_forward(const ValueGrid<T>& x, const ValueGrid<T>& w,
                                      const ValueGrid<T>& b) {
    const std::int64_t N = x.shape.dim[0], C = x.shape.dim[1];
    const std::int64_t H = x.shape.dim[2], W = x.shape.dim[3];
    detail::check(w.shape.dim[0] == C && w.shape.dim[2] == 2 && w.shape.dim[3] == 2,
                  "transpose_conv2d: weight shape mismatch");
    const std::int64_t O = w.shape.dim[1];
    ValueGrid<T> y(Shape(N, O, 2 * H, 2 * W));
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t o = 0; o < O; ++o) {
            T* yp = &y.data[(n * O + o) * 4 * H * W];
            std::fill(yp, yp + 4 * H * W, b.data[o]);
        }
        for (std::int64_t c = 0; c < C; ++c) {
            const T* xp = &x.data[(n * C + c) * H * W];
            for (std::int64_t o = 0; o < O; ++o) {
                const T* wp = &w.data[(c * O + o) * 4];
                T* yp = &y.data[(n * O + o) * 4 * H * W];
                for (std::int64_t i = 0; i < H; ++i)
                    for (std::int64_t j = 0; j < W; ++j) {
                        const T v = xp[i * W + j];
                        T* base = yp + 2 * i * 2 * W + 2 * j;
                        base[0] += v * wp[0];
                        base[1] += v * wp[1];
                        base[2 * W] += v * wp[2];
                        base[2 * W + 1] += v * wp[3];
                    }
            }
        }
    }
    return y;
}

template <typename T>
Conv2dGrads<T> transpose_conv2d_backward(const ValueGrid<T>& x, const ValueGrid<T>& w,
                                         const ValueGrid<T>& grad_y) {
    const std::int64_t N = x.shape.dim[0], C = x.shape.dim[1];
    const std::int64_t H = x.shape.dim[2], W = x.shape.dim[3];
    const std::int64_t O = w.shape.dim[1];
    Conv2dGrads<T> g{ValueGrid<T>(x.shape), ValueGrid<T>(w.shape), ValueGrid<T>(Shape(O))};
    for (std::int64_t n = 0; n < N; ++n) {
        for (std::int64_t o = 0; o < O; ++o) {
            const T* gy = &grad_y.data[(n * O + o) * 4 * H * W];
            T acc = T(0);
            for (std::int64_t k = 0; k < 4 * H * W; ++k) acc += gy[k];
            g.bias.data[o] += acc;
        }
        for (std::int64_t c = 0; c < C; ++c) {
            const T* xp = &x.data[(n * C + c) * H * W];
            T* gxp = &g.input.data[(n * C + c) * H * W];
            for (std::int64_t o = 0; o < O; ++o) {
                const T* wp = &w.data[(c * O + o) * 4];
                T* gwp = &g.weights.data[(c * O + o) * 4];
                const T* gy = &grad_y.data[(n * O + o) * 4 * H * W];
                for (std::int64_t i = 0; i < H; ++i)
                    for (std::int64_t j = 0; j < W; ++j) {
                        const T* base = gy + 2 * i * 2 * W + 2 * j;
                        const T g0 = base[0], g1 = base[1], g2 = base[2 * W], g3 = base[2 * W + 1];
                        gxp[i * W + j] += g0 * wp[0] + g1 * wp[1] + g2 * wp[2] + g3 * wp[3];
                        const T v = xp[i * W + j];
                        gwp[0] += v * g0;
                        gwp[1] += v * g1;
                        gwp[2] += v * g2;
                        gwp[3] += v * g3;
                    }
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// channel concat / relu / fully connected
// ---------------------------------------------------------------------------

template <typename T>
ValueGrid<T> concat_channels(const ValueGrid<T>& a, const ValueGrid<T>& b) {
    detail::check(a.shape.dim[0] == b.shape.dim[0] && a.shape.dim[2] == b.shape.dim[2] &&
                      a.shape.dim[3] == b.shape.dim[3],
                  "concat_channels: shape mismatch");
    const std::int64_t N = a.shape.dim[0], Ca = a.shape.dim[1], Cb = b.shape.dim[1];
    const std::int64_t HW = a.shape.dim[2] * a.shape.dim[3];
    ValueGrid<T> y(Shape(N, Ca + Cb, a.shape.dim[2], a.shape.dim[3]));
    for (std::int64_t n = 0; n < N; ++n) {
        std::copy(&a.data[n * Ca * HW], &a.data[(n + 1) * Ca * HW], &y.data[n * (Ca + Cb) * HW]);
        std::copy(&b.data[n * Cb * HW], &b.data[(n + 1) * Cb * HW],
                  &y.data[(n * (Ca + Cb) + Ca) * HW]);
    }
    return y;
}

template <typename T>
std::pair<ValueGrid<T>, ValueGrid<T>> concat_channels_backward(const ValueGrid<T>& grad_y,
                                                               std::int64_t ca) {
    const std::int64_t N = grad_y.shape.dim[0], C = grad_y.shape.dim[1];
    const std::int64_t HW = grad_y.shape.dim[2] * grad_y.shape.dim[3];
    const std::int64_t cb = C - ca;
    ValueGrid<T> ga(Shape(N, ca, grad_y.shape.dim[2], grad_y.shape.dim[3]));
    ValueGrid<T> gb(Shape(N, cb, grad_y.shape.dim[2], grad_y.shape.dim[3]));
    for (std::int64_t n = 0; n < N; ++n) {
        std::copy(&grad_y.data[n * C * HW], &grad_y.data[(n * C + ca) * HW], &ga.data[n * ca * HW]);
        std::copy(&grad_y.data[(n * C + ca) * HW], &grad_y.data[(n + 1) * C * HW],
                  &gb.data[n * cb * HW]);
    }
    return {std::move(ga), std::move(gb)};
}

template <typename T>
ValueGrid<T> relu_forward(const ValueGrid<T>& x) {
    ValueGrid<T> y(x.shape);
    for (std::int64_t i = 0; i < x.numel(); ++i) y.data[i] = x.data[i] > T(0) ? x.data[i] : T(0);
    return y;
}

template <typename T>
ValueGrid<T> relu_backward(const ValueGrid<T>& grad_y, const ValueGrid<T>& x) {
    ValueGrid<T> gx(x.shape);
    for (std::int64_t i = 0; i < x.numel(); ++i)
        gx.data[i] = x.data[i] > T(0) ? grad_y.data[i] : T(0);
    return gx;
}

// x: (N,F), w: (U,F), b: (U) -> (N,U)
template <typename T>
ValueGrid<T> fully_connected_forward(const ValueGrid<T>& x, const ValueGrid<T>& w,
                                     const ValueGrid<T>& b) {
    const std::int64_t N = x.shape.dim[0], F = x.shape.dim[1];
    const std::int64_t U = w.shape.dim[0];
    detail::check(w.shape.dim[1] == F, "fully_connected: fan-in mismatch");
    ValueGrid<T> y(Shape(N, U));
    detail::CMapM<T> xm(x.data.data(), N, F), wm(w.data.data(), U, F);
    detail::MapM<T> ym(y.data.data(), N, U);
    ym.noalias() = xm * wm.transpose();
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t u = 0; u < U; ++u) y.data[n * U + u] += b.data[u];
    return y;
}

template <typename T>
struct FcGrads {
    ValueGrid<T> input, weights, bias;
};

template <typename T>
FcGrads<T> fully_connected_backward(const ValueGrid<T>& x, const ValueGrid<T>& w,
                                    const ValueGrid<T>& grad_y) {
    const std::int64_t N = x.shape.dim[0], F = x.shape.dim[1], U = w.shape.dim[0];
    FcGrads<T> g{ValueGrid<T>(x.shape), ValueGrid<T>(w.shape), ValueGrid<T>(Shape(U))};
    detail::CMapM<T> xm(x.data.data(), N, F), wm(w.data.data(), U, F),
        gym(grad_y.data.data(), N, U);
    detail::MapM<T> gxm(g.input.data.data(), N, F), gwm(g.weights.data.data(), U, F);
    gxm.noalias() = gym * wm;
    gwm.noalias() = gym.transpose() * xm;
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t u = 0; u < U; ++u) g.bias.data[u] += grad_y.data[n * U + u];
    return g;
}

// ---------------------------------------------------------------------------
// losses
// ---------------------------------------------------------------------------

template <typename T>
ValueGrid<T> log_softmax(const ValueGrid<T>& logits) {
    const std::int64_t N = logits.shape.dim[0], K = logits.shape.dim[1];
    ValueGrid<T> y(logits.shape);
    for (std::int64_t n = 0; n < N; ++n) {
        const T* row = &logits.data[n * K];
        T mx = row[0];
        for (std::int64_t k = 1; k < K; ++k) mx = std::max(mx, row[k]);
        T sum = T(0);
        for (std::int64_t k = 0; k < K; ++k) sum += std::exp(row[k] - mx);
        const T lse = mx + std::log(sum);
        for (std::int64_t k = 0; k < K; ++k) y.data[n * K + k] = row[k] - lse;
    }
    return y;
}

template <typename T>
T nll_loss(const ValueGrid<T>& log_probs, const std::vector<int>& targets) {
    const std::int64_t N = log_probs.shape.dim[0], K = log_probs.shape.dim[1];
    detail::check(static_cast<std::int64_t>(targets.size()) == N, "nll_loss: target count");
    T total = T(0);
    for (std::int64_t n = 0; n < N; ++n) {
        detail::check(targets[n] >= 0 && targets[n] < K, "nll_loss: target index out of range");
        total -= log_probs.data[n * K + targets[n]];
    }
    return total / static_cast<T>(N);
}

// Gradient of nll_loss(log_softmax(logits)) with respect to logits.
template <typename T>
ValueGrid<T> nll_log_softmax_backward(const ValueGrid<T>& log_probs,
                                      const std::vector<int>& targets) {
    const std::int64_t N = log_probs.shape.dim[0], K = log_probs.shape.dim[1];
    ValueGrid<T> g(log_probs.shape);
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t k = 0; k < K; ++k) {
            const T p = std::exp(log_probs.data[n * K + k]);
            g.data[n * K + k] = (p - (targets[n] == k ? T(1) : T(0))) / static_cast<T>(N);
        }
    return g;
}

// Two-class per-pixel cross-entropy with class weights, averaged over pixels.
// logits: (N,2,H,W); targets: (N,1,H,W) holding 0 (bg) or 1 (fg).
template <typename T>
T weighted_cross_entropy(const ValueGrid<T>& logits, const ValueGrid<std::uint8_t>& targets,
                         T w_bg, T w_fg) {
    detail::check(w_bg > T(0) && w_fg > T(0), "weighted_cross_entropy: weights must be positive");
    detail::check(logits.shape.dim[1] == 2, "weighted_cross_entropy: two classes required");
    const std::int64_t N = logits.shape.dim[0];
    const std::int64_t HW = logits.shape.dim[2] * logits.shape.dim[3];
    T total = T(0);
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t p = 0; p < HW; ++p) {
            const T a = logits.data[(n * 2 + 0) * HW + p];
            const T b = logits.data[(n * 2 + 1) * HW + p];
            const T mx = std::max(a, b);
            const T lse = mx + std::log(std::exp(a - mx) + std::exp(b - mx));
            const std::uint8_t t = targets.data[n * HW + p];
            const T logp = (t == 0 ? a : b) - lse;
            total -= (t == 0 ? w_bg : w_fg) * logp;
        }
    return total / static_cast<T>(N * HW);
}

template <typename T>
ValueGrid<T> weighted_cross_entropy_backward(const ValueGrid<T>& logits,
                                             const ValueGrid<std::uint8_t>& targets, T w_bg,
                                             T w_fg) {
    const std::int64_t N = logits.shape.dim[0];
    const std::int64_t HW = logits.shape.dim[2] * logits.shape.dim[3];
    ValueGrid<T> g(logits.shape);
    const T scale = T(1) / static_cast<T>(N * HW);
    for (std::int64_t n = 0; n < N; ++n)
        for (std::int64_t p = 0; p < HW; ++p) {
            const T a = logits.data[(n * 2 + 0) * HW + p];
            const T b = logits.data[(n * 2 + 1) * HW + p];
            const T mx = std::max(a, b);
            const T ea = std::exp(a - mx), eb = std::exp(b - mx);
            const T pa = ea / (ea + eb), pb = eb / (ea + eb);
            const std::uint8_t t = targets.data[n * HW + p];
            const T w = (t == 0 ? w_bg : w_fg);
            g.data[(n * 2 + 0) * HW + p] = w * (pa - (t == 0 ? T(1) : T(0))) * scale;
            g.data[(n * 2 + 1) * HW + p] = w * (pb - (t == 1 ? T(1) : T(0))) * scale;
        }
    return g;
}

// ---------------------------------------------------------------------------
// optimizers
// ---------------------------------------------------------------------------

template <typename T>
struct AdamState {
    T lr = T(1e-4);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);
    std::int64_t step_count = 0;
    std::vector<ValueGrid<T>> m, v;

    void init(const std::vector<Parameter<T>*>& params) {
        m.clear();
        v.clear();
        for (const auto* p : params) {
            m.emplace_back(p->value.shape);
            v.emplace_back(p->value.shape);
        }
        step_count = 0;
    }
};

template <typename T>
void adam_step(const std::vector<Parameter<T>*>& params, AdamState<T>& st) {
    if (st.m.size() != params.size()) st.init(params);
    ++st.step_count;
    const T bc1 = T(1) - std::pow(st.beta1, static_cast<T>(st.step_count));
    const T bc2 = T(1) - std::pow(st.beta2, static_cast<T>(st.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = *params[i];
        for (std::int64_t k = 0; k < p.value.numel(); ++k) {
            const T g = p.grad.data[k];
            st.m[i].data[k] = st.beta1 * st.m[i].data[k] + (T(1) - st.beta1) * g;
            st.v[i].data[k] = st.beta2 * st.v[i].data[k] + (T(1) - st.beta2) * g * g;
            const T mhat = st.m[i].data[k] / bc1;
            const T vhat = st.v[i].data[k] / bc2;
            p.value.data[k] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
        }
    }
}

template <typename T>
struct RmspropState {
    T lr = T(1e-5);
    T decay = T(0.99);
    T eps = T(1e-8);
    std::vector<ValueGrid<T>> ms;

    void init(const std::vector<Parameter<T>*>& params) {
        ms.clear();
        for (const auto* p : params) ms.emplace_back(p->value.shape);
    }
};

template <typename T>
void rmsprop_step(const std::vector<Parameter<T>*>& params, RmspropState<T>& st) {
    if (st.ms.size() != params.size()) st.init(params);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = *params[i];
        for (std::int64_t k = 0; k < p.value.numel(); ++k) {
            const T g = p.grad.data[k];
            st.ms[i].data[k] = st.decay * st.ms[i].data[k] + (T(1) - st.decay) * g * g;
            p.value.data[k] -= st.lr * g / (std::sqrt(st.ms[i].data[k]) + st.eps);
        }
    }
}

// ---------------------------------------------------------------------------
// finite-difference gradient checker
// ---------------------------------------------------------------------------

// Compares analytic gradients already stored in each parameter against central
// differences of `loss_fn`. Returns the maximum relative error over all
// entries; rel = |a - n| / max(|a|, |n|, 1e-4).
template <typename T>
T gradcheck(const std::function<T()>& loss_fn, const std::vector<Parameter<T>*>& params,
            T h = T(1e-4)) {
    T worst = T(0);
    for (auto* p : params) {
        for (std::int64_t k = 0; k < p->value.numel(); ++k) {
            const T saved = p->value.data[k];
            p->value.data[k] = saved + h;
            const T lp = loss_fn();
            p->value.data[k] = saved - h;
            const T lm = loss_fn();
            p->value.data[k] = saved;
            const T numeric = (lp - lm) / (T(2) * h);
            const T analytic = p->grad.data[k];
            const T denom = std::max({std::abs(analytic), std::abs(numeric), T(1e-4)});
            worst = std::max(worst, std::abs(analytic - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace lts::nn
