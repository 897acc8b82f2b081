#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "lts/checkpoint.hpp"
#include "lts/didl.hpp"
#include "lts/nn.hpp"
#include "lts/videoio.hpp"

// Stochastic Bayesian refinement: a small encoder-decoder relabels pixels
// from neighborhood evidence. At inference the image is tiled per scale with
// a random global offset per coverage layer (border tiles clamped inward), so
// every pixel is covered at least once per scale and layer; foreground
// probabilities accumulate into a heatmap normalized by per-pixel stack
// counts and thresholded at 0.5.

namespace lts::sbr {

using videoio::Label;

// Planar float image, channel-major (3 x H x W).
struct PlanarImage {
    int height = 0;
    int width = 0;
    std::vector<float> planes;

    static PlanarImage from_frame(const videoio::FrameSequence& seq, int t) {
        PlanarImage img;
        img.height = seq.height;
        img.width = seq.width;
        img.planes.resize(static_cast<std::size_t>(3) * seq.height * seq.width);
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < seq.height; ++y)
                for (int x = 0; x < seq.width; ++x)
                    img.planes[(static_cast<std::size_t>(c) * seq.height + y) * seq.width + x] =
                        seq.at(t, x, y, c);
        return img;
    }
};

struct PatchSample {
    int x = 0;
    int y = 0;
    int scale = 0;
    int layer = 0;
};

inline std::int64_t sample_count(std::int64_t height, std::int64_t width, std::int64_t scale,
                                 std::int64_t l) {
    if (height < 1 || width < 1 || scale < 1 || l < 0)
        throw std::invalid_argument("sample_count: positive arguments required");
    const std::int64_t per_layer = (height * width + scale * scale - 1) / (scale * scale);
    return per_layer * l;
}

// ---------------------------------------------------------------------------
// refine network
// ---------------------------------------------------------------------------

struct RefineNetDims {
    int in_channels = 4;
    int out_channels = 2;
    std::array<int, 4> widths{16, 32, 48, 64};
};

template <typename T>
class RefineNet {
    struct DoubleConv {
        nn::Parameter<T> w1, b1, w2, b2;

        struct Cache {
            nn::ValueGrid<T> in, h1, r1, h2;
        };

        nn::ValueGrid<T> forward(const nn::ValueGrid<T>& x, Cache* cc) const {
            auto h1 = nn::conv2d_forward(x, w1.value, b1.value, 1, 1);
            auto r1 = nn::relu_forward(h1);
            auto h2 = nn::conv2d_forward(r1, w2.value, b2.value, 1, 1);
            auto out = nn::relu_forward(h2);
            if (cc) {
                cc->in = x;
                cc->h1 = std::move(h1);
                cc->r1 = std::move(r1);
                cc->h2 = std::move(h2);
            }
            return out;
        }

        nn::ValueGrid<T> backward(const Cache& cc, const nn::ValueGrid<T>& grad_out) {
            auto g2 = nn::relu_backward(grad_out, cc.h2);
            auto gg2 = nn::conv2d_backward(cc.r1, w2.value, g2, 1, 1);
            accumulate(w2.grad, gg2.weights);
            accumulate(b2.grad, gg2.bias);
            auto g1 = nn::relu_backward(gg2.input, cc.h1);
            auto gg1 = nn::conv2d_backward(cc.in, w1.value, g1, 1, 1);
            accumulate(w1.grad, gg1.weights);
            accumulate(b1.grad, gg1.bias);
            return std::move(gg1.input);
        }

        static void accumulate(nn::ValueGrid<T>& dst, const nn::ValueGrid<T>& src) {
            for (std::int64_t i = 0; i < dst.numel(); ++i) dst.data[i] += src.data[i];
        }
    };

public:
    RefineNetDims dims;
    std::array<DoubleConv, 4> enc;  // enc[i]: widths[i-1] -> widths[i] (enc[0]: in -> w0)
    std::array<nn::Parameter<T>, 3> up_w, up_b;  // up[i]: widths[i+1] -> widths[i]
    std::array<DoubleConv, 3> dec;               // dec[i]: 2*widths[i] -> widths[i]
    nn::Parameter<T> out_w, out_b;               // 1x1 conv widths[0] -> out_channels

    static RefineNet build(std::uint64_t seed, RefineNetDims d = {}) {
        RefineNet net;
        net.dims = d;
        std::mt19937_64 rng(seed);
        auto conv_param = [&rng](const std::string& name, int out_c, int in_c, int k) {
            nn::Parameter<T> p(name, nn::Shape(out_c, in_c, k, k));
            const T bound = static_cast<T>(1.0 / std::sqrt(static_cast<double>(in_c) * k * k));
            nn::uniform_init(p.value, -bound, bound, rng);
            return p;
        };
        auto bias_param = [&rng](const std::string& name, int n, int fan_in) {
            nn::Parameter<T> p(name, nn::Shape(n));
            const T bound = static_cast<T>(1.0 / std::sqrt(static_cast<double>(fan_in)));
            nn::uniform_init(p.value, -bound, bound, rng);
            return p;
        };
        auto make_double = [&](DoubleConv& dc, const std::string& prefix, int in_c, int out_c) {
            dc.w1 = conv_param(prefix + "_conv1_w", out_c, in_c, 3);
            dc.b1 = bias_param(prefix + "_conv1_b", out_c, in_c * 9);
            dc.w2 = conv_param(prefix + "_conv2_w", out_c, out_c, 3);
            dc.b2 = bias_param(prefix + "_conv2_b", out_c, out_c * 9);
        };
        const auto& w = d.widths;
        make_double(net.enc[0], "enc0", d.in_channels, w[0]);
        make_double(net.enc[1], "enc1", w[0], w[1]);
        make_double(net.enc[2], "enc2", w[1], w[2]);
        make_double(net.enc[3], "enc3", w[2], w[3]);
        for (int i = 2; i >= 0; --i) {
            // transpose conv weight layout: (C_in, C_out, 2, 2)
            nn::Parameter<T> wp("up" + std::to_string(i) + "_w",
                                nn::Shape(w[i + 1], w[i], 2, 2));
            const T bound = static_cast<T>(1.0 / std::sqrt(static_cast<double>(w[i + 1]) * 4));
            nn::uniform_init(wp.value, -bound, bound, rng);
            net.up_w[i] = std::move(wp);
            net.up_b[i] = bias_param("up" + std::to_string(i) + "_b", w[i], w[i + 1] * 4);
        }
        make_double(net.dec[2], "dec2", 2 * w[2], w[2]);
        make_double(net.dec[1], "dec1", 2 * w[1], w[1]);
        make_double(net.dec[0], "dec0", 2 * w[0], w[0]);
        net.out_w = conv_param("out_w", d.out_channels, w[0], 1);
        net.out_b = bias_param("out_b", d.out_channels, w[0]);
        return net;
    }

    std::vector<nn::Parameter<T>*> parameters() {
        std::vector<nn::Parameter<T>*> ps;
        auto add_double = [&ps](DoubleConv& dc) {
            ps.push_back(&dc.w1);
            ps.push_back(&dc.b1);
            ps.push_back(&dc.w2);
            ps.push_back(&dc.b2);
        };
        for (auto& e : enc) add_double(e);
        for (int i = 2; i >= 0; --i) {
            ps.push_back(&up_w[i]);
            ps.push_back(&up_b[i]);
        }
        for (int i = 2; i >= 0; --i) add_double(dec[i]);
        ps.push_back(&out_w);
        ps.push_back(&out_b);
        return ps;
    }

    std::int64_t parameter_count() {
        std::int64_t n = 0;
        for (auto* p : parameters()) n += p->value.numel();
        return n;
    }

    void zero_grad() {
        for (auto* p : parameters()) p->zero_grad();
    }

    struct Cache {
        typename DoubleConv::Cache enc_cc[4], dec_cc[3];
        nn::ValueGrid<T> e[4];                 // encoder block outputs
        nn::ValueGrid<std::int32_t> argmax[3];
        nn::Shape pooled_in[3];
        nn::ValueGrid<T> d[3];                 // decoder block outputs (d[2] deepest)
    };

    // x: (N, in_channels, s, s), s a multiple of 8 and >= 8.
    nn::ValueGrid<T> forward(const nn::ValueGrid<T>& x, Cache* cc) const {
        if (x.shape.dim[2] < 8 || x.shape.dim[3] < 8 || x.shape.dim[2] % 8 != 0 ||
            x.shape.dim[3] % 8 != 0)
            throw std::invalid_argument("RefineNet: spatial dims must be multiples of 8, >= 8");
        Cache local;
        Cache& c = cc ? *cc : local;
        c.e[0] = enc[0].forward(x, cc ? &c.enc_cc[0] : nullptr);
        nn::ValueGrid<T> cur;
        for (int i = 0; i < 3; ++i) {
            auto pooled = nn::maxpool2x2_forward(c.e[i]);
            c.argmax[i] = std::move(pooled.argmax);
            c.pooled_in[i] = c.e[i].shape;
            c.e[i + 1] = enc[i + 1].forward(pooled.output, cc ? &c.enc_cc[i + 1] : nullptr);
        }
        cur = c.e[3];
        for (int i = 2; i >= 0; --i) {
            auto up = nn::transpose_conv2d_forward(cur, up_w[i].value, up_b[i].value);
            auto cat = nn::concat_channels(up, c.e[i]);
            cur = dec[i].forward(cat, cc ? &c.dec_cc[i] : nullptr);
            c.d[i] = cur;
        }
        return nn::conv2d_forward(cur, out_w.value, out_b.value, 1, 0);
    }

    void backward(const Cache& c, const nn::ValueGrid<T>& grad_logits) {
        auto go = nn::conv2d_backward(c.d[0], out_w.value, grad_logits, 1, 0);
        DoubleConv::accumulate(out_w.grad, go.weights);
        DoubleConv::accumulate(out_b.grad, go.bias);
        nn::ValueGrid<T> gcur = std::move(go.input);
        nn::ValueGrid<T> skip_grad[4];
        for (int i = 0; i <= 2; ++i) {
            auto gcat = dec[i].backward(c.dec_cc[i], gcur);
            auto [gup, gskip] = nn::concat_channels_backward(gcat, dims.widths[i]);
            skip_grad[i] = std::move(gskip);
            const auto& up_in = i == 2 ? c.e[3] : c.d[i + 1];
            auto gt = nn::transpose_conv2d_backward(up_in, up_w[i].value, gup);
            DoubleConv::accumulate(up_w[i].grad, gt.weights);
            DoubleConv::accumulate(up_b[i].grad, gt.bias);
            gcur = std::move(gt.input);
        }
        // gcur now holds the gradient at e[3]
        for (int i = 3; i >= 1; --i) {
            auto gpooled = enc[i].backward(c.enc_cc[i], gcur);
            gcur = nn::maxpool2x2_backward(gpooled, c.argmax[i - 1], c.pooled_in[i - 1]);
            DoubleConv::accumulate(gcur, skip_grad[i - 1]);
        }
        enc[0].backward(c.enc_cc[0], gcur);
    }
};

// ---------------------------------------------------------------------------
// patch sampling
// ---------------------------------------------------------------------------

// Training crops per image: 64 patches at 64x64, 256 at 32x32, 1024 at 16x16,
// uniformly placed fully inside the image; scales that do not fit are skipped.
inline std::vector<PatchSample> sample_training_patches(int height, int width,
                                                        std::mt19937_64& rng) {
    std::vector<PatchSample> out;
    const std::array<int, 3> scales{64, 32, 16};
    for (int s : scales) {
        if (s > height || s > width) continue;
        const int count = 64 * (64 / s) * (64 / s);
        std::uniform_int_distribution<int> dx(0, width - s), dy(0, height - s);
        for (int k = 0; k < count; ++k) {
            PatchSample p;
            p.x = dx(rng);
            p.y = dy(rng);
            p.scale = s;
            out.push_back(p);
        }
    }
    return out;
}

template <typename T>
void extract_input_patch(const PlanarImage& img, const std::vector<float>& fg_plane,
                         const PatchSample& p, nn::ValueGrid<T>& batch, std::int64_t slot) {
    const int s = p.scale;
    const std::int64_t C = batch.shape.dim[1];
    for (int c = 0; c < 3; ++c)
        for (int yy = 0; yy < s; ++yy)
            for (int xx = 0; xx < s; ++xx)
                batch.at(slot, c, yy, xx) = static_cast<T>(
                    img.planes[(static_cast<std::size_t>(c) * img.height + p.y + yy) * img.width +
                               p.x + xx]);
    (void)C;
    for (int yy = 0; yy < s; ++yy)
        for (int xx = 0; xx < s; ++xx)
            batch.at(slot, 3, yy, xx) =
                static_cast<T>(fg_plane[static_cast<std::size_t>(p.y + yy) * img.width + p.x + xx]);
}

inline void extract_target_patch(const std::vector<std::uint8_t>& target, int width,
                                 const PatchSample& p, nn::ValueGrid<std::uint8_t>& batch,
                                 std::int64_t slot) {
    const int s = p.scale;
    for (int yy = 0; yy < s; ++yy)
        for (int xx = 0; xx < s; ++xx)
            batch.at(slot, 0, yy, xx) =
                target[static_cast<std::size_t>(p.y + yy) * width + p.x + xx];
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

struct SbrExample {
    PlanarImage image;
    std::vector<float> input_fg;        // H*W in {0,1}; 4th input channel
    std::vector<std::uint8_t> target;   // H*W in {0,1}
};

struct SbrTrainOptions {
    double lr = 1e-5;
    double weight_bg = 0.2;
    double weight_fg = 0.8;
    std::array<int, 3> scales{64, 32, 16};
    std::array<int, 3> batch_sizes{512, 2048, 8192};
};

// Salt-and-pepper flips plus boundary nibbling, used to corrupt ground truth
// into a training input when no classifier masks are available.
inline std::vector<float> corrupt_mask(const std::vector<std::uint8_t>& target, int height,
                                       int width, double flip_rate, std::mt19937_64& rng) {
    std::vector<float> out(target.size());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < target.size(); ++i) {
        const bool flip = u(rng) < flip_rate;
        out[i] = static_cast<float>(flip ? 1 - target[i] : target[i]);
    }
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            if (target[i] != 1) continue;
            const bool boundary =
                (x > 0 && target[i - 1] == 0) || (x + 1 < width && target[i + 1] == 0) ||
                (y > 0 && target[i - width] == 0) || (y + 1 < height && target[i + width] == 0);
            if (boundary && u(rng) < 0.3) out[i] = 0.0f;
        }
    return out;
}

template <typename T>
std::vector<double> train_sbr(RefineNet<T>& net, const std::vector<SbrExample>& corpus,
                              int epochs, const SbrTrainOptions& opt, std::mt19937_64& rng) {
    if (corpus.empty()) throw std::invalid_argument("train_sbr: empty corpus");
    auto params = net.parameters();
    nn::RmspropState<T> st;
    st.lr = static_cast<T>(opt.lr);
    st.init(params);

    std::vector<double> epoch_losses;
    typename RefineNet<T>::Cache cache;
    for (int e = 0; e < epochs; ++e) {
        // fresh random patch positions each epoch, pooled per scale
        std::array<std::vector<std::pair<int, PatchSample>>, 3> pools;
        for (int gi = 0; gi < static_cast<int>(corpus.size()); ++gi) {
            const auto samples =
                sample_training_patches(corpus[gi].image.height, corpus[gi].image.width, rng);
            for (const auto& p : samples)
                for (int si = 0; si < 3; ++si)
                    if (p.scale == opt.scales[si]) pools[si].emplace_back(gi, p);
        }
        double loss_sum = 0.0;
        std::int64_t patch_count = 0;
        for (int si = 0; si < 3; ++si) {
            auto& pool = pools[si];
            if (pool.empty()) continue;
            std::shuffle(pool.begin(), pool.end(), rng);
            const int s = opt.scales[si];
            const int micro = std::max(1, 32768 / (s * s));  // ~constant pixels per micro-batch
            for (std::size_t b0 = 0; b0 < pool.size();
                 b0 += static_cast<std::size_t>(opt.batch_sizes[si])) {
                const std::size_t b1 =
                    std::min(pool.size(), b0 + static_cast<std::size_t>(opt.batch_sizes[si]));
                net.zero_grad();
                for (std::size_t m0 = b0; m0 < b1; m0 += micro) {
                    const std::size_t m1 = std::min(b1, m0 + static_cast<std::size_t>(micro));
                    const int B = static_cast<int>(m1 - m0);
                    nn::ValueGrid<T> input(nn::Shape(B, net.dims.in_channels, s, s));
                    nn::ValueGrid<std::uint8_t> target(nn::Shape(B, 1, s, s));
                    for (std::size_t m = m0; m < m1; ++m) {
                        const auto& [gi, p] = pool[m];
                        extract_input_patch(corpus[gi].image, corpus[gi].input_fg, p, input,
                                            static_cast<std::int64_t>(m - m0));
                        extract_target_patch(corpus[gi].target, corpus[gi].image.width, p, target,
                                             static_cast<std::int64_t>(m - m0));
                    }
                    auto logits = net.forward(input, &cache);
                    const T loss = nn::weighted_cross_entropy(logits, target,
                                                              static_cast<T>(opt.weight_bg),
                                                              static_cast<T>(opt.weight_fg));
                    loss_sum += static_cast<double>(loss) * B;
                    patch_count += B;
                    auto glogits = nn::weighted_cross_entropy_backward(
                        logits, target, static_cast<T>(opt.weight_bg),
                        static_cast<T>(opt.weight_fg));
                    const T ratio = static_cast<T>(static_cast<double>(B) /
                                                   static_cast<double>(b1 - b0));
                    for (auto& g : glogits.data) g *= ratio;
                    net.backward(cache, glogits);
                }
                nn::rmsprop_step(params, st);
            }
        }
        epoch_losses.push_back(patch_count > 0 ? loss_sum / static_cast<double>(patch_count)
                                               : 0.0);
    }
    return epoch_losses;
}

// ---------------------------------------------------------------------------
// inference
// ---------------------------------------------------------------------------

struct Heatmap {
    int height = 0;
    int width = 0;
    std::vector<float> vote_sum;
    std::vector<std::int32_t> stack_count;

    std::vector<float> normalized() const {
        std::vector<float> out(vote_sum.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = stack_count[i] > 0 ? vote_sum[i] / static_cast<float>(stack_count[i]) : 0.0f;
        return out;
    }
};

namespace detail {

// Tile starts covering [0, extent) with global offset, clamped inward.
inline std::vector<int> tile_starts(int extent, int scale, int offset) {
    std::vector<int> starts;
    for (int k = 0;; ++k) {
        const std::int64_t raw = static_cast<std::int64_t>(k) * scale - offset;
        const int clamped = static_cast<int>(std::clamp<std::int64_t>(raw, 0, extent - scale));
        if (starts.empty() || clamped != starts.back()) starts.push_back(clamped);
        if (raw + scale >= extent) break;
    }
    return starts;
}

}  // namespace detail

template <typename T>
std::pair<Heatmap, videoio::LabelMask> infer_refine(const RefineNet<T>& net,
                                                    const PlanarImage& image,
                                                    const std::vector<float>& fg_plane, int l,
                                                    std::uint64_t seed,
                                                    std::array<int, 3> scales = {16, 32, 64},
                                                    double threshold = 0.5,
                                                    int patch_group = 32) {
    if (l < 1) throw std::invalid_argument("infer_refine: l must be >= 1");
    const int H = image.height, W = image.width;
    Heatmap heat;
    heat.height = H;
    heat.width = W;
    heat.vote_sum.assign(static_cast<std::size_t>(H) * W, 0.0f);
    heat.stack_count.assign(static_cast<std::size_t>(H) * W, 0);

    std::mt19937_64 rng(seed);
    std::vector<PatchSample> pending;
    auto flush = [&](int s) {
        if (pending.empty()) return;
        const int B = static_cast<int>(pending.size());
        nn::ValueGrid<T> input(nn::Shape(B, net.dims.in_channels, s, s));
        for (int b = 0; b < B; ++b) extract_input_patch(image, fg_plane, pending[b], input, b);
        const auto logits = net.forward(input, nullptr);
        for (int b = 0; b < B; ++b) {
            const auto& p = pending[b];
            for (int yy = 0; yy < s; ++yy)
                for (int xx = 0; xx < s; ++xx) {
                    const T a = logits.at(b, 0, yy, xx);
                    const T f = logits.at(b, 1, yy, xx);
                    const T m = std::max(a, f);
                    const T pa = std::exp(a - m), pf = std::exp(f - m);
                    const float prob = static_cast<float>(pf / (pa + pf));
                    const std::size_t i =
                        static_cast<std::size_t>(p.y + yy) * W + (p.x + xx);
                    heat.vote_sum[i] += prob;
                    heat.stack_count[i] += 1;
                }
        }
        pending.clear();
    };

    for (int s : scales) {
        if (s > H || s > W) continue;
        for (int layer = 0; layer < l; ++layer) {
            const int ox = static_cast<int>(rng() % static_cast<std::uint64_t>(s));
            const int oy = static_cast<int>(rng() % static_cast<std::uint64_t>(s));
            const auto xs = detail::tile_starts(W, s, ox);
            const auto ys = detail::tile_starts(H, s, oy);
            for (int sy : ys)
                for (int sx : xs) {
                    pending.push_back({sx, sy, s, layer});
                    if (static_cast<int>(pending.size()) >= patch_group) flush(s);
                }
            flush(s);
        }
    }

    videoio::LabelMask mask(H, W, videoio::Provenance::Predicted);
    const auto norm = heat.normalized();
    for (std::size_t i = 0; i < norm.size(); ++i)
        mask.labels[i] = norm[i] > threshold ? Label::Foreground : Label::Background;
    return {std::move(heat), std::move(mask)};
}

template <typename T>
std::vector<float> foreground_plane(const videoio::LabelMask& mask) {
    std::vector<float> plane(mask.labels.size());
    for (std::size_t i = 0; i < plane.size(); ++i)
        plane[i] = mask.labels[i] == Label::Foreground ? 1.0f : 0.0f;
    return plane;
}

template <typename T>
std::pair<Heatmap, videoio::LabelMask> refine_pipeline(const didl::DidlModel<T>& didl_model,
                                                       const RefineNet<T>& net,
                                                       const videoio::FrameSequence& seq, int t,
                                                       int l, std::uint64_t seed,
                                                       std::array<int, 3> scales = {16, 32, 64},
                                                       double threshold = 0.5) {
    const auto didl_mask = didl::predict_mask(didl_model, seq, t);
    const auto image = PlanarImage::from_frame(seq, t);
    return infer_refine(net, image, foreground_plane<T>(didl_mask), l, seed, scales, threshold);
}

// ---------------------------------------------------------------------------
// checkpoints
// ---------------------------------------------------------------------------

template <typename T>
std::vector<checkpoint::TensorRecord> to_records(RefineNet<T>& net) {
    std::vector<checkpoint::TensorRecord> recs;
    for (auto* p : net.parameters()) {
        checkpoint::TensorRecord r;
        r.name = p->name;
        for (int d = 0; d < p->value.shape.rank; ++d)
            r.dims.push_back(static_cast<std::uint32_t>(p->value.shape.dim[d]));
        r.data.reserve(p->value.data.size());
        for (T v : p->value.data) r.data.push_back(static_cast<float>(v));
        recs.push_back(std::move(r));
    }
    return recs;
}

template <typename T>
RefineNet<T> from_records_refine(const std::vector<checkpoint::TensorRecord>& recs) {
    RefineNetDims d;
    auto find = [&recs](const std::string& name) -> const checkpoint::TensorRecord& {
        for (const auto& r : recs)
            if (r.name == name) return r;
        throw std::runtime_error("checkpoint missing tensor: " + name);
    };
    d.in_channels = static_cast<int>(find("enc0_conv1_w").dims[1]);
    d.out_channels = static_cast<int>(find("out_w").dims[0]);
    d.widths = {static_cast<int>(find("enc0_conv1_w").dims[0]),
                static_cast<int>(find("enc1_conv1_w").dims[0]),
                static_cast<int>(find("enc2_conv1_w").dims[0]),
                static_cast<int>(find("enc3_conv1_w").dims[0])};
    RefineNet<T> net = RefineNet<T>::build(0, d);
    for (auto* p : net.parameters()) {
        const auto& r = find(p->name);
        if (static_cast<std::int64_t>(r.data.size()) != p->value.numel())
            throw std::runtime_error("checkpoint tensor size mismatch: " + p->name);
        for (std::size_t i = 0; i < r.data.size(); ++i) p->value.data[i] = static_cast<T>(r.data[i]);
    }
    return net;
}

template <typename T>
void save_net(RefineNet<T>& net, const std::string& path) {
    checkpoint::save(path, to_records(net));
}

template <typename T>
RefineNet<T> load_net(const std::string& path) {
    return from_records_refine<T>(checkpoint::load(path));
}

}  // namespace lts::sbr
