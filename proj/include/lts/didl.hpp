#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lts/checkpoint.hpp"
#include "lts/distlayer.hpp"
#include "lts/grid.hpp"
#include "lts/hist.hpp"
#include "lts/nn.hpp"
#include "lts/videoio.hpp"

// The distribution-learning classifier: per channel, the input histogram
// (as a density) runs through 8 product and 8 sum distribution layers whose
// kernels are shared across the three color channels. The 48 feature
// histograms are mixed to 10 channels by a width-1 convolution, collapsed by
// a full-width 201-bin convolution (bin weights shared across the mixed
// channels) into 512 hidden units, and classified into 3 log-probabilities.
//
// Training follows the defect iteration: fit a subset, validate on the whole
// pool, union the misclassified instances into the subset, repeat.

namespace lts::didl {

using grid::kBins;
using grid::kDelta;
using grid::kKernelEntries;
using videoio::Label;

struct DidlDims {
    int prod_kernels = 8;
    int sum_kernels = 8;
    int mix_channels = 10;
    int hidden = 512;
    int classes = 3;

    int kernels_per_channel() const { return prod_kernels + sum_kernels; }
    int feature_rows() const { return 3 * kernels_per_channel(); }
};

inline std::string pad2(int k) {
    std::string s = std::to_string(k);
    return s.size() < 2 ? "0" + s : s;
}

template <typename T>
class DidlModel {
public:
    DidlDims dims;
    std::vector<nn::Parameter<T>> prod_kernels;  // each {kKernelEntries}
    std::vector<nn::Parameter<T>> sum_kernels;
    nn::Parameter<T> mix_w;   // (mix_channels, feature_rows)
    nn::Parameter<T> mix_b;   // (mix_channels)
    nn::Parameter<T> full_w;  // (hidden, kBins), shared across mixed channels
    nn::Parameter<T> full_b;  // (hidden)
    nn::Parameter<T> fc_w;    // (classes, hidden)
    nn::Parameter<T> fc_b;    // (classes)

    static DidlModel build(std::uint64_t seed, DidlDims d = {}) {
        DidlModel m;
        m.dims = d;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> center(-0.3, 0.3);
        auto make_kernel = [&](const std::string& name) {
            nn::Parameter<T> p(name, nn::Shape(kKernelEntries));
            const double c = center(rng);
            const double sigma = 0.1;
            double mass = 0.0;
            for (int i = 0; i < kBins; ++i) {
                const double v = grid::bin_value(i);
                const double g = std::exp(-(v - c) * (v - c) / (2.0 * sigma * sigma));
                p.value.data[i] = static_cast<T>(g);
                mass += g * kDelta;
            }
            for (int i = 0; i < kBins; ++i)
                p.value.data[i] = static_cast<T>(static_cast<double>(p.value.data[i]) / mass);
            p.value.data[grid::kOverflowSlot] = T(0);
            return p;
        };
        for (int k = 0; k < d.prod_kernels; ++k)
            m.prod_kernels.push_back(make_kernel("prod_kernel_" + pad2(k)));
        for (int k = 0; k < d.sum_kernels; ++k)
            m.sum_kernels.push_back(make_kernel("sum_kernel_" + pad2(k)));

        auto dense = [&rng](const std::string& name, nn::Shape shape, std::int64_t fan_in) {
            nn::Parameter<T> p(name, shape);
            const T bound = static_cast<T>(1.0 / std::sqrt(static_cast<double>(fan_in)));
            nn::uniform_init(p.value, -bound, bound, rng);
            return p;
        };
        m.mix_w = dense("mix_w", nn::Shape(d.mix_channels, d.feature_rows()), d.feature_rows());
        m.mix_b = dense("mix_b", nn::Shape(d.mix_channels), d.feature_rows());
        m.full_w = dense("full_w", nn::Shape(d.hidden, kBins), kBins);
        m.full_b = dense("full_b", nn::Shape(d.hidden), kBins);
        m.fc_w = dense("fc_w", nn::Shape(d.classes, d.hidden), d.hidden);
        m.fc_b = dense("fc_b", nn::Shape(d.classes), d.hidden);
        return m;
    }

    std::vector<nn::Parameter<T>*> parameters() {
        std::vector<nn::Parameter<T>*> ps;
        for (auto& k : prod_kernels) ps.push_back(&k);
        for (auto& k : sum_kernels) ps.push_back(&k);
        ps.push_back(&mix_w);
        ps.push_back(&mix_b);
        ps.push_back(&full_w);
        ps.push_back(&full_b);
        ps.push_back(&fc_w);
        ps.push_back(&fc_b);
        return ps;
    }

    std::int64_t parameter_count() const {
        std::int64_t n = 0;
        for (const auto& k : prod_kernels) n += k.value.numel();
        for (const auto& k : sum_kernels) n += k.value.numel();
        return n + mix_w.value.numel() + mix_b.value.numel() + full_w.value.numel() +
               full_b.value.numel() + fc_w.value.numel() + fc_b.value.numel();
    }

    void zero_grad() {
        for (auto* p : parameters()) p->zero_grad();
    }

    struct Cache {
        int batch = 0;
        std::vector<T> dens;     // B*3*kBins
        std::vector<T> feats;    // B*feature_rows*kBins
        std::vector<T> mixsum;   // B*kBins: channel-sum of the mixed features
        std::vector<T> hidden;   // B*hidden, pre-activation
        std::vector<T> relu;     // B*hidden
        nn::ValueGrid<T> logp;   // (B, classes)
    };

    // masses: batch*603 floats, channel-major per instance.
    const nn::ValueGrid<T>& forward(const float* masses, int batch, Cache& cc) const {
        if (batch < 1) throw std::invalid_argument("didl forward: batch must be nonempty");
        const int fr = dims.feature_rows();
        const int kp = dims.prod_kernels, ks = dims.sum_kernels, kc = dims.kernels_per_channel();
        cc.batch = batch;
        cc.dens.resize(static_cast<std::size_t>(batch) * 3 * kBins);
        cc.feats.resize(static_cast<std::size_t>(batch) * fr * kBins);
        cc.mixsum.assign(static_cast<std::size_t>(batch) * kBins, T(0));
        for (std::size_t i = 0; i < static_cast<std::size_t>(batch) * 3 * kBins; ++i)
            cc.dens[i] = static_cast<T>(masses[i]) / static_cast<T>(kDelta);

        std::vector<const T*> pk, sk;
        for (const auto& k : prod_kernels) pk.push_back(k.value.data.data());
        for (const auto& k : sum_kernels) sk.push_back(k.value.data.data());
        const auto packed_prod = distlayer::pack_product_kernels<T>(pk);
        const auto packed_sum = distlayer::pack_sum_kernels<T>(sk);

        std::vector<T> tmp(static_cast<std::size_t>(kBins) * std::max(kp, ks));
        for (int n = 0; n < batch; ++n)
            for (int c = 0; c < 3; ++c) {
                const T* x = &cc.dens[(static_cast<std::size_t>(n) * 3 + c) * kBins];
                T* frow = &cc.feats[(static_cast<std::size_t>(n) * fr + c * kc) * kBins];
                distlayer::product_forward_multi(x, packed_prod, tmp.data());
                for (int j = 0; j < kBins; ++j)
                    for (int k = 0; k < kp; ++k) frow[k * kBins + j] = tmp[j * kp + k];
                distlayer::sum_forward_multi(x, packed_sum, tmp.data());
                T* srow = frow + static_cast<std::size_t>(kp) * kBins;
                for (int j = 0; j < kBins; ++j)
                    for (int k = 0; k < ks; ++k) srow[k * kBins + j] = tmp[j * ks + k];
            }

        // mixing conv then channel sum; the sum of the mixed channels only
        // depends on the column sums of the mixing weights
        std::vector<T> mcol(fr, T(0));
        for (int u = 0; u < dims.mix_channels; ++u)
            for (int f = 0; f < fr; ++f) mcol[f] += mix_w.value.data[u * fr + f];
        T bsum = T(0);
        for (int u = 0; u < dims.mix_channels; ++u) bsum += mix_b.value.data[u];
        {
            using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
            Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> mv(mcol.data(), fr);
            for (int n = 0; n < batch; ++n) {
                Eigen::Map<const Mat> fm(&cc.feats[static_cast<std::size_t>(n) * fr * kBins], fr,
                                         kBins);
                Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> sv(
                    &cc.mixsum[static_cast<std::size_t>(n) * kBins], kBins);
                sv.noalias() = fm.transpose() * mv;
                sv.array() += bsum;
            }
        }

        // full-width conv (bin weights shared across mixed channels) + ReLU
        const int H = dims.hidden;
        cc.hidden.resize(static_cast<std::size_t>(batch) * H);
        cc.relu.resize(static_cast<std::size_t>(batch) * H);
        {
            using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
            Eigen::Map<const Mat> sm(cc.mixsum.data(), batch, kBins);
            Eigen::Map<const Mat> wm(full_w.value.data.data(), H, kBins);
            Eigen::Map<Mat> hm(cc.hidden.data(), batch, H);
            hm.noalias() = sm * wm.transpose();
            for (int n = 0; n < batch; ++n)
                for (int v = 0; v < H; ++v) {
                    cc.hidden[static_cast<std::size_t>(n) * H + v] += full_b.value.data[v];
                    const T h = cc.hidden[static_cast<std::size_t>(n) * H + v];
                    cc.relu[static_cast<std::size_t>(n) * H + v] = h > T(0) ? h : T(0);
                }
        }

        nn::ValueGrid<T> logits(nn::Shape(batch, dims.classes));
        {
            using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
            Eigen::Map<const Mat> rm(cc.relu.data(), batch, H);
            Eigen::Map<const Mat> wm(fc_w.value.data.data(), dims.classes, H);
            Eigen::Map<Mat> lm(logits.data.data(), batch, dims.classes);
            lm.noalias() = rm * wm.transpose();
            for (int n = 0; n < batch; ++n)
                for (int k = 0; k < dims.classes; ++k)
                    logits.data[static_cast<std::size_t>(n) * dims.classes + k] +=
                        fc_b.value.data[k];
        }
        cc.logp = nn::log_softmax(logits);
        return cc.logp;
    }

    // Accumulates gradients of `scale * sum_n nll(instance_n)` into the
    // parameter grad buffers. Pass scale = 1/total_batch for a batch mean.
    void backward(const Cache& cc, const std::vector<int>& targets, T scale) {
        const int B = cc.batch, H = dims.hidden, C = dims.classes;
        const int fr = dims.feature_rows();
        const int kp = dims.prod_kernels, ks = dims.sum_kernels, kc = dims.kernels_per_channel();
        using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

        std::vector<T> glogits(static_cast<std::size_t>(B) * C);
        for (int n = 0; n < B; ++n)
            for (int k = 0; k < C; ++k) {
                const T p = std::exp(cc.logp.data[static_cast<std::size_t>(n) * C + k]);
                glogits[static_cast<std::size_t>(n) * C + k] =
                    (p - (targets[n] == k ? T(1) : T(0))) * scale;
            }

        Eigen::Map<const Mat> glm(glogits.data(), B, C);
        Eigen::Map<const Mat> rm(cc.relu.data(), B, H);
        Eigen::Map<Mat> gfcw(fc_w.grad.data.data(), C, H);
        gfcw.noalias() += glm.transpose() * rm;
        for (int n = 0; n < B; ++n)
            for (int k = 0; k < C; ++k)
                fc_b.grad.data[k] += glogits[static_cast<std::size_t>(n) * C + k];

        std::vector<T> ghid(static_cast<std::size_t>(B) * H);
        {
            Eigen::Map<const Mat> wm(fc_w.value.data.data(), C, H);
            Eigen::Map<Mat> gh(ghid.data(), B, H);
            gh.noalias() = glm * wm;
        }
        for (std::size_t i = 0; i < ghid.size(); ++i)
            if (cc.hidden[i] <= T(0)) ghid[i] = T(0);

        std::vector<T> gmixsum(static_cast<std::size_t>(B) * kBins);
        {
            Eigen::Map<const Mat> gh(ghid.data(), B, H);
            Eigen::Map<const Mat> sm(cc.mixsum.data(), B, kBins);
            Eigen::Map<Mat> gfw(full_w.grad.data.data(), H, kBins);
            gfw.noalias() += gh.transpose() * sm;
            for (int n = 0; n < B; ++n)
                for (int v = 0; v < H; ++v)
                    full_b.grad.data[v] += ghid[static_cast<std::size_t>(n) * H + v];
            Eigen::Map<const Mat> wm(full_w.value.data.data(), H, kBins);
            Eigen::Map<Mat> gs(gmixsum.data(), B, kBins);
            gs.noalias() = gh * wm;
        }

        // mixing conv: every mixed channel sees the same upstream gradient
        std::vector<T> q(fr, T(0));
        T gs_total = T(0);
        {
            Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> qv(q.data(), fr);
            for (int n = 0; n < B; ++n) {
                Eigen::Map<const Mat> fm(&cc.feats[static_cast<std::size_t>(n) * fr * kBins], fr,
                                         kBins);
                Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> gv(
                    &gmixsum[static_cast<std::size_t>(n) * kBins], kBins);
                qv.noalias() += fm * gv;
            }
            for (const T g : gmixsum) gs_total += g;
        }
        for (int u = 0; u < dims.mix_channels; ++u) {
            for (int f = 0; f < fr; ++f) mix_w.grad.data[u * fr + f] += q[f];
            mix_b.grad.data[u] += gs_total;
        }

        std::vector<T> mcol(fr, T(0));
        for (int u = 0; u < dims.mix_channels; ++u)
            for (int f = 0; f < fr; ++f) mcol[f] += mix_w.value.data[u * fr + f];

        std::vector<T*> pgrads, sgrads;
        for (auto& k : prod_kernels) pgrads.push_back(k.grad.data.data());
        for (auto& k : sum_kernels) sgrads.push_back(k.grad.data.data());
        std::vector<T> gtmp(static_cast<std::size_t>(kBins) * std::max(kp, ks));
        for (int n = 0; n < B; ++n)
            for (int c = 0; c < 3; ++c) {
                const T* x = &cc.dens[(static_cast<std::size_t>(n) * 3 + c) * kBins];
                const T* gs = &gmixsum[static_cast<std::size_t>(n) * kBins];
                for (int j = 0; j < kBins; ++j)
                    for (int k = 0; k < kp; ++k)
                        gtmp[static_cast<std::size_t>(j) * kp + k] = mcol[c * kc + k] * gs[j];
                distlayer::product_backward_multi(x, gtmp.data(), pgrads);
                for (int j = 0; j < kBins; ++j)
                    for (int k = 0; k < ks; ++k)
                        gtmp[static_cast<std::size_t>(j) * ks + k] = mcol[c * kc + kp + k] * gs[j];
                distlayer::sum_backward_multi(x, gtmp.data(), sgrads);
            }
    }
};

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

struct TrainOptions {
    double lr = 1e-4;
    int batch_size = 3000;
    int micro_batch = 256;
};

struct TrainReport {
    struct Iteration {
        std::size_t subset_size = 0;
        double accuracy = 0.0;
    };
    std::vector<double> epoch_losses;
    std::vector<Iteration> iterations;
};

namespace detail {

inline std::vector<int> gather_targets(const hist::InstancePool& pool,
                                       const std::vector<std::uint32_t>& idx, std::size_t lo,
                                       std::size_t hi) {
    std::vector<int> t;
    t.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i)
        t.push_back(static_cast<int>(pool.instances[idx[i]].label));
    return t;
}

template <typename T>
void gather_masses(const hist::InstancePool& pool, const std::vector<std::uint32_t>& idx,
                   std::size_t lo, std::size_t hi, std::vector<float>& out) {
    out.resize((hi - lo) * 3 * kBins);
    for (std::size_t i = lo; i < hi; ++i)
        std::copy(pool.instances[idx[i]].mass.begin(), pool.instances[idx[i]].mass.end(),
                  out.begin() + (i - lo) * 3 * kBins);
}

}  // namespace detail

// One optimizer step per batch, gradients accumulated over micro-batches.
// Returns the mean loss per epoch.
template <typename T>
std::vector<double> train_epochs(DidlModel<T>& model, const hist::InstancePool& pool,
                                 const std::vector<std::uint32_t>& subset, int epochs,
                                 const TrainOptions& opt, std::mt19937_64& rng,
                                 nn::AdamState<T>* adam_state = nullptr) {
    if (subset.empty()) throw std::invalid_argument("train_epochs: empty subset");
    nn::AdamState<T> local_state;
    nn::AdamState<T>& st = adam_state ? *adam_state : local_state;
    st.lr = static_cast<T>(opt.lr);
    auto params = model.parameters();
    if (st.m.size() != params.size()) st.init(params);

    std::vector<std::uint32_t> order(subset);
    std::vector<double> losses;
    typename DidlModel<T>::Cache cache;
    std::vector<float> masses;
    for (int e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += opt.batch_size) {
            const std::size_t b1 = std::min(order.size(), b0 + opt.batch_size);
            model.zero_grad();
            double batch_loss = 0.0;
            for (std::size_t m0 = b0; m0 < b1; m0 += opt.micro_batch) {
                const std::size_t m1 = std::min(b1, m0 + opt.micro_batch);
                detail::gather_masses<T>(pool, order, m0, m1, masses);
                const auto targets = detail::gather_targets(pool, order, m0, m1);
                const auto& logp = model.forward(masses.data(), static_cast<int>(m1 - m0), cache);
                const T micro_loss = nn::nll_loss(logp, targets);
                batch_loss += static_cast<double>(micro_loss) * static_cast<double>(m1 - m0);
                model.backward(cache, targets, static_cast<T>(1.0 / static_cast<double>(b1 - b0)));
            }
            nn::adam_step(params, st);
            epoch_loss += batch_loss;
        }
        losses.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    return losses;
}

template <typename T>
std::pair<double, std::vector<std::uint32_t>> validate_and_collect_defects(
    const DidlModel<T>& model, const hist::InstancePool& pool, int micro_batch = 1024) {
    if (pool.instances.empty())
        throw std::invalid_argument("validate_and_collect_defects: empty pool");
    std::vector<std::uint32_t> all(pool.size());
    std::iota(all.begin(), all.end(), 0u);
    std::vector<std::uint32_t> defects;
    std::size_t correct = 0;
    typename DidlModel<T>::Cache cache;
    std::vector<float> masses;
    for (std::size_t m0 = 0; m0 < all.size(); m0 += micro_batch) {
        const std::size_t m1 = std::min(all.size(), m0 + micro_batch);
        detail::gather_masses<T>(pool, all, m0, m1, masses);
        const auto& logp = model.forward(masses.data(), static_cast<int>(m1 - m0), cache);
        for (std::size_t i = m0; i < m1; ++i) {
            const T* row = &logp.data[(i - m0) * model.dims.classes];
            int best = 0;
            for (int k = 1; k < model.dims.classes; ++k)
                if (row[k] > row[best]) best = k;
            if (best == static_cast<int>(pool.instances[i].label))
                ++correct;
            else
                defects.push_back(static_cast<std::uint32_t>(i));
        }
    }
    return {static_cast<double>(correct) / static_cast<double>(pool.size()), std::move(defects)};
}

struct DefectIterateOptions {
    double initial_fraction = 0.1;
    int iterations = 4;
    int first_epochs = 120;
    int later_epochs = 30;
    TrainOptions train;
    // majority-class cap: keep Background <= balance_ratio * Foreground in H1
    int balance_ratio = 5;
};

template <typename T>
struct DefectIterateResult {
    DidlModel<T> model;
    TrainReport report;
};

template <typename T>
DefectIterateResult<T> defect_iterate(const hist::InstancePool& pool,
                                      const DefectIterateOptions& opt, std::uint64_t seed,
                                      DidlDims dims = {}) {
    if (pool.instances.empty()) throw std::invalid_argument("defect_iterate: empty pool");
    if (opt.initial_fraction <= 0.0 || opt.initial_fraction > 1.0)
        throw std::invalid_argument("defect_iterate: initial_fraction must be in (0,1]");
    std::mt19937_64 rng(seed);
    DefectIterateResult<T> res{DidlModel<T>::build(rng(), dims), {}};

    const std::size_t n = pool.size();
    std::vector<std::uint32_t> all(n);
    std::iota(all.begin(), all.end(), 0u);
    std::vector<std::uint32_t> subset;
    if (opt.initial_fraction >= 1.0) {
        subset = all;
    } else {
        std::shuffle(all.begin(), all.end(), rng);
        const std::size_t want = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(opt.initial_fraction * n)));
        std::vector<std::uint32_t> sample(all.begin(), all.begin() + want);
        std::size_t fg = 0;
        for (auto i : sample)
            if (pool.instances[i].label == Label::Foreground) ++fg;
        if (fg > 0) {
            const std::size_t bg_cap = opt.balance_ratio * fg;
            std::size_t bg = 0;
            for (auto i : sample) {
                if (pool.instances[i].label == Label::Background) {
                    if (bg >= bg_cap) continue;
                    ++bg;
                }
                subset.push_back(i);
            }
        } else {
            subset = std::move(sample);
        }
        std::sort(subset.begin(), subset.end());
    }

    for (int it = 0; it < opt.iterations; ++it) {
        const int epochs = it == 0 ? opt.first_epochs : opt.later_epochs;
        auto losses = train_epochs(res.model, pool, subset, epochs, opt.train, rng);
        res.report.epoch_losses.insert(res.report.epoch_losses.end(), losses.begin(),
                                       losses.end());
        auto [acc, defects] = validate_and_collect_defects(res.model, pool);
        res.report.iterations.push_back({subset.size(), acc});
        if (it + 1 < opt.iterations) {
            std::vector<std::uint32_t> merged;
            merged.reserve(subset.size() + defects.size());
            std::set_union(subset.begin(), subset.end(), defects.begin(), defects.end(),
                           std::back_inserter(merged));
            subset = std::move(merged);
        }
    }
    return res;
}

template <typename T>
videoio::LabelMask predict_mask(const DidlModel<T>& model, const videoio::FrameSequence& seq,
                                int t, int micro_batch = 1024) {
    const auto grid = hist::extract_histograms(seq, t);
    videoio::LabelMask mask(grid.height, grid.width, videoio::Provenance::Predicted);
    const std::size_t total = static_cast<std::size_t>(grid.height) * grid.width;
    typename DidlModel<T>::Cache cache;
    std::vector<float> masses;
    for (std::size_t p0 = 0; p0 < total; p0 += micro_batch) {
        const std::size_t p1 = std::min(total, p0 + micro_batch);
        masses.resize((p1 - p0) * 3 * kBins);
        for (std::size_t p = p0; p < p1; ++p)
            std::copy(&grid.mass[p * 3 * kBins], &grid.mass[(p + 1) * 3 * kBins],
                      masses.begin() + (p - p0) * 3 * kBins);
        const auto& logp = model.forward(masses.data(), static_cast<int>(p1 - p0), cache);
        for (std::size_t p = p0; p < p1; ++p) {
            const T* row = &logp.data[(p - p0) * model.dims.classes];
            int best = 0;
            for (int k = 1; k < model.dims.classes; ++k)
                if (row[k] > row[best]) best = k;
            mask.labels[p] = static_cast<Label>(best);
        }
    }
    return mask;
}

// ---------------------------------------------------------------------------
// checkpoints
// ---------------------------------------------------------------------------

template <typename T>
std::vector<checkpoint::TensorRecord> to_records(const DidlModel<T>& m) {
    std::vector<checkpoint::TensorRecord> recs;
    auto add = [&recs](const nn::Parameter<T>& p) {
        checkpoint::TensorRecord r;
        r.name = p.name;
        for (int d = 0; d < p.value.shape.rank; ++d)
            r.dims.push_back(static_cast<std::uint32_t>(p.value.shape.dim[d]));
        r.data.reserve(p.value.data.size());
        for (T v : p.value.data) r.data.push_back(static_cast<float>(v));
        recs.push_back(std::move(r));
    };
    for (const auto& k : m.prod_kernels) add(k);
    for (const auto& k : m.sum_kernels) add(k);
    add(m.mix_w);
    add(m.mix_b);
    add(m.full_w);
    add(m.full_b);
    add(m.fc_w);
    add(m.fc_b);
    return recs;
}

template <typename T>
DidlModel<T> from_records(const std::vector<checkpoint::TensorRecord>& recs) {
    auto find = [&recs](const std::string& name) -> const checkpoint::TensorRecord& {
        for (const auto& r : recs)
            if (r.name == name) return r;
        throw std::runtime_error("checkpoint missing tensor: " + name);
    };
    DidlDims d;
    d.prod_kernels = 0;
    d.sum_kernels = 0;
    for (const auto& r : recs) {
        if (r.name.rfind("prod_kernel_", 0) == 0) ++d.prod_kernels;
        if (r.name.rfind("sum_kernel_", 0) == 0) ++d.sum_kernels;
    }
    d.mix_channels = static_cast<int>(find("mix_b").data.size());
    d.hidden = static_cast<int>(find("full_b").data.size());
    d.classes = static_cast<int>(find("fc_b").data.size());

    DidlModel<T> m = DidlModel<T>::build(0, d);
    auto fill = [&find](nn::Parameter<T>& p) {
        const auto& r = find(p.name);
        if (static_cast<std::int64_t>(r.data.size()) != p.value.numel())
            throw std::runtime_error("checkpoint tensor size mismatch: " + p.name);
        for (std::size_t i = 0; i < r.data.size(); ++i) p.value.data[i] = static_cast<T>(r.data[i]);
    };
    for (auto& k : m.prod_kernels) fill(k);
    for (auto& k : m.sum_kernels) fill(k);
    fill(m.mix_w);
    fill(m.mix_b);
    fill(m.full_w);
    fill(m.full_b);
    fill(m.fc_w);
    fill(m.fc_b);
    return m;
}

template <typename T>
void save_model(const DidlModel<T>& m, const std::string& path) {
    checkpoint::save(path, to_records(m));
}

template <typename T>
DidlModel<T> load_model(const std::string& path) {
    return from_records<T>(checkpoint::load(path));
}

}  // namespace lts::didl
