#include "poi/knn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "poi/errors.hpp"
#include "poi/simd/distance.hpp"

namespace poi::knn {

namespace {

// Targets per block: a block of queries stays cache-resident while one pass
// streams every source row past it.
constexpr std::size_t kBlockTargets = 32;

/// Fixed-capacity max-heap over squared distances: after feeding all source
/// rows, top() is the k-th smallest.
class KSmallest {
public:
    explicit KSmallest(std::uint32_t k) : k_(k) { heap_.reserve(k); }

    void offer(double d2) {
        if (heap_.size() < k_) {
            heap_.push_back(d2);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (d2 < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = d2;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    double kth() const { return heap_.front(); }

private:
    std::uint32_t k_;
    std::vector<double> heap_;
};

void check_dims(const FeatureSet& targets, const FeatureSet& source, std::uint32_t k) {
    if (targets.dim != source.dim) {
        throw ValidationError("dimension mismatch: targets dim " + std::to_string(targets.dim) +
                              " vs source dim " + std::to_string(source.dim));
    }
    if (k == 0) throw ValidationError("k must be >= 1");
    if (k > source.count()) {
        // A silent clamp would change the published method.
        throw ValidationError("k = " + std::to_string(k) + " exceeds source count " +
                              std::to_string(source.count()));
    }
}

}  // namespace

FeatureSet l2_normalize(const FeatureSet& fs) {
    fs.validate();
    FeatureSet out = fs;
    for (std::size_t r = 0; r < out.count(); ++r) {
        float* p = out.row(r);
        double acc = 0.0;
        for (std::uint32_t j = 0; j < out.dim; ++j) {
            acc += static_cast<double>(p[j]) * static_cast<double>(p[j]);
        }
        const double norm = std::sqrt(acc);
        if (norm < 1e-12) {
            throw ValidationError("zero-norm row at index " + std::to_string(r));
        }
        for (std::uint32_t j = 0; j < out.dim; ++j) {
            p[j] = static_cast<float>(static_cast<double>(p[j]) / norm);
        }
    }
    out.normalized = true;
    return out;
}

double kth_nn_distance(std::span<const float> query, const FeatureSet& source, std::uint32_t k) {
    if (query.size() != source.dim) {
        throw ValidationError("dimension mismatch: query dim " + std::to_string(query.size()) +
                              " vs source dim " + std::to_string(source.dim));
    }
    if (k == 0) throw ValidationError("k must be >= 1");
    if (k > source.count()) {
        throw ValidationError("k = " + std::to_string(k) + " exceeds source count " +
                              std::to_string(source.count()));
    }
    std::vector<double> d2(source.count());
    for (std::size_t r = 0; r < source.count(); ++r) {
        d2[r] = simd::l2sq_scalar(query.data(), source.row(r), source.dim);
    }
    std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
    return std::sqrt(d2[k - 1]);
}

std::vector<ImageScore> score_images(const FeatureSet& targets, const FeatureSet& source,
                                     const KnnConfig& cfg) {
    check_dims(targets, source, cfg.k);

    const FeatureSet* tgt = &targets;
    const FeatureSet* src = &source;
    FeatureSet tgt_norm, src_norm;
    if (cfg.normalize && !targets.normalized) {
        tgt_norm = l2_normalize(targets);
        tgt = &tgt_norm;
    }
    if (cfg.normalize && !source.normalized) {
        src_norm = l2_normalize(source);
        src = &src_norm;
    }

    const std::size_t n_targets = tgt->count();
    const std::size_t n_source = src->count();
    const std::uint32_t dim = tgt->dim;
    const auto kernel = simd::active_kernel_fn();

    std::vector<double> kth_sq(n_targets, 0.0);
    const std::size_t n_blocks = (n_targets + kBlockTargets - 1) / kBlockTargets;

    // Parallelism is across target blocks only; each target's reduction walks
    // the source rows sequentially, so results do not depend on the worker
    // count or on which thread picks up a block.
    const auto run_block = [&](std::size_t block) {
        const std::size_t t0 = block * kBlockTargets;
        const std::size_t t1 = std::min(t0 + kBlockTargets, n_targets);
        std::vector<KSmallest> heaps;
        heaps.reserve(t1 - t0);
        for (std::size_t t = t0; t < t1; ++t) heaps.emplace_back(cfg.k);
        for (std::size_t r = 0; r < n_source; ++r) {
            const float* s = src->row(r);
            for (std::size_t t = t0; t < t1; ++t) {
                heaps[t - t0].offer(kernel(tgt->row(t), s, dim));
            }
        }
        for (std::size_t t = t0; t < t1; ++t) kth_sq[t] = heaps[t - t0].kth();
    };

    unsigned workers = cfg.workers == 0 ? std::thread::hardware_concurrency() : cfg.workers;
    if (workers == 0) workers = 1;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n_blocks, 1)));

    if (workers <= 1 || n_blocks <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) {
                    run_block(b);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    std::vector<ImageScore> scores;
    scores.reserve(n_targets);
    for (std::size_t t = 0; t < n_targets; ++t) {
        scores.push_back({tgt->row_ids[t], std::sqrt(kth_sq[t])});
    }
    return scores;
}

std::vector<PoiScore> aggregate_location(const geo::CoLocationTable& table,
                                         std::span<const ImageScore> scores,
                                         AggregationDiagnostics* diag) {
    std::unordered_map<std::string, double> by_image;
    by_image.reserve(scores.size());
    for (const auto& s : scores) by_image.emplace(s.image_id, s.score);

    AggregationDiagnostics local;
    std::vector<PoiScore> out;
    out.reserve(table.entries.size());
    for (const auto& entry : table.entries) {
        ++local.locations_total;
        if (entry.images.empty()) ++local.locations_without_images;
        double best = 0.0;
        bool any = false;
        for (const auto& hit : entry.images) {
            const auto it = by_image.find(hit.image_id);
            if (it == by_image.end()) {
                ++local.images_missing_scores;
                continue;
            }
            if (!any || it->second < best) best = it->second;
            any = true;
        }
        if (!any) {
            if (!entry.images.empty()) ++local.locations_without_scored_images;
            best = 0.0;  // no usable imagery scores zero
        }
        out.push_back({entry.log_id, best, ScoreMethod::knn});
    }
    if (diag != nullptr) *diag = local;
    return out;
}

}  // namespace poi::knn
