#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "poi/geo.hpp"
#include "poi/types.hpp"

namespace poi::knn {

struct KnnConfig {
    std::uint32_t k = 10;
    bool normalize = true;
    unsigned workers = 0;  // 0 = hardware concurrency
};

/// Returns a copy with every row scaled to unit L2 norm (f64 accumulation).
/// Throws ValidationError on a row with norm below 1e-12, naming the row.
FeatureSet l2_normalize(const FeatureSet& fs);

/// Exact k-th order statistic of Euclidean distances from query to all
/// source rows, duplicates counted with multiplicity. Reference path:
/// scalar kernel + nth_element over the full distance vector.
double kth_nn_distance(std::span<const float> query, const FeatureSet& source,
                       std::uint32_t k);

/// Per-image discrepancy scores, one per target row, order-aligned with the
/// target row_ids. Optimized path: blocked distance evaluation with the
/// dispatched SIMD kernel and a bounded max-heap holding the k smallest
/// squared distances per target. Output is identical for any worker count.
std::vector<ImageScore> score_images(const FeatureSet& targets, const FeatureSet& source,
                                     const KnnConfig& cfg);

struct AggregationDiagnostics {
    std::uint64_t locations_total = 0;
    std::uint64_t locations_without_images = 0;
    std::uint64_t locations_without_scored_images = 0;
    std::uint64_t images_missing_scores = 0;  // in the table but not embedded
};

/// s(l) = min over the location's scored images, 0 when none are scored.
/// Images present in the co-location table but absent from `scores` count as
/// missing imagery (tracked in diagnostics), mirroring the zero-for-missing
/// convention.
std::vector<PoiScore> aggregate_location(const geo::CoLocationTable& table,
                                         std::span<const ImageScore> scores,
                                         AggregationDiagnostics* diag = nullptr);

}  // namespace poi::knn
