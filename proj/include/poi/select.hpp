#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poi/types.hpp"

namespace poi::select {

/// Exactly one of alpha (sampling ratio in (0,1]) or k_absolute.
struct SelectionBudget {
    std::optional<double> alpha;
    std::optional<std::uint64_t> k_absolute;

    static SelectionBudget from_alpha(double a);
    static SelectionBudget from_k(std::uint64_t k);
};

/// k = floor(alpha * n_total), clamped to [1, n_total]; absolute budgets are
/// clamped to [1, n_total]. Throws on n_total = 0.
std::uint64_t budget_to_k(const SelectionBudget& budget, std::uint64_t n_total);

/// The k highest-scoring locations, ordered by (score desc, location_id asc).
/// Duplicate location ids in the input are an error.
std::vector<std::string> top_k_locations(std::span<const PoiScore> scores, std::uint64_t k);

/// Identity mapping with an existence check against the log corpus; keeps
/// rank order. Throws naming the first unknown location.
std::vector<std::string> map_to_logs(std::span<const std::string> locations,
                                     std::span<const DrivingLog> logs);

struct Selection {
    ScoreMethod method = ScoreMethod::knn;
    SelectionBudget budget;
    std::uint64_t k = 0;
    std::vector<std::string> locations;  // rank order
    std::vector<std::string> logs;       // mapped subset, same order
    std::optional<std::uint64_t> seed;   // random method only

    bool operator==(const Selection& other) const;
};

/// Uniform random subset of size k: ids sorted ascending, then a partial
/// Fisher-Yates shuffle driven by SplitMix64(seed). Identical seeds give
/// identical subsets on every platform.
Selection random_select(std::span<const std::string> location_ids, std::uint64_t k,
                        std::uint64_t seed);

/// Ranked selection over scores using the given budget.
Selection select_top(std::span<const PoiScore> scores, const SelectionBudget& budget,
                     ScoreMethod method);

/// JSONL manifest: one run-metadata header line, then one row per selected
/// location (rank, location_id, log_id, score, method, k, seed). Writing the
/// same selection twice produces byte-identical files.
void export_subset(const Selection& sel, std::span<const PoiScore> scores,
                   const std::string& path);

/// Parses a manifest back into the Selection it was written from.
Selection read_subset(const std::string& path);

/// One data row of a selection manifest.
struct ManifestRow {
    std::uint64_t rank = 0;
    std::string location_id;
    std::string log_id;
    double score = 0.0;
    std::string method;
    std::uint64_t k = 0;
    std::optional<std::uint64_t> seed;
};

/// Reads the manifest's data rows (header skipped), in rank order.
std::vector<ManifestRow> read_subset_rows(const std::string& path);

/// Scores serialize to JSONL: {"location_id", "score", "method", "k"}.
void write_scores_jsonl(std::span<const PoiScore> scores, const std::string& path,
                        std::optional<std::uint32_t> k);
std::vector<PoiScore> read_scores_jsonl(const std::string& path);

}  // namespace poi::select
