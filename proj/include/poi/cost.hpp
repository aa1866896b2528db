#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace poi::cost {

/// Cost model for full-network street-view analysis: one image per sampling
/// interval, a flat token budget per image, and a per-million-token rate.
struct CostModel {
    double sampling_interval_m = 20.0;
    std::uint64_t tokens_per_image = 200;
    double usd_per_million_tokens = 2.0;

    void validate() const;
};

struct CostEstimate {
    std::string name;  // optional label (country table rows)
    double road_length_km = 0.0;
    std::uint64_t images = 0;      // floor(length_m / interval_m)
    std::uint64_t tokens = 0;      // images * tokens_per_image
    double usd_exact = 0.0;        // tokens * rate / 1e6, unrounded
    std::int64_t usd_display = 0;  // rounded half away from zero to whole dollars
};

/// Throws ValidationError on negative length.
CostEstimate estimate_cost(double road_length_km, const CostModel& model);

/// One estimate per entry, input order preserved.
std::vector<CostEstimate> country_table(
    std::span<const std::pair<std::string, double>> entries, const CostModel& model);

}  // namespace poi::cost
