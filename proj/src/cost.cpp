#include "poi/cost.hpp"

#include <cmath>

#include "poi/errors.hpp"

namespace poi::cost {

void CostModel::validate() const {
    if (!(sampling_interval_m > 0.0)) throw ValidationError("sampling interval must be positive");
    if (tokens_per_image == 0) throw ValidationError("tokens per image must be positive");
    if (!(usd_per_million_tokens > 0.0)) throw ValidationError("token rate must be positive");
}

CostEstimate estimate_cost(double road_length_km, const CostModel& model) {
    model.validate();
    if (road_length_km < 0.0 || !std::isfinite(road_length_km)) {
        throw ValidationError("road length must be non-negative");
    }
    CostEstimate est;
    est.road_length_km = road_length_km;
    const double length_m = road_length_km * 1000.0;
    // A partial trailing interval yields no image.
    est.images = static_cast<std::uint64_t>(std::floor(length_m / model.sampling_interval_m));
    est.tokens = est.images * model.tokens_per_image;
    est.usd_exact = static_cast<double>(est.tokens) * model.usd_per_million_tokens / 1e6;
    est.usd_display = std::llround(est.usd_exact);
    return est;
}

std::vector<CostEstimate> country_table(
    std::span<const std::pair<std::string, double>> entries, const CostModel& model) {
    std::vector<CostEstimate> out;
    out.reserve(entries.size());
    for (const auto& [name, length_km] : entries) {
        CostEstimate est = estimate_cost(length_km, model);
        est.name = name;
        out.push_back(std::move(est));
    }
    return out;
}

}  // namespace poi::cost
