#include "poi/types.hpp"

#include <cmath>

#include "poi/errors.hpp"

namespace poi {

const char* to_string(Split s) { return s == Split::train ? "train" : "val"; }

std::optional<Split> split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    return std::nullopt;
}

const char* to_string(ScoreMethod m) {
    switch (m) {
        case ScoreMethod::knn: return "knn";
        case ScoreMethod::attr: return "attr";
        case ScoreMethod::random: return "random";
    }
    return "?";
}

std::optional<ScoreMethod> score_method_from_string(const std::string& s) {
    if (s == "knn") return ScoreMethod::knn;
    if (s == "attr") return ScoreMethod::attr;
    if (s == "random") return ScoreMethod::random;
    return std::nullopt;
}

void FeatureSet::validate() const {
    if (dim == 0) throw ValidationError("FeatureSet dim must be positive");
    if (data.size() != row_ids.size() * dim) {
        throw ValidationError("FeatureSet data size does not match count * dim");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            throw ValidationError("FeatureSet has non-finite value at row " +
                                  std::to_string(i / dim));
        }
    }
    if (normalized) {
        for (std::size_t r = 0; r < count(); ++r) {
            double acc = 0.0;
            const float* p = row(r);
            for (std::uint32_t j = 0; j < dim; ++j) {
                acc += static_cast<double>(p[j]) * static_cast<double>(p[j]);
            }
            const double norm = std::sqrt(acc);
            if (std::abs(norm - 1.0) > 1e-4) {
                throw ValidationError("FeatureSet flagged normalized but row " +
                                      std::to_string(r) + " has norm " + std::to_string(norm));
            }
        }
    }
}

double display_percentage(double ratio) {
    // Half away from zero at 2 decimals.
    return std::round(ratio * 10000.0) / 100.0;
}

}  // namespace poi
