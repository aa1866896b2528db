#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace poi {

struct LatLon {
    double lat = 0.0;  // degrees WGS84, [-90, 90]
    double lon = 0.0;  // degrees WGS84, [-180, 180]
};

inline bool coords_in_bounds(double lat, double lon) {
    return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
}

enum class Split { train, val };

const char* to_string(Split s);
std::optional<Split> split_from_string(const std::string& s);

/// One driving-data record (an element of a training or validation corpus).
struct DrivingLog {
    std::string log_id;
    double lat = 0.0;
    double lon = 0.0;
    std::string country;  // ISO-3166 alpha-2, exactly 2 uppercase letters
    Split split = Split::train;
    bool has_traffic_sign = false;

    LatLon position() const { return {lat, lon}; }
};

/// One retrieved street-view item.
struct StreetViewImage {
    std::string image_id;
    double lat = 0.0;
    double lon = 0.0;
    std::optional<std::int64_t> captured_at;  // epoch milliseconds, >= 0
    std::optional<std::string> source_url;

    LatLon position() const { return {lat, lon}; }
};

/// Dense float embedding matrix with row-aligned image ids.
///
/// Row i of `data` (dim consecutive floats) is the embedding of row_ids[i].
struct FeatureSet {
    std::uint32_t dim = 0;
    std::vector<float> data;          // count * dim, row-major
    std::vector<std::string> row_ids; // length == count
    bool normalized = false;

    std::size_t count() const { return row_ids.size(); }
    const float* row(std::size_t i) const { return data.data() + i * dim; }
    float* row(std::size_t i) { return data.data() + i * dim; }

    /// Throws ValidationError if any invariant is broken (shape mismatch,
    /// non-finite entries, normalized flag vs actual row norms).
    void validate() const;
};

enum class ScoreMethod { knn, attr, random };

const char* to_string(ScoreMethod m);
std::optional<ScoreMethod> score_method_from_string(const std::string& s);

/// Per-image discrepancy score s(x).
struct ImageScore {
    std::string image_id;
    double score = 0.0;
};

/// Location-level discrepancy score s(l).
struct PoiScore {
    std::string location_id;
    double score = 0.0;
    ScoreMethod method = ScoreMethod::knn;
};

/// Retrieval statistics over one log corpus (one country).
struct CorpusStats {
    std::uint64_t total_logs = 0;
    std::uint64_t logs_with_sign = 0;
    std::uint64_t logs_with_returns = 0;
    double return_ratio = 0.0;  // logs_with_returns / logs_with_sign, 0 if no sign logs
};

/// Percentage for display, rounded half away from zero to 2 decimals.
double display_percentage(double ratio);

}  // namespace poi
