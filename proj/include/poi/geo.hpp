#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "poi/types.hpp"

namespace poi::geo {

/// Mean Earth radius. 10 m queries are insensitive to ellipsoid corrections.
inline constexpr double kEarthRadiusM = 6'371'000.0;

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine_m(LatLon a, LatLon b);

struct BBox {
    double lat_min, lat_max, lon_min, lon_max;

    bool contains(LatLon p) const {
        return p.lat >= lat_min && p.lat <= lat_max && p.lon >= lon_min && p.lon <= lon_max;
    }
};

/// Bounding box guaranteed to contain every point within radius_m of center.
/// Rejects radius_m <= 0 and centers with |lat| >= 89.9 (no driving data at
/// the poles; keeps the cos(lat) longitude widening well-conditioned).
BBox bbox_for_radius(LatLon center, double radius_m);

/// Uniform lat/lon grid over image indices. Immutable after build.
struct GridIndex {
    double cell_size_deg = 0.001;  // ~111 m, >= 10x the default query radius
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::uint32_t>> cells;
};

GridIndex build_grid_index(std::span<const StreetViewImage> images,
                           double cell_size_deg = 0.001);

struct ImageHit {
    std::string image_id;
    double distance_m;
};

/// Exactly the images with haversine_m <= radius_m, sorted ascending by
/// (distance, image_id).
std::vector<ImageHit> radius_query(const GridIndex& index,
                                   std::span<const StreetViewImage> images,
                                   LatLon center, double radius_m);

struct CoLocationEntry {
    std::string log_id;
    std::vector<ImageHit> images;  // sorted by (distance, image_id), <= max_images
};

/// One entry per log, in input log order. Lists are sorted and truncated.
struct CoLocationTable {
    double radius_m = 10.0;
    std::size_t max_images = 10;
    std::vector<CoLocationEntry> entries;
    std::unordered_map<std::string, std::size_t> index;  // log_id -> entries position

    const CoLocationEntry* find(const std::string& log_id) const {
        const auto it = index.find(log_id);
        return it == index.end() ? nullptr : &entries[it->second];
    }
};

CoLocationTable colocate(std::span<const DrivingLog> logs,
                         std::span<const StreetViewImage> images,
                         double radius_m = 10.0, std::size_t max_images = 10);

/// JSONL: {"log_id": ..., "images": [{"image_id": ..., "distance_m": ...}]}.
void write_colocation_jsonl(const CoLocationTable& table, const std::string& path);
CoLocationTable read_colocation_jsonl(const std::string& path);

}  // namespace poi::geo
