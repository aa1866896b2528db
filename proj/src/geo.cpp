#include "poi/geo.hpp"

#include <algorithm>
#include <cmath>

#include "poi/errors.hpp"
#include "poi/jsonl.hpp"

namespace poi::geo {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

std::int64_t cell_coord(double value_deg, double cell_size_deg) {
    return static_cast<std::int64_t>(std::floor(value_deg / cell_size_deg));
}

}  // namespace

double haversine_m(LatLon a, LatLon b) {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlam = (b.lon - a.lon) * kDegToRad;

    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlam / 2.0);
    const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

BBox bbox_for_radius(LatLon center, double radius_m) {
    if (radius_m <= 0.0) throw ValidationError("radius_m must be positive");
    if (std::abs(center.lat) >= 89.9) throw ValidationError("near-pole center rejected");

    const double dlat = (radius_m / kEarthRadiusM) * kRadToDeg * 1.01;
    const double dlon = dlat / std::cos(center.lat * kDegToRad);
    return BBox{center.lat - dlat, center.lat + dlat, center.lon - dlon, center.lon + dlon};
}

GridIndex build_grid_index(std::span<const StreetViewImage> images, double cell_size_deg) {
    if (cell_size_deg <= 0.0) throw ValidationError("cell_size_deg must be positive");
    GridIndex idx;
    idx.cell_size_deg = cell_size_deg;
    for (std::uint32_t i = 0; i < images.size(); ++i) {
        const auto key = std::make_pair(cell_coord(images[i].lon, cell_size_deg),
                                        cell_coord(images[i].lat, cell_size_deg));
        idx.cells[key].push_back(i);
    }
    return idx;
}

std::vector<ImageHit> radius_query(const GridIndex& index,
                                   std::span<const StreetViewImage> images,
                                   LatLon center, double radius_m) {
    const BBox box = bbox_for_radius(center, radius_m);
    const std::int64_t cx0 = cell_coord(box.lon_min, index.cell_size_deg);
    const std::int64_t cx1 = cell_coord(box.lon_max, index.cell_size_deg);
    const std::int64_t cy0 = cell_coord(box.lat_min, index.cell_size_deg);
    const std::int64_t cy1 = cell_coord(box.lat_max, index.cell_size_deg);

    std::vector<ImageHit> hits;
    for (std::int64_t cx = cx0; cx <= cx1; ++cx) {
        for (std::int64_t cy = cy0; cy <= cy1; ++cy) {
            const auto it = index.cells.find({cx, cy});
            if (it == index.cells.end()) continue;
            for (const std::uint32_t i : it->second) {
                const double d = haversine_m(center, images[i].position());
                if (d <= radius_m) hits.push_back({images[i].image_id, d});
            }
        }
    }
    std::sort(hits.begin(), hits.end(), [](const ImageHit& a, const ImageHit& b) {
        if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
        return a.image_id < b.image_id;
    });
    return hits;
}

CoLocationTable colocate(std::span<const DrivingLog> logs,
                         std::span<const StreetViewImage> images,
                         double radius_m, std::size_t max_images) {
    if (radius_m <= 0.0) throw ValidationError("radius_m must be positive");
    if (max_images == 0) throw ValidationError("max_images must be positive");

    const GridIndex index = build_grid_index(images);

    CoLocationTable table;
    table.radius_m = radius_m;
    table.max_images = max_images;
    table.entries.reserve(logs.size());
    for (const auto& log : logs) {
        auto hits = radius_query(index, images, log.position(), radius_m);
        if (hits.size() > max_images) hits.resize(max_images);
        table.index.emplace(log.log_id, table.entries.size());
        table.entries.push_back({log.log_id, std::move(hits)});
    }
    return table;
}

void write_colocation_jsonl(const CoLocationTable& table, const std::string& path) {
    auto out = open_output(path);
    for (const auto& entry : table.entries) {
        nlohmann::ordered_json row;
        row["log_id"] = entry.log_id;
        auto imgs = nlohmann::ordered_json::array();
        for (const auto& hit : entry.images) {
            imgs.push_back({{"image_id", hit.image_id}, {"distance_m", hit.distance_m}});
        }
        row["images"] = std::move(imgs);
        out << row.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

CoLocationTable read_colocation_jsonl(const std::string& path) {
    CoLocationTable table;
    for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& j) {
        const auto fail = [&](const std::string& msg) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + msg);
        };
        if (!j.is_object() || !j.contains("log_id") || !j.contains("images")) {
            fail("expected {log_id, images}");
        }
        CoLocationEntry entry;
        entry.log_id = j.at("log_id").get<std::string>();
        for (const auto& img : j.at("images")) {
            entry.images.push_back(
                {img.at("image_id").get<std::string>(), img.at("distance_m").get<double>()});
        }
        if (table.index.count(entry.log_id)) fail("duplicate log_id: " + entry.log_id);
        table.index.emplace(entry.log_id, table.entries.size());
        table.entries.push_back(std::move(entry));
    });
    return table;
}

}  // namespace poi::geo
