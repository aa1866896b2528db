#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "poi/errors.hpp"
#include "poi/geo.hpp"
#include "poi/rng.hpp"

#include "test_util.hpp"

using poi::LatLon;
using poi::StreetViewImage;
namespace geo = poi::geo;

namespace {

std::vector<StreetViewImage> random_images(poi::SplitMix64& rng, std::size_t n,
                                           double lat0, double lon0, double spread_deg) {
    std::vector<StreetViewImage> images;
    images.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        StreetViewImage img;
        img.image_id = "img_" + std::to_string(i);
        img.lat = lat0 + (rng.next_double() * 2.0 - 1.0) * spread_deg;
        img.lon = lon0 + (rng.next_double() * 2.0 - 1.0) * spread_deg;
        images.push_back(std::move(img));
    }
    return images;
}

/// O(N) scan oracle for radius queries.
std::vector<geo::ImageHit> brute_force_radius(const std::vector<StreetViewImage>& images,
                                              LatLon center, double radius_m) {
    std::vector<geo::ImageHit> hits;
    for (const auto& img : images) {
        const double d = geo::haversine_m(center, img.position());
        if (d <= radius_m) hits.push_back({img.image_id, d});
    }
    std::sort(hits.begin(), hits.end(), [](const geo::ImageHit& a, const geo::ImageHit& b) {
        if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
        return a.image_id < b.image_id;
    });
    return hits;
}

bool same_hits(const std::vector<geo::ImageHit>& a, const std::vector<geo::ImageHit>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].image_id != b[i].image_id || a[i].distance_m != b[i].distance_m) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("haversine: identity, meridian arc, symmetry") {
    const LatLon berlin{52.5200, 13.4050};
    CHECK(geo::haversine_m(berlin, berlin) == 0.0);

    // Meridian arc closed form: R * dphi in radians.
    const LatLon north{52.5201, 13.4050};
    CHECK(geo::haversine_m(berlin, north) == doctest::Approx(11.1195).epsilon(1e-4));

    poi::SplitMix64 rng(7);
    for (int i = 0; i < 50; ++i) {
        const LatLon a{rng.next_double() * 160.0 - 80.0, rng.next_double() * 340.0 - 170.0};
        const LatLon b{rng.next_double() * 160.0 - 80.0, rng.next_double() * 340.0 - 170.0};
        CHECK(geo::haversine_m(a, b) == geo::haversine_m(b, a));
        CHECK(geo::haversine_m(a, b) >= 0.0);
    }
}

TEST_CASE("bbox_for_radius: closed form at the equator") {
    const auto box = geo::bbox_for_radius({0.0, 0.0}, 10.0);
    const double expected_dlat = 10.0 / geo::kEarthRadiusM * (180.0 / M_PI) * 1.01;
    CHECK(box.lat_max == doctest::Approx(expected_dlat).epsilon(1e-9));
    CHECK(box.lat_min == doctest::Approx(-expected_dlat).epsilon(1e-9));
    CHECK(box.lon_max == doctest::Approx(expected_dlat).epsilon(1e-9));  // cos(0) = 1
}

TEST_CASE("bbox_for_radius: rejects bad input") {
    CHECK_THROWS_AS(geo::bbox_for_radius({0.0, 0.0}, 0.0), poi::ValidationError);
    CHECK_THROWS_AS(geo::bbox_for_radius({0.0, 0.0}, -1.0), poi::ValidationError);
    CHECK_THROWS_AS(geo::bbox_for_radius({89.95, 0.0}, 10.0), poi::ValidationError);
}

TEST_CASE("bbox_for_radius: contains every point within the radius") {
    poi::SplitMix64 rng(11);
    int checked = 0;
    while (checked < 1000) {
        const LatLon center{rng.next_double() * 140.0 - 70.0, rng.next_double() * 340.0 - 170.0};
        const double radius = 5.0 + rng.next_double() * 500.0;
        const auto box = geo::bbox_for_radius(center, radius);
        // Rejection-sample a point within the radius.
        const double span = radius / geo::kEarthRadiusM * (180.0 / M_PI) * 2.0;
        const LatLon p{center.lat + (rng.next_double() * 2.0 - 1.0) * span,
                       center.lon + (rng.next_double() * 2.0 - 1.0) * span * 4.0};
        if (geo::haversine_m(center, p) > radius) continue;
        CHECK(box.contains(p));
        ++checked;
    }
}

TEST_CASE("grid index: basics") {
    CHECK(geo::build_grid_index({}).cells.empty());

    std::vector<StreetViewImage> three;
    for (int i = 0; i < 3; ++i) {
        three.push_back({"i" + std::to_string(i), 52.00001 + i * 1e-6, 13.00001, {}, {}});
    }
    const auto idx = geo::build_grid_index(three);
    CHECK(idx.cells.size() == 1);
    CHECK(idx.cells.begin()->second.size() == 3);
}

TEST_CASE("radius_query: edge behaviors") {
    std::vector<StreetViewImage> images;
    images.push_back({"at_center", 48.1000, 11.5000, {}, {}});
    images.push_back({"near", 48.10003, 11.5000, {}, {}});
    images.push_back({"far", 48.2000, 11.5000, {}, {}});
    const auto idx = geo::build_grid_index(images);

    const auto none = geo::radius_query(idx, images, {48.5, 11.5}, 10.0);
    CHECK(none.empty());

    const auto hits = geo::radius_query(idx, images, {48.1000, 11.5000}, 10.0);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].image_id == "at_center");
    CHECK(hits[0].distance_m == 0.0);
    CHECK(hits[1].image_id == "near");
}

TEST_CASE("radius_query equals brute-force scan on random corpora") {
    poi::SplitMix64 rng(23);
    const auto images = random_images(rng, 10'000, 50.0, 19.0, 0.02);
    const auto idx = geo::build_grid_index(images);
    for (int q = 0; q < 500; ++q) {
        const LatLon center{50.0 + (rng.next_double() * 2.0 - 1.0) * 0.02,
                            19.0 + (rng.next_double() * 2.0 - 1.0) * 0.02};
        const double radius = 5.0 + rng.next_double() * 200.0;
        const auto fast = geo::radius_query(idx, images, center, radius);
        const auto slow = brute_force_radius(images, center, radius);
        REQUIRE(same_hits(fast, slow));
    }
}

TEST_CASE("radius_query: enlarging the radius never shrinks the result") {
    poi::SplitMix64 rng(29);
    const auto images = random_images(rng, 2'000, 50.0, 19.0, 0.01);
    const auto idx = geo::build_grid_index(images);
    const LatLon center{50.0, 19.0};
    std::size_t prev = 0;
    for (const double radius : {5.0, 10.0, 20.0, 50.0, 100.0, 400.0}) {
        const auto hits = geo::radius_query(idx, images, center, radius);
        CHECK(hits.size() >= prev);
        prev = hits.size();
    }
}

TEST_CASE("colocate: cap, empty entries, deterministic ties") {
    std::vector<poi::DrivingLog> logs;
    logs.push_back({"log_crowded", 52.0, 13.0, "PL", poi::Split::train, true});
    logs.push_back({"log_alone", 53.5, 14.0, "PL", poi::Split::train, true});

    std::vector<StreetViewImage> images;
    // 15 images marching away from log_crowded along the meridian.
    for (int i = 0; i < 15; ++i) {
        images.push_back({"m_" + std::to_string(i), 52.0 + i * 5e-6, 13.0, {}, {}});
    }
    // A tie pair at identical coordinates.
    images.push_back({"tie_b", 52.0 - 3e-5, 13.0, {}, {}});
    images.push_back({"tie_a", 52.0 - 3e-5, 13.0, {}, {}});

    const auto table = geo::colocate(logs, images, 10.0, 10);
    REQUIRE(table.entries.size() == 2);
    const auto* crowded = table.find("log_crowded");
    REQUIRE(crowded != nullptr);
    CHECK(crowded->images.size() == 10);
    // Nearest retained, ranked by proximity.
    CHECK(crowded->images.front().image_id == "m_0");
    for (std::size_t i = 1; i < crowded->images.size(); ++i) {
        CHECK(crowded->images[i - 1].distance_m <= crowded->images[i].distance_m);
    }
    // The identical-distance pair orders by image_id ascending.
    std::size_t pos_a = 99, pos_b = 99;
    for (std::size_t i = 0; i < crowded->images.size(); ++i) {
        if (crowded->images[i].image_id == "tie_a") pos_a = i;
        if (crowded->images[i].image_id == "tie_b") pos_b = i;
    }
    REQUIRE(pos_a != 99);
    REQUIRE(pos_b != 99);
    CHECK(pos_a + 1 == pos_b);

    const auto* alone = table.find("log_alone");
    REQUIRE(alone != nullptr);
    CHECK(alone->images.empty());
}

TEST_CASE("colocate table round-trips through JSONL") {
    std::vector<poi::DrivingLog> logs{{"l1", 52.0, 13.0, "PL", poi::Split::train, true},
                                      {"l2", 52.1, 13.1, "PL", poi::Split::val, false}};
    std::vector<StreetViewImage> images{{"i1", 52.0, 13.0, {}, {}},
                                        {"i2", 52.000005, 13.0, {}, {}}};
    const auto table = geo::colocate(logs, images, 10.0, 10);

    testutil::TempDir tmp;
    const auto path = tmp.file("coloc.jsonl");
    geo::write_colocation_jsonl(table, path);
    const auto back = geo::read_colocation_jsonl(path);
    REQUIRE(back.entries.size() == table.entries.size());
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        CHECK(back.entries[i].log_id == table.entries[i].log_id);
        REQUIRE(back.entries[i].images.size() == table.entries[i].images.size());
        for (std::size_t j = 0; j < table.entries[i].images.size(); ++j) {
            CHECK(back.entries[i].images[j].image_id == table.entries[i].images[j].image_id);
            CHECK(back.entries[i].images[j].distance_m == table.entries[i].images[j].distance_m);
        }
    }
}
