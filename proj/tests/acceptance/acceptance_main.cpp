// Acceptance suite: one check per shipped guarantee (exact published cost
// figures, oracle equivalence, performance budget, determinism, format
// round-trips, client contract), printing one PASS/FAIL line per criterion.
// Exit code 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "poi/attr.hpp"
#include "poi/client.hpp"
#include "poi/cost.hpp"
#include "poi/errors.hpp"
#include "poi/geo.hpp"
#include "poi/ingest.hpp"
#include "poi/knn.hpp"
#include "poi/rng.hpp"
#include "poi/select.hpp"
#include "poi/simd/distance.hpp"

#include "../unit/test_util.hpp"

namespace {

struct AcceptFail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw AcceptFail(msg);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Runner {
    int failed = 0;

    void run(int number, const std::string& title, const std::function<std::string()>& fn) {
        try {
            const std::string note = fn();
            std::cout << "criterion " << number << ": PASS - " << title;
            if (!note.empty()) std::cout << " (" << note << ")";
            std::cout << "\n" << std::flush;
        } catch (const std::exception& e) {
            ++failed;
            std::cout << "criterion " << number << ": FAIL - " << title << ": " << e.what()
                      << "\n" << std::flush;
        }
    }
};

// ---- criterion 1: cost model exactness ----

std::string criterion_cost() {
    const auto t0 = std::chrono::steady_clock::now();
    const poi::cost::CostModel model;
    require(poi::cost::estimate_cost(100'000.0, model).usd_display == 2'000,
            "100,000 km network must cost $2,000");
    require(poi::cost::estimate_cost(429'800.0, model).usd_display == 8'596,
            "Poland row must be $8,596");
    require(poi::cost::estimate_cost(1'053'215.0, model).usd_display == 21'064,
            "France row must be $21,064");
    require(poi::cost::estimate_cost(573'134.0, model).usd_display == 11'463,
            "Sweden row must be $11,463");
    const double secs = seconds_since(t0);
    require(secs < 1.0, "cost checks exceeded 1 s");
    std::ostringstream note;
    note << "4 published values, " << secs << " s";
    return note.str();
}

// ---- criterion 2: retrieval statistics ----

std::string criterion_stats() {
    const auto t0 = std::chrono::steady_clock::now();
    struct Row {
        const char* country;
        std::uint64_t total, with_sign, with_returns;
        double pct;
    };
    const Row rows[] = {
        {"PL", 30'483, 23'207, 20'022, 86.28},
        {"DE", 24'816, 19'492, 17'094, 87.70},
        {"SE", 17'647, 8'280, 6'912, 83.48},
        {"FR", 11'785, 7'666, 6'560, 85.57},
    };
    for (const auto& row : rows) {
        std::vector<poi::DrivingLog> logs;
        logs.reserve(row.total);
        poi::geo::CoLocationTable table;
        for (std::uint64_t i = 0; i < row.total; ++i) {
            poi::DrivingLog log;
            log.log_id = std::string(row.country) + std::to_string(i);
            log.lat = 50.0;
            log.lon = 15.0;
            log.country = row.country;
            log.split = poi::Split::train;
            log.has_traffic_sign = i < row.with_sign;
            if (log.has_traffic_sign && i < row.with_returns) {
                table.index.emplace(log.log_id, table.entries.size());
                table.entries.push_back({log.log_id, {{"img" + std::to_string(i), 2.5}}});
            }
            logs.push_back(std::move(log));
        }
        const auto stats = poi::ingest::dataset_stats(logs, table);
        const double pct = poi::display_percentage(stats.return_ratio);
        require(std::abs(pct - row.pct) < 5e-10,
                std::string(row.country) + ": expected " + std::to_string(row.pct) + ", got " +
                    std::to_string(pct));
    }
    const double secs = seconds_since(t0);
    require(secs < 1.0, "stats checks exceeded 1 s");
    std::ostringstream note;
    note << "4 percentages to 2 decimals, " << secs << " s";
    return note.str();
}

// ---- criterion 3: KNN oracle equivalence ----

std::string criterion_knn_oracle() {
    poi::SplitMix64 rng(2024);
    int instances = 0;
    double worst_rel = 0.0;
    const auto run_instance = [&](std::size_t n_targets, std::size_t n_source,
                                  std::uint32_t dim, std::uint32_t k) {
        const auto source = testutil::random_feature_set(rng, n_source, dim, true, "s");
        const auto targets = testutil::random_feature_set(rng, n_targets, dim, true, "t");
        poi::knn::KnnConfig cfg;
        cfg.k = k;
        cfg.workers = 4;
        const auto scores = poi::knn::score_images(targets, source, cfg);
        for (std::size_t t = 0; t < n_targets; ++t) {
            // Naive oracle: pure-double distances, full sort, k-th element.
            std::vector<double> d2;
            d2.reserve(n_source);
            for (std::size_t r = 0; r < n_source; ++r) {
                d2.push_back(testutil::l2sq_f64(targets.row(t), source.row(r), dim));
            }
            std::sort(d2.begin(), d2.end());
            const double want = std::sqrt(d2[k - 1]);
            const double got = scores[t].score;
            const double rel = std::abs(got - want) / std::max(want, 1e-30);
            worst_rel = std::max(worst_rel, rel);
            require(rel <= 1e-6 || std::abs(got - want) <= 1e-12,
                    "score mismatch at target " + std::to_string(t) + ": got " +
                        std::to_string(got) + ", want " + std::to_string(want));
        }
        ++instances;
    };

    // Two instances pinned at the stated caps, the rest randomized.
    run_instance(1000, 10'000, 64, 10);
    run_instance(1000, 10'000, 64, 1);
    for (int i = 0; i < 18; ++i) {
        const std::size_t n_targets = 1 + rng.next_below(200);
        const std::size_t n_source = 20 + rng.next_below(2000);
        const std::uint32_t dim = 1 + static_cast<std::uint32_t>(rng.next_below(64));
        const std::uint32_t k =
            1 + static_cast<std::uint32_t>(rng.next_below(std::min<std::size_t>(n_source, 16)));
        run_instance(n_targets, n_source, dim, k);
    }
    std::ostringstream note;
    note << instances << " instances, worst relative error " << worst_rel;
    return note.str();
}

// ---- criterion 4: KNN performance smoke ----

std::string criterion_knn_perf() {
    poi::SplitMix64 rng(4096);
    const std::size_t n_source = 100'000;
    const std::size_t n_targets = 1'000;
    const std::uint32_t dim = 768;
    const auto source = testutil::random_feature_set(rng, n_source, dim, true, "s");
    const auto targets = testutil::random_feature_set(rng, n_targets, dim, true, "t");

    poi::knn::KnnConfig cfg;
    cfg.k = 10;
    cfg.workers = 4;
    const auto t0 = std::chrono::steady_clock::now();
    const auto baseline = poi::knn::score_images(targets, source, cfg);
    const double secs = seconds_since(t0);
    require(secs < 10.0, "4-worker run took " + std::to_string(secs) + " s (budget 10 s)");

    for (const unsigned workers : {1u, 2u, 8u}) {
        cfg.workers = workers;
        const auto other = poi::knn::score_images(targets, source, cfg);
        for (std::size_t t = 0; t < baseline.size(); ++t) {
            require(other[t].score == baseline[t].score &&
                        other[t].image_id == baseline[t].image_id,
                    "worker-count " + std::to_string(workers) + " diverged at target " +
                        std::to_string(t));
        }
    }
    std::ostringstream note;
    note << "1000x100000x768 k=10 in " << secs << " s on 4 workers ("
         << poi::simd::kernel_name(poi::simd::active_kernel())
         << " kernel); identical across 1/2/8 workers";
    return note.str();
}

// ---- criterion 5: attribute scorer oracle equivalence ----

std::string criterion_attr_oracle() {
    poi::SplitMix64 rng(555);
    for (int i = 0; i < 1000; ++i) {
        poi::attr::AttributeSet source;
        const std::size_t target_size = 1 + rng.next_below(500);
        while (source.size() < target_size) {
            source.insert_canonical(poi::attr::canonicalize(testutil::random_sign(rng)));
        }
        const auto probe = poi::attr::canonicalize(testutil::random_sign(rng));
        int oracle = 9;
        for (const auto& cand : source.signs) {
            oracle = std::min(oracle, testutil::hamming_oracle(probe, cand));
        }
        const int got = poi::attr::min_hamming(probe, source);
        require(got == oracle, "min_hamming mismatch: got " + std::to_string(got) + ", want " +
                                   std::to_string(oracle));

        // Location score: sum of per-sign exhaustive minima.
        poi::attr::AttributeSet location;
        const std::size_t n_loc = rng.next_below(5);
        while (location.size() < n_loc) {
            location.insert_canonical(poi::attr::canonicalize(testutil::random_sign(rng)));
        }
        long want = 0;
        for (const auto& sign : location.signs) {
            int best = 9;
            for (const auto& cand : source.signs) {
                best = std::min(best, testutil::hamming_oracle(sign, cand));
            }
            want += best;
        }
        const auto score = poi::attr::score_location_attr("loc", location, source);
        require(score.score == static_cast<double>(want),
                "location score mismatch: got " + std::to_string(score.score) + ", want " +
                    std::to_string(want));
    }
    return "1000 instances, exact integer equality";
}

// ---- criterion 6: aggregation semantics anchors ----

std::string criterion_aggregation_semantics() {
    // No retrieved imagery and no embeddable imagery both score exactly 0.
    poi::geo::CoLocationTable table;
    table.entries.push_back({"no_imagery", {}});
    table.entries.push_back({"no_embeddings", {{"img_x", 4.0}, {"img_y", 7.0}}});
    table.entries.push_back({"scored", {{"img_a", 1.0}}});
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        table.index.emplace(table.entries[i].log_id, i);
    }
    const std::vector<poi::ImageScore> scores = {{"img_a", 0.75}};
    const auto out = poi::knn::aggregate_location(table, scores);
    require(out[0].score == 0.0, "location without imagery must score exactly 0");
    require(out[1].score == 0.0, "location without embeddable imagery must score exactly 0");
    require(out[2].score == 0.75, "scored location must keep its min image score");

    // Yellow vs. white warning-sign background: Hamming distance exactly 1.
    poi::attr::SignAttributes white;
    white.category = poi::attr::Category::warning;
    white.shape = poi::attr::Shape::triangle;
    white.color_border = poi::attr::Color::red;
    white.color_background = poi::attr::Color::white;
    white.color_symbol = poi::attr::Color::black;
    white.symbol = poi::attr::SymbolKind::pedestrian;
    auto yellow = white;
    yellow.color_background = poi::attr::Color::yellow;
    require(poi::attr::hamming(white, yellow) == 1,
            "single-field background delta must have Hamming distance 1");
    return "zero-score conventions and single-field delta hold";
}

// ---- criterion 7: selection determinism ----

std::string criterion_selection() {
    // Tie-heavy fixture: documented order is (score desc, id asc).
    std::vector<poi::PoiScore> tie_fixture = {
        {"d", 2.0, poi::ScoreMethod::knn}, {"b", 2.0, poi::ScoreMethod::knn},
        {"a", 2.0, poi::ScoreMethod::knn}, {"c", 3.0, poi::ScoreMethod::knn},
        {"f", 1.0, poi::ScoreMethod::knn}, {"e", 2.0, poi::ScoreMethod::knn},
    };
    const std::vector<std::string> want = {"c", "a", "b", "d", "e", "f"};
    require(poi::select::top_k_locations(tie_fixture, 6) == want,
            "tie-heavy fixture must rank (score desc, id asc)");

    // Budget-prefix property over 100 random score sets.
    poi::SplitMix64 rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.next_below(30);
        std::vector<poi::PoiScore> scores;
        for (std::size_t i = 0; i < n; ++i) {
            scores.push_back({"loc" + std::to_string(i),
                              static_cast<double>(rng.next_below(6)) / 2.0,
                              poi::ScoreMethod::knn});
        }
        std::vector<std::string> prev;
        for (std::uint64_t k = 1; k <= n; ++k) {
            const auto cur = poi::select::top_k_locations(scores, k);
            require(cur.size() == k, "top-k size mismatch");
            require(std::equal(prev.begin(), prev.end(), cur.begin()),
                    "selection at k must be a prefix of selection at k+1");
            prev = cur;
        }
    }

    // Seeded random selection is byte-identical across runs.
    testutil::TempDir tmp;
    std::vector<std::string> pool;
    std::vector<poi::PoiScore> pool_scores;
    for (int i = 0; i < 100; ++i) {
        pool.push_back("loc" + std::to_string(i));
        pool_scores.push_back({pool.back(), 0.0, poi::ScoreMethod::random});
    }
    const auto sel_a = poi::select::random_select(pool, 25, 42);
    const auto sel_b = poi::select::random_select(pool, 25, 42);
    require(sel_a.locations == sel_b.locations, "seed 42 must reproduce the same subset");
    poi::select::export_subset(sel_a, pool_scores, tmp.file("a.jsonl"));
    poi::select::export_subset(sel_b, pool_scores, tmp.file("b.jsonl"));
    const auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    require(slurp(tmp.file("a.jsonl")) == slurp(tmp.file("b.jsonl")),
            "exported manifests must be byte-identical");
    return "tie order, 100 prefix sets, byte-identical seeded manifests";
}

// ---- criterion 8: geo oracle equivalence ----

std::string criterion_geo() {
    poi::SplitMix64 rng(888);
    std::vector<poi::StreetViewImage> images;
    images.reserve(10'000);
    for (int i = 0; i < 10'000; ++i) {
        poi::StreetViewImage img;
        img.image_id = "img" + std::to_string(i);
        img.lat = 52.0 + (rng.next_double() * 2.0 - 1.0) * 0.03;
        img.lon = 21.0 + (rng.next_double() * 2.0 - 1.0) * 0.03;
        images.push_back(std::move(img));
    }
    const auto index = poi::geo::build_grid_index(images);
    for (int q = 0; q < 500; ++q) {
        const poi::LatLon center{52.0 + (rng.next_double() * 2.0 - 1.0) * 0.03,
                                 21.0 + (rng.next_double() * 2.0 - 1.0) * 0.03};
        const double radius = 5.0 + rng.next_double() * 150.0;
        const auto fast = poi::geo::radius_query(index, images, center, radius);
        std::vector<poi::geo::ImageHit> slow;
        for (const auto& img : images) {
            const double d = poi::geo::haversine_m(center, img.position());
            if (d <= radius) slow.push_back({img.image_id, d});
        }
        std::sort(slow.begin(), slow.end(),
                  [](const poi::geo::ImageHit& a, const poi::geo::ImageHit& b) {
                      if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
                      return a.image_id < b.image_id;
                  });
        require(fast.size() == slow.size(), "query " + std::to_string(q) + ": size mismatch");
        for (std::size_t i = 0; i < fast.size(); ++i) {
            require(fast[i].image_id == slow[i].image_id &&
                        fast[i].distance_m == slow[i].distance_m,
                    "query " + std::to_string(q) + ": element mismatch at " + std::to_string(i));
        }
    }

    // Adversarial colocate: duplicate distances and exactly-on-boundary points.
    std::vector<poi::DrivingLog> logs{{"log0", 52.0, 21.0, "PL", poi::Split::train, true}};
    std::vector<poi::StreetViewImage> adv;
    for (int i = 0; i < 12; ++i) {
        // Six distance shells, duplicated coordinates within each shell.
        adv.push_back({"dup" + std::to_string(i), 52.0 + (i / 2) * 1e-5, 21.0, {}, {}});
    }
    const poi::StreetViewImage boundary{"boundary", 52.0000899, 21.0, {}, {}};
    const double boundary_dist = poi::geo::haversine_m({52.0, 21.0}, boundary.position());
    adv.push_back(boundary);

    const auto table = poi::geo::colocate(logs, adv, boundary_dist, 10);
    const auto& hits = table.entries[0].images;
    require(hits.size() == 10, "cap of 10 images per location must hold");
    bool saw_boundary = false;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        require(hits[i].distance_m <= boundary_dist, "hit beyond the radius");
        if (i > 0) {
            require(hits[i - 1].distance_m < hits[i].distance_m ||
                        (hits[i - 1].distance_m == hits[i].distance_m &&
                         hits[i - 1].image_id < hits[i].image_id),
                    "ordering violated at position " + std::to_string(i));
        }
        if (hits[i].image_id == "boundary") saw_boundary = true;
    }
    require(!saw_boundary, "boundary point is the 13th nearest and must be truncated");

    const auto table_wide = poi::geo::colocate(logs, adv, boundary_dist, 13);
    bool boundary_in_wide = false;
    for (const auto& hit : table_wide.entries[0].images) {
        if (hit.image_id == "boundary") {
            boundary_in_wide = true;
            require(hit.distance_m == boundary_dist, "inclusive boundary distance must match");
        }
    }
    require(boundary_in_wide, "exactly-on-radius point must be included (<=)");
    return "500 queries over 10,000 images; adversarial cap/boundary fixtures";
}

// ---- criterion 9: format round-trips ----

std::string criterion_roundtrip() {
    testutil::TempDir tmp;
    poi::SplitMix64 rng(999);
    for (int trial = 0; trial < 100; ++trial) {
        std::uint32_t dim = 1 + static_cast<std::uint32_t>(rng.next_below(96));
        std::size_t count = rng.next_below(50);
        if (trial == 0) count = 0;
        if (trial == 1) dim = 1;
        const bool unit = count > 0 && rng.next_below(2) == 1;
        const auto fs = testutil::random_feature_set(rng, count, dim, unit);
        const auto bin = tmp.file("rt.poifv");
        const auto ids = tmp.file("rt.ids");
        poi::ingest::write_embeddings(fs, bin, ids);
        const auto back = poi::ingest::read_embeddings(bin, ids);
        require(back.dim == fs.dim && back.normalized == fs.normalized &&
                    back.row_ids == fs.row_ids && back.data.size() == fs.data.size(),
                "round-trip shape mismatch at trial " + std::to_string(trial));
        require(count == 0 || std::memcmp(back.data.data(), fs.data.data(),
                                          fs.data.size() * sizeof(float)) == 0,
                "round-trip payload not bit-identical at trial " + std::to_string(trial));
    }

    // Selection manifests re-parse to equal values.
    std::vector<poi::PoiScore> scores;
    for (int i = 0; i < 40; ++i) {
        scores.push_back({"loc" + std::to_string(i), rng.next_double() * 3.0,
                          poi::ScoreMethod::attr});
    }
    const auto sel = poi::select::select_top(
        scores, poi::select::SelectionBudget::from_alpha(0.25), poi::ScoreMethod::attr);
    const auto path = tmp.file("sel.jsonl");
    poi::select::export_subset(sel, scores, path);
    require(poi::select::read_subset(path) == sel, "selection manifest must re-parse equal");
    return "100 embedding sets bit-identical; manifest re-parse equal";
}

// ---- criterion 10: client contract in fixture mode ----

class VirtualClock final : public poi::client::Clock {
public:
    std::int64_t now_ms() override { return now_; }
    void sleep_ms(std::int64_t ms) override {
        if (ms > 0) now_ += ms;
        sleeps.push_back(ms);
    }
    std::int64_t now_ = 0;
    std::vector<std::int64_t> sleeps;
};

class CannedTransport final : public poi::client::Transport {
public:
    explicit CannedTransport(std::vector<poi::client::HttpResponse> script)
        : script_(std::move(script)) {}
    poi::client::HttpResponse get(const std::string&) override { return next(); }
    poi::client::HttpResponse post(const std::string&, const std::string&) override {
        return next();
    }
    int calls = 0;

private:
    poi::client::HttpResponse next() {
        const std::size_t i = std::min<std::size_t>(calls++, script_.size() - 1);
        return script_[i];
    }
    std::vector<poi::client::HttpResponse> script_;
};

std::string criterion_client() {
    testutil::TempDir tmp;
    const poi::LatLon center{48.0, 11.0};
    const auto box = poi::geo::bbox_for_radius(center, 10.0);

    // Scripted 429-429-200 fixture with the documented backoff schedule.
    nlohmann::json ok_body = {{"data", nlohmann::json::array()}, {"next_page", false}};
    nlohmann::json script = {
        {"script",
         {{{"status", 429}}, {{"status", 429}}, {{"status", 200}, {"body", ok_body}}}}};
    tmp.write_text(poi::client::fixture_key("GET", poi::client::images_target(box, 0)) + ".json",
                   script.dump());

    poi::client::ClientConfig cfg;
    cfg.mode = poi::client::ClientMode::fixture;
    cfg.fixture_dir = tmp.path.string();
    cfg.base_backoff_ms = 500;
    cfg.jitter_seed = 7;
    auto clock = std::make_shared<VirtualClock>();
    poi::client::Client c(cfg, clock);
    const auto images = c.fetch_images_radius(center, 10.0);
    require(images.empty(), "fixture body should contain no images");
    require(c.last_attempt_count() == 3, "expected 3 attempts, got " +
                                             std::to_string(c.last_attempt_count()));
    require(clock->sleeps.size() == 2, "expected 2 backoff sleeps");
    require(clock->sleeps[0] >= 375 && clock->sleeps[0] <= 625,
            "first backoff outside 500 ms +/- 25%");
    require(clock->sleeps[1] >= 750 && clock->sleeps[1] <= 1250,
            "second backoff outside 1000 ms +/- 25%");

    // Batch submission bounds.
    {
        auto transport = std::make_unique<CannedTransport>(std::vector<poi::client::HttpResponse>{
            {200, R"({"job_id":"job-ok","state":"submitted"})"}});
        auto* raw = transport.get();
        poi::client::Client batch_client(cfg, std::move(transport),
                                         std::make_shared<VirtualClock>());
        std::vector<std::string> over(50'001, "x");
        bool rejected = false;
        try {
            batch_client.submit_attribute_batch(over, "p");
        } catch (const poi::ValidationError&) {
            rejected = true;
        }
        require(rejected, "50,001-image manifest must be rejected");
        require(raw->calls == 0, "oversized manifest must be rejected before any HTTP call");

        std::vector<std::string> at_limit(50'000);
        for (std::size_t i = 0; i < at_limit.size(); ++i) at_limit[i] = "i" + std::to_string(i);
        const auto job = batch_client.submit_attribute_batch(at_limit, "p");
        require(job.state == poi::client::BatchState::submitted &&
                    job.submitted_count == 50'000,
                "50,000-image manifest must be accepted");
    }
    return "backoff schedule within jitter bounds; batch bounds enforced; no network used";
}

}  // namespace

int main() {
    Runner runner;
    runner.run(1, "cost model exactness", criterion_cost);
    runner.run(2, "retrieval-ratio statistics exactness", criterion_stats);
    runner.run(3, "KNN oracle equivalence", criterion_knn_oracle);
    runner.run(4, "KNN performance smoke", criterion_knn_perf);
    runner.run(5, "attribute scorer oracle equivalence", criterion_attr_oracle);
    runner.run(6, "aggregation semantics anchors", criterion_aggregation_semantics);
    runner.run(7, "selection determinism", criterion_selection);
    runner.run(8, "geo oracle equivalence", criterion_geo);
    runner.run(9, "format round-trips", criterion_roundtrip);
    runner.run(10, "client contract in fixture mode", criterion_client);

    if (runner.failed == 0) {
        std::cout << "acceptance: all criteria passed\n";
        return 0;
    }
    std::cout << "acceptance: " << runner.failed << " criterion(s) failed\n";
    return 1;
}
