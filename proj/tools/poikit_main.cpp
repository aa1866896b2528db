// poikit: street-view-guided POI scoring and data-selection pipeline.
//
// Subcommands: colocate, score, select, export-geojson, cost, stats.
// Standard output is data, standard error is diagnostics. Exit codes:
// 0 success, 1 domain/validation error, 2 I/O or environment error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poi/attr.hpp"
#include "poi/cost.hpp"
#include "poi/errors.hpp"
#include "poi/geo.hpp"
#include "poi/hash.hpp"
#include "poi/ingest.hpp"
#include "poi/jsonl.hpp"
#include "poi/knn.hpp"
#include "poi/select.hpp"
#include "poi/types.hpp"
#include "poi/version.hpp"

namespace {

using nlohmann::ordered_json;

std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct ManifestWriter {
    std::string command;
    ordered_json config = ordered_json::object();
    std::vector<std::string> inputs;
    std::chrono::system_clock::time_point started = std::chrono::system_clock::now();

    // Default target: <out>.manifest.json. Explicit --manifest overrides;
    // commands printing to stdout skip the manifest unless one is requested.
    void write(const std::string& explicit_path, const std::string& out_path) const {
        std::string path = explicit_path;
        if (path.empty()) {
            if (out_path.empty()) return;
            path = out_path + ".manifest.json";
        }
        ordered_json m;
        m["command"] = command;
        m["tool_version"] = std::string(poi::kToolName) + " " + poi::kToolVersion;
        m["config_digest"] = poi::fnv1a64_hex(config.dump());
        auto digests = ordered_json::array();
        for (const auto& in : inputs) {
            digests.push_back({{"path", in}, {"digest", poi::digest_file(in)}});
        }
        m["input_digests"] = std::move(digests);
        m["started_at"] = iso8601_utc(started);
        m["finished_at"] = iso8601_utc(std::chrono::system_clock::now());
        auto out = poi::open_output(path);
        out << m.dump(2) << '\n';
    }
};

std::string format_usd(std::int64_t dollars) {
    const bool neg = dollars < 0;
    std::string digits = std::to_string(neg ? -dollars : dollars);
    std::string grouped;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) grouped.push_back(',');
        grouped.push_back(digits[i]);
    }
    return (neg ? "-$" : "$") + grouped;
}

std::string format_pct(double pct) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", pct);
    return buf;
}

void print_issues(const std::vector<poi::ingest::ParseIssue>& issues, const std::string& what) {
    if (issues.empty()) return;
    std::cerr << what << ": " << issues.size() << " issue(s)\n";
    for (const auto& issue : issues) {
        std::cerr << "  line " << issue.line << ": " << issue.message << "\n";
    }
}

/// Machine-readable error report: one {"file","line","message"} row per issue.
struct IssueReport {
    std::vector<std::pair<std::string, poi::ingest::ParseIssue>> rows;

    void add(const std::string& file, const std::vector<poi::ingest::ParseIssue>& issues) {
        for (const auto& issue : issues) rows.emplace_back(file, issue);
    }
    void write(const std::string& path) const {
        if (path.empty()) return;
        auto out = poi::open_output(path);
        for (const auto& [file, issue] : rows) {
            ordered_json row;
            row["file"] = file;
            row["line"] = issue.line;
            row["message"] = issue.message;
            out << row.dump() << '\n';
        }
    }
};

poi::ingest::LogFormat sniff_log_format(const std::string& path) {
    return path.size() >= 4 && path.substr(path.size() - 4) == ".csv"
               ? poi::ingest::LogFormat::csv
               : poi::ingest::LogFormat::jsonl;
}

int cmd_colocate(const std::string& logs_path, const std::string& images_path, double radius_m,
                 std::size_t max_images, bool strict, const std::string& out,
                 const std::string& manifest_path, const std::string& report_path) {
    ManifestWriter manifest;
    manifest.command = "colocate";
    manifest.config = {{"radius_m", radius_m}, {"max_images", max_images}, {"strict", strict}};
    manifest.inputs = {logs_path, images_path};

    const auto mode = strict ? poi::ingest::ParseMode::strict : poi::ingest::ParseMode::lenient;
    auto logs = poi::ingest::parse_logs(logs_path, sniff_log_format(logs_path), mode);
    print_issues(logs.issues, logs_path);
    auto images = poi::ingest::parse_images(images_path, mode);
    print_issues(images.issues, images_path);

    IssueReport report;
    report.add(logs_path, logs.issues);
    report.add(images_path, images.issues);
    report.write(report_path);

    const auto table = poi::geo::colocate(logs.records, images.records, radius_m, max_images);
    poi::geo::write_colocation_jsonl(table, out);
    manifest.write(manifest_path, out);

    std::uint64_t with_returns = 0;
    for (const auto& e : table.entries) {
        if (!e.images.empty()) ++with_returns;
    }
    std::cerr << "colocate: " << table.entries.size() << " locations, " << with_returns
              << " with returns\n";
    return 0;
}

int cmd_score(const std::string& method, const std::string& colocations_path,
              const std::string& source_emb, const std::string& source_ids,
              const std::string& target_emb, const std::string& target_ids,
              const std::string& source_attrs, const std::string& target_attrs,
              std::uint32_t k, bool no_normalize, unsigned workers, const std::string& out,
              const std::string& manifest_path, const std::string& report_path) {
    ManifestWriter manifest;
    manifest.command = "score";
    manifest.config = {{"method", method}, {"k", k}, {"normalize", !no_normalize},
                       {"workers", workers}};

    const auto table = poi::geo::read_colocation_jsonl(colocations_path);
    manifest.inputs.push_back(colocations_path);

    std::vector<poi::PoiScore> scores;
    ordered_json diag;
    IssueReport report;

    if (method == "knn") {
        if (source_emb.empty() || source_ids.empty() || target_emb.empty() || target_ids.empty()) {
            throw poi::ValidationError(
                "knn scoring needs --source-emb/--source-ids/--target-emb/--target-ids");
        }
        manifest.inputs.insert(manifest.inputs.end(),
                               {source_emb, source_ids, target_emb, target_ids});
        const auto source = poi::ingest::read_embeddings(source_emb, source_ids);
        const auto targets = poi::ingest::read_embeddings(target_emb, target_ids);

        poi::knn::KnnConfig cfg;
        cfg.k = k;
        cfg.normalize = !no_normalize;
        cfg.workers = workers;
        const auto image_scores = poi::knn::score_images(targets, source, cfg);

        poi::knn::AggregationDiagnostics agg;
        scores = poi::knn::aggregate_location(table, image_scores, &agg);
        diag = {{"locations_total", agg.locations_total},
                {"locations_without_images", agg.locations_without_images},
                {"locations_without_scored_images", agg.locations_without_scored_images},
                {"images_missing_scores", agg.images_missing_scores}};
    } else if (method == "attr") {
        if (source_attrs.empty() || target_attrs.empty()) {
            throw poi::ValidationError("attr scoring needs --source-attrs and --target-attrs");
        }
        manifest.inputs.insert(manifest.inputs.end(), {source_attrs, target_attrs});
        auto source_records = poi::ingest::parse_attributes(source_attrs);
        print_issues(source_records.issues, source_attrs);
        auto target_records = poi::ingest::parse_attributes(target_attrs);
        print_issues(target_records.issues, target_attrs);
        report.add(source_attrs, source_records.issues);
        report.add(target_attrs, target_records.issues);

        const auto source_set = poi::attr::build_source_set(source_records.records);
        if (source_set.empty()) {
            throw poi::ValidationError("empty source attribute set");
        }

        std::map<std::string, std::vector<poi::attr::AttributeRecord>> by_location;
        std::uint64_t orphan_records = 0;
        for (auto& rec : target_records.records) {
            if (table.find(rec.location_id) == nullptr) {
                ++orphan_records;
                continue;
            }
            by_location[rec.location_id].push_back(std::move(rec));
        }
        for (const auto& entry : table.entries) {
            const auto it = by_location.find(entry.log_id);
            poi::attr::AttributeSet loc_set;
            if (it != by_location.end()) loc_set = poi::attr::dedup_location(it->second);
            scores.push_back(poi::attr::score_location_attr(entry.log_id, loc_set, source_set));
        }
        diag = {{"locations_total", table.entries.size()},
                {"source_set_size", source_set.size()},
                {"dropped_signs", source_records.issues.size() + target_records.issues.size()},
                {"records_without_location", orphan_records}};
    } else {
        throw poi::ValidationError("unknown scoring method: " + method);
    }

    report.write(report_path);
    poi::select::write_scores_jsonl(
        scores, out, method == "knn" ? std::optional<std::uint32_t>(k) : std::nullopt);
    manifest.write(manifest_path, out);
    std::cerr << "score: " << diag.dump() << "\n";
    return 0;
}

int cmd_select(const std::string& scores_path, const std::string& method, double alpha,
               std::uint64_t k_absolute, std::optional<std::uint64_t> seed,
               const std::string& logs_path, const std::string& out,
               const std::string& manifest_path) {
    ManifestWriter manifest;
    manifest.command = "select";
    manifest.config = {{"method", method}, {"alpha", alpha}, {"k", k_absolute}};
    manifest.inputs = {scores_path, logs_path};

    if ((alpha > 0.0) == (k_absolute > 0)) {
        throw poi::ValidationError("pass exactly one of --alpha or --k");
    }
    const auto budget = alpha > 0.0 ? poi::select::SelectionBudget::from_alpha(alpha)
                                    : poi::select::SelectionBudget::from_k(k_absolute);

    const auto scores = poi::select::read_scores_jsonl(scores_path);
    const auto logs = poi::ingest::parse_logs(logs_path, sniff_log_format(logs_path));

    poi::select::Selection sel;
    if (method == "random") {
        if (!seed) throw poi::ValidationError("--method random requires --seed");
        std::vector<std::string> pool;
        pool.reserve(scores.size());
        for (const auto& s : scores) pool.push_back(s.location_id);
        const std::uint64_t k = poi::select::budget_to_k(budget, pool.size());
        sel = poi::select::random_select(pool, k, *seed);
        sel.budget = budget;
    } else {
        const auto m = poi::score_method_from_string(method);
        if (!m || *m == poi::ScoreMethod::random) {
            throw poi::ValidationError("unknown selection method: " + method);
        }
        sel = poi::select::select_top(scores, budget, *m);
    }
    sel.logs = poi::select::map_to_logs(sel.locations, logs.records);

    poi::select::export_subset(sel, scores, out);
    manifest.write(manifest_path, out);
    std::cerr << "select: " << sel.locations.size() << " locations (k=" << sel.k << ")\n";
    return 0;
}

int cmd_export_geojson(const std::string& selection_path, const std::string& logs_path,
                       const std::string& out, const std::string& manifest_path) {
    ManifestWriter manifest;
    manifest.command = "export-geojson";
    manifest.inputs = {selection_path, logs_path};

    const auto rows = poi::select::read_subset_rows(selection_path);
    const auto logs = poi::ingest::parse_logs(logs_path, sniff_log_format(logs_path));
    std::map<std::string, const poi::DrivingLog*> by_id;
    for (const auto& log : logs.records) by_id[log.log_id] = &log;

    ordered_json fc;
    fc["type"] = "FeatureCollection";
    auto features = ordered_json::array();
    for (const auto& row : rows) {
        const auto it = by_id.find(row.log_id);
        if (it == by_id.end()) {
            throw poi::ValidationError("unknown log_id in selection: " + row.log_id);
        }
        ordered_json f;
        f["type"] = "Feature";
        // RFC 7946: positions are (lon, lat).
        f["geometry"] = {{"type", "Point"},
                         {"coordinates", {it->second->lon, it->second->lat}}};
        f["properties"] = {{"rank", row.rank},
                           {"score", row.score},
                           {"method", row.method},
                           {"log_id", row.log_id}};
        features.push_back(std::move(f));
    }
    fc["features"] = std::move(features);

    auto out_stream = poi::open_output(out);
    out_stream << fc.dump(2) << '\n';
    if (!out_stream) throw poi::IoError("write failed: " + out);
    manifest.write(manifest_path, out);
    std::cerr << "export-geojson: " << rows.size() << " features\n";
    return 0;
}

void render_cost_table(std::ostream& os, const std::vector<poi::cost::CostEstimate>& table,
                       bool csv) {
    if (csv) {
        os << "name,road_length_km,images,tokens,usd_exact,usd_display\n";
        for (const auto& e : table) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6f", e.usd_exact);
            os << e.name << ',' << e.road_length_km << ',' << e.images << ',' << e.tokens << ','
               << buf << ',' << e.usd_display << '\n';
        }
        return;
    }
    os << "Name                 Road (km)        Images            Tokens   Est. Cost\n";
    for (const auto& e : table) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-20s %12.0f %13llu %17llu   %s\n",
                      e.name.empty() ? "-" : e.name.c_str(), e.road_length_km,
                      static_cast<unsigned long long>(e.images),
                      static_cast<unsigned long long>(e.tokens),
                      format_usd(e.usd_display).c_str());
        os << line;
    }
}

int cmd_cost(double road_km, const std::string& table_path, double interval_m,
             std::uint64_t tokens_per_image, double usd_per_mtok, bool csv,
             const std::string& out, const std::string& manifest_path) {
    ManifestWriter manifest;
    manifest.command = "cost";
    manifest.config = {{"interval_m", interval_m},
                       {"tokens_per_image", tokens_per_image},
                       {"usd_per_million_tokens", usd_per_mtok}};

    poi::cost::CostModel model;
    model.sampling_interval_m = interval_m;
    model.tokens_per_image = tokens_per_image;
    model.usd_per_million_tokens = usd_per_mtok;

    std::vector<poi::cost::CostEstimate> table;
    if (!table_path.empty()) {
        manifest.inputs.push_back(table_path);
        auto in = poi::open_input(table_path);
        std::string line;
        std::vector<std::pair<std::string, double>> entries;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line_no == 1) continue;  // header row required
            const auto comma = line.find(',');
            if (comma == std::string::npos) {
                throw poi::ValidationError(table_path + ":" + std::to_string(line_no) +
                                           ": expected name,road_length_km");
            }
            entries.emplace_back(line.substr(0, comma), std::stod(line.substr(comma + 1)));
        }
        table = poi::cost::country_table(entries, model);
    } else {
        if (road_km < 0.0) throw poi::ValidationError("road length must be non-negative");
        auto est = poi::cost::estimate_cost(road_km, model);
        est.name = "network";
        table.push_back(std::move(est));
    }

    if (out.empty()) {
        render_cost_table(std::cout, table, csv);
    } else {
        auto os = poi::open_output(out);
        render_cost_table(os, table, csv);
    }
    manifest.write(manifest_path, out);
    return 0;
}

int cmd_stats(const std::string& logs_path, const std::string& colocations_path, bool csv,
              const std::string& out, const std::string& manifest_path) {
    ManifestWriter manifest;
    manifest.command = "stats";
    manifest.inputs = {logs_path, colocations_path};

    const auto logs = poi::ingest::parse_logs(logs_path, sniff_log_format(logs_path));
    const auto table = poi::geo::read_colocation_jsonl(colocations_path);

    std::map<std::string, std::vector<poi::DrivingLog>> by_country;
    for (const auto& log : logs.records) by_country[log.country].push_back(log);

    const auto render = [&](std::ostream& os) {
        if (csv) {
            os << "country,total_logs,logs_with_sign,logs_with_returns,return_ratio_pct\n";
        } else {
            os << "Country   Logs   w. Traffic Sign   w. Returns   Ratio\n";
        }
        for (const auto& [country, group] : by_country) {
            const auto stats = poi::ingest::dataset_stats(group, table);
            const double pct = poi::display_percentage(stats.return_ratio);
            if (csv) {
                os << country << ',' << stats.total_logs << ',' << stats.logs_with_sign << ','
                   << stats.logs_with_returns << ',' << format_pct(pct) << '\n';
            } else {
                char line[160];
                std::snprintf(line, sizeof(line), "%-7s %6llu %17llu %12llu   %s%%\n",
                              country.c_str(),
                              static_cast<unsigned long long>(stats.total_logs),
                              static_cast<unsigned long long>(stats.logs_with_sign),
                              static_cast<unsigned long long>(stats.logs_with_returns),
                              format_pct(pct).c_str());
                os << line;
            }
        }
    };

    if (out.empty()) {
        render(std::cout);
    } else {
        auto os = poi::open_output(out);
        render(os);
    }
    manifest.write(manifest_path, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(poi::kToolName) + " " + poi::kToolVersion +
                 " - street-view-guided POI selection"};
    app.require_subcommand(1);

    // colocate
    std::string co_logs, co_images, co_out, co_manifest, co_report;
    double co_radius = 10.0;
    std::size_t co_max = 10;
    bool co_strict = false;
    auto* colocate = app.add_subcommand("colocate", "Pair driving logs with nearby images");
    colocate->add_option("--logs", co_logs, "Driving logs (.jsonl or .csv)")->required();
    colocate->add_option("--images", co_images, "Street-view metadata JSONL")->required();
    colocate->add_option("--radius-m", co_radius, "Query radius in meters");
    colocate->add_option("--max-images", co_max, "Images retained per location");
    colocate->add_flag("--strict", co_strict, "Abort on any invalid input line");
    colocate->add_option("--out", co_out, "Output co-location JSONL")->required();
    colocate->add_option("--manifest", co_manifest, "Run manifest path");
    colocate->add_option("--report", co_report, "Parse-issue report JSONL path");

    // score
    std::string sc_method, sc_coloc, sc_semb, sc_sids, sc_temb, sc_tids, sc_sattr, sc_tattr,
        sc_out, sc_manifest, sc_report;
    std::uint32_t sc_k = 10;
    bool sc_no_norm = false;
    unsigned sc_workers = 0;
    auto* score = app.add_subcommand("score", "Score locations by discrepancy");
    score->add_option("--method", sc_method, "knn or attr")->required();
    score->add_option("--colocations", sc_coloc, "Co-location JSONL")->required();
    score->add_option("--source-emb", sc_semb, "Source embeddings (.poifv)");
    score->add_option("--source-ids", sc_sids, "Source ids sidecar");
    score->add_option("--target-emb", sc_temb, "Target embeddings (.poifv)");
    score->add_option("--target-ids", sc_tids, "Target ids sidecar");
    score->add_option("--source-attrs", sc_sattr, "Source attribute JSONL");
    score->add_option("--target-attrs", sc_tattr, "Target attribute JSONL");
    score->add_option("--k", sc_k, "k-th nearest neighbor");
    score->add_flag("--no-normalize", sc_no_norm, "Skip L2 normalization");
    score->add_option("--workers", sc_workers, "Worker threads (0 = cores)");
    score->add_option("--out", sc_out, "Output scores JSONL")->required();
    score->add_option("--manifest", sc_manifest, "Run manifest path");
    score->add_option("--report", sc_report, "Parse-issue report JSONL path");

    // select
    std::string se_scores, se_method, se_logs, se_out, se_manifest;
    double se_alpha = 0.0;
    std::uint64_t se_k = 0;
    std::optional<std::uint64_t> se_seed;
    auto* sel = app.add_subcommand("select", "Budgeted top-k selection");
    sel->add_option("--scores", se_scores, "Scores JSONL")->required();
    sel->add_option("--method", se_method, "knn, attr, or random")->required();
    sel->add_option("--alpha", se_alpha, "Sampling ratio in (0,1]");
    sel->add_option("--k", se_k, "Absolute budget");
    sel->add_option("--seed", se_seed, "Seed (required for random)");
    sel->add_option("--logs", se_logs, "Driving logs (.jsonl or .csv)")->required();
    sel->add_option("--out", se_out, "Output selection manifest JSONL")->required();
    sel->add_option("--manifest", se_manifest, "Run manifest path");

    // export-geojson
    std::string gj_selection, gj_logs, gj_out, gj_manifest;
    auto* geojson = app.add_subcommand("export-geojson", "Render a selection as GeoJSON");
    geojson->add_option("--selection", gj_selection, "Selection manifest JSONL")->required();
    geojson->add_option("--logs", gj_logs, "Driving logs (.jsonl or .csv)")->required();
    geojson->add_option("--out", gj_out, "Output GeoJSON file")->required();
    geojson->add_option("--manifest", gj_manifest, "Run manifest path");

    // cost
    std::string ct_table, ct_out, ct_manifest;
    double ct_road_km = -1.0;
    double ct_interval = 20.0;
    std::uint64_t ct_tokens = 200;
    double ct_rate = 2.0;
    bool ct_csv = false;
    auto* cost = app.add_subcommand("cost", "Estimate full-network analysis cost");
    cost->add_option("--road-km", ct_road_km, "Road network length in km");
    cost->add_option("--table", ct_table, "CSV of name,road_length_km rows");
    cost->add_option("--interval-m", ct_interval, "Sampling interval in meters");
    cost->add_option("--tokens-per-image", ct_tokens, "Tokens per image");
    cost->add_option("--usd-per-mtok", ct_rate, "USD per million tokens");
    cost->add_flag("--csv", ct_csv, "CSV output");
    cost->add_option("--out", ct_out, "Write table to file instead of stdout");
    cost->add_option("--manifest", ct_manifest, "Run manifest path");

    // stats
    std::string st_logs, st_coloc, st_out, st_manifest;
    bool st_csv = false;
    auto* stats = app.add_subcommand("stats", "Per-country retrieval statistics");
    stats->add_option("--logs", st_logs, "Driving logs (.jsonl or .csv)")->required();
    stats->add_option("--colocations", st_coloc, "Co-location JSONL")->required();
    stats->add_flag("--csv", st_csv, "CSV output");
    stats->add_option("--out", st_out, "Write table to file instead of stdout");
    stats->add_option("--manifest", st_manifest, "Run manifest path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (colocate->parsed()) {
            return cmd_colocate(co_logs, co_images, co_radius, co_max, co_strict, co_out,
                                co_manifest, co_report);
        }
        if (score->parsed()) {
            return cmd_score(sc_method, sc_coloc, sc_semb, sc_sids, sc_temb, sc_tids, sc_sattr,
                             sc_tattr, sc_k, sc_no_norm, sc_workers, sc_out, sc_manifest,
                             sc_report);
        }
        if (sel->parsed()) {
            return cmd_select(se_scores, se_method, se_alpha, se_k, se_seed, se_logs, se_out,
                              se_manifest);
        }
        if (geojson->parsed()) {
            return cmd_export_geojson(gj_selection, gj_logs, gj_out, gj_manifest);
        }
        if (cost->parsed()) {
            if (ct_road_km < 0.0 && ct_table.empty()) {
                throw poi::ValidationError("pass --road-km or --table");
            }
            return cmd_cost(ct_road_km, ct_table, ct_interval, ct_tokens, ct_rate, ct_csv,
                            ct_out, ct_manifest);
        }
        if (stats->parsed()) {
            return cmd_stats(st_logs, st_coloc, st_csv, st_out, st_manifest);
        }
    } catch (const poi::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const poi::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
