#include "poi/select.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "poi/errors.hpp"
#include "poi/jsonl.hpp"
#include "poi/rng.hpp"

namespace poi::select {

SelectionBudget SelectionBudget::from_alpha(double a) {
    if (!(a > 0.0) || a > 1.0) throw ValidationError("alpha must be in (0, 1]");
    SelectionBudget b;
    b.alpha = a;
    return b;
}

SelectionBudget SelectionBudget::from_k(std::uint64_t k) {
    if (k == 0) throw ValidationError("k must be >= 1");
    SelectionBudget b;
    b.k_absolute = k;
    return b;
}

std::uint64_t budget_to_k(const SelectionBudget& budget, std::uint64_t n_total) {
    if (n_total == 0) throw ValidationError("cannot budget over an empty location pool");
    if (budget.alpha.has_value() == budget.k_absolute.has_value()) {
        throw ValidationError("budget must set exactly one of alpha or k_absolute");
    }
    std::uint64_t k;
    if (budget.alpha) {
        if (!(*budget.alpha > 0.0) || *budget.alpha > 1.0) {
            throw ValidationError("alpha must be in (0, 1]");
        }
        k = static_cast<std::uint64_t>(std::floor(*budget.alpha * static_cast<double>(n_total)));
    } else {
        k = *budget.k_absolute;
    }
    if (k < 1) k = 1;
    if (k > n_total) k = n_total;
    return k;
}

std::vector<std::string> top_k_locations(std::span<const PoiScore> scores, std::uint64_t k) {
    if (scores.empty()) throw ValidationError("no scores to select from");
    std::unordered_set<std::string> seen;
    seen.reserve(scores.size());
    std::vector<const PoiScore*> ranked;
    ranked.reserve(scores.size());
    for (const auto& s : scores) {
        if (!std::isfinite(s.score) || s.score < 0.0) {
            throw ValidationError("invalid score for location " + s.location_id);
        }
        if (!seen.insert(s.location_id).second) {
            throw ValidationError("duplicate location_id in scores: " + s.location_id);
        }
        ranked.push_back(&s);
    }
    const auto better = [](const PoiScore* a, const PoiScore* b) {
        if (a->score != b->score) return a->score > b->score;
        return a->location_id < b->location_id;
    };
    const std::size_t take = std::min<std::size_t>(k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + take, ranked.end(), better);

    std::vector<std::string> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(ranked[i]->location_id);
    return out;
}

std::vector<std::string> map_to_logs(std::span<const std::string> locations,
                                     std::span<const DrivingLog> logs) {
    std::unordered_set<std::string> known;
    known.reserve(logs.size());
    for (const auto& log : logs) known.insert(log.log_id);

    std::vector<std::string> out;
    out.reserve(locations.size());
    for (const auto& loc : locations) {
        if (!known.count(loc)) throw ValidationError("unknown location_id: " + loc);
        out.push_back(loc);
    }
    return out;
}

bool Selection::operator==(const Selection& other) const {
    return method == other.method && k == other.k && locations == other.locations &&
           logs == other.logs && seed == other.seed && budget.alpha == other.budget.alpha &&
           budget.k_absolute == other.budget.k_absolute;
}

Selection random_select(std::span<const std::string> location_ids, std::uint64_t k,
                        std::uint64_t seed) {
    if (k > location_ids.size()) {
        throw ValidationError("k = " + std::to_string(k) + " exceeds pool size " +
                              std::to_string(location_ids.size()));
    }
    std::vector<std::string> pool(location_ids.begin(), location_ids.end());
    std::sort(pool.begin(), pool.end());
    const auto dup = std::adjacent_find(pool.begin(), pool.end());
    if (dup != pool.end()) {
        throw ValidationError("duplicate location_id in pool: " + *dup);
    }

    SplitMix64 rng(seed);
    const std::size_t n = pool.size();
    for (std::uint64_t i = 0; i < k; ++i) {
        const std::uint64_t j = i + rng.next_below(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);

    Selection sel;
    sel.method = ScoreMethod::random;
    sel.budget = SelectionBudget::from_k(k);
    sel.k = k;
    sel.locations = pool;
    sel.logs = std::move(pool);
    sel.seed = seed;
    return sel;
}

Selection select_top(std::span<const PoiScore> scores, const SelectionBudget& budget,
                     ScoreMethod method) {
    Selection sel;
    sel.method = method;
    sel.budget = budget;
    sel.k = budget_to_k(budget, scores.size());
    sel.locations = top_k_locations(scores, sel.k);
    sel.logs = sel.locations;
    return sel;
}

void export_subset(const Selection& sel, std::span<const PoiScore> scores,
                   const std::string& path) {
    if (sel.locations.size() != sel.logs.size()) {
        throw ValidationError("selection locations/logs length mismatch");
    }
    std::unordered_map<std::string, double> by_location;
    by_location.reserve(scores.size());
    for (const auto& s : scores) by_location.emplace(s.location_id, s.score);

    auto out = open_output(path);
    nlohmann::ordered_json header;
    header["type"] = "run";
    header["method"] = to_string(sel.method);
    if (sel.budget.alpha) {
        header["alpha"] = *sel.budget.alpha;
    } else if (sel.budget.k_absolute) {
        header["k_absolute"] = *sel.budget.k_absolute;
    }
    header["k"] = sel.k;
    if (sel.seed) {
        header["seed"] = *sel.seed;
    } else {
        header["seed"] = nullptr;
    }
    header["count"] = sel.locations.size();
    out << header.dump() << '\n';

    for (std::size_t i = 0; i < sel.locations.size(); ++i) {
        const auto it = by_location.find(sel.locations[i]);
        if (it == by_location.end()) {
            throw ValidationError("no score for selected location: " + sel.locations[i]);
        }
        nlohmann::ordered_json row;
        row["rank"] = i + 1;
        row["location_id"] = sel.locations[i];
        row["log_id"] = sel.logs[i];
        row["score"] = it->second;
        row["method"] = to_string(sel.method);
        row["k"] = sel.k;
        if (sel.seed) {
            row["seed"] = *sel.seed;
        } else {
            row["seed"] = nullptr;
        }
        out << row.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

Selection read_subset(const std::string& path) {
    Selection sel;
    bool saw_header = false;
    for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& j) {
        const auto fail = [&](const std::string& msg) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + msg);
        };
        if (!saw_header) {
            if (!j.is_object() || j.value("type", "") != "run") fail("missing run header");
            const auto method = score_method_from_string(j.at("method").get<std::string>());
            if (!method) fail("unknown method in header");
            sel.method = *method;
            sel.k = j.at("k").get<std::uint64_t>();
            if (j.contains("alpha")) {
                sel.budget = SelectionBudget::from_alpha(j.at("alpha").get<double>());
            } else if (j.contains("k_absolute")) {
                sel.budget = SelectionBudget::from_k(j.at("k_absolute").get<std::uint64_t>());
            } else {
                fail("header missing budget");
            }
            if (j.contains("seed") && !j.at("seed").is_null()) {
                sel.seed = j.at("seed").get<std::uint64_t>();
            }
            saw_header = true;
            return;
        }
        sel.locations.push_back(j.at("location_id").get<std::string>());
        sel.logs.push_back(j.at("log_id").get<std::string>());
        if (sel.locations.size() != j.at("rank").get<std::size_t>()) {
            fail("rank out of order");
        }
    });
    if (!saw_header) throw ValidationError(path + ": empty manifest");
    return sel;
}

std::vector<ManifestRow> read_subset_rows(const std::string& path) {
    std::vector<ManifestRow> rows;
    bool saw_header = false;
    for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& j) {
        if (!saw_header) {
            if (!j.is_object() || j.value("type", "") != "run") {
                throw ValidationError(path + ":" + std::to_string(line_no) +
                                      ": missing run header");
            }
            saw_header = true;
            return;
        }
        ManifestRow row;
        row.rank = j.at("rank").get<std::uint64_t>();
        row.location_id = j.at("location_id").get<std::string>();
        row.log_id = j.at("log_id").get<std::string>();
        row.score = j.at("score").get<double>();
        row.method = j.at("method").get<std::string>();
        row.k = j.at("k").get<std::uint64_t>();
        if (j.contains("seed") && !j.at("seed").is_null()) {
            row.seed = j.at("seed").get<std::uint64_t>();
        }
        rows.push_back(std::move(row));
    });
    if (!saw_header) throw ValidationError(path + ": empty manifest");
    return rows;
}

void write_scores_jsonl(std::span<const PoiScore> scores, const std::string& path,
                        std::optional<std::uint32_t> k) {
    auto out = open_output(path);
    for (const auto& s : scores) {
        nlohmann::ordered_json row;
        row["location_id"] = s.location_id;
        row["score"] = s.score;
        row["method"] = to_string(s.method);
        if (k) row["k"] = *k;
        out << row.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<PoiScore> read_scores_jsonl(const std::string& path) {
    std::vector<PoiScore> scores;
    for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& j) {
        PoiScore s;
        try {
            s.location_id = j.at("location_id").get<std::string>();
            s.score = j.at("score").get<double>();
            const auto method = score_method_from_string(j.at("method").get<std::string>());
            if (!method) throw ValidationError("unknown method");
            s.method = *method;
        } catch (const std::exception& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": bad score row: " +
                                  e.what());
        }
        scores.push_back(std::move(s));
    });
    return scores;
}

}  // namespace poi::select
