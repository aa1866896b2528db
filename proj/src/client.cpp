#include "poi/client.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "poi/errors.hpp"
#include "poi/hash.hpp"
#include "poi/jsonl.hpp"

namespace poi::client {

namespace {

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600) || status == 0;
}

bool auth_status(int status) { return status == 401 || status == 403; }

}  // namespace

std::int64_t SystemClock::now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void SystemClock::sleep_ms(std::int64_t ms) {
    if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

void ClientConfig::load_token_from_env() {
    if (const char* tok = std::getenv(kTokenEnvVar)) auth_token = tok;
}

void ClientConfig::validate() const {
    if (mode == ClientMode::live) {
        if (auth_token.empty()) {
            throw ValidationError(std::string("live mode requires a token; set ") + kTokenEnvVar);
        }
        if (base_url.empty()) throw ValidationError("live mode requires base_url");
    } else {
        if (!std::filesystem::is_directory(fixture_dir)) {
            throw ValidationError("fixture mode requires an existing directory: " + fixture_dir);
        }
    }
    if (max_retries < 0) throw ValidationError("max_retries must be >= 0");
    if (base_backoff_ms <= 0) throw ValidationError("base_backoff_ms must be positive");
    if (rate_limit_per_min == 0) throw ValidationError("rate_limit_per_min must be positive");
}

std::string fixture_key(const std::string& method, const std::string& target,
                        const std::string& body) {
    std::string canonical = method + " " + target;
    if (!body.empty()) {
        canonical.push_back('\n');
        canonical += body;
    }
    return fnv1a64_hex(canonical);
}

std::string images_target(const geo::BBox& box, int page) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "/images?bbox=%.6f,%.6f,%.6f,%.6f&page=%d",
                  box.lat_min, box.lat_max, box.lon_min, box.lon_max, page);
    return buf;
}

// --- FixtureTransport ---

FixtureTransport::FixtureTransport(std::string fixture_dir) : dir_(std::move(fixture_dir)) {}

HttpResponse FixtureTransport::get(const std::string& target) {
    return serve(fixture_key("GET", target));
}

HttpResponse FixtureTransport::post(const std::string& target, const std::string& body) {
    return serve(fixture_key("POST", target, body));
}

HttpResponse FixtureTransport::serve(const std::string& key) {
    const std::string path = dir_ + "/" + key + ".json";
    std::ifstream in(path);
    if (!in) return {404, "fixture not found: " + key};
    std::ostringstream ss;
    ss << in.rdbuf();
    nlohmann::json j = nlohmann::json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) return {500, "malformed fixture: " + key};

    if (j.is_object() && j.contains("script")) {
        const auto& script = j.at("script");
        std::size_t idx;
        {
            std::lock_guard<std::mutex> lock(mu_);
            idx = call_counts_[key]++;
        }
        if (idx >= script.size()) idx = script.size() - 1;
        j = script.at(idx);
    }

    HttpResponse resp;
    if (j.is_object() && j.contains("status")) {
        resp.status = j.at("status").get<int>();
        if (j.contains("body")) {
            const auto& b = j.at("body");
            resp.body = b.is_string() ? b.get<std::string>() : b.dump();
        }
    } else {
        resp.status = 200;
        resp.body = j.dump();
    }
    return resp;
}

// --- LiveTransport ---

struct LiveTransport::Impl {
    httplib::Client http;
    std::string token;

    Impl(const std::string& base_url, std::string tok) : http(base_url), token(std::move(tok)) {
        http.set_connection_timeout(10, 0);
        http.set_read_timeout(30, 0);
    }

    httplib::Headers headers() const { return {{"Authorization", "Bearer " + token}}; }
};

LiveTransport::LiveTransport(std::string base_url, std::string auth_token)
    : impl_(std::make_unique<Impl>(base_url, std::move(auth_token))) {}

LiveTransport::~LiveTransport() = default;

HttpResponse LiveTransport::get(const std::string& target) {
    auto res = impl_->http.Get(target, impl_->headers());
    if (!res) return {0, "transport error"};
    return {res->status, res->body};
}

HttpResponse LiveTransport::post(const std::string& target, const std::string& body) {
    auto res = impl_->http.Post(target, impl_->headers(), body, "application/json");
    if (!res) return {0, "transport error"};
    return {res->status, res->body};
}

// --- RateLimiter ---

void RateLimiter::acquire(Clock& clock) {
    std::lock_guard<std::mutex> lock(mu_);
    std::int64_t now = clock.now_ms();
    const auto prune = [&] {
        while (!recent_.empty() && recent_.front() <= now - 60'000) recent_.pop_front();
    };
    prune();
    if (recent_.size() >= limit_) {
        const std::int64_t wake = recent_.front() + 60'000;
        clock.sleep_ms(wake - now);
        now = wake;
        prune();
    }
    recent_.push_back(now);
}

// --- BatchState ---

const char* to_string(BatchState s) {
    switch (s) {
        case BatchState::submitted: return "submitted";
        case BatchState::running: return "running";
        case BatchState::completed: return "completed";
        case BatchState::failed: return "failed";
    }
    return "?";
}

std::optional<BatchState> batch_state_from_string(const std::string& s) {
    if (s == "submitted") return BatchState::submitted;
    if (s == "running") return BatchState::running;
    if (s == "completed") return BatchState::completed;
    if (s == "failed") return BatchState::failed;
    return std::nullopt;
}

namespace {

int state_rank(BatchState s) {
    switch (s) {
        case BatchState::submitted: return 0;
        case BatchState::running: return 1;
        case BatchState::completed:
        case BatchState::failed: return 2;
    }
    return 0;
}

bool legal_transition(BatchState from, BatchState to) {
    if (from == to) return true;
    if (state_rank(from) == 2) return false;  // terminal states never change
    return state_rank(to) > state_rank(from);
}

}  // namespace

// --- Client ---

Client::Client(ClientConfig cfg, std::shared_ptr<Clock> clock)
    : Client(std::move(cfg), nullptr, std::move(clock)) {}

Client::Client(ClientConfig cfg, std::unique_ptr<Transport> transport,
               std::shared_ptr<Clock> clock)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()),
      limiter_(cfg_.rate_limit_per_min),
      jitter_rng_(cfg_.jitter_seed) {
    cfg_.validate();
    if (!transport_) {
        if (cfg_.mode == ClientMode::fixture) {
            transport_ = std::make_unique<FixtureTransport>(cfg_.fixture_dir);
        } else {
            transport_ = std::make_unique<LiveTransport>(cfg_.base_url, cfg_.auth_token);
        }
    }
}

HttpResponse Client::request_with_retry(const std::string& method, const std::string& target,
                                        const std::string& body) {
    HttpResponse resp;
    for (int attempt = 1; attempt <= cfg_.max_retries + 1; ++attempt) {
        limiter_.acquire(*clock_);
        ++last_attempts_;
        resp = method == "GET" ? transport_->get(target) : transport_->post(target, body);
        if (auth_status(resp.status)) {
            // Token problems never resolve by retrying; the message must not
            // echo the token itself.
            throw ValidationError("authentication failed (HTTP " + std::to_string(resp.status) +
                                  ") for " + target);
        }
        if (!retryable_status(resp.status)) return resp;
        if (attempt == cfg_.max_retries + 1) break;
        double jitter;
        {
            std::lock_guard<std::mutex> lock(rng_mu_);
            jitter = 0.75 + 0.5 * jitter_rng_.next_double();
        }
        const double delay = static_cast<double>(cfg_.base_backoff_ms) *
                             std::pow(2.0, attempt - 1) * jitter;
        clock_->sleep_ms(std::llround(delay));
    }
    throw IoError("request failed after " + std::to_string(cfg_.max_retries + 1) +
                  " attempts (last HTTP status " + std::to_string(resp.status) + "): " + target);
}

std::vector<StreetViewImage> Client::fetch_images_radius(LatLon center, double radius_m) {
    last_attempts_ = 0;
    const geo::BBox box = geo::bbox_for_radius(center, radius_m);

    std::vector<StreetViewImage> fetched;
    for (int page = 0;; ++page) {
        const HttpResponse resp = request_with_retry("GET", images_target(box, page), "");
        nlohmann::json j = nlohmann::json::parse(resp.body, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("data") ||
            !j.at("data").is_array()) {
            throw ValidationError("malformed image response body for page " +
                                  std::to_string(page));
        }
        for (const auto& item : j.at("data")) {
            StreetViewImage img;
            try {
                img.image_id = item.at("id").get<std::string>();
                img.lat = item.at("lat").get<double>();
                img.lon = item.at("lon").get<double>();
                if (item.contains("captured_at") && !item.at("captured_at").is_null()) {
                    img.captured_at = item.at("captured_at").get<std::int64_t>();
                }
                if (item.contains("url") && !item.at("url").is_null()) {
                    img.source_url = item.at("url").get<std::string>();
                }
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError(std::string("malformed image item: ") + e.what());
            }
            fetched.push_back(std::move(img));
        }
        if (!j.value("next_page", false)) break;
    }

    // APIs return bbox supersets; the protocol is radius-defined.
    struct Scored {
        StreetViewImage img;
        double dist;
    };
    std::vector<Scored> kept;
    for (auto& img : fetched) {
        const double d = geo::haversine_m(center, img.position());
        if (d <= radius_m) kept.push_back({std::move(img), d});
    }
    std::sort(kept.begin(), kept.end(), [](const Scored& a, const Scored& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.img.image_id < b.img.image_id;
    });
    std::vector<StreetViewImage> out;
    out.reserve(kept.size());
    for (auto& s : kept) out.push_back(std::move(s.img));
    return out;
}

BatchJob Client::submit_attribute_batch(const std::vector<std::string>& image_manifest,
                                        const std::string& prompt_id) {
    last_attempts_ = 0;
    if (image_manifest.empty()) throw ValidationError("batch manifest is empty");
    if (image_manifest.size() > kMaxBatchImages) {
        throw ValidationError("batch manifest of " + std::to_string(image_manifest.size()) +
                              " images exceeds the 50,000-image limit");
    }
    nlohmann::ordered_json body;
    body["prompt_id"] = prompt_id;
    body["image_ids"] = image_manifest;

    const HttpResponse resp = request_with_retry("POST", "/batches", body.dump());
    nlohmann::json j = nlohmann::json::parse(resp.body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("job_id")) {
        throw ValidationError("malformed batch submission response");
    }
    BatchJob job;
    job.job_id = j.at("job_id").get<std::string>();
    job.state = BatchState::submitted;
    job.submitted_count = image_manifest.size();
    return job;
}

BatchJob Client::poll_batch(const BatchJob& job) {
    last_attempts_ = 0;
    if (job.job_id.empty()) throw ValidationError("cannot poll a job without a job_id");

    const HttpResponse resp = request_with_retry("GET", "/batches/" + job.job_id, "");
    if (resp.status == 404) throw ValidationError("unknown job_id: " + job.job_id);
    nlohmann::json j = nlohmann::json::parse(resp.body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("state")) {
        throw ValidationError("malformed poll response for job " + job.job_id);
    }
    const auto state = batch_state_from_string(j.at("state").get<std::string>());
    if (!state) throw ValidationError("unknown batch state in response");
    if (!legal_transition(job.state, *state)) {
        throw ValidationError("illegal batch state transition " +
                              std::string(to_string(job.state)) + " -> " + to_string(*state));
    }

    BatchJob updated = job;
    updated.state = *state;
    if (*state == BatchState::completed) {
        updated.result_path = j.contains("result_path") && j.at("result_path").is_string()
                                  ? j.at("result_path").get<std::string>()
                                  : "/batches/" + job.job_id + "/results";
    } else {
        updated.result_path.reset();
    }
    if (*state == BatchState::failed) {
        updated.failure_reason = j.value("reason", "unspecified failure");
    }
    return updated;
}

FetchResultsOutcome Client::fetch_batch_results(const BatchJob& job) {
    last_attempts_ = 0;
    if (job.state != BatchState::completed) {
        throw ValidationError("job " + job.job_id + " is not completed (state " +
                              to_string(job.state) + ")");
    }
    if (!job.result_path) throw ValidationError("completed job carries no result_path");

    const HttpResponse resp = request_with_retry("GET", *job.result_path, "");
    FetchResultsOutcome out;
    auto parsed = ingest::parse_attributes_text(resp.body, "batch:" + job.job_id,
                                                ingest::ParseMode::lenient);
    out.records = std::move(parsed.records);
    out.issues = std::move(parsed.issues);
    return out;
}

}  // namespace poi::client
