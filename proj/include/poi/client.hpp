#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "poi/attr.hpp"
#include "poi/geo.hpp"
#include "poi/ingest.hpp"
#include "poi/rng.hpp"
#include "poi/types.hpp"

namespace poi::client {

/// Name of the environment variable holding the API token in live mode.
inline constexpr const char* kTokenEnvVar = "POIKIT_API_TOKEN";

inline constexpr std::size_t kMaxBatchImages = 50'000;

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Minimal HTTP surface the client needs. Live and fixture transports are
/// interchangeable behind it; targets are path+query strings.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse get(const std::string& target) = 0;
    virtual HttpResponse post(const std::string& target, const std::string& body) = 0;
};

/// Injectable time source so backoff and rate-limit behavior is testable
/// against a virtual clock instead of wall-clock sleeps.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
    virtual void sleep_ms(std::int64_t ms) = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now_ms() override;
    void sleep_ms(std::int64_t ms) override;
};

enum class ClientMode { live, fixture };

struct ClientConfig {
    std::string base_url;
    std::string auth_token;  // never persisted or echoed in errors
    int max_retries = 5;
    std::int64_t base_backoff_ms = 500;
    std::uint32_t rate_limit_per_min = 60;
    ClientMode mode = ClientMode::fixture;
    std::string fixture_dir;
    std::uint64_t jitter_seed = 0;

    /// Reads the auth token from POIKIT_API_TOKEN.
    void load_token_from_env();
    /// Throws ValidationError when mode-specific requirements are unmet.
    void validate() const;
};

/// Canonical fixture key for a request: FNV-1a64 hex over
/// "METHOD target" (plus "\n" + body for POSTs). One JSON file per key in
/// the fixture directory, named <key>.json.
std::string fixture_key(const std::string& method, const std::string& target,
                        const std::string& body = "");

/// Canonical street-view query target for a bbox page (6-decimal coords).
std::string images_target(const geo::BBox& box, int page);

/// Serves canned responses from fixture_dir. A fixture file is either a bare
/// JSON body (status 200) or {"status": ..., "body": ...}; a file of the
/// form {"script": [resp, resp, ...]} is consumed one entry per request,
/// sticking on the last entry.
class FixtureTransport final : public Transport {
public:
    explicit FixtureTransport(std::string fixture_dir);
    HttpResponse get(const std::string& target) override;
    HttpResponse post(const std::string& target, const std::string& body) override;

private:
    HttpResponse serve(const std::string& key);
    std::string dir_;
    std::mutex mu_;
    std::unordered_map<std::string, std::size_t> call_counts_;
};

/// Plain HTTP transport over cpp-httplib; attaches the bearer token.
class LiveTransport final : public Transport {
public:
    LiveTransport(std::string base_url, std::string auth_token);
    ~LiveTransport() override;
    HttpResponse get(const std::string& target) override;
    HttpResponse post(const std::string& target, const std::string& body) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Sliding-window limiter: never more than limit requests in any 60 s span.
class RateLimiter {
public:
    explicit RateLimiter(std::uint32_t per_minute) : limit_(per_minute) {}
    void acquire(Clock& clock);

private:
    std::uint32_t limit_;
    std::mutex mu_;
    std::deque<std::int64_t> recent_;
};

enum class BatchState { submitted, running, completed, failed };

const char* to_string(BatchState s);
std::optional<BatchState> batch_state_from_string(const std::string& s);

struct BatchJob {
    std::string job_id;
    BatchState state = BatchState::submitted;
    std::uint64_t submitted_count = 0;
    std::optional<std::string> result_path;  // present iff completed
    std::string failure_reason;              // set when failed
};

struct FetchResultsOutcome {
    std::vector<attr::AttributeRecord> records;
    std::vector<ingest::ParseIssue> issues;  // per-line drop reports (lenient parse)
};

class Client {
public:
    /// Builds the transport implied by cfg.mode.
    explicit Client(ClientConfig cfg, std::shared_ptr<Clock> clock = nullptr);
    /// Injects a custom transport (tests).
    Client(ClientConfig cfg, std::unique_ptr<Transport> transport,
           std::shared_ptr<Clock> clock = nullptr);

    /// Queries the API by bounding box, paginates until exhaustion, then
    /// post-filters by haversine <= radius_m and sorts by (distance, id).
    std::vector<StreetViewImage> fetch_images_radius(LatLon center, double radius_m);

    /// Submits a batch attribute-extraction job, 1..50,000 images.
    BatchJob submit_attribute_batch(const std::vector<std::string>& image_manifest,
                                    const std::string& prompt_id);

    /// Fetches the job's current state; enforces legal transitions and is
    /// idempotent on terminal states.
    BatchJob poll_batch(const BatchJob& job);

    /// Downloads the result JSONL of a completed job and parses it leniently.
    FetchResultsOutcome fetch_batch_results(const BatchJob& job);

    /// HTTP attempts made by the most recent public call (retries included).
    int last_attempt_count() const { return last_attempts_.load(); }

private:
    HttpResponse request_with_retry(const std::string& method, const std::string& target,
                                    const std::string& body);

    ClientConfig cfg_;
    std::unique_ptr<Transport> transport_;
    std::shared_ptr<Clock> clock_;
    RateLimiter limiter_;
    SplitMix64 jitter_rng_;
    std::mutex rng_mu_;
    std::atomic<int> last_attempts_{0};
};

}  // namespace poi::client
