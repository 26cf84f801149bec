#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phishcollect::fetch {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

struct FetchPolicy {
    milliseconds connect_timeout{10'000};
    milliseconds total_timeout{60'000};
    int max_redirects = 10;
    std::size_t max_body_bytes = 25u << 20;
    int retries = 2;
    milliseconds per_host_delay{500};
    std::string user_agent = "phishcollect/1.0";
    bool insecure = false;  // skip TLS verification instead of failing

    /// Throws Error{InvalidArgument} on a non-positive duration or size.
    void validate() const;
};

enum class FetchError {
    ContentForbidden,  // 403
    FileNotFound,      // 404
    HttpError,         // any other non-2xx final status
    Timeout,
    TooManyRedirects,
    DnsFailure,
    TlsFailure,
    ConnectionFailed,
    InvalidUrl,
    TransportError,
};

std::string_view to_string(FetchError kind);
std::optional<FetchError> parse_fetch_error(std::string_view name);

struct FetchFailure {
    FetchError kind = FetchError::TransportError;
    int http_status = 0;
    std::string detail;

    bool retryable() const;
};

struct FetchResult {
    std::string requested_url;
    std::string final_url;
    int status_code = 0;
    std::string media_type;  // lowercased essence, e.g. "text/html"
    std::string charset;     // from Content-Type, may be empty
    std::string body;
    milliseconds elapsed{0};
    bool truncated = false;
    int redirect_count = 0;
    int attempts = 0;
    std::optional<FetchFailure> failure;

    bool ok() const { return !failure.has_value(); }
};

struct RequestLogEntry {
    std::string host;
    std::string url;
    Clock::time_point at;
};

/// Serializes requests per host: each acquire() returns only once at least
/// `delay` has passed since the previous acquire() for the same host. The
/// returned instant is what gets logged, so log gaps honor the delay exactly.
class HostScheduler {
public:
    explicit HostScheduler(milliseconds delay) : delay_(delay) {}

    Clock::time_point acquire(std::string_view host, std::string_view url);

    std::vector<RequestLogEntry> log() const;
    std::size_t request_count() const;
    milliseconds delay() const { return delay_; }

private:
    milliseconds delay_;
    mutable std::mutex mutex_;
    std::map<std::string, Clock::time_point, std::less<>> last_;
    std::vector<RequestLogEntry> log_;
};

/// HTTP(S) client with manual redirect following so that every hop passes
/// through the host scheduler. Thread-safe; one instance is shared by all
/// workers of a run.
class Fetcher {
public:
    explicit Fetcher(FetchPolicy policy, std::shared_ptr<HostScheduler> scheduler = nullptr);

    /// Landing page: body is transcoded to UTF-8 (declared charset, else
    /// lossy UTF-8).
    FetchResult page(std::string_view url) const;

    /// Sub-resource: body bytes untouched.
    FetchResult resource(std::string_view url) const;

    const FetchPolicy& policy() const { return policy_; }
    HostScheduler& scheduler() const { return *scheduler_; }

private:
    FetchResult get(std::string_view url) const;

    FetchPolicy policy_;
    std::shared_ptr<HostScheduler> scheduler_;
};

FetchResult fetch_page(std::string_view url, const FetchPolicy& policy);
FetchResult fetch_resource(std::string_view url, const FetchPolicy& policy);

/// Charset named by a BOM, else by the HTTP header value, else by a meta
/// declaration near the top of the document. Empty when none is found.
std::string detect_charset(std::string_view body, std::string_view header_charset);

/// Converts to UTF-8. Unknown charsets and undecodable bytes fall back to
/// U+FFFD replacement.
std::string decode_to_utf8(std::string_view bytes, std::string_view charset);

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

}  // namespace phishcollect::fetch
