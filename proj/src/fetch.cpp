#include "phishcollect/fetch.hpp"

#include <curl/curl.h>
#include <iconv.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <mutex>
#include <thread>

#include "phishcollect/error.hpp"
#include "phishcollect/url.hpp"

namespace phishcollect::fetch {
namespace {

void global_init() {
    static std::once_flag once;
    std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    auto ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return std::string(s);
}

struct BodySink {
    std::string* body;
    std::size_t cap;
    bool truncated = false;
};

std::size_t write_body(char* data, std::size_t size, std::size_t nmemb, void* userdata) {
    auto* sink = static_cast<BodySink*>(userdata);
    std::size_t n = size * nmemb;
    std::size_t room = sink->cap - std::min(sink->cap, sink->body->size());
    if (n > room) {
        sink->body->append(data, room);
        sink->truncated = true;
        return 0;  // stop the transfer; CURLE_WRITE_ERROR is expected
    }
    sink->body->append(data, n);
    return n;
}

FetchError classify(CURLcode code) {
    switch (code) {
        case CURLE_OPERATION_TIMEDOUT:
            return FetchError::Timeout;
        case CURLE_COULDNT_RESOLVE_HOST:
        case CURLE_COULDNT_RESOLVE_PROXY:
            return FetchError::DnsFailure;
        case CURLE_SSL_CONNECT_ERROR:
        case CURLE_PEER_FAILED_VERIFICATION:
        case CURLE_SSL_CERTPROBLEM:
        case CURLE_SSL_CIPHER:
        case CURLE_SSL_CACERT_BADFILE:
        case CURLE_SSL_ISSUER_ERROR:
        case CURLE_SSL_PINNEDPUBKEYNOTMATCH:
        case CURLE_SSL_INVALIDCERTSTATUS:
        case CURLE_SSL_CRL_BADFILE:
        case CURLE_SSL_SHUTDOWN_FAILED:
        case CURLE_SSL_ENGINE_NOTFOUND:
        case CURLE_SSL_ENGINE_SETFAILED:
        case CURLE_SSL_ENGINE_INITFAILED:
        case CURLE_USE_SSL_FAILED:
            return FetchError::TlsFailure;
        case CURLE_COULDNT_CONNECT:
            return FetchError::ConnectionFailed;
        case CURLE_URL_MALFORMAT:
        case CURLE_UNSUPPORTED_PROTOCOL:
            return FetchError::InvalidUrl;
        default:
            return FetchError::TransportError;
    }
}

FetchFailure status_failure(int status) {
    if (status == 403) return {FetchError::ContentForbidden, status, "HTTP 403"};
    if (status == 404) return {FetchError::FileNotFound, status, "HTTP 404"};
    return {FetchError::HttpError, status, "HTTP " + std::to_string(status)};
}

struct Attempt {
    int status = 0;
    std::string content_type;
    std::string redirect_to;
    std::string body;
    bool truncated = false;
    std::optional<FetchFailure> failure;
};

struct EasyHandle {
    CURL* handle = curl_easy_init();
    ~EasyHandle() {
        if (handle) curl_easy_cleanup(handle);
    }
};

Attempt perform(const FetchPolicy& policy, const std::string& url) {
    Attempt a;
    EasyHandle easy;
    CURL* h = easy.handle;
    if (!h) {
        a.failure = FetchFailure{FetchError::TransportError, 0, "curl_easy_init failed"};
        return a;
    }
    char errbuf[CURL_ERROR_SIZE] = {0};
    BodySink sink{&a.body, policy.max_body_bytes};
    curl_easy_setopt(h, CURLOPT_URL, url.c_str());
    curl_easy_setopt(h, CURLOPT_NOSIGNAL, 1L);
    curl_easy_setopt(h, CURLOPT_FOLLOWLOCATION, 0L);
    curl_easy_setopt(h, CURLOPT_CONNECTTIMEOUT_MS, static_cast<long>(policy.connect_timeout.count()));
    curl_easy_setopt(h, CURLOPT_TIMEOUT_MS, static_cast<long>(policy.total_timeout.count()));
    curl_easy_setopt(h, CURLOPT_USERAGENT, policy.user_agent.c_str());
    curl_easy_setopt(h, CURLOPT_ACCEPT_ENCODING, "");
    curl_easy_setopt(h, CURLOPT_HTTP_VERSION, static_cast<long>(CURL_HTTP_VERSION_2TLS));
    curl_easy_setopt(h, CURLOPT_PROTOCOLS, static_cast<long>(CURLPROTO_HTTP | CURLPROTO_HTTPS));
    curl_easy_setopt(h, CURLOPT_WRITEFUNCTION, write_body);
    curl_easy_setopt(h, CURLOPT_WRITEDATA, &sink);
    curl_easy_setopt(h, CURLOPT_ERRORBUFFER, errbuf);
    if (policy.insecure) {
        curl_easy_setopt(h, CURLOPT_SSL_VERIFYPEER, 0L);
        curl_easy_setopt(h, CURLOPT_SSL_VERIFYHOST, 0L);
    }

    CURLcode rc = curl_easy_perform(h);
    long status = 0;
    curl_easy_getinfo(h, CURLINFO_RESPONSE_CODE, &status);
    a.status = static_cast<int>(status);
    a.truncated = sink.truncated;
    if (rc != CURLE_OK && !(rc == CURLE_WRITE_ERROR && sink.truncated)) {
        std::string detail = errbuf[0] ? errbuf : curl_easy_strerror(rc);
        a.failure = FetchFailure{classify(rc), 0, std::move(detail)};
        return a;
    }
    char* ct = nullptr;
    if (curl_easy_getinfo(h, CURLINFO_CONTENT_TYPE, &ct) == CURLE_OK && ct) a.content_type = ct;
    char* location = nullptr;
    if (curl_easy_getinfo(h, CURLINFO_REDIRECT_URL, &location) == CURLE_OK && location) {
        a.redirect_to = location;
    }
    return a;
}

void split_content_type(std::string_view value, std::string& media_type, std::string& charset) {
    auto semi = value.find(';');
    media_type = to_lower(trim(value.substr(0, semi)));
    charset.clear();
    while (semi != std::string_view::npos) {
        value.remove_prefix(semi + 1);
        semi = value.find(';');
        std::string param = trim(value.substr(0, semi));
        auto eq = param.find('=');
        if (eq != std::string::npos && to_lower(trim(param.substr(0, eq))) == "charset") {
            std::string v = trim(param.substr(eq + 1));
            if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) v = v.substr(1, v.size() - 2);
            charset = to_lower(v);
        }
    }
}

bool is_utf8_name(std::string_view cs) {
    return cs.empty() || cs == "utf-8" || cs == "utf8" || cs == "us-ascii" || cs == "ascii";
}

constexpr std::string_view kReplacement = "\xEF\xBF\xBD";

}  // namespace

void FetchPolicy::validate() const {
    if (connect_timeout.count() <= 0 || total_timeout.count() <= 0 || per_host_delay.count() <= 0) {
        throw Error(Errc::InvalidArgument, "fetch durations must be positive");
    }
    if (max_redirects < 0) throw Error(Errc::InvalidArgument, "max_redirects must be >= 0");
    if (max_body_bytes == 0) throw Error(Errc::InvalidArgument, "max_body_bytes must be > 0");
    if (retries < 0) throw Error(Errc::InvalidArgument, "retries must be >= 0");
}

std::string_view to_string(FetchError kind) {
    switch (kind) {
        case FetchError::ContentForbidden: return "ContentForbidden";
        case FetchError::FileNotFound: return "FileNotFound";
        case FetchError::HttpError: return "HttpError";
        case FetchError::Timeout: return "Timeout";
        case FetchError::TooManyRedirects: return "TooManyRedirects";
        case FetchError::DnsFailure: return "DnsFailure";
        case FetchError::TlsFailure: return "TlsFailure";
        case FetchError::ConnectionFailed: return "ConnectionFailed";
        case FetchError::InvalidUrl: return "InvalidUrl";
        case FetchError::TransportError: return "TransportError";
    }
    return "TransportError";
}

std::optional<FetchError> parse_fetch_error(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(FetchError::TransportError); ++i) {
        auto kind = static_cast<FetchError>(i);
        if (to_string(kind) == name) return kind;
    }
    return std::nullopt;
}

bool FetchFailure::retryable() const {
    return kind == FetchError::Timeout || kind == FetchError::DnsFailure ||
           (kind == FetchError::HttpError && http_status >= 500 && http_status <= 599);
}

Clock::time_point HostScheduler::acquire(std::string_view host, std::string_view url) {
    std::unique_lock lock(mutex_);
    while (true) {
        auto now = Clock::now();
        auto it = last_.find(host);
        if (it == last_.end() || now >= it->second + delay_) {
            if (it == last_.end()) {
                last_.emplace(std::string(host), now);
            } else {
                it->second = now;
            }
            log_.push_back({std::string(host), std::string(url), now});
            return now;
        }
        auto wake = it->second + delay_;
        lock.unlock();
        std::this_thread::sleep_until(wake);
        lock.lock();
    }
}

std::vector<RequestLogEntry> HostScheduler::log() const {
    std::lock_guard lock(mutex_);
    return log_;
}

std::size_t HostScheduler::request_count() const {
    std::lock_guard lock(mutex_);
    return log_.size();
}

Fetcher::Fetcher(FetchPolicy policy, std::shared_ptr<HostScheduler> scheduler)
    : policy_(std::move(policy)), scheduler_(std::move(scheduler)) {
    policy_.validate();
    if (!scheduler_) scheduler_ = std::make_shared<HostScheduler>(policy_.per_host_delay);
    global_init();
}

FetchResult Fetcher::get(std::string_view url) const {
    FetchResult result;
    result.requested_url = std::string(url);
    result.final_url = result.requested_url;
    const auto started = Clock::now();
    auto finish = [&](FetchResult& r) -> FetchResult {
        r.elapsed = std::chrono::duration_cast<milliseconds>(Clock::now() - started);
        return std::move(r);
    };

    if (!url::is_http_url(url)) {
        result.failure = FetchFailure{FetchError::InvalidUrl, 0, "not an absolute http(s) URL"};
        return finish(result);
    }

    std::string current(url);
    while (true) {
        Attempt attempt;
        for (int i = 0; i <= policy_.retries; ++i) {
            scheduler_->acquire(url::host_of(current), current);
            ++result.attempts;
            attempt = perform(policy_, current);
            std::optional<FetchFailure> failure = attempt.failure;
            if (!failure && (attempt.status < 200 || attempt.status >= 400)) {
                failure = status_failure(attempt.status);
            }
            if (!failure || !failure->retryable()) break;
        }
        result.final_url = current;
        result.status_code = attempt.status;
        if (attempt.failure) {
            result.failure = attempt.failure;
            return finish(result);
        }
        if (attempt.status >= 300 && attempt.status < 400) {
            if (attempt.redirect_to.empty()) {
                result.failure = status_failure(attempt.status);
                return finish(result);
            }
            if (result.redirect_count >= policy_.max_redirects) {
                result.failure = FetchFailure{FetchError::TooManyRedirects, attempt.status,
                                              "more than " + std::to_string(policy_.max_redirects)};
                return finish(result);
            }
            ++result.redirect_count;
            auto next = url::try_resolve_url(current, attempt.redirect_to);
            if (!next) {
                result.failure = FetchFailure{FetchError::InvalidUrl, attempt.status,
                                              "redirect to " + attempt.redirect_to};
                return finish(result);
            }
            current = *next;
            continue;
        }
        if (attempt.status < 200 || attempt.status >= 300) {
            result.failure = status_failure(attempt.status);
            return finish(result);
        }
        split_content_type(attempt.content_type, result.media_type, result.charset);
        result.body = std::move(attempt.body);
        result.truncated = attempt.truncated;
        return finish(result);
    }
}

FetchResult Fetcher::page(std::string_view url) const {
    FetchResult r = get(url);
    if (r.ok()) r.body = decode_to_utf8(r.body, detect_charset(r.body, r.charset));
    return r;
}

FetchResult Fetcher::resource(std::string_view url) const { return get(url); }

FetchResult fetch_page(std::string_view url, const FetchPolicy& policy) {
    return Fetcher(policy).page(url);
}

FetchResult fetch_resource(std::string_view url, const FetchPolicy& policy) {
    return Fetcher(policy).resource(url);
}

std::string detect_charset(std::string_view body, std::string_view header_charset) {
    if (body.starts_with("\xEF\xBB\xBF")) return "utf-8";
    if (body.starts_with("\xFF\xFE")) return "utf-16le";
    if (body.starts_with("\xFE\xFF")) return "utf-16be";
    if (!header_charset.empty()) return to_lower(header_charset);
    std::string head = to_lower(body.substr(0, 2048));
    auto pos = head.find("charset");
    while (pos != std::string::npos) {
        std::size_t i = pos + 7;
        while (i < head.size() && std::isspace(static_cast<unsigned char>(head[i]))) ++i;
        if (i < head.size() && head[i] == '=') {
            ++i;
            while (i < head.size() && (std::isspace(static_cast<unsigned char>(head[i])) ||
                                       head[i] == '"' || head[i] == '\'')) {
                ++i;
            }
            std::size_t start = i;
            while (i < head.size() && (std::isalnum(static_cast<unsigned char>(head[i])) ||
                                       head[i] == '-' || head[i] == '_' || head[i] == ':' ||
                                       head[i] == '.')) {
                ++i;
            }
            if (i > start) return head.substr(start, i - start);
        }
        pos = head.find("charset", pos + 7);
    }
    return {};
}

std::string sanitize_utf8(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        auto c = static_cast<unsigned char>(in[i]);
        std::size_t len = 0;
        unsigned char lo = 0x80, hi = 0xBF;
        if (c < 0x80) len = 1;
        else if (c >= 0xC2 && c <= 0xDF) len = 2;
        else if (c >= 0xE0 && c <= 0xEF) {
            len = 3;
            if (c == 0xE0) lo = 0xA0;
            if (c == 0xED) hi = 0x9F;
        } else if (c >= 0xF0 && c <= 0xF4) {
            len = 4;
            if (c == 0xF0) lo = 0x90;
            if (c == 0xF4) hi = 0x8F;
        }
        bool valid = len > 0 && i + len <= in.size();
        for (std::size_t k = 1; valid && k < len; ++k) {
            auto cc = static_cast<unsigned char>(in[i + k]);
            unsigned char l = k == 1 ? lo : 0x80, h = k == 1 ? hi : 0xBF;
            if (cc < l || cc > h) valid = false;
        }
        if (valid) {
            out.append(in.substr(i, len));
            i += len;
        } else {
            out += kReplacement;
            ++i;
        }
    }
    return out;
}

std::string decode_to_utf8(std::string_view bytes, std::string_view charset) {
    std::string cs = to_lower(charset);
    if (cs == "utf-8" && bytes.starts_with("\xEF\xBB\xBF")) bytes.remove_prefix(3);
    if (is_utf8_name(cs)) return sanitize_utf8(bytes);

    iconv_t cd = iconv_open("UTF-8", cs.c_str());
    if (cd == reinterpret_cast<iconv_t>(-1)) return sanitize_utf8(bytes);

    std::string out;
    std::string input(bytes);
    char* in_ptr = input.data();
    std::size_t in_left = input.size();
    char buffer[4096];
    while (in_left > 0) {
        char* out_ptr = buffer;
        std::size_t out_left = sizeof(buffer);
        std::size_t rc = iconv(cd, &in_ptr, &in_left, &out_ptr, &out_left);
        out.append(buffer, static_cast<std::size_t>(out_ptr - buffer));
        if (rc == static_cast<std::size_t>(-1)) {
            if (errno == E2BIG) continue;
            // EILSEQ or EINVAL: replace one byte and resynchronize.
            out += kReplacement;
            ++in_ptr;
            --in_left;
            iconv(cd, nullptr, nullptr, nullptr, nullptr);
        }
    }
    iconv_close(cd);
    return sanitize_utf8(out);
}

}  // namespace phishcollect::fetch
