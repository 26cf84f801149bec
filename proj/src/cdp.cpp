// Remote-debugging protocol client used by DevToolsProvider: a tiny HTTP/1.1
// request for target management and an RFC 6455 WebSocket client for the
// command channel.

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <random>
#include <thread>

#include <json.hpp>

#include "phishcollect/snapshot.hpp"
#include "phishcollect/url.hpp"

namespace phishcollect::snapshot {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct ProtocolError {
    CaptureError kind;
    std::string detail;
};

class Socket {
public:
    Socket(const std::string& host, int port, milliseconds timeout) : timeout_(timeout) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        std::string service = std::to_string(port);
        if (getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0) {
            throw ProtocolError{CaptureError::ProviderUnavailable, "cannot resolve " + host};
        }
        for (addrinfo* ai = res; ai; ai = ai->ai_next) {
            fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd_ < 0) continue;
            if (::connect(fd_, ai->ai_addr, ai->ai_addrlen) == 0) break;
            ::close(fd_);
            fd_ = -1;
        }
        freeaddrinfo(res);
        if (fd_ < 0) {
            throw ProtocolError{CaptureError::ProviderUnavailable,
                                "no browser listening on " + host + ":" + service};
        }
    }
    ~Socket() {
        if (fd_ >= 0) ::close(fd_);
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;

    void send_all(std::string_view data) {
        while (!data.empty()) {
            ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
            if (n <= 0) throw ProtocolError{CaptureError::ProviderUnavailable, "browser connection lost"};
            data.remove_prefix(static_cast<std::size_t>(n));
        }
    }

    /// Reads at least one byte unless the peer closed (returns false).
    bool read_some(std::string& buffer, Clock::time_point deadline) {
        auto remaining = std::chrono::duration_cast<milliseconds>(deadline - Clock::now()).count();
        if (remaining <= 0) throw ProtocolError{CaptureError::RenderTimeout, "browser did not answer in time"};
        pollfd p{fd_, POLLIN, 0};
        int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(remaining, timeout_.count())));
        if (rc == 0) throw ProtocolError{CaptureError::RenderTimeout, "browser did not answer in time"};
        if (rc < 0) throw ProtocolError{CaptureError::ProviderUnavailable, "poll failed"};
        char chunk[16384];
        ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n < 0) throw ProtocolError{CaptureError::ProviderUnavailable, "browser connection lost"};
        if (n == 0) return false;
        buffer.append(chunk, static_cast<std::size_t>(n));
        return true;
    }

private:
    int fd_ = -1;
    milliseconds timeout_;
};

std::string base64_encode(std::string_view raw) {
    std::string out(4 * ((raw.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(raw.data()), static_cast<int>(raw.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::optional<std::string> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) return std::nullopt;
    std::string out(3 * text.size() / 4, '\0');
    int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) return std::nullopt;
    std::size_t padding = 0;
    if (!text.empty() && text.back() == '=') ++padding;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
    out.resize(static_cast<std::size_t>(n) - padding);
    return out;
}

std::string sha1(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha1(), nullptr);
    return std::string(reinterpret_cast<char*>(digest), len);
}

std::string percent_encode(std::string_view s) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 0xF];
        }
    }
    return out;
}

struct HttpReply {
    int status = 0;
    std::string body;
};

HttpReply http_request(const std::string& host, int port, const std::string& method, const std::string& target,
                       milliseconds timeout) {
    Socket sock(host, port, timeout);
    sock.send_all(method + " " + target + " HTTP/1.1\r\nHost: " + host + ":" + std::to_string(port) +
                  "\r\nConnection: close\r\nContent-Length: 0\r\n\r\n");
    std::string raw;
    auto deadline = Clock::now() + timeout;
    std::size_t header_end = std::string::npos;
    std::optional<std::size_t> content_length;
    while (true) {
        if (header_end == std::string::npos) {
            header_end = raw.find("\r\n\r\n");
            if (header_end != std::string::npos) {
                std::string headers = raw.substr(0, header_end);
                for (auto& c : headers) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                auto pos = headers.find("content-length:");
                if (pos != std::string::npos) content_length = std::stoul(headers.substr(pos + 15));
            }
        }
        if (header_end != std::string::npos && content_length && raw.size() >= header_end + 4 + *content_length) break;
        if (!sock.read_some(raw, deadline)) break;
    }
    HttpReply reply;
    if (raw.size() < 12 || !raw.starts_with("HTTP/1.")) {
        throw ProtocolError{CaptureError::ProviderUnavailable, "malformed reply from browser"};
    }
    reply.status = std::stoi(raw.substr(9, 3));
    if (header_end != std::string::npos) reply.body = raw.substr(header_end + 4);
    if (content_length && reply.body.size() > *content_length) reply.body.resize(*content_length);
    return reply;
}

class WebSocket {
public:
    WebSocket(const std::string& host, int port, const std::string& path, milliseconds timeout)
        : sock_(host, port, timeout), timeout_(timeout) {
        std::random_device rd;
        std::string nonce(16, '\0');
        for (auto& c : nonce) c = static_cast<char>(rd() & 0xFF);
        std::string key = base64_encode(nonce);
        sock_.send_all("GET " + path + " HTTP/1.1\r\nHost: " + host + ":" + std::to_string(port) +
                       "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Key: " + key +
                       "\r\nSec-WebSocket-Version: 13\r\n\r\n");
        auto deadline = Clock::now() + timeout;
        std::size_t end;
        while ((end = buffer_.find("\r\n\r\n")) == std::string::npos) {
            if (!sock_.read_some(buffer_, deadline)) {
                throw ProtocolError{CaptureError::ProviderUnavailable, "handshake closed"};
            }
        }
        std::string headers = buffer_.substr(0, end);
        buffer_.erase(0, end + 4);
        std::string expected = base64_encode(sha1(key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"));
        if (headers.find(" 101") == std::string::npos || headers.find(expected) == std::string::npos) {
            throw ProtocolError{CaptureError::ProviderUnavailable, "websocket upgrade refused"};
        }
    }

    void send_text(std::string_view payload) { send_frame(0x1, payload); }

    /// Next complete text message; answers pings, fails on close.
    std::string receive(Clock::time_point deadline) {
        std::string message;
        while (true) {
            auto [opcode, fin, payload] = read_frame(deadline);
            if (opcode == 0x9) {
                send_frame(0xA, payload);
                continue;
            }
            if (opcode == 0xA) continue;
            if (opcode == 0x8) throw ProtocolError{CaptureError::ProviderUnavailable, "browser closed the session"};
            message += payload;
            if (fin) return message;
        }
    }

private:
    struct Frame {
        int opcode;
        bool fin;
        std::string payload;
    };

    void send_frame(int opcode, std::string_view payload) {
        std::string frame;
        frame += static_cast<char>(0x80 | opcode);
        std::size_t n = payload.size();
        if (n < 126) {
            frame += static_cast<char>(0x80 | n);
        } else if (n <= 0xFFFF) {
            frame += static_cast<char>(0x80 | 126);
            frame += static_cast<char>((n >> 8) & 0xFF);
            frame += static_cast<char>(n & 0xFF);
        } else {
            frame += static_cast<char>(0x80 | 127);
            for (int shift = 56; shift >= 0; shift -= 8) frame += static_cast<char>((n >> shift) & 0xFF);
        }
        std::array<unsigned char, 4> mask{};
        for (auto& m : mask) m = static_cast<unsigned char>(rng_() & 0xFF);
        frame.append(reinterpret_cast<const char*>(mask.data()), mask.size());
        for (std::size_t i = 0; i < n; ++i) frame += static_cast<char>(payload[i] ^ mask[i % 4]);
        sock_.send_all(frame);
    }

    void need(std::size_t bytes, Clock::time_point deadline) {
        while (buffer_.size() < bytes) {
            if (!sock_.read_some(buffer_, deadline)) {
                throw ProtocolError{CaptureError::ProviderUnavailable, "browser connection lost"};
            }
        }
    }

    Frame read_frame(Clock::time_point deadline) {
        need(2, deadline);
        auto b0 = static_cast<unsigned char>(buffer_[0]);
        auto b1 = static_cast<unsigned char>(buffer_[1]);
        std::size_t header = 2;
        std::uint64_t len = b1 & 0x7F;
        if (len == 126) {
            need(4, deadline);
            len = (static_cast<std::uint64_t>(static_cast<unsigned char>(buffer_[2])) << 8) |
                  static_cast<unsigned char>(buffer_[3]);
            header = 4;
        } else if (len == 127) {
            need(10, deadline);
            len = 0;
            for (int i = 2; i < 10; ++i) len = (len << 8) | static_cast<unsigned char>(buffer_[i]);
            header = 10;
        }
        bool masked = b1 & 0x80;
        std::array<unsigned char, 4> mask{};
        if (masked) {
            need(header + 4, deadline);
            for (int i = 0; i < 4; ++i) mask[i] = static_cast<unsigned char>(buffer_[header + i]);
            header += 4;
        }
        need(header + len, deadline);
        std::string payload = buffer_.substr(header, len);
        if (masked) {
            for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ mask[i % 4]);
        }
        buffer_.erase(0, header + len);
        return Frame{b0 & 0x0F, (b0 & 0x80) != 0, std::move(payload)};
    }

    Socket sock_;
    milliseconds timeout_;
    std::string buffer_;
    std::mt19937 rng_{std::random_device{}()};
};

class Session {
public:
    Session(WebSocket& ws, Clock::time_point deadline) : ws_(ws), deadline_(deadline) {}

    json call(const std::string& method, json params = json::object()) {
        int id = ++next_id_;
        ws_.send_text(json{{"id", id}, {"method", method}, {"params", std::move(params)}}.dump());
        while (true) {
            json msg = json::parse(ws_.receive(deadline_), nullptr, false);
            if (msg.is_discarded()) continue;
            if (msg.contains("method")) {
                events_.push_back(std::move(msg));
                continue;
            }
            if (msg.value("id", -1) != id) continue;
            if (msg.contains("error")) {
                throw ProtocolError{CaptureError::ProviderUnavailable,
                                    method + ": " + msg["error"].value("message", "error")};
            }
            return msg.value("result", json::object());
        }
    }

    void wait_for(const std::string& event) {
        for (auto it = events_.begin(); it != events_.end(); ++it) {
            if (it->value("method", "") == event) {
                events_.erase(it);
                return;
            }
        }
        while (true) {
            json msg = json::parse(ws_.receive(deadline_), nullptr, false);
            if (!msg.is_discarded() && msg.value("method", "") == event) return;
        }
    }

private:
    WebSocket& ws_;
    Clock::time_point deadline_;
    int next_id_ = 0;
    std::vector<json> events_;
};

bool looks_blocked(const std::string& error_text) {
    return error_text.find("SAFE_BROWSING") != std::string::npos ||
           error_text.find("BLOCKED_BY") != std::string::npos;
}

}  // namespace

DevToolsProvider::DevToolsProvider(std::string host, int port, milliseconds load_timeout)
    : host_(std::move(host)), port_(port), load_timeout_(load_timeout) {}

CaptureResult DevToolsProvider::capture(const CaptureTarget& target, const ViewportSpec& spec) {
    std::string target_id;
    try {
        HttpReply created = http_request(host_, port_, "PUT", "/json/new?" + percent_encode("about:blank"),
                                         load_timeout_);
        if (created.status != 200) {
            return CaptureResult::failure(CaptureError::ProviderUnavailable,
                                          "target creation answered HTTP " + std::to_string(created.status));
        }
        json info = json::parse(created.body, nullptr, false);
        if (info.is_discarded() || !info.contains("webSocketDebuggerUrl")) {
            return CaptureResult::failure(CaptureError::ProviderUnavailable, "no debugger URL for new target");
        }
        target_id = info.value("id", "");
        url::Uri ws_url = url::parse(info["webSocketDebuggerUrl"].get<std::string>());
        std::string path = ws_url.path.empty() ? "/" : ws_url.path;

        auto deadline = Clock::now() + load_timeout_ + spec.settle_delay;
        WebSocket ws(host_, port_, path, load_timeout_);
        Session session(ws, deadline);
        session.call("Page.enable");
        session.call("Emulation.setDeviceMetricsOverride",
                     {{"width", spec.width}, {"height", spec.height}, {"deviceScaleFactor", 1}, {"mobile", false}});
        json nav = session.call("Page.navigate", {{"url", target.navigation_url()}});
        std::string error_text = nav.value("errorText", "");
        if (looks_blocked(error_text)) {
            throw ProtocolError{CaptureError::SafeBrowsingBlocked, error_text};
        }
        if (!error_text.empty()) throw ProtocolError{CaptureError::RenderTimeout, "navigation failed: " + error_text};
        session.wait_for("Page.loadEventFired");
        std::this_thread::sleep_for(spec.settle_delay);
        json shot = session.call("Page.captureScreenshot",
                                 {{"format", "png"}, {"fromSurface", true}, {"captureBeyondViewport", false}});
        auto png_bytes = base64_decode(shot.value("data", ""));
        if (!png_bytes) throw ProtocolError{CaptureError::InvalidOutput, "screenshot payload is not base64"};
        if (!target_id.empty()) http_request(host_, port_, "GET", "/json/close/" + target_id, load_timeout_);
        return CaptureResult{std::move(*png_bytes), std::nullopt, {}};
    } catch (const ProtocolError& e) {
        if (!target_id.empty()) {
            try {
                http_request(host_, port_, "GET", "/json/close/" + target_id, load_timeout_);
            } catch (const ProtocolError&) {
            }
        }
        return CaptureResult::failure(e.kind, e.detail);
    } catch (const std::exception& e) {
        return CaptureResult::failure(CaptureError::ProviderUnavailable, std::string("protocol error: ") + e.what());
    }
}

}  // namespace phishcollect::snapshot
