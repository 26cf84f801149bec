#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "phishcollect/png.hpp"

namespace phishcollect::snapshot {

using std::chrono::milliseconds;

struct ViewportSpec {
    int width = 1366;
    int height = 768;
    milliseconds settle_delay{2000};

    /// Throws Error{InvalidArgument} unless width and height are positive.
    void validate() const;
};

enum class CaptureError {
    ProviderUnavailable,
    SafeBrowsingBlocked,
    RenderTimeout,
    InvalidOutput,  // provider answered with something that is not a PNG of the viewport size
};

std::string_view to_string(CaptureError error);

/// What to render: the archived HTML file (default) or the live URL.
struct CaptureTarget {
    enum class Kind { LocalFile, LiveUrl };
    Kind kind = Kind::LocalFile;
    std::string location;  // absolute file path or http(s) URL

    static CaptureTarget local_file(const std::filesystem::path& path);
    static CaptureTarget live_url(std::string url);

    /// file:// URL for local files, the URL itself otherwise.
    std::string navigation_url() const;
};

struct CaptureResult {
    std::string png;
    std::optional<CaptureError> error;
    std::string detail;

    bool ok() const { return !error.has_value(); }
    static CaptureResult failure(CaptureError e, std::string detail) { return {{}, e, std::move(detail)}; }
};

class ScreenshotProvider {
public:
    virtual ~ScreenshotProvider() = default;
    virtual CaptureResult capture(const CaptureTarget& target, const ViewportSpec& spec) = 0;
};

/// Deterministic stand-in for a browser. Paints the whole viewport with the
/// page body's background colour (inline style or a `body` rule in a
/// <style> block; white otherwise), or returns fixed bytes when configured.
class StubProvider final : public ScreenshotProvider {
public:
    StubProvider() = default;

    void set_fixed_output(std::string bytes) { fixed_ = std::move(bytes); }
    /// Targets (file path or URL) the stub refuses, as a browser would for a
    /// page flagged dangerous.
    void block(std::string location) { blocked_.insert(std::move(location)); }
    void set_available(bool available) { available_ = available; }

    CaptureResult capture(const CaptureTarget& target, const ViewportSpec& spec) override;

private:
    std::optional<std::string> fixed_;
    std::set<std::string> blocked_;
    bool available_ = true;
};

/// Background colour a browser would paint for the body, from the colours
/// this stub understands (named basics, #rgb, #rrggbb, rgb()).
std::optional<png::Rgb> body_background(std::string_view html);
std::optional<png::Rgb> parse_css_color(std::string_view value);

/// Drives a Chromium-family browser over its remote-debugging protocol
/// (HTTP target management + WebSocket commands). One capture at a time per
/// instance.
class DevToolsProvider final : public ScreenshotProvider {
public:
    DevToolsProvider(std::string host, int port, milliseconds load_timeout = milliseconds{30'000});

    CaptureResult capture(const CaptureTarget& target, const ViewportSpec& spec) override;

private:
    std::string host_;
    int port_;
    milliseconds load_timeout_;
};

/// Runs the provider and checks that a successful result is a PNG of exactly
/// spec.width x spec.height; anything else becomes InvalidOutput.
CaptureResult capture_viewport(const CaptureTarget& target, const ViewportSpec& spec,
                               ScreenshotProvider& provider);

}  // namespace phishcollect::snapshot
