#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phishcollect/ingest.hpp"

namespace phishcollect::store {

namespace fs = std::filesystem;

enum class ResourceKind { Html, Css, Javascript, Favicon, Image, Screenshot };

inline constexpr std::array kAllKinds = {ResourceKind::Html,    ResourceKind::Css,
                                         ResourceKind::Javascript, ResourceKind::Favicon,
                                         ResourceKind::Image,   ResourceKind::Screenshot};

std::string_view to_string(ResourceKind kind);
std::optional<ResourceKind> parse_kind(std::string_view name);
/// CSS, Favicon, HTML, Images, Javascript, Screenshots
std::string_view subdirectory(ResourceKind kind);

enum class ResourceState { Ok, FetchFailed, Skipped };

struct ResourceStatus {
    ResourceState state = ResourceState::Ok;
    std::string reason;  // empty when ok

    static ResourceStatus ok() { return {}; }
    static ResourceStatus fetch_failed(std::string reason) {
        return {ResourceState::FetchFailed, std::move(reason)};
    }
    static ResourceStatus skipped(std::string reason) {
        return {ResourceState::Skipped, std::move(reason)};
    }
    bool is_ok() const { return state == ResourceState::Ok; }

    friend bool operator==(const ResourceStatus&, const ResourceStatus&) = default;
};

inline constexpr std::string_view kInlineOrigin = "inline";

/// One archived (or attempted) file. Only ok entries have a file on disk;
/// their local_path is "<Subdirectory>/<name>" and byte_count > 0. Failed and
/// skipped entries have an empty local_path and byte_count 0.
struct ResourceRef {
    ResourceKind kind = ResourceKind::Html;
    std::string origin_url;
    std::string local_path;
    std::uint64_t byte_count = 0;
    ResourceStatus status;
    bool fallback = false;  // favicon guessed at /favicon.ico

    friend bool operator==(const ResourceRef&, const ResourceRef&) = default;
};

ResourceRef failed_ref(ResourceKind kind, std::string origin_url, std::string reason);
ResourceRef skipped_ref(ResourceKind kind, std::string origin_url, std::string reason);

struct ManifestError {
    std::string kind;  // FetchError name, e.g. "FileNotFound"
    std::string detail;

    friend bool operator==(const ManifestError&, const ManifestError&) = default;
};

struct SampleManifest {
    UrlRecord record;
    std::string final_url;
    std::string fetched_at;  // ISO-8601 UTC, e.g. 2023-06-01T12:00:00Z
    std::vector<ResourceRef> resources;
    std::optional<ManifestError> error;
    int redirect_count = 0;

    friend bool operator==(const SampleManifest&, const SampleManifest&) = default;
};

inline constexpr std::string_view kManifestFile = "manifest.json";

class SampleDir {
public:
    SampleDir(fs::path path, std::string sample_id)
        : path_(std::move(path)), sample_id_(std::move(sample_id)) {}

    const fs::path& path() const { return path_; }
    const std::string& sample_id() const { return sample_id_; }
    fs::path subdirectory(ResourceKind kind) const { return path_ / std::string(store::subdirectory(kind)); }

private:
    fs::path path_;
    std::string sample_id_;
};

/// Creates <root>/<sample_id>/ with its six resource subdirectories.
/// Idempotent while the sample holds no files. Throws Error{SampleExists}
/// when it does, Error{IoFailure} when the tree cannot be created.
SampleDir init_sample_dir(const fs::path& root, std::string_view sample_id);

/// Removes everything under <root>/<sample_id>/ and recreates it empty.
SampleDir reset_sample_dir(const fs::path& root, std::string_view sample_id);

/// Writes bytes under the kind's subdirectory with a sanitized, collision-
/// free name and the kind's extension. Empty input writes nothing and
/// returns a skipped entry. Throws Error{IoFailure}.
ResourceRef write_resource(const SampleDir& dir, ResourceKind kind, std::string_view suggested_name,
                           std::string_view bytes);

/// Last non-empty path segment of a URL, percent-decoded; empty if none.
std::string name_from_url(std::string_view url);

/// Filesystem-safe stem + forced extension, before collision handling.
std::string file_name_for(ResourceKind kind, std::string_view suggested_name, std::string_view bytes);

std::string serialize_manifest(const SampleManifest& manifest);
/// Throws Error{CorruptManifest}.
SampleManifest parse_manifest(std::string_view json_text);

fs::path write_manifest(const SampleDir& dir, const SampleManifest& manifest);
/// Accepts the sample directory or the manifest file itself.
SampleManifest read_manifest(const fs::path& sample_dir);

std::string utc_timestamp(std::chrono::system_clock::time_point at);

struct KindCounts {
    std::uint64_t samples_with = 0;
    std::uint64_t total_files = 0;

    friend bool operator==(const KindCounts&, const KindCounts&) = default;
};

/// Per class label × resource kind: how many samples hold at least one ok
/// file of that kind, and how many such files exist.
struct ResourceStats {
    std::array<std::array<KindCounts, kAllKinds.size()>, 2> counts{};
    std::array<std::uint64_t, 2> samples{};  // indexed like counts
    std::uint64_t unreadable = 0;

    const KindCounts& at(ClassLabel label, ResourceKind kind) const;
    KindCounts& at(ClassLabel label, ResourceKind kind);
    KindCounts corpus(ResourceKind kind) const;

    friend bool operator==(const ResourceStats&, const ResourceStats&) = default;
};

/// Read-only scan of every <root>/<id>/manifest.json. Directories whose
/// manifest is missing or unparsable are only counted in `unreadable`.
ResourceStats collect_stats(const fs::path& root);

/// class,kind,samples_with,total_files
std::string stats_csv(const ResourceStats& stats);
std::string stats_table(const ResourceStats& stats);

}  // namespace phishcollect::store
