#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phishcollect::png {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Image {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

    Rgb pixel(std::uint32_t x, std::uint32_t y) const;
};

Image solid(std::uint32_t width, std::uint32_t height, Rgb color);

/// Throws Error{InvalidArgument} if libpng rejects the image.
std::string encode(const Image& image);

/// Full decode to RGB; nullopt when the bytes are not a readable PNG.
std::optional<Image> decode(std::string_view bytes);

struct Dimensions {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

/// Reads the signature and IHDR chunk only.
std::optional<Dimensions> dimensions(std::string_view bytes);

}  // namespace phishcollect::png
