#pragma once

#include <cctype>
#include <cmath>
#include <filesystem>
#include <string>

#include "sarcnn/matrix.hpp"
#include "sarcnn/sard.hpp"

namespace sarcnn::pgm {

/// Binary portable graymap (P5), 8- or 16-bit; pixel values are returned as value / maxval.
inline Matrix<float> decode(const sard::Bytes& bytes, const std::string& what = "image") {
    std::size_t pos = 0;
    auto bad = [&](const std::string& why) -> void { fail(ErrorCode::format, what + ": " + why); };
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto number = [&]() -> std::size_t {
        skip_space();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) bad("malformed PGM header");
        std::size_t v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos++] - '0');
            if (v > 1u << 20) bad("PGM header value too large");
        }
        return v;
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') bad("not a binary PGM (P5) file");
    pos = 2;
    const std::size_t width = number();
    const std::size_t height = number();
    const std::size_t maxval = number();
    if (width == 0 || height == 0) bad("empty PGM image");
    if (maxval == 0 || maxval > 65535) bad("PGM maxval out of range");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) bad("malformed PGM header");
    ++pos;

    const std::size_t depth = maxval < 256 ? 1 : 2;
    if (bytes.size() - pos < width * height * depth) bad("truncated PGM pixel data");
    Matrix<float> m(height, width);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (float& v : m.values()) {
        std::size_t raw = bytes[pos++];
        if (depth == 2) raw = (raw << 8) | bytes[pos++];
        if (raw > maxval) bad("PGM pixel exceeds maxval");
        v = static_cast<float>(static_cast<double>(raw) * scale);
    }
    return m;
}

inline Matrix<float> read(const std::filesystem::path& path) { return decode(sard::read_file(path), path.string()); }

/// Writes values clamped to [0, 1] as round(v * maxval).
inline sard::Bytes encode(const Matrix<float>& image, std::size_t maxval = 65535) {
    require(maxval >= 1 && maxval <= 65535, "pgm: maxval out of range");
    const std::string header =
        "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n" + std::to_string(maxval) + "\n";
    sard::Bytes out(header.begin(), header.end());
    for (float v : image.values()) {
        const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
        const auto q = static_cast<std::size_t>(std::llround(clamped * static_cast<double>(maxval)));
        if (maxval >= 256) out.push_back(static_cast<std::uint8_t>(q >> 8));
        out.push_back(static_cast<std::uint8_t>(q & 0xff));
    }
    return out;
}

inline void write(const std::filesystem::path& path, const Matrix<float>& image, std::size_t maxval = 65535) {
    sard::write_file(path, encode(image, maxval));
}

}  // namespace sarcnn::pgm
