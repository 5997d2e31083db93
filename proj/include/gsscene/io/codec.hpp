#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "gsscene/image.hpp"

namespace gsscene::io {

using Bytes = std::vector<std::uint8_t>;

inline std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// Interleaved RGB8 bytes of an image.
inline Bytes quantize_rgb(const ColorImage& img) {
    Bytes out(img.size() * 3);
    for (std::size_t i = 0; i < img.size(); ++i) {
        for (int c = 0; c < 3; ++c) out[3 * i + c] = to_byte(img[i][c]);
    }
    return out;
}

inline ColorImage dequantize_rgb(const Bytes& rgb, int width, int height) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) throw FormatError("rgb buffer size mismatch");
    ColorImage img(width, height);
    for (std::size_t i = 0; i < img.size(); ++i) {
        img[i] = Vec3(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]) / 255.0;
    }
    return img;
}

namespace detail {

struct DecodedPng {
    int width = 0;
    int height = 0;
    Bytes pixels;
};

inline Bytes encode_png(const Bytes& pixels, int width, int height, std::uint32_t format) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
        throw FormatError(std::string("png encode failed: ") + image.message);
    }
    Bytes out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
        throw FormatError(std::string("png encode failed: ") + image.message);
    }
    out.resize(size);
    return out;
}

inline DecodedPng decode_png(const std::uint8_t* data, std::size_t size, std::uint32_t format) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, data, size)) {
        throw FormatError(std::string("png decode failed: ") + image.message);
    }
    image.format = format;
    DecodedPng out;
    out.width = static_cast<int>(image.width);
    out.height = static_cast<int>(image.height);
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw FormatError(std::string("png decode failed: ") + image.message);
    }
    return out;
}

}  // namespace detail

inline Bytes encode_png_rgb(const ColorImage& img) {
    return detail::encode_png(quantize_rgb(img), img.width(), img.height(), PNG_FORMAT_RGB);
}

// GRAY8 mask: 255 = known, 0 = unknown.
inline Bytes encode_png_mask(const PixelMask& mask) {
    Bytes gray(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) gray[i] = mask[i] ? 255 : 0;
    return detail::encode_png(gray, mask.width(), mask.height(), PNG_FORMAT_GRAY);
}

// Returns the raw RGB8 bytes and dimensions.
inline detail::DecodedPng decode_png_rgb8(const Bytes& png) {
    return detail::decode_png(png.data(), png.size(), PNG_FORMAT_RGB);
}

inline ColorImage decode_png_rgb(const Bytes& png) {
    const auto d = decode_png_rgb8(png);
    return dequantize_rgb(d.pixels, d.width, d.height);
}

// Rejects gray levels other than 0 and 255.
inline PixelMask decode_png_mask(const Bytes& png) {
    const auto d = detail::decode_png(png.data(), png.size(), PNG_FORMAT_GRAY);
    PixelMask mask(d.width, d.height);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (d.pixels[i] != 0 && d.pixels[i] != 255) throw FormatError("mask png has intermediate gray levels");
        mask[i] = d.pixels[i] == 255 ? 1 : 0;
    }
    return mask;
}

inline constexpr std::string_view kBase64Alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const Bytes& in) {
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < in.size(); i += 3) {
        const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
        for (int s = 18; s >= 0; s -= 6) out.push_back(kBase64Alphabet[(v >> s) & 63]);
    }
    if (i < in.size()) {
        std::uint32_t v = in[i] << 16;
        if (i + 1 < in.size()) v |= in[i + 1] << 8;
        out.push_back(kBase64Alphabet[(v >> 18) & 63]);
        out.push_back(kBase64Alphabet[(v >> 12) & 63]);
        out.push_back(i + 1 < in.size() ? kBase64Alphabet[(v >> 6) & 63] : '=');
        out.push_back('=');
    }
    return out;
}

inline Bytes base64_decode(std::string_view in) {
    std::array<int, 256> table{};
    table.fill(-1);
    for (std::size_t i = 0; i < kBase64Alphabet.size(); ++i) table[static_cast<unsigned char>(kBase64Alphabet[i])] = static_cast<int>(i);
    if (in.size() % 4 != 0) throw FormatError("base64: length is not a multiple of 4");
    Bytes out;
    out.reserve(in.size() / 4 * 3);
    for (std::size_t i = 0; i < in.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = in[i + k];
            if (c == '=') {
                if (i + 4 != in.size() || k < 2) throw FormatError("base64: misplaced padding");
                vals[k] = 0;
                ++pad;
            } else {
                if (pad) throw FormatError("base64: data after padding");
                vals[k] = table[static_cast<unsigned char>(c)];
                if (vals[k] < 0) throw FormatError("base64: invalid character");
            }
        }
        const std::uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

// Little-endian float32 raster, row-major.
inline Bytes encode_f32(const DepthMap& depth) {
    Bytes out(depth.size() * 4);
    for (std::size_t i = 0; i < depth.size(); ++i) {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(depth[i]));
        for (int b = 0; b < 4; ++b) out[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    return out;
}

inline DepthMap decode_f32(const Bytes& raw, int width, int height) {
    if (width < 0 || height < 0 || raw.size() != static_cast<std::size_t>(width) * height * 4) {
        throw FormatError("float raster size does not match its dimensions");
    }
    DepthMap depth(width, height);
    for (std::size_t i = 0; i < depth.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(raw[4 * i + b]) << (8 * b);
        depth[i] = std::bit_cast<float>(bits);
    }
    return depth;
}

inline Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Throws FormatError on any write problem.
inline void write_file(const std::string& path, const Bytes& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw FormatError("short write to " + path);
}

inline void write_text(const std::string& path, const std::string& text) {
    write_file(path, Bytes(text.begin(), text.end()));
}

}  // namespace gsscene::io
