#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "gsscene/geometry/point_cloud.hpp"
#include "gsscene/io/codec.hpp"
#include "gsscene/splat/gaussian.hpp"

namespace gsscene::io {

// Zeroth-order spherical-harmonic basis constant; f_dc = (color - 0.5) / kShC0 as splat viewers expect.
inline constexpr double kShC0 = 0.28209479177387814;

inline constexpr std::array<const char*, 15> kSplatProperties = {
    "x",       "y",       "z",       "f_dc_0",  "f_dc_1", "f_dc_2", "opacity", "scale_0",   "scale_1",
    "scale_2", "rot_0",   "rot_1",   "rot_2",   "rot_3",  "split_iter"};

inline constexpr std::size_t kSplatRecordFloats = kSplatProperties.size();

namespace detail {

inline void put_f32(Bytes& out, double v) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

inline float get_f32(const std::uint8_t* p) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    return std::bit_cast<float>(bits);
}

struct PlyHeader {
    std::size_t vertex_count = 0;
    std::vector<std::string> properties;  // names, all float
    std::size_t body_offset = 0;
};

inline PlyHeader parse_header(const Bytes& data) {
    static constexpr std::string_view kEnd = "end_header\n";
    const std::string_view text(reinterpret_cast<const char*>(data.data()), data.size());
    const auto end = text.find(kEnd);
    if (end == std::string_view::npos) throw FormatError("ply: missing end_header");
    std::istringstream lines(std::string(text.substr(0, end)));
    std::string line;
    PlyHeader h;
    h.body_offset = end + kEnd.size();
    if (!std::getline(lines, line) || line != "ply") throw FormatError("ply: missing magic");
    bool format_ok = false;
    bool in_vertex = false;
    bool saw_vertex = false;
    while (std::getline(lines, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key.empty() || key == "comment" || key == "obj_info") continue;
        if (key == "format") {
            std::string kind, version;
            ls >> kind >> version;
            if (kind != "binary_little_endian") throw FormatError("ply: only binary_little_endian is supported, got " + kind);
            format_ok = true;
        } else if (key == "element") {
            std::string name;
            long long count = -1;
            ls >> name >> count;
            if (name != "vertex" || saw_vertex || count < 0) throw FormatError("ply: expected a single vertex element");
            h.vertex_count = static_cast<std::size_t>(count);
            in_vertex = saw_vertex = true;
        } else if (key == "property") {
            std::string type, name;
            ls >> type >> name;
            if (!in_vertex) throw FormatError("ply: property outside the vertex element");
            if (type != "float" && type != "float32") throw FormatError("ply: property " + name + " is not float");
            h.properties.push_back(name);
        } else {
            throw FormatError("ply: unexpected header line '" + line + "'");
        }
    }
    if (!format_ok) throw FormatError("ply: missing format line");
    if (!saw_vertex) throw FormatError("ply: missing vertex element");
    return h;
}

}  // namespace detail

inline Bytes encode_splat_ply(const splat::GaussianCloud& cloud) {
    cloud.validate();
    std::ostringstream header;
    header << "ply\nformat binary_little_endian 1.0\nelement vertex " << cloud.size() << "\n";
    for (const char* name : kSplatProperties) header << "property float " << name << "\n";
    header << "end_header\n";
    const std::string h = header.str();
    Bytes out(h.begin(), h.end());
    out.reserve(out.size() + cloud.size() * kSplatRecordFloats * 4);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& g = cloud.primitives[i];
        for (int c = 0; c < 3; ++c) detail::put_f32(out, g.center[c]);
        for (int c = 0; c < 3; ++c) detail::put_f32(out, (g.color[c] - 0.5) / kShC0);
        detail::put_f32(out, g.opacity_logit);
        for (int c = 0; c < 3; ++c) detail::put_f32(out, g.log_scale[c]);
        for (int c = 0; c < 4; ++c) detail::put_f32(out, g.rotation[c]);
        detail::put_f32(out, cloud.split_iteration[i]);
    }
    return out;
}

// Accepts exactly the splat layout, or the same layout without split_iter (filled with 0).
inline splat::GaussianCloud decode_splat_ply(const Bytes& data) {
    const auto h = detail::parse_header(data);
    const bool full = h.properties.size() == kSplatRecordFloats;
    const bool compat = h.properties.size() == kSplatRecordFloats - 1;
    if (!full && !compat) throw FormatError("ply: unexpected property count " + std::to_string(h.properties.size()));
    for (std::size_t k = 0; k < h.properties.size(); ++k) {
        if (h.properties[k] != kSplatProperties[k]) {
            throw FormatError("ply: property " + std::to_string(k) + " is '" + h.properties[k] + "', expected '" +
                              kSplatProperties[k] + "'");
        }
    }
    const std::size_t stride = h.properties.size() * 4;
    if (data.size() != h.body_offset + h.vertex_count * stride) throw FormatError("ply: body size does not match header");
    splat::GaussianCloud cloud;
    cloud.primitives.reserve(h.vertex_count);
    cloud.split_iteration.reserve(h.vertex_count);
    for (std::size_t i = 0; i < h.vertex_count; ++i) {
        const std::uint8_t* p = data.data() + h.body_offset + i * stride;
        auto f = [&](std::size_t k) { return static_cast<double>(detail::get_f32(p + 4 * k)); };
        splat::GaussianPrimitive g;
        g.center = Vec3(f(0), f(1), f(2));
        g.color = Vec3(0.5 + kShC0 * f(3), 0.5 + kShC0 * f(4), 0.5 + kShC0 * f(5));
        g.opacity_logit = f(6);
        g.log_scale = Vec3(f(7), f(8), f(9));
        g.rotation = Vec4(f(10), f(11), f(12), f(13));
        const double split = full ? f(14) : 0.0;
        if (!(split >= 0.0) || split != std::floor(split)) throw FormatError("ply: split_iter is not a non-negative integer");
        cloud.push_back(g, static_cast<int>(split));
    }
    cloud.validate();
    return cloud;
}

inline void export_ply(const splat::GaussianCloud& cloud, const std::string& path) {
    write_file(path, encode_splat_ply(cloud));
}

inline splat::GaussianCloud import_ply(const std::string& path) { return decode_splat_ply(read_file(path)); }

// Plain colored point cloud: x y z float, red green blue float in [0,1], source_view float.
inline Bytes encode_point_ply(const geometry::PointCloud& cloud) {
    cloud.validate();
    std::ostringstream header;
    header << "ply\nformat binary_little_endian 1.0\nelement vertex " << cloud.size() << "\n"
           << "property float x\nproperty float y\nproperty float z\n"
           << "property float red\nproperty float green\nproperty float blue\n"
           << "property float source_view\nend_header\n";
    const std::string h = header.str();
    Bytes out(h.begin(), h.end());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (int c = 0; c < 3; ++c) detail::put_f32(out, cloud.positions[i][c]);
        for (int c = 0; c < 3; ++c) detail::put_f32(out, cloud.colors[i][c]);
        detail::put_f32(out, cloud.source_view[i]);
    }
    return out;
}

inline geometry::PointCloud decode_point_ply(const Bytes& data) {
    const auto h = detail::parse_header(data);
    static const std::vector<std::string> kExpected = {"x", "y", "z", "red", "green", "blue", "source_view"};
    if (h.properties != kExpected) throw FormatError("ply: not a point-cloud layout");
    const std::size_t stride = kExpected.size() * 4;
    if (data.size() != h.body_offset + h.vertex_count * stride) throw FormatError("ply: body size does not match header");
    geometry::PointCloud cloud;
    cloud.reserve(h.vertex_count);
    for (std::size_t i = 0; i < h.vertex_count; ++i) {
        const std::uint8_t* p = data.data() + h.body_offset + i * stride;
        auto f = [&](std::size_t k) { return static_cast<double>(detail::get_f32(p + 4 * k)); };
        cloud.push_back(Vec3(f(0), f(1), f(2)), Vec3(f(3), f(4), f(5)), static_cast<int>(f(6)));
    }
    return cloud;
}

}  // namespace gsscene::io
