#pragma once

#include <limits>
#include <vector>

#include "gsscene/geometry/camera.hpp"

namespace gsscene::geometry {

struct PointCloud {
    std::vector<Vec3> positions;
    std::vector<Vec3> colors;
    std::vector<int> source_view;

    std::size_t size() const noexcept { return positions.size(); }
    bool empty() const noexcept { return positions.empty(); }

    void push_back(const Vec3& p, const Vec3& c, int view) {
        positions.push_back(p);
        colors.push_back(c);
        source_view.push_back(view);
    }

    void reserve(std::size_t n) {
        positions.reserve(n);
        colors.reserve(n);
        source_view.reserve(n);
    }

    void validate() const {
        if (colors.size() != positions.size() || source_view.size() != positions.size()) {
            throw InvalidArgument("point cloud: attribute lengths disagree");
        }
        for (const auto& p : positions) {
            if (!p.allFinite()) throw InvalidArgument("point cloud: non-finite position");
        }
    }

    bool operator==(const PointCloud&) const = default;
};

// Back-projects every mask-true pixel into world space, row-major.
inline PointCloud unproject(const DepthMap& depth, const ColorImage& image, const PixelMask& mask,
                            const CameraPose& pose, const CameraIntrinsics& intr, int view_index) {
    require_same_shape(depth, image, "unproject");
    require_same_shape(depth, mask, "unproject");
    if (depth.width() != intr.width || depth.height() != intr.height) {
        throw InvalidArgument("unproject: raster size does not match intrinsics");
    }
    PointCloud out;
    out.reserve(count_true(mask));
    const Mat3 rt = pose.rotation.transpose();
    for (int v = 0; v < depth.height(); ++v) {
        for (int u = 0; u < depth.width(); ++u) {
            if (!mask(u, v)) continue;
            const Vec3 cam = intr.backproject(u, v, depth(u, v));
            out.push_back(rt * (cam - pose.translation), image(u, v), view_index);
        }
    }
    return out;
}

struct PointRender {
    ColorImage image;
    PixelMask mask;
    // +infinity where mask is false.
    DepthMap depth;
};

// Z-buffered square splats of Chebyshev radius `point_radius_px`. Ties go to the lower point index.
inline PointRender render_points(const PointCloud& cloud, const CameraPose& pose, const CameraIntrinsics& intr,
                                 int point_radius_px, double z_near = 1e-3) {
    if (point_radius_px < 0) throw InvalidArgument("render_points: negative point radius");
    const int w = intr.width;
    const int h = intr.height;
    PointRender out{ColorImage(w, h, Vec3::Zero()), PixelMask(w, h, 0),
                    DepthMap(w, h, std::numeric_limits<double>::infinity())};
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 cam = pose.to_camera(cloud.positions[i]);
        if (!(cam.z() > z_near)) continue;
        const Vec2 px = intr.project(cam);
        if (!px.allFinite()) continue;
        const double ru = std::round(px.x());
        const double rv = std::round(px.y());
        if (ru < -point_radius_px || rv < -point_radius_px || ru > w - 1 + point_radius_px ||
            rv > h - 1 + point_radius_px) {
            continue;
        }
        const int u0 = static_cast<int>(ru);
        const int v0 = static_cast<int>(rv);
        for (int v = std::max(0, v0 - point_radius_px); v <= std::min(h - 1, v0 + point_radius_px); ++v) {
            for (int u = std::max(0, u0 - point_radius_px); u <= std::min(w - 1, u0 + point_radius_px); ++u) {
                if (cam.z() < out.depth(u, v)) {
                    out.depth(u, v) = cam.z();
                    out.image(u, v) = cloud.colors[i];
                    out.mask(u, v) = 1;
                }
            }
        }
    }
    return out;
}

// Appends the unprojection of `new_mask` pixels; existing points are left untouched.
inline PointCloud fuse_points(const PointCloud& cloud, const DepthMap& aligned_depth, const ColorImage& image,
                              const PixelMask& new_mask, const CameraPose& pose, const CameraIntrinsics& intr,
                              int view_index) {
    PointCloud fresh = unproject(aligned_depth, image, new_mask, pose, intr, view_index);
    PointCloud out = cloud;
    out.reserve(cloud.size() + fresh.size());
    out.positions.insert(out.positions.end(), fresh.positions.begin(), fresh.positions.end());
    out.colors.insert(out.colors.end(), fresh.colors.begin(), fresh.colors.end());
    out.source_view.insert(out.source_view.end(), fresh.source_view.begin(), fresh.source_view.end());
    return out;
}

}  // namespace gsscene::geometry
