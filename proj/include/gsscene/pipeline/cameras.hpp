#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gsscene/geometry/camera.hpp"
#include "gsscene/pipeline/config.hpp"
#include "gsscene/rng.hpp"

namespace gsscene::pipeline {

using geometry::CameraIntrinsics;
using geometry::CameraPose;

// Yaw of anchor i: 0, +step, -step, +2 step, -2 step, ...
inline double anchor_yaw_deg(int i, double step_deg) {
    if (i == 0) return 0.0;
    const int ring = (i + 1) / 2;
    return (i % 2 == 1 ? 1.0 : -1.0) * ring * step_deg;
}

// Identity followed by anchor_count rotation-only poses about the up axis, interleaved so that
// every new anchor borders already-visited coverage.
inline std::vector<CameraPose> anchor_poses(const PipelineConfig& cfg) {
    std::vector<CameraPose> poses;
    poses.reserve(static_cast<std::size_t>(cfg.anchor_count) + 1);
    poses.push_back(CameraPose::identity());
    for (int i = 1; i <= cfg.anchor_count; ++i) {
        poses.push_back(CameraPose::from_center(geometry::yaw_rotation(anchor_yaw_deg(i, cfg.anchor_step_deg)), Vec3::Zero()));
    }
    return poses;
}

inline Vec3 random_unit_vector(Rng& rng) {
    Vec3 v;
    do {
        v = Vec3(rng.normal(), rng.normal(), rng.normal());
    } while (v.norm() < 1e-12);
    return v.normalized();
}

// refine_cameras_per_anchor poses around each given anchor: center uniform in a ball of
// radius refine_translation_radius, orientation perturbed by a random-axis rotation of at most
// refine_rotation_jitter_deg.
inline std::vector<CameraPose> sample_refine_poses(const std::vector<CameraPose>& anchors, const PipelineConfig& cfg,
                                                   std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CameraPose> out;
    out.reserve(anchors.size() * static_cast<std::size_t>(cfg.refine_cameras_per_anchor));
    for (const auto& anchor : anchors) {
        const Mat3 cam_to_world = anchor.rotation.transpose();
        for (int k = 0; k < cfg.refine_cameras_per_anchor; ++k) {
            const Vec3 offset_dir = random_unit_vector(rng);
            const double offset = cfg.refine_translation_radius * std::cbrt(rng.uniform());
            const Vec3 axis = random_unit_vector(rng);
            const double angle = geometry::deg_to_rad(cfg.refine_rotation_jitter_deg) * rng.uniform();
            if (offset == 0.0 && angle == 0.0) {
                out.push_back(anchor);
                continue;
            }
            const Mat3 jitter = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
            out.push_back(CameraPose::from_center(cam_to_world * jitter, anchor.center() + offset * offset_dir));
        }
    }
    return out;
}

struct ZoomView {
    CameraPose pose;
    CameraIntrinsics intrinsics;
};

// zoom_view_count anchors drawn uniformly (with replacement), each narrowed to
// fov_deg * zoom_fov_factor at full resolution.
inline std::vector<ZoomView> sample_zoom_poses(const std::vector<CameraPose>& anchors, const PipelineConfig& cfg,
                                               std::uint64_t seed) {
    if (!(cfg.zoom_fov_factor > 0.0 && cfg.zoom_fov_factor <= 1.0)) {
        throw InvalidArgument("sample_zoom_poses: zoom factor must lie in (0, 1]");
    }
    std::vector<ZoomView> out;
    if (anchors.empty()) return out;
    Rng rng(seed);
    const auto intr = geometry::intrinsics_from_fov(cfg.fov_deg * cfg.zoom_fov_factor, cfg.width, cfg.height);
    for (int k = 0; k < cfg.zoom_view_count; ++k) {
        out.push_back({anchors[static_cast<std::size_t>(rng.below(anchors.size()))], intr});
    }
    return out;
}

}  // namespace gsscene::pipeline
