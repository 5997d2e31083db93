#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gsscene/geometry/knn.hpp"
#include "gsscene/geometry/point_cloud.hpp"

namespace gsscene::splat {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

struct GaussianPrimitive {
    Vec3 center = Vec3::Zero();
    // actual per-axis standard deviation is exp(log_scale)
    Vec3 log_scale = Vec3::Zero();
    // unit quaternion (w, x, y, z)
    Vec4 rotation = Vec4(1.0, 0.0, 0.0, 0.0);
    // actual opacity is sigmoid(opacity_logit)
    double opacity_logit = 0.0;
    Vec3 color = Vec3::Zero();

    double opacity() const { return sigmoid(opacity_logit); }
    Vec3 scale() const { return log_scale.array().exp(); }
    double max_scale() const { return scale().maxCoeff(); }

    bool operator==(const GaussianPrimitive&) const = default;
};

struct GaussianCloud {
    std::vector<GaussianPrimitive> primitives;
    // iteration + 1 at which a primitive was created by densification; 0 for initial ones
    std::vector<int> split_iteration;

    std::size_t size() const noexcept { return primitives.size(); }
    bool empty() const noexcept { return primitives.empty(); }

    void push_back(const GaussianPrimitive& g, int split_iter = 0) {
        primitives.push_back(g);
        split_iteration.push_back(split_iter);
    }

    void validate() const {
        if (primitives.size() != split_iteration.size()) {
            throw InvalidArgument("gaussian cloud: primitive and split-iteration counts disagree");
        }
        for (std::size_t i = 0; i < primitives.size(); ++i) {
            const auto& g = primitives[i];
            if (!g.center.allFinite() || !g.log_scale.allFinite() || !g.rotation.allFinite() ||
                !std::isfinite(g.opacity_logit) || !g.color.allFinite()) {
                throw InvalidArgument("gaussian cloud: non-finite parameter at primitive " + std::to_string(i));
            }
            if (split_iteration[i] < 0) throw InvalidArgument("gaussian cloud: negative split iteration");
        }
    }

    bool operator==(const GaussianCloud&) const = default;
};

inline constexpr double kMinInitScale = 1e-4;
inline constexpr double kMaxInitScale = 1.0;

// One isotropic primitive per point: opacity 0.5, identity rotation, scale = mean distance
// to the three nearest neighbors clamped to [1e-4, 1] m.
inline GaussianCloud init_from_points(const geometry::PointCloud& cloud) {
    if (cloud.empty()) throw InvalidArgument("init_from_points: empty point cloud");
    cloud.validate();
    const auto mean_dist = geometry::mean_neighbor_distances(cloud.positions, 3);
    GaussianCloud out;
    out.primitives.reserve(cloud.size());
    out.split_iteration.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        GaussianPrimitive g;
        g.center = cloud.positions[i];
        g.color = cloud.colors[i];
        g.opacity_logit = 0.0;
        g.log_scale = Vec3::Constant(std::log(std::clamp(mean_dist[i], kMinInitScale, kMaxInitScale)));
        out.push_back(g, 0);
    }
    return out;
}

// Rotation matrix of the normalized quaternion (w, x, y, z).
inline Mat3 rotation_matrix(const Vec4& q_raw) {
    const Vec4 q = q_raw / q_raw.norm();
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),    //
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

// World-space covariance R diag(s)^2 R^T.
inline Mat3 covariance_3d(const GaussianPrimitive& g) {
    const Mat3 m = rotation_matrix(g.rotation) * g.scale().asDiagonal();
    return m * m.transpose();
}

}  // namespace gsscene::splat
