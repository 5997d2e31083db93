#pragma once

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

#include "gsscene/image.hpp"

namespace gsscene::geometry {

// Pinhole intrinsics. Camera looks down +z, x right, y down.
struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("intrinsics: focal lengths must be positive");
        if (width < 1 || height < 1) throw InvalidArgument("intrinsics: image size must be at least 1x1");
        if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
            throw InvalidArgument("intrinsics: principal point outside the image");
        }
    }

    Vec2 project(const Vec3& cam) const { return {fx * cam.x() / cam.z() + cx, fy * cam.y() / cam.z() + cy}; }

    // Camera-frame point at z-depth `z` on the ray through pixel coordinate (u, v).
    Vec3 backproject(double u, double v, double z) const { return {(u - cx) * z / fx, (v - cy) * z / fy, z}; }

    bool operator==(const CameraIntrinsics&) const = default;
};

// World-to-camera extrinsics: x_cam = rotation * x_world + translation.
struct CameraPose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static CameraPose identity() { return {}; }

    // Pose of a camera centered at `center` whose camera-to-world rotation is `cam_to_world`.
    static CameraPose from_center(const Mat3& cam_to_world, const Vec3& center) {
        CameraPose p;
        p.rotation = cam_to_world.transpose();
        p.translation = -p.rotation * center;
        return p;
    }

    Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
    Vec3 to_world(const Vec3& cam) const { return rotation.transpose() * (cam - translation); }
    Vec3 center() const { return -rotation.transpose() * translation; }

    void validate(double tol = 1e-9) const {
        if (!rotation.allFinite() || !translation.allFinite()) throw InvalidArgument("pose: non-finite entries");
        if (((rotation.transpose() * rotation) - Mat3::Identity()).cwiseAbs().maxCoeff() > tol ||
            std::abs(rotation.determinant() - 1.0) > tol) {
            throw InvalidArgument("pose: rotation is not a proper orthonormal matrix");
        }
    }

    bool operator==(const CameraPose& o) const { return rotation == o.rotation && translation == o.translation; }
};

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

// `fov_deg` is the vertical field of view; pixels are square.
inline CameraIntrinsics intrinsics_from_fov(double fov_deg, int width, int height) {
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw InvalidArgument("fov must lie in (0, 180) degrees");
    if (width < 1 || height < 1) throw InvalidArgument("image dimensions must be at least 1");
    CameraIntrinsics k;
    k.fy = (height / 2.0) / std::tan(deg_to_rad(fov_deg) / 2.0);
    k.fx = k.fy;
    k.cx = width / 2.0;
    k.cy = height / 2.0;
    k.width = width;
    k.height = height;
    return k;
}

// Rotation about the world up axis (camera y points down, so up is -y).
inline Mat3 yaw_rotation(double yaw_deg) {
    return Eigen::AngleAxisd(deg_to_rad(yaw_deg), Vec3::UnitY()).toRotationMatrix();
}

// Camera-to-world rotation for yaw (about y), then pitch (about x), then roll (about z).
inline Mat3 euler_rotation(double yaw_deg, double pitch_deg, double roll_deg) {
    return (Eigen::AngleAxisd(deg_to_rad(yaw_deg), Vec3::UnitY()) *
            Eigen::AngleAxisd(deg_to_rad(pitch_deg), Vec3::UnitX()) *
            Eigen::AngleAxisd(deg_to_rad(roll_deg), Vec3::UnitZ()))
        .toRotationMatrix();
}

}  // namespace gsscene::geometry
