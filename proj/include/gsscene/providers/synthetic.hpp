#pragma once

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "gsscene/providers/provider.hpp"
#include "gsscene/rng.hpp"

namespace gsscene::providers {

struct SceneBox {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Ones();
    Vec3 color = Vec3::Constant(0.5);
};

struct SceneSphere {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
    Vec3 color = Vec3::Constant(0.5);
};

// Ground-truth scene standing in for generative output. World y points down, so the ground
// is the plane y = ground_height below a camera at the origin. The sky is the inside of a
// sphere of radius far_bound about the world origin.
struct SyntheticSceneSpec {
    double ground_height = 1.5;
    double checker_period = 2.0;
    Vec3 ground_a = Vec3(0.55, 0.50, 0.42);
    Vec3 ground_b = Vec3(0.40, 0.45, 0.33);
    Vec3 sky_horizon = Vec3(0.80, 0.86, 0.95);
    Vec3 sky_zenith = Vec3(0.35, 0.55, 0.90);
    double far_bound = 20.0;
    std::vector<SceneBox> boxes;
    std::vector<SceneSphere> spheres;

    void validate() const {
        if (!(far_bound > 0.0) || !(checker_period > 0.0)) {
            throw InvalidArgument("scene: far bound and checker period must be positive");
        }
        for (const auto& b : boxes) {
            if (!(b.min.array() < b.max.array()).all()) throw InvalidArgument("scene: empty box");
        }
        for (const auto& s : spheres) {
            if (!(s.radius > 0.0)) throw InvalidArgument("scene: sphere radius must be positive");
        }
    }

    // Ground, sky, and `objects` boxes/spheres resting on the ground in a ring around the origin.
    static SyntheticSceneSpec from_seed(std::uint64_t seed, int objects = 8) {
        SyntheticSceneSpec spec;
        Rng rng(seed);
        for (int i = 0; i < objects; ++i) {
            const double yaw = 2.0 * std::numbers::pi * (i + rng.uniform(0.1, 0.9)) / objects;
            const double dist = rng.uniform(3.5, 8.0);
            const Vec3 base(dist * std::sin(yaw), spec.ground_height, dist * std::cos(yaw));
            const Vec3 color(rng.uniform(0.15, 0.9), rng.uniform(0.15, 0.9), rng.uniform(0.15, 0.9));
            if (i % 2 == 0) {
                const Vec3 half(rng.uniform(0.4, 1.0), rng.uniform(0.4, 1.2), rng.uniform(0.4, 1.0));
                SceneBox b;
                b.min = Vec3(base.x() - half.x(), spec.ground_height - 2.0 * half.y(), base.z() - half.z());
                b.max = Vec3(base.x() + half.x(), spec.ground_height, base.z() + half.z());
                b.color = color;
                spec.boxes.push_back(b);
            } else {
                SceneSphere s;
                s.radius = rng.uniform(0.4, 1.0);
                s.center = Vec3(base.x(), spec.ground_height - s.radius, base.z());
                s.color = color;
                spec.spheres.push_back(s);
            }
        }
        return spec;
    }

    bool contains_solid(const Vec3& p) const {
        for (const auto& b : boxes) {
            if ((p.array() > b.min.array()).all() && (p.array() < b.max.array()).all()) return true;
        }
        for (const auto& s : spheres) {
            if ((p - s.center).norm() < s.radius) return true;
        }
        return false;
    }
};

inline void to_json(nlohmann::json& j, const SyntheticSceneSpec& s) {
    auto v = [](const Vec3& x) { return nlohmann::json::array({x.x(), x.y(), x.z()}); };
    j = {{"ground_height", s.ground_height},
         {"checker_period", s.checker_period},
         {"ground_a", v(s.ground_a)},
         {"ground_b", v(s.ground_b)},
         {"sky_horizon", v(s.sky_horizon)},
         {"sky_zenith", v(s.sky_zenith)},
         {"far_bound", s.far_bound},
         {"boxes", nlohmann::json::array()},
         {"spheres", nlohmann::json::array()}};
    for (const auto& b : s.boxes) j["boxes"].push_back({{"min", v(b.min)}, {"max", v(b.max)}, {"color", v(b.color)}});
    for (const auto& p : s.spheres) {
        j["spheres"].push_back({{"center", v(p.center)}, {"radius", p.radius}, {"color", v(p.color)}});
    }
}

inline void from_json(const nlohmann::json& j, SyntheticSceneSpec& s) {
    auto v = [](const nlohmann::json& a) { return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()); };
    s.ground_height = j.at("ground_height").get<double>();
    s.checker_period = j.at("checker_period").get<double>();
    s.ground_a = v(j.at("ground_a"));
    s.ground_b = v(j.at("ground_b"));
    s.sky_horizon = v(j.at("sky_horizon"));
    s.sky_zenith = v(j.at("sky_zenith"));
    s.far_bound = j.at("far_bound").get<double>();
    s.boxes.clear();
    for (const auto& b : j.at("boxes")) s.boxes.push_back({v(b.at("min")), v(b.at("max")), v(b.at("color"))});
    s.spheres.clear();
    for (const auto& p : j.at("spheres")) {
        s.spheres.push_back({v(p.at("center")), p.at("radius").get<double>(), v(p.at("color"))});
    }
}

struct OracleView {
    ColorImage image;
    DepthMap depth;  // camera-frame z, at most far_bound
};

namespace detail {

inline constexpr double kHitEpsilon = 1e-9;

struct Hit {
    double t = std::numeric_limits<double>::infinity();
    Vec3 color = Vec3::Zero();
};

// Ray origin o, direction d scaled so that t equals camera z-depth.
inline Hit trace(const SyntheticSceneSpec& spec, const Vec3& o, const Vec3& d) {
    Hit best;
    // sky: far root of |o + t d| = far_bound
    {
        const double a = d.squaredNorm();
        const double b = o.dot(d);
        const double c = o.squaredNorm() - spec.far_bound * spec.far_bound;
        const double disc = b * b - a * c;
        const double t = (-b + std::sqrt(std::max(0.0, disc))) / a;
        const double up = std::clamp(-d.y() / d.norm(), 0.0, 1.0);
        best.t = t;
        best.color = (1.0 - up) * spec.sky_horizon + up * spec.sky_zenith;
    }
    if (d.y() > 0.0) {
        const double t = (spec.ground_height - o.y()) / d.y();
        if (t > kHitEpsilon && t < best.t) {
            const Vec3 p = o + t * d;
            const long cell = static_cast<long>(std::floor(p.x() / spec.checker_period)) +
                              static_cast<long>(std::floor(p.z() / spec.checker_period));
            best.t = t;
            best.color = (cell % 2 == 0) ? spec.ground_a : spec.ground_b;
        }
    }
    for (const auto& box : spec.boxes) {
        double t_enter = -std::numeric_limits<double>::infinity();
        double t_exit = std::numeric_limits<double>::infinity();
        int axis = 0;
        bool miss = false;
        for (int k = 0; k < 3; ++k) {
            if (d[k] == 0.0) {
                if (o[k] < box.min[k] || o[k] > box.max[k]) miss = true;
                continue;
            }
            double t0 = (box.min[k] - o[k]) / d[k];
            double t1 = (box.max[k] - o[k]) / d[k];
            if (t0 > t1) std::swap(t0, t1);
            if (t0 > t_enter) {
                t_enter = t0;
                axis = k;
            }
            t_exit = std::min(t_exit, t1);
        }
        if (miss || t_enter > t_exit || t_enter <= kHitEpsilon || t_enter >= best.t) continue;
        static constexpr double kFaceShade[3] = {0.78, 1.0, 0.62};
        best.t = t_enter;
        best.color = kFaceShade[axis] * box.color;
    }
    for (const auto& s : spec.spheres) {
        const Vec3 oc = o - s.center;
        const double a = d.squaredNorm();
        const double b = oc.dot(d);
        const double c = oc.squaredNorm() - s.radius * s.radius;
        const double disc = b * b - a * c;
        if (disc < 0.0) continue;
        const double t = (-b - std::sqrt(disc)) / a;
        if (t <= kHitEpsilon || t >= best.t) continue;
        const Vec3 n = (o + t * d - s.center) / s.radius;
        const Vec3 light = Vec3(0.4, -0.8, -0.45).normalized();
        best.t = t;
        best.color = (0.55 + 0.45 * std::max(0.0, n.dot(light))) * s.color;
    }
    best.color = best.color.cwiseMax(0.0).cwiseMin(1.0);
    return best;
}

}  // namespace detail

// Exact per-pixel ray cast through each pixel center (u, v).
inline OracleView oracle_render(const SyntheticSceneSpec& spec, const geometry::CameraPose& pose,
                                const geometry::CameraIntrinsics& intr) {
    spec.validate();
    intr.validate();
    const Vec3 origin = pose.center();
    if (spec.contains_solid(origin)) throw InvalidArgument("oracle_render: camera is inside a solid");
    if (!(origin.norm() < spec.far_bound)) throw InvalidArgument("oracle_render: camera is outside the sky dome");
    if (origin.y() >= spec.ground_height) throw InvalidArgument("oracle_render: camera is below the ground");
    OracleView out{ColorImage(intr.width, intr.height), DepthMap(intr.width, intr.height)};
    const Mat3 cam_to_world = pose.rotation.transpose();
    for (int v = 0; v < intr.height; ++v) {
        for (int u = 0; u < intr.width; ++u) {
            const Vec3 dir = cam_to_world * Vec3((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
            const auto hit = detail::trace(spec, origin, dir);
            out.image(u, v) = hit.color;
            out.depth(u, v) = std::min(hit.t, spec.far_bound);
        }
    }
    return out;
}

// Affine error plus Gaussian noise applied to true depth by the oracle's depth estimator.
struct DepthPerturbation {
    double scale = 1.0;
    double shift = 0.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(scale > 0.0)) throw InvalidArgument("depth perturbation: scale must be positive");
        if (!(noise_sigma >= 0.0)) throw InvalidArgument("depth perturbation: noise must be non-negative");
    }
};

inline constexpr double kMinOracleDepth = 1e-3;

// Provider answering every request with exact renders of a synthetic scene at the camera in
// the call context.
class OracleProvider : public Provider {
public:
    explicit OracleProvider(SyntheticSceneSpec spec, DepthPerturbation perturb = {})
        : spec_(std::move(spec)), perturb_(perturb) {
        spec_.validate();
        perturb_.validate();
    }

    const SyntheticSceneSpec& spec() const noexcept { return spec_; }

protected:
    ColorImage do_text2image(const std::string&, int width, int height, std::uint64_t,
                             const ProviderContext& ctx) override {
        const auto [pose, intr] = camera(ctx, "text2image");
        if (intr.width != width || intr.height != height) {
            throw ContractViolation("text2image: requested size does not match the context camera");
        }
        return oracle_render(spec_, pose, intr).image;
    }

    ColorImage do_outpaint(const std::string&, const ColorImage& image, const PixelMask& known, std::uint64_t,
                           const ProviderContext& ctx) override {
        return fill(image, known, ctx, "outpaint");
    }

    ColorImage do_inpaint(const std::string&, const ColorImage& image, const PixelMask& known, std::uint64_t,
                          const ProviderContext& ctx) override {
        return fill(image, known, ctx, "inpaint");
    }

    DepthMap do_estimate_depth(const ColorImage& image, const ProviderContext& ctx) override {
        const auto [pose, intr] = camera(ctx, "estimate_depth");
        if (intr.width != image.width() || intr.height != image.height()) {
            throw ContractViolation("estimate_depth: image size does not match the context camera");
        }
        DepthMap depth = oracle_render(spec_, pose, intr).depth;
        Rng rng(perturb_.seed ^ pose_hash(pose));
        for (auto& d : depth) {
            double noisy = perturb_.scale * d + perturb_.shift;
            if (perturb_.noise_sigma > 0.0) noisy += perturb_.noise_sigma * rng.normal();
            d = std::max(noisy, kMinOracleDepth);
        }
        return depth;
    }

    ColorImage do_superresolve(const ColorImage& image, int scale, const ProviderContext& ctx) override {
        auto [pose, intr] = camera(ctx, "superresolve");
        if (intr.width != image.width() || intr.height != image.height()) {
            throw ContractViolation("superresolve: image size does not match the context camera");
        }
        intr.fx *= scale;
        intr.fy *= scale;
        intr.cx *= scale;
        intr.cy *= scale;
        intr.width *= scale;
        intr.height *= scale;
        return oracle_render(spec_, pose, intr).image;
    }

private:
    static std::pair<geometry::CameraPose, geometry::CameraIntrinsics> camera(const ProviderContext& ctx,
                                                                              const char* what) {
        if (!ctx.pose || !ctx.intrinsics) {
            throw ContractViolation(std::string(what) + ": oracle provider needs the camera in the call context");
        }
        return {*ctx.pose, *ctx.intrinsics};
    }

    ColorImage fill(const ColorImage& image, const PixelMask& known, const ProviderContext& ctx, const char* what) {
        const auto [pose, intr] = camera(ctx, what);
        if (intr.width != image.width() || intr.height != image.height()) {
            throw ContractViolation(std::string(what) + ": image size does not match the context camera");
        }
        ColorImage out = image;
        if (count_true(known) == known.size()) return out;
        const ColorImage truth = oracle_render(spec_, pose, intr).image;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!known[i]) out[i] = truth[i];
        }
        return out;
    }

    static std::uint64_t pose_hash(const geometry::CameraPose& pose) {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&](double x) {
            h ^= std::bit_cast<std::uint64_t>(x);
            h *= 1099511628211ull;
        };
        for (int i = 0; i < 9; ++i) mix(pose.rotation(i / 3, i % 3));
        for (int i = 0; i < 3; ++i) mix(pose.translation[i]);
        return h;
    }

    SyntheticSceneSpec spec_;
    DepthPerturbation perturb_;
};

}  // namespace gsscene::providers
