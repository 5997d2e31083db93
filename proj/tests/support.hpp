#pragma once

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "gsscene/rng.hpp"
#include "gsscene/splat/rasterizer.hpp"

namespace gsscene::test_support {

// Random scene in front of an identity camera, sized for a w x h image.
inline splat::GaussianCloud random_scene(Rng& rng, int count, double spread = 1.0) {
    splat::GaussianCloud cloud;
    for (int i = 0; i < count; ++i) {
        splat::GaussianPrimitive g;
        g.center = Vec3(rng.uniform(-spread, spread), rng.uniform(-spread, spread), rng.uniform(3.0, 6.0));
        g.log_scale = Vec3(std::log(rng.uniform(0.1, 0.5)), std::log(rng.uniform(0.1, 0.5)),
                           std::log(rng.uniform(0.1, 0.5)));
        Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
        g.rotation = q / q.norm();
        g.opacity_logit = rng.uniform(-2.0, 2.0);
        g.color = Vec3(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95));
        cloud.push_back(g);
    }
    return cloud;
}

// Every primitive evaluated at every pixel, globally sorted by (depth, index), no footprint
// bound and no early stop. Projection is recomputed here from first principles.
inline ColorImage naive_render(const splat::GaussianCloud& cloud, const geometry::CameraPose& pose,
                               const geometry::CameraIntrinsics& intr, const Vec3& background, double z_near = 0.01) {
    struct Item {
        double depth;
        std::size_t index;
        Vec2 mean;
        Mat2 inv;
        double opacity;
        Vec3 color;
    };
    std::vector<Item> items;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& g = cloud.primitives[i];
        const Vec3 t = pose.rotation * g.center + pose.translation;
        if (t.z() <= z_near) continue;
        const Eigen::Quaterniond q(g.rotation[0], g.rotation[1], g.rotation[2], g.rotation[3]);
        const Mat3 r = q.normalized().toRotationMatrix();
        Mat3 s2 = Mat3::Zero();
        for (int k = 0; k < 3; ++k) s2(k, k) = std::exp(2.0 * g.log_scale[k]);
        const Mat3 cov_cam = pose.rotation * r * s2 * r.transpose() * pose.rotation.transpose();
        const double lim_x = 1.3 * intr.width / (2.0 * intr.fx);
        const double lim_y = 1.3 * intr.height / (2.0 * intr.fy);
        const double ux = std::min(lim_x, std::max(-lim_x, t.x() / t.z()));
        const double uy = std::min(lim_y, std::max(-lim_y, t.y() / t.z()));
        Eigen::Matrix<double, 2, 3> jac;
        jac << intr.fx / t.z(), 0, -intr.fx * ux / t.z(), 0, intr.fy / t.z(), -intr.fy * uy / t.z();
        const Mat2 cov = jac * cov_cam * jac.transpose() + 0.3 * Mat2::Identity();
        const Vec2 mean(intr.fx * t.x() / t.z() + intr.cx, intr.fy * t.y() / t.z() + intr.cy);
        items.push_back({t.z(), i, mean, cov.inverse(), 1.0 / (1.0 + std::exp(-g.opacity_logit)), g.color});
    }
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.depth < b.depth || (a.depth == b.depth && a.index < b.index); });
    ColorImage out(intr.width, intr.height);
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            Vec3 c = Vec3::Zero();
            double t = 1.0;
            for (const auto& it : items) {
                const Vec2 d = Vec2(x, y) - it.mean;
                const double a = std::min(0.99, it.opacity * std::exp(-0.5 * d.dot(it.inv * d)));
                if (a < 1.0 / 255.0) continue;
                c += t * a * it.color;
                t *= 1.0 - a;
            }
            out(x, y) = c + t * background;
        }
    }
    return out;
}

struct GradientCheck {
    double worst_relative = 0.0;  // over entries whose absolute error exceeds the floor
    int checked = 0;
    int failures = 0;
};

// Central differences of L = sum(weights . render) against rasterize_gradients for every
// parameter of every primitive.
inline GradientCheck gradient_check(const splat::GaussianCloud& cloud, const geometry::CameraPose& pose,
                                    const geometry::CameraIntrinsics& intr, const splat::RenderSettings& settings,
                                    const ColorImage& weights, double h = 1e-5, double rel_tol = 1e-3,
                                    double abs_floor = 1e-8) {
    auto loss = [&](const splat::GaussianCloud& c) {
        const auto o = splat::rasterize(c, pose, intr, settings);
        double l = 0.0;
        for (std::size_t i = 0; i < o.image.size(); ++i) l += o.image[i].dot(weights[i]);
        return l;
    };
    const auto g = splat::rasterize_gradients(cloud, pose, intr, settings, weights);
    GradientCheck result;
    auto check = [&](double analytic, auto&& mutate) {
        auto plus = cloud;
        auto minus = cloud;
        mutate(plus, h);
        mutate(minus, -h);
        const double fd = (loss(plus) - loss(minus)) / (2.0 * h);
        const double err = std::abs(analytic - fd);
        ++result.checked;
        if (err <= abs_floor) return;
        const double rel = err / std::max(std::abs(analytic), std::abs(fd));
        result.worst_relative = std::max(result.worst_relative, rel);
        if (rel >= rel_tol) ++result.failures;
    };
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            check(g.center[i][c], [&](splat::GaussianCloud& cl, double d) { cl.primitives[i].center[c] += d; });
            check(g.log_scale[i][c], [&](splat::GaussianCloud& cl, double d) { cl.primitives[i].log_scale[c] += d; });
            check(g.color[i][c], [&](splat::GaussianCloud& cl, double d) { cl.primitives[i].color[c] += d; });
        }
        for (int c = 0; c < 4; ++c) {
            check(g.rotation[i][c], [&](splat::GaussianCloud& cl, double d) { cl.primitives[i].rotation[c] += d; });
        }
        check(g.opacity_logit[i], [&](splat::GaussianCloud& cl, double d) { cl.primitives[i].opacity_logit += d; });
    }
    return result;
}

// Smallest distance, over the render, from any of the rasterizer's hard cutoffs: footprint box
// edges (px), the alpha floor and ceiling (log alpha), and the early-termination floor (log T).
// Central differences are only meaningful when a perturbation of size h cannot cross one.
inline double cutoff_margin(const splat::GaussianCloud& cloud, const geometry::CameraPose& pose,
                            const geometry::CameraIntrinsics& intr, const splat::RenderSettings& settings) {
    auto settings_unbounded = settings;
    settings_unbounded.bound_footprint = false;
    const auto all = splat::detail::bin(cloud, pose, intr, settings_unbounded);
    double margin = std::numeric_limits<double>::infinity();
    auto frac = [](double v) { return std::abs(v - std::round(v)); };
    if (settings.bound_footprint) {
        for (const auto& sp : all.splats) {
            const auto s = splat::project_to_screen(cloud.primitives[sp.index], pose, intr, settings.z_near);
            const double det = s->cov.determinant();
            const double mid = 0.5 * (s->cov(0, 0) + s->cov(1, 1));
            const double rad = splat::kFootprintSigmas * std::sqrt(mid + std::sqrt(std::max(0.1, mid * mid - det)));
            for (double e : {sp.mean.x() - rad, sp.mean.x() + rad, sp.mean.y() - rad, sp.mean.y() + rad}) {
                margin = std::min(margin, frac(e));
            }
        }
    }
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            double t = 1.0;
            for (const auto& sp : all.splats) {
                const double dx = x - sp.mean.x(), dy = y - sp.mean.y();
                const double power = -0.5 * (sp.conic_xx * dx * dx + 2.0 * sp.conic_xy * dx * dy + sp.conic_yy * dy * dy);
                const double a = sp.opacity * std::exp(power);
                margin = std::min({margin, std::abs(std::log(a / splat::kMinAlpha)), std::abs(std::log(a / splat::kMaxAlpha))});
                if (a >= splat::kMinAlpha) t *= 1.0 - std::min(a, splat::kMaxAlpha);
                if (settings.early_termination) margin = std::min(margin, std::abs(std::log(t / settings.min_transmittance)));
            }
        }
    }
    return margin;
}

inline ColorImage random_weights(Rng& rng, int w, int h) {
    ColorImage out(w, h);
    for (auto& v : out) v = Vec3(rng.normal(), rng.normal(), rng.normal());
    return out;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("gsscene_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace gsscene::test_support
