#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "gsscene/geometry/camera.hpp"
#include "gsscene/parallel.hpp"
#include "gsscene/splat/gaussian.hpp"

namespace gsscene::splat {

using geometry::CameraIntrinsics;
using geometry::CameraPose;

inline constexpr double kMaxAlpha = 0.99;
inline constexpr double kMinAlpha = 1.0 / 255.0;
inline constexpr double kCovarianceBlur = 0.3;  // px^2
inline constexpr double kFootprintSigmas = 3.0;

struct RenderSettings {
    Vec3 background = Vec3::Zero();
    double z_near = 0.01;
    // compositing stops once transmittance falls below this
    double min_transmittance = 1e-4;
    // diagnostic switches; the brute-force comparison turns both off
    bool bound_footprint = true;
    bool early_termination = true;

    void validate() const {
        if (!(z_near > 0.0)) throw InvalidArgument("render settings: z_near must be positive");
        if (!(min_transmittance > 0.0 && min_transmittance <= 0.1)) {
            throw InvalidArgument("render settings: transmittance floor must lie in (0, 0.1]");
        }
    }
};

struct RenderOutput {
    ColorImage image;
    Raster<double> alpha;  // accumulated opacity 1 - T
    DepthMap depth;        // sum of T * alpha' * depth
};

struct ScreenGaussian {
    Vec2 mean;
    Mat2 cov;
    double depth = 0.0;
};

namespace detail {

// Pinhole Jacobian at camera-frame point t. The lateral ratios x/z and y/z entering it are
// clamped to kJacobianGuard times the half-view tangent, so primitives far outside the frustum
// do not blow up into screen-filling splats.
inline constexpr double kJacobianGuard = 1.3;

struct EwaJacobian {
    Eigen::Matrix<double, 2, 3> j;
    double ux = 0.0, uy = 0.0;  // (clamped) x/z and y/z
    bool clamped_x = false, clamped_y = false;
};

inline EwaJacobian ewa_jacobian(const Vec3& t, const CameraIntrinsics& intr) {
    const double lim_x = kJacobianGuard * 0.5 * intr.width / intr.fx;
    const double lim_y = kJacobianGuard * 0.5 * intr.height / intr.fy;
    EwaJacobian e;
    const double rx = t.x() / t.z();
    const double ry = t.y() / t.z();
    e.ux = std::clamp(rx, -lim_x, lim_x);
    e.uy = std::clamp(ry, -lim_y, lim_y);
    e.clamped_x = e.ux != rx;
    e.clamped_y = e.uy != ry;
    e.j << intr.fx / t.z(), 0.0, -intr.fx * e.ux / t.z(),  //
        0.0, intr.fy / t.z(), -intr.fy * e.uy / t.z();
    return e;
}

}  // namespace detail

// EWA projection of one primitive: pinhole Jacobian applied to the camera-frame covariance,
// plus a 0.3 px^2 blur. Empty when the center is not in front of the near plane.
inline std::optional<ScreenGaussian> project_to_screen(const GaussianPrimitive& g, const CameraPose& pose,
                                                       const CameraIntrinsics& intr, double z_near = 0.01) {
    const Vec3 t = pose.to_camera(g.center);
    if (!(t.z() > z_near)) return std::nullopt;
    const Mat3 sigma_cam = pose.rotation * covariance_3d(g) * pose.rotation.transpose();
    const auto jac = detail::ewa_jacobian(t, intr);
    ScreenGaussian s;
    s.mean = intr.project(t);
    s.cov = jac.j * sigma_cam * jac.j.transpose() + kCovarianceBlur * Mat2::Identity();
    s.depth = t.z();
    return s;
}

// Per-primitive gradients of a scalar loss, plus densification statistics for this view.
struct GaussianGradients {
    std::vector<Vec3> center;
    std::vector<Vec3> log_scale;
    std::vector<Vec4> rotation;
    std::vector<double> opacity_logit;
    std::vector<Vec3> color;
    // |dL/d mean2d| with the mean in normalized device coordinates ([-1, 1] across the image)
    std::vector<double> screen_grad_norm;
    // 1 if the primitive was projected inside the view
    std::vector<int> touched;

    explicit GaussianGradients(std::size_t n = 0)
        : center(n, Vec3::Zero()),
          log_scale(n, Vec3::Zero()),
          rotation(n, Vec4::Zero()),
          opacity_logit(n, 0.0),
          color(n, Vec3::Zero()),
          screen_grad_norm(n, 0.0),
          touched(n, 0) {}
};

namespace detail {

inline constexpr int kTileSize = 16;

struct Splat {
    int index = 0;  // primitive index in the cloud
    double depth = 0.0;
    Vec2 mean;
    double conic_xx = 0.0, conic_xy = 0.0, conic_yy = 0.0;
    double opacity = 0.0;
    // below this exponent alpha is certainly under kMinAlpha, so exp() can be skipped
    double power_floor = 0.0;
    Vec3 color;
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive pixel bounds
};

struct Binning {
    std::vector<Splat> splats;  // visible primitives, ascending (depth, index)
    int tiles_x = 0;
    int tiles_y = 0;
    std::vector<std::vector<int>> tiles;  // per tile: indices into splats, front to back
};

inline Binning bin(const GaussianCloud& cloud, const CameraPose& pose, const CameraIntrinsics& intr,
                   const RenderSettings& settings) {
    const int w = intr.width;
    const int h = intr.height;
    std::vector<std::optional<Splat>> projected(cloud.size());
    parallel_for(static_cast<std::ptrdiff_t>(cloud.size()), [&](std::ptrdiff_t i) {
        const auto& g = cloud.primitives[static_cast<std::size_t>(i)];
        const auto s = project_to_screen(g, pose, intr, settings.z_near);
        if (!s || !s->mean.allFinite()) return;
        const double det = s->cov.determinant();
        if (!(det > 0.0)) return;
        Splat sp;
        sp.index = static_cast<int>(i);
        sp.depth = s->depth;
        sp.mean = s->mean;
        sp.conic_xx = s->cov(1, 1) / det;
        sp.conic_xy = -s->cov(0, 1) / det;
        sp.conic_yy = s->cov(0, 0) / det;
        sp.opacity = g.opacity();
        sp.power_floor = std::log(kMinAlpha / sp.opacity) - 1e-9;
        sp.color = g.color;
        if (settings.bound_footprint) {
            const double mid = 0.5 * (s->cov(0, 0) + s->cov(1, 1));
            const double lambda_max = mid + std::sqrt(std::max(0.1, mid * mid - det));
            const double r = kFootprintSigmas * std::sqrt(lambda_max);
            const double fx0 = std::ceil(sp.mean.x() - r), fx1 = std::floor(sp.mean.x() + r);
            const double fy0 = std::ceil(sp.mean.y() - r), fy1 = std::floor(sp.mean.y() + r);
            if (fx1 < 0.0 || fy1 < 0.0 || fx0 > w - 1 || fy0 > h - 1) return;
            sp.x0 = static_cast<int>(std::max(0.0, fx0));
            sp.x1 = static_cast<int>(std::min<double>(w - 1, fx1));
            sp.y0 = static_cast<int>(std::max(0.0, fy0));
            sp.y1 = static_cast<int>(std::min<double>(h - 1, fy1));
        } else {
            sp.x0 = 0;
            sp.x1 = w - 1;
            sp.y0 = 0;
            sp.y1 = h - 1;
        }
        projected[static_cast<std::size_t>(i)] = sp;
    });

    Binning b;
    b.splats.reserve(cloud.size());
    for (auto& p : projected) {
        if (p) b.splats.push_back(*p);
    }
    std::stable_sort(b.splats.begin(), b.splats.end(), [](const Splat& a, const Splat& c) {
        return a.depth < c.depth || (a.depth == c.depth && a.index < c.index);
    });

    b.tiles_x = (w + kTileSize - 1) / kTileSize;
    b.tiles_y = (h + kTileSize - 1) / kTileSize;
    b.tiles.assign(static_cast<std::size_t>(b.tiles_x) * static_cast<std::size_t>(b.tiles_y), {});
    for (std::size_t k = 0; k < b.splats.size(); ++k) {
        const auto& sp = b.splats[k];
        for (int ty = sp.y0 / kTileSize; ty <= sp.y1 / kTileSize; ++ty) {
            for (int tx = sp.x0 / kTileSize; tx <= sp.x1 / kTileSize; ++tx) {
                b.tiles[static_cast<std::size_t>(ty) * b.tiles_x + tx].push_back(static_cast<int>(k));
            }
        }
    }
    return b;
}

struct Contribution {
    int list_pos = 0;  // position in the tile list
    double alpha = 0.0;
    double gaussian = 0.0;
    double transmittance = 0.0;  // before this contribution
    bool clamped = false;
};

// A splat restricted to one pixel row, with the y terms of its exponent folded in.
struct RowEntry {
    int pos = 0;  // position in the tile list
    int x0 = 0, x1 = -1;
    double mean_x = 0.0;
    double conic_xx = 0.0;
    double cross = 0.0;  // conic_xy * dy
    double dy_term = 0.0;  // conic_yy * dy * dy
    double opacity = 0.0;
    double power_floor = 0.0;
};

inline void row_entries(const Binning& b, const std::vector<int>& list, int y, std::vector<RowEntry>& out) {
    out.clear();
    for (std::size_t pos = 0; pos < list.size(); ++pos) {
        const Splat& sp = b.splats[static_cast<std::size_t>(list[pos])];
        if (y < sp.y0 || y > sp.y1) continue;
        const double dy = y - sp.mean.y();
        out.push_back({static_cast<int>(pos), sp.x0, sp.x1, sp.mean.x(), sp.conic_xx, sp.conic_xy * dy,
                       sp.conic_yy * dy * dy, sp.opacity, sp.power_floor});
    }
}

// Front-to-back compositing of one pixel. `row` comes from row_entries for this pixel's row.
// `visit` sees every accepted contribution in order. Returns the final transmittance.
template <typename Visit>
double composite_pixel(const Binning& b, const std::vector<int>& list, const std::vector<RowEntry>& row, int x,
                       const RenderSettings& settings, Visit&& visit) {
    double transmittance = 1.0;
    for (const RowEntry& e : row) {
        if (x < e.x0 || x > e.x1) continue;
        const double dx = x - e.mean_x;
        const double power = -0.5 * (e.conic_xx * dx * dx + 2.0 * e.cross * dx + e.dy_term);
        if (power > 0.0 || power < e.power_floor) continue;
        const double gauss = std::exp(power);
        double alpha = e.opacity * gauss;
        bool clamped = false;
        if (alpha > kMaxAlpha) {
            alpha = kMaxAlpha;
            clamped = true;
        }
        if (alpha < kMinAlpha) continue;
        visit(Contribution{e.pos, alpha, gauss, transmittance, clamped},
              b.splats[static_cast<std::size_t>(list[static_cast<std::size_t>(e.pos)])]);
        transmittance *= (1.0 - alpha);
        if (settings.early_termination && transmittance < settings.min_transmittance) break;
    }
    return transmittance;
}

}  // namespace detail

// Depth-sorted front-to-back alpha compositing of projected primitives.
inline RenderOutput rasterize(const GaussianCloud& cloud, const CameraPose& pose, const CameraIntrinsics& intr,
                              const RenderSettings& settings) {
    settings.validate();
    intr.validate();
    const int w = intr.width;
    const int h = intr.height;
    RenderOutput out{ColorImage(w, h, settings.background), Raster<double>(w, h, 0.0), DepthMap(w, h, 0.0)};
    if (cloud.empty()) return out;

    const detail::Binning b = detail::bin(cloud, pose, intr, settings);
    parallel_for(static_cast<std::ptrdiff_t>(b.tiles.size()), [&](std::ptrdiff_t t) {
        const auto& list = b.tiles[static_cast<std::size_t>(t)];
        const int tx = static_cast<int>(t % b.tiles_x);
        const int ty = static_cast<int>(t / b.tiles_x);
        const int xe = std::min(w, (tx + 1) * detail::kTileSize);
        const int ye = std::min(h, (ty + 1) * detail::kTileSize);
        std::vector<detail::RowEntry> row;
        for (int y = ty * detail::kTileSize; y < ye; ++y) {
            detail::row_entries(b, list, y, row);
            for (int x = tx * detail::kTileSize; x < xe; ++x) {
                Vec3 color = Vec3::Zero();
                double depth = 0.0;
                const double final_t = detail::composite_pixel(
                    b, list, row, x, settings, [&](const detail::Contribution& c, const detail::Splat& sp) {
                        const double weight = c.transmittance * c.alpha;
                        color += weight * sp.color;
                        depth += weight * sp.depth;
                    });
                out.image(x, y) = color + final_t * settings.background;
                out.alpha(x, y) = 1.0 - final_t;
                out.depth(x, y) = depth;
            }
        }
    });
    return out;
}

// Backward pass of `rasterize` for a loss with per-pixel RGB gradients `pixel_grads`.
inline GaussianGradients rasterize_gradients(const GaussianCloud& cloud, const CameraPose& pose,
                                             const CameraIntrinsics& intr, const RenderSettings& settings,
                                             const ColorImage& pixel_grads) {
    settings.validate();
    intr.validate();
    const int w = intr.width;
    const int h = intr.height;
    if (pixel_grads.width() != w || pixel_grads.height() != h) {
        throw InvalidArgument("rasterize_gradients: pixel gradient raster does not match the camera");
    }
    GaussianGradients grads(cloud.size());
    if (cloud.empty()) return grads;

    const detail::Binning b = detail::bin(cloud, pose, intr, settings);

    // 2D gradients per tile-list entry: mean (2), conic (3, full-matrix convention), base opacity, color (3)
    struct Screen {
        Vec2 mean = Vec2::Zero();
        double conic_xx = 0.0, conic_xy = 0.0, conic_yy = 0.0;
        double opacity = 0.0;
        Vec3 color = Vec3::Zero();
    };
    std::vector<std::vector<Screen>> tile_grads(b.tiles.size());

    parallel_for(static_cast<std::ptrdiff_t>(b.tiles.size()), [&](std::ptrdiff_t t) {
        const auto& list = b.tiles[static_cast<std::size_t>(t)];
        auto& local = tile_grads[static_cast<std::size_t>(t)];
        local.assign(list.size(), Screen{});
        if (list.empty()) return;
        const int tx = static_cast<int>(t % b.tiles_x);
        const int ty = static_cast<int>(t / b.tiles_x);
        const int xe = std::min(w, (tx + 1) * detail::kTileSize);
        const int ye = std::min(h, (ty + 1) * detail::kTileSize);
        std::vector<detail::Contribution> contribs;
        std::vector<detail::RowEntry> row;
        for (int y = ty * detail::kTileSize; y < ye; ++y) {
            detail::row_entries(b, list, y, row);
            for (int x = tx * detail::kTileSize; x < xe; ++x) {
                const Vec3& g_pix = pixel_grads(x, y);
                if (g_pix.isZero()) continue;
                contribs.clear();
                const double final_t = detail::composite_pixel(
                    b, list, row, x, settings,
                    [&](const detail::Contribution& c, const detail::Splat&) { contribs.push_back(c); });

                // suffix holds everything composited behind the current contribution
                Vec3 suffix = final_t * settings.background;
                for (auto it = contribs.rbegin(); it != contribs.rend(); ++it) {
                    const detail::Splat& sp = b.splats[static_cast<std::size_t>(list[it->list_pos])];
                    Screen& acc = local[static_cast<std::size_t>(it->list_pos)];
                    const double weight = it->transmittance * it->alpha;
                    acc.color += weight * g_pix;
                    const Vec3 d_img_d_alpha = it->transmittance * sp.color - suffix / (1.0 - it->alpha);
                    suffix += weight * sp.color;
                    if (it->clamped) continue;
                    const double g_alpha = g_pix.dot(d_img_d_alpha);
                    acc.opacity += g_alpha * it->gaussian;
                    const double g_gauss = g_alpha * sp.opacity * it->gaussian;  // dL/dpower
                    const double dx = x - sp.mean.x();
                    const double dy = y - sp.mean.y();
                    acc.mean.x() += g_gauss * (sp.conic_xx * dx + sp.conic_xy * dy);
                    acc.mean.y() += g_gauss * (sp.conic_xy * dx + sp.conic_yy * dy);
                    acc.conic_xx += -0.5 * g_gauss * dx * dx;
                    acc.conic_xy += -0.5 * g_gauss * dx * dy;
                    acc.conic_yy += -0.5 * g_gauss * dy * dy;
                }
            }
        }
    });

    // fixed-order reduction so results do not depend on scheduling
    std::vector<Screen> screen(b.splats.size());
    for (std::size_t t = 0; t < b.tiles.size(); ++t) {
        const auto& list = b.tiles[t];
        for (std::size_t pos = 0; pos < list.size(); ++pos) {
            const Screen& src = tile_grads[t][pos];
            Screen& dst = screen[static_cast<std::size_t>(list[pos])];
            dst.mean += src.mean;
            dst.conic_xx += src.conic_xx;
            dst.conic_xy += src.conic_xy;
            dst.conic_yy += src.conic_yy;
            dst.opacity += src.opacity;
            dst.color += src.color;
        }
    }

    parallel_for(static_cast<std::ptrdiff_t>(b.splats.size()), [&](std::ptrdiff_t k) {
        const detail::Splat& sp = b.splats[static_cast<std::size_t>(k)];
        const Screen& sg = screen[static_cast<std::size_t>(k)];
        const auto i = static_cast<std::size_t>(sp.index);
        const GaussianPrimitive& g = cloud.primitives[i];

        grads.touched[i] = 1;
        grads.screen_grad_norm[i] = Vec2(sg.mean.x() * 0.5 * intr.width, sg.mean.y() * 0.5 * intr.height).norm();
        grads.color[i] = sg.color;
        const double a = sp.opacity;
        grads.opacity_logit[i] = sg.opacity * a * (1.0 - a);

        // conic -> 2D covariance: dL/dcov = -Q dL/dQ Q
        Mat2 q;
        q << sp.conic_xx, sp.conic_xy, sp.conic_xy, sp.conic_yy;
        Mat2 g_q;
        g_q << sg.conic_xx, sg.conic_xy, sg.conic_xy, sg.conic_yy;
        const Mat2 g_cov2d = -q * g_q * q;

        const Vec3 t = pose.to_camera(g.center);
        const double tz = t.z();
        const double tz2 = tz * tz;
        const double tz3 = tz2 * tz;
        const auto jac = detail::ewa_jacobian(t, intr);
        const auto& j = jac.j;

        const Mat3 rot = rotation_matrix(g.rotation);
        const Vec3 s = g.scale();
        const Mat3 m = rot * s.asDiagonal();
        const Mat3 sigma = m * m.transpose();
        const Mat3& wr = pose.rotation;
        const Mat3 sigma_cam = wr * sigma * wr.transpose();

        const Mat3 g_sigma_cam = j.transpose() * g_cov2d * j;
        const Eigen::Matrix<double, 2, 3> g_j = 2.0 * g_cov2d * j * sigma_cam;
        const Mat3 g_sigma = wr.transpose() * g_sigma_cam * wr;
        const Mat3 g_m = 2.0 * g_sigma * m;
        const Mat3 g_rot = g_m * s.asDiagonal();
        const Mat3 rt_gm = rot.transpose() * g_m;
        for (int c = 0; c < 3; ++c) grads.log_scale[i][c] = rt_gm(c, c) * s[c];

        // rotation matrix -> normalized quaternion -> raw quaternion
        const double qn = g.rotation.norm();
        const Vec4 qh = g.rotation / qn;
        const double qw = qh[0], qx = qh[1], qy = qh[2], qz = qh[3];
        Mat3 dw, dx, dy, dz;
        dw << 0, -2 * qz, 2 * qy, 2 * qz, 0, -2 * qx, -2 * qy, 2 * qx, 0;
        dx << 0, 2 * qy, 2 * qz, 2 * qy, -4 * qx, -2 * qw, 2 * qz, 2 * qw, -4 * qx;
        dy << -4 * qy, 2 * qx, 2 * qw, 2 * qx, 0, 2 * qz, -2 * qw, 2 * qz, -4 * qy;
        dz << -4 * qz, -2 * qw, 2 * qx, 2 * qw, -4 * qz, 2 * qy, 2 * qx, 2 * qy, 0;
        const Vec4 g_qh(g_rot.cwiseProduct(dw).sum(), g_rot.cwiseProduct(dx).sum(), g_rot.cwiseProduct(dy).sum(),
                        g_rot.cwiseProduct(dz).sum());
        grads.rotation[i] = (g_qh - qh * qh.dot(g_qh)) / qn;

        // camera-frame position through the projected mean and the Jacobian
        Vec3 g_t = Vec3::Zero();
        g_t.x() += sg.mean.x() * intr.fx / tz;
        g_t.y() += sg.mean.y() * intr.fy / tz;
        g_t.z() += -sg.mean.x() * intr.fx * t.x() / tz2 - sg.mean.y() * intr.fy * t.y() / tz2;
        g_t.z() += g_j(0, 0) * (-intr.fx / tz2) + g_j(1, 1) * (-intr.fy / tz2);
        if (jac.clamped_x) {
            g_t.z() += g_j(0, 2) * (intr.fx * jac.ux / tz2);
        } else {
            g_t.x() += g_j(0, 2) * (-intr.fx / tz2);
            g_t.z() += g_j(0, 2) * (2.0 * intr.fx * t.x() / tz3);
        }
        if (jac.clamped_y) {
            g_t.z() += g_j(1, 2) * (intr.fy * jac.uy / tz2);
        } else {
            g_t.y() += g_j(1, 2) * (-intr.fy / tz2);
            g_t.z() += g_j(1, 2) * (2.0 * intr.fy * t.y() / tz3);
        }
        grads.center[i] = wr.transpose() * g_t;
    });
    return grads;
}

// Pixels whose accumulated opacity reaches the threshold count as known.
inline PixelMask coverage_mask(const RenderOutput& out, double alpha_threshold) {
    if (!(alpha_threshold > 0.0 && alpha_threshold < 1.0)) {
        throw InvalidArgument("coverage_mask: threshold must lie in (0, 1)");
    }
    PixelMask mask(out.alpha.width(), out.alpha.height(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = out.alpha[i] >= alpha_threshold ? 1 : 0;
    return mask;
}

}  // namespace gsscene::splat
