#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gsscene/rng.hpp"
#include "gsscene/splat/rasterizer.hpp"

namespace gsscene::optim {

struct DensifyConfig {
    int interval = 100;
    // mean screen-space positional gradient (normalized device coordinates) that triggers densification
    double grad_threshold = 2e-4;
    // fraction of the scene radius above which a primitive is split rather than cloned
    double split_scale_threshold = 0.01;
    double split_factor = 1.6;
    double opacity_prune_floor = 0.005;
    // clone offset length as a fraction of the scene radius (capped by the parent's largest scale)
    double clone_offset_fraction = 0.01;
    // last iteration (exclusive) that densifies; negative means 0.8 * max_iterations
    int densify_until = -1;

    void validate() const {
        if (interval < 1) throw InvalidArgument("densify config: interval must be at least 1");
        if (!(grad_threshold > 0 && split_scale_threshold > 0 && split_factor > 1.0 && clone_offset_fraction > 0)) {
            throw InvalidArgument("densify config: thresholds must be positive");
        }
        if (!(opacity_prune_floor > 0 && opacity_prune_floor < 1)) {
            throw InvalidArgument("densify config: opacity floor must lie in (0, 1)");
        }
    }

    int resolved_until(int max_iterations) const {
        return densify_until >= 0 ? densify_until : static_cast<int>(0.8 * max_iterations);
    }
};

// Per-primitive statistics accumulated between densification steps.
struct GradStats {
    std::vector<double> screen_grad;  // sum of per-view screen gradient norms
    std::vector<int> touches;
    std::vector<Vec3> center_grad;  // sum of world-space positional gradients

    explicit GradStats(std::size_t n = 0) { reset(n); }

    void reset(std::size_t n) {
        screen_grad.assign(n, 0.0);
        touches.assign(n, 0);
        center_grad.assign(n, Vec3::Zero());
    }

    void accumulate(const splat::GaussianGradients& g) {
        for (std::size_t i = 0; i < screen_grad.size(); ++i) {
            if (!g.touched[i]) continue;
            screen_grad[i] += g.screen_grad_norm[i];
            center_grad[i] += g.center[i];
            touches[i] += 1;
        }
    }

    double mean_screen_grad(std::size_t i) const {
        return touches[i] > 0 ? screen_grad[i] / touches[i] : 0.0;
    }
};

// One primitive created by densification, kept for the locality audit.
struct CreatedPrimitive {
    int parent = 0;
    bool split = false;
    Vec3 parent_center = Vec3::Zero();
    double parent_max_scale = 0.0;
    Vec3 child_center = Vec3::Zero();
};

struct DensifyEvent {
    int iteration = 0;
    int clones = 0;
    int splits = 0;
    int pruned = 0;
    std::vector<CreatedPrimitive> created;
};

struct DensifyResult {
    splat::GaussianCloud cloud;
    // origin[k] = input index output k inherits optimizer state from, -1 if fresh
    std::vector<int> origin;
    DensifyEvent event;
};

// Radius of the bounding sphere about the centroid of the primitive centers.
inline double scene_radius(const splat::GaussianCloud& cloud) {
    if (cloud.empty()) return 0.0;
    Vec3 c = Vec3::Zero();
    for (const auto& g : cloud.primitives) c += g.center;
    c /= static_cast<double>(cloud.size());
    double r = 0.0;
    for (const auto& g : cloud.primitives) r = std::max(r, (g.center - c).norm());
    return r;
}

// Clone small high-gradient primitives toward their descent direction; split large ones into two
// children drawn from the parent's own density (truncated at 3 sigma) with scales divided by
// split_factor. Children are tagged with iteration + 1.
inline DensifyResult densify_clone_split(const splat::GaussianCloud& cloud, const GradStats& stats, int iteration,
                                         const DensifyConfig& cfg, double radius, std::uint64_t seed) {
    cfg.validate();
    DensifyResult out;
    out.event.iteration = iteration;
    Rng rng(seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(iteration + 1)));
    const int tag = iteration + 1;
    const double split_limit = cfg.split_scale_threshold * radius;
    const double log_factor = std::log(cfg.split_factor);

    std::vector<std::size_t> clones, splits;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!(stats.mean_screen_grad(i) > cfg.grad_threshold)) continue;
        if (cloud.primitives[i].max_scale() <= split_limit) {
            clones.push_back(i);
        } else {
            splits.push_back(i);
        }
    }

    std::vector<char> removed(cloud.size(), 0);
    for (auto i : splits) removed[i] = 1;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (removed[i]) continue;
        out.cloud.push_back(cloud.primitives[i], cloud.split_iteration[i]);
        out.origin.push_back(static_cast<int>(i));
    }

    for (auto i : clones) {
        const auto& parent = cloud.primitives[i];
        splat::GaussianPrimitive child = parent;
        const Vec3 g = stats.center_grad[i];
        const double offset = std::min(cfg.clone_offset_fraction * radius, parent.max_scale());
        if (g.norm() > 0.0) child.center = parent.center - offset * g.normalized();
        out.cloud.push_back(child, tag);
        out.origin.push_back(-1);
        out.event.created.push_back({static_cast<int>(i), false, parent.center, parent.max_scale(), child.center});
        ++out.event.clones;
    }

    for (auto i : splits) {
        const auto& parent = cloud.primitives[i];
        const Mat3 basis = splat::rotation_matrix(parent.rotation) * parent.scale().asDiagonal();
        for (int c = 0; c < 2; ++c) {
            Vec3 z;
            do {
                z = Vec3(rng.normal(), rng.normal(), rng.normal());
            } while (z.norm() > 3.0);
            splat::GaussianPrimitive child = parent;
            child.center = parent.center + basis * z;
            child.log_scale = parent.log_scale - Vec3::Constant(log_factor);
            out.cloud.push_back(child, tag);
            out.origin.push_back(-1);
            out.event.created.push_back({static_cast<int>(i), true, parent.center, parent.max_scale(), child.center});
        }
        ++out.event.splits;
    }
    return out;
}

struct PruneResult {
    splat::GaussianCloud cloud;
    std::vector<int> origin;
};

// Drops primitives with opacity strictly below the floor.
inline PruneResult prune_low_opacity(const splat::GaussianCloud& cloud, double floor) {
    if (!(floor > 0.0 && floor < 1.0)) throw InvalidArgument("prune_low_opacity: floor must lie in (0, 1)");
    PruneResult out;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (cloud.primitives[i].opacity() < floor) continue;
        out.cloud.push_back(cloud.primitives[i], cloud.split_iteration[i]);
        out.origin.push_back(static_cast<int>(i));
    }
    return out;
}

}  // namespace gsscene::optim
