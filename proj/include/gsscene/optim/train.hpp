#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gsscene/io/metrics.hpp"
#include "gsscene/optim/adam.hpp"
#include "gsscene/optim/densify.hpp"
#include "gsscene/optim/loss.hpp"

namespace gsscene::optim {

struct TrainView {
    ColorImage target;
    PixelMask supervision;  // 1 = pixel contributes to the loss
    geometry::CameraPose pose;
    geometry::CameraIntrinsics intrinsics;
};

struct TrainReport {
    int max_iterations = 0;
    int iterations_run = 0;
    double scene_radius = 0.0;
    std::vector<double> losses;               // one per iteration, before the update
    std::vector<std::size_t> primitive_counts;  // one per iteration, after densification
    std::vector<DensifyEvent> densify_events;
    std::vector<double> final_psnr;  // per view
    std::vector<double> final_ssim;  // per view
};

struct TrainResult {
    splat::GaussianCloud cloud;
    TrainReport report;
};

// Early-stopped optimization: round-robin over views, masked photometric loss, Adam on every
// parameter group, clone/split and opacity pruning on schedule. Runs exactly max_iterations steps.
// `radius` fixes the scene radius used by densification; by default it is taken from `cloud`.
inline TrainResult train(splat::GaussianCloud cloud, const std::vector<TrainView>& views, const OptimizerConfig& opt,
                         const DensifyConfig& dens, const LossConfig& loss_cfg, std::uint64_t seed,
                         const splat::RenderSettings& settings = {}, std::optional<double> radius = std::nullopt) {
    if (views.empty()) throw InvalidArgument("train: no views");
    if (cloud.empty()) throw InvalidArgument("train: empty gaussian cloud");
    opt.validate();
    dens.validate();
    loss_cfg.validate();
    settings.validate();
    cloud.validate();
    for (const auto& v : views) {
        if (v.target.width() != v.intrinsics.width || v.target.height() != v.intrinsics.height) {
            throw InvalidArgument("train: target size does not match its camera");
        }
        require_same_shape(v.target, v.supervision, "train");
    }

    TrainResult result;
    TrainReport& report = result.report;
    report.max_iterations = opt.max_iterations;
    report.scene_radius = radius.value_or(scene_radius(cloud));
    if (opt.max_iterations == 0) {
        result.cloud = std::move(cloud);
        return result;
    }

    Adam adam(opt, cloud.size());
    GradStats stats(cloud.size());
    const int until = dens.resolved_until(opt.max_iterations);

    for (int it = 1; it <= opt.max_iterations; ++it) {
        const TrainView& view = views[static_cast<std::size_t>(it - 1) % views.size()];
        const auto render = splat::rasterize(cloud, view.pose, view.intrinsics, settings);
        const auto loss = masked_photometric_loss(render.image, view.target, view.supervision, loss_cfg);
        const auto grads = splat::rasterize_gradients(cloud, view.pose, view.intrinsics, settings, loss.gradient);
        stats.accumulate(grads);
        adam.step(cloud, grads, it);
        report.losses.push_back(loss.value);

        if (it % dens.interval == 0 && it < until) {
            auto dr = densify_clone_split(cloud, stats, it, dens, report.scene_radius, seed);
            auto pr = prune_low_opacity(dr.cloud, dens.opacity_prune_floor);
            std::vector<int> origin(pr.origin.size());
            for (std::size_t k = 0; k < origin.size(); ++k) origin[k] = dr.origin[static_cast<std::size_t>(pr.origin[k])];
            dr.event.pruned = static_cast<int>(dr.cloud.size() - pr.cloud.size());
            if (pr.cloud.empty()) {
                // never prune the scene away entirely
                dr.event.pruned = 0;
                cloud = std::move(dr.cloud);
                adam.remap(dr.origin);
            } else {
                cloud = std::move(pr.cloud);
                adam.remap(origin);
            }
            stats.reset(cloud.size());
            report.densify_events.push_back(std::move(dr.event));
        }
        report.primitive_counts.push_back(cloud.size());
        report.iterations_run = it;
    }

    for (const auto& v : views) {
        const auto render = splat::rasterize(cloud, v.pose, v.intrinsics, settings);
        report.final_psnr.push_back(io::psnr(render.image, v.target));
        report.final_ssim.push_back(v.target.width() >= loss_cfg.window && v.target.height() >= loss_cfg.window
                                        ? ssim(render.image, v.target, loss_cfg)
                                        : 0.0);
    }
    result.cloud = std::move(cloud);
    return result;
}

}  // namespace gsscene::optim
