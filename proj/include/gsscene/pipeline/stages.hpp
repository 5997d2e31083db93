#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gsscene/geometry/align.hpp"
#include "gsscene/geometry/mask.hpp"
#include "gsscene/geometry/outliers.hpp"
#include "gsscene/optim/train.hpp"
#include "gsscene/pipeline/cameras.hpp"
#include "gsscene/providers/provider.hpp"

namespace gsscene::pipeline {

enum class ViewKind { initial, anchor, refine, zoom };

inline const char* to_string(ViewKind k) {
    switch (k) {
        case ViewKind::initial: return "initial";
        case ViewKind::anchor: return "anchor";
        case ViewKind::refine: return "refine";
        case ViewKind::zoom: return "zoom";
    }
    return "unknown";
}

struct SynthesizedView {
    int index = 0;
    ViewKind kind = ViewKind::initial;
    CameraPose pose;
    CameraIntrinsics intrinsics;
    ColorImage image;
    // pixels carried over from the render handed to the provider; the rest were generated
    PixelMask known;
    PixelMask supervision;
    // aligned depth, stage-1 views only
    std::optional<DepthMap> depth;
};

struct AnchorRecord {
    int anchor = 0;
    geometry::AlignmentParams alignment;
    std::size_t overlap_pixels = 0;
    std::size_t fused_points = 0;
};

struct Stage1Report {
    std::vector<AnchorRecord> anchors;
    std::size_t points_before_prune = 0;
    geometry::PruneStats prune;
    optim::TrainReport train;
};

struct Stage2Report {
    // per refine view: coverage-mask false pixels under G_1 and under G_2, and provider-changed pixels
    std::vector<std::size_t> uncovered_before;
    std::vector<std::size_t> uncovered_after;
    std::vector<std::size_t> inpainted_pixels;
    optim::TrainReport train;
};

struct SceneArtifacts {
    PipelineConfig config;
    std::vector<SynthesizedView> views;
    geometry::PointCloud point_cloud;  // P_N after stretched-point removal
    splat::GaussianCloud g0;
    splat::GaussianCloud g1;
    std::optional<splat::GaussianCloud> g2;
    Stage1Report stage1;
    std::optional<Stage2Report> stage2;
};

// Optimizer, densification and loss settings shared by both training runs; the iteration caps
// come from PipelineConfig.
struct TrainingOptions {
    optim::OptimizerConfig optimizer;
    optim::DensifyConfig densify;
    optim::LossConfig loss;
};

namespace detail {

inline constexpr std::uint64_t kStreamAnchor = 0;
inline constexpr std::uint64_t kStreamRefinePoses = 1u << 20;
inline constexpr std::uint64_t kStreamZoomPoses = (1u << 20) + 1;
inline constexpr std::uint64_t kStreamRefineFill = 2u << 20;
inline constexpr std::uint64_t kStreamTrain1 = 3u << 20;
inline constexpr std::uint64_t kStreamTrain2 = (3u << 20) + 1;

inline splat::RenderSettings render_settings(const PipelineConfig& cfg) {
    splat::RenderSettings s;
    s.background = cfg.background;
    return s;
}

inline std::vector<optim::TrainView> train_views(const std::vector<SynthesizedView>& views) {
    std::vector<optim::TrainView> out;
    out.reserve(views.size());
    for (const auto& v : views) out.push_back({v.image, v.supervision, v.pose, v.intrinsics});
    return out;
}

inline optim::TrainResult run_training(const splat::GaussianCloud& cloud, const std::vector<SynthesizedView>& views,
                                       const TrainingOptions& opts, int iterations, const PipelineConfig& cfg,
                                       std::uint64_t stream) {
    optim::OptimizerConfig opt = opts.optimizer;
    opt.max_iterations = iterations;
    return optim::train(cloud, train_views(views), opt, opts.densify, opts.loss, derive_seed(cfg.seed, stream),
                        render_settings(cfg));
}

}  // namespace detail

// Progressive point-cloud growing over the anchor ring, stretched-point removal, Gaussian
// initialization and the first (early-stopped) training run.
inline SceneArtifacts stage1_initialize(const PipelineConfig& cfg, providers::Provider& provider,
                                        const TrainingOptions& opts = {}) {
    cfg.validate();
    SceneArtifacts art;
    art.config = cfg;
    const auto intr = geometry::intrinsics_from_fov(cfg.fov_deg, cfg.width, cfg.height);
    const auto poses = anchor_poses(cfg);

    const providers::ProviderContext ctx0{poses[0], intr};
    ColorImage image0 = provider.text2image(cfg.prompt, cfg.width, cfg.height,
                                            derive_seed(cfg.seed, detail::kStreamAnchor), ctx0);
    DepthMap depth0 = provider.estimate_depth(image0, ctx0);
    const PixelMask all(cfg.width, cfg.height, 1);
    geometry::PointCloud cloud = geometry::unproject(depth0, image0, all, poses[0], intr, 0);
    art.views.push_back({0, ViewKind::initial, poses[0], intr, std::move(image0), PixelMask(cfg.width, cfg.height, 0),
                         all, std::move(depth0)});

    for (int i = 1; i <= cfg.anchor_count; ++i) {
        const auto& pose = poses[static_cast<std::size_t>(i)];
        const providers::ProviderContext ctx{pose, intr};
        const auto rendered = geometry::render_points(cloud, pose, intr, cfg.point_radius_px);
        // the dilated band is regenerated, so it is excluded from both the kept pixels and the fit
        const PixelMask known = geometry::dilate_mask(rendered.mask, cfg.dilation_stage1);
        ColorImage image = provider.outpaint(cfg.prompt, rendered.image, known,
                                             derive_seed(cfg.seed, detail::kStreamAnchor + i), ctx);
        const DepthMap estimated = provider.estimate_depth(image, ctx);
        geometry::AlignmentResult aligned;
        try {
            aligned = geometry::align_depth(estimated, rendered.depth, known);
        } catch (const DegenerateAlignment& e) {
            throw PipelineError("stage 1: depth alignment failed at anchor " + std::to_string(i) + ": " + e.what());
        }
        const PixelMask fresh = invert(known);
        const std::size_t before = cloud.size();
        cloud = geometry::fuse_points(cloud, aligned.aligned, image, fresh, pose, intr, i);
        art.stage1.anchors.push_back({i, aligned.params, count_true(known), cloud.size() - before});
        art.views.push_back({i, ViewKind::anchor, pose, intr, std::move(image), known, all, std::move(aligned.aligned)});
    }

    art.stage1.points_before_prune = cloud.size();
    art.point_cloud = geometry::prune_stretched(cloud, &art.stage1.prune);
    if (art.point_cloud.empty()) throw PipelineError("stage 1: point cloud is empty");
    art.g0 = splat::init_from_points(art.point_cloud);
    auto trained = detail::run_training(art.g0, art.views, opts, cfg.stage1_iterations, cfg, detail::kStreamTrain1);
    art.g1 = std::move(trained.cloud);
    art.stage1.train = std::move(trained.report);
    return art;
}

// Inpainted refinement views around the anchors, restored zoom views, and the second training
// run over every synthesized view. The point cloud is not touched.
inline SceneArtifacts stage2_refine(SceneArtifacts art, providers::Provider& provider, const TrainingOptions& opts = {}) {
    const PipelineConfig& cfg = art.config;
    cfg.validate();
    if (art.g1.empty()) throw PipelineError("stage 2: G_1 is empty");
    const auto intr = geometry::intrinsics_from_fov(cfg.fov_deg, cfg.width, cfg.height);
    const auto poses = anchor_poses(cfg);
    const auto settings = detail::render_settings(cfg);
    // keep only stage-1 views in case of a re-run
    std::erase_if(art.views, [](const SynthesizedView& v) { return v.kind == ViewKind::refine || v.kind == ViewKind::zoom; });

    const std::vector<CameraPose> ring(poses.begin() + 1, poses.end());
    const auto refine = sample_refine_poses(ring, cfg, derive_seed(cfg.seed, detail::kStreamRefinePoses));
    const auto zoom = sample_zoom_poses(poses, cfg, derive_seed(cfg.seed, detail::kStreamZoomPoses));

    Stage2Report report;
    const PixelMask all(cfg.width, cfg.height, 1);
    int index = static_cast<int>(art.views.size());
    for (std::size_t k = 0; k < refine.size(); ++k) {
        const auto& pose = refine[k];
        const auto render = splat::rasterize(art.g1, pose, intr, settings);
        const PixelMask covered = splat::coverage_mask(render, cfg.coverage_alpha_threshold);
        const PixelMask known = geometry::dilate_mask(covered, cfg.dilation_stage2);
        ColorImage image = provider.inpaint(cfg.prompt, render.image, known,
                                            derive_seed(cfg.seed, detail::kStreamRefineFill + k), {pose, intr});
        std::size_t changed = 0;
        for (std::size_t p = 0; p < image.size(); ++p) changed += image[p] != render.image[p] ? 1 : 0;
        report.uncovered_before.push_back(covered.size() - count_true(covered));
        report.inpainted_pixels.push_back(changed);
        art.views.push_back({index++, ViewKind::refine, pose, intr, std::move(image), known, all, std::nullopt});
    }
    for (const auto& z : zoom) {
        const auto render = splat::rasterize(art.g1, z.pose, z.intrinsics, settings);
        ColorImage image = provider.superresolve(render.image, 1, {z.pose, z.intrinsics});
        art.views.push_back({index++, ViewKind::zoom, z.pose, z.intrinsics, std::move(image),
                             PixelMask(cfg.width, cfg.height, 0), all, std::nullopt});
    }

    auto trained = detail::run_training(art.g1, art.views, opts, cfg.stage2_iterations, cfg, detail::kStreamTrain2);
    for (const auto& pose : refine) {
        const auto covered = splat::coverage_mask(splat::rasterize(trained.cloud, pose, intr, settings),
                                                  cfg.coverage_alpha_threshold);
        report.uncovered_after.push_back(covered.size() - count_true(covered));
    }
    report.train = std::move(trained.report);
    art.g2 = std::move(trained.cloud);
    art.stage2 = std::move(report);
    return art;
}

inline SceneArtifacts run_pipeline(const PipelineConfig& cfg, providers::Provider& provider,
                                   const TrainingOptions& opts = {}) {
    return stage2_refine(stage1_initialize(cfg, provider, opts), provider, opts);
}

}  // namespace gsscene::pipeline
