#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "gsscene/io/artifacts.hpp"
#include "gsscene/io/metrics.hpp"
#include "gsscene/optim/ssim.hpp"
#include "gsscene/providers/synthetic.hpp"

namespace gsscene::io {

struct ViewMetrics {
    int index = 0;
    pipeline::ViewKind kind = pipeline::ViewKind::initial;
    double psnr_target = 0.0;
    double ssim_target = 0.0;
    std::optional<double> psnr_oracle;
    std::optional<double> ssim_oracle;
};

struct StageMetrics {
    std::string stage;  // g0, g1, g2
    std::vector<ViewMetrics> views;
    // means over the views this stage was trained on (stage-1 views for g0/g1, all views for g2)
    double mean_psnr_training = 0.0;
    double mean_ssim_training = 0.0;
    double mean_psnr_all = 0.0;
    double mean_ssim_all = 0.0;
    std::optional<double> mean_psnr_oracle;
    std::optional<double> mean_ssim_oracle;
};

struct MetricsReport {
    std::vector<StageMetrics> stages;

    const StageMetrics& stage(const std::string& name) const {
        for (const auto& s : stages) {
            if (s.stage == name) return s;
        }
        throw InvalidArgument("metrics: no stage " + name);
    }
};

inline json to_json(const MetricsReport& r) {
    json stages = json::array();
    for (const auto& s : r.stages) {
        json views = json::array();
        for (const auto& v : s.views) {
            json rec = {{"index", v.index}, {"kind", pipeline::to_string(v.kind)}, {"psnr", v.psnr_target},
                        {"ssim", v.ssim_target}};
            if (v.psnr_oracle) {
                rec["psnr_oracle"] = *v.psnr_oracle;
                rec["ssim_oracle"] = *v.ssim_oracle;
            }
            views.push_back(rec);
        }
        json rec = {{"stage", s.stage},
                    {"mean_psnr_training", s.mean_psnr_training},
                    {"mean_ssim_training", s.mean_ssim_training},
                    {"mean_psnr_all", s.mean_psnr_all},
                    {"mean_ssim_all", s.mean_ssim_all},
                    {"views", views}};
        if (s.mean_psnr_oracle) {
            rec["mean_psnr_oracle"] = *s.mean_psnr_oracle;
            rec["mean_ssim_oracle"] = *s.mean_ssim_oracle;
        }
        stages.push_back(rec);
    }
    return {{"stages", stages}};
}

inline bool stage1_view(pipeline::ViewKind k) { return k == pipeline::ViewKind::initial || k == pipeline::ViewKind::anchor; }

// Re-renders G_0, G_1 and G_2 at every stored view and scores them against the stored targets
// and, when `scene` is given, against fresh oracle renders. Writes metrics.json and nothing else.
inline MetricsReport run_eval(const std::string& dir, const std::optional<providers::SyntheticSceneSpec>& scene = std::nullopt) {
    const ArtifactSet set = ArtifactSet::open(dir);
    splat::RenderSettings settings;
    settings.background = set.config.background;

    std::vector<std::optional<ColorImage>> oracle(set.views.size());
    if (scene) {
        for (std::size_t i = 0; i < set.views.size(); ++i) {
            oracle[i] = providers::oracle_render(*scene, set.views[i].pose, set.views[i].intrinsics).image;
        }
    }

    MetricsReport report;
    for (const std::string stage : {"g0", "g1", "g2"}) {
        if (!set.has_stage(stage)) continue;
        const auto cloud = set.gaussians(stage);
        StageMetrics sm;
        sm.stage = stage;
        double pt = 0, st = 0, pa = 0, sa = 0, po = 0, so = 0;
        int nt = 0;
        for (std::size_t i = 0; i < set.views.size(); ++i) {
            const auto& v = set.views[i];
            const auto render = splat::rasterize(cloud, v.pose, v.intrinsics, settings).image;
            ViewMetrics vm{v.index, v.kind, psnr(render, v.image), optim::ssim(render, v.image), std::nullopt, std::nullopt};
            if (oracle[i]) {
                vm.psnr_oracle = psnr(render, *oracle[i]);
                vm.ssim_oracle = optim::ssim(render, *oracle[i]);
                po += *vm.psnr_oracle;
                so += *vm.ssim_oracle;
            }
            pa += vm.psnr_target;
            sa += vm.ssim_target;
            if (stage == "g2" || stage1_view(v.kind)) {
                pt += vm.psnr_target;
                st += vm.ssim_target;
                ++nt;
            }
            sm.views.push_back(vm);
        }
        const double n = static_cast<double>(set.views.size());
        sm.mean_psnr_all = pa / n;
        sm.mean_ssim_all = sa / n;
        sm.mean_psnr_training = nt ? pt / nt : 0.0;
        sm.mean_ssim_training = nt ? st / nt : 0.0;
        if (scene) {
            sm.mean_psnr_oracle = po / n;
            sm.mean_ssim_oracle = so / n;
        }
        report.stages.push_back(std::move(sm));
    }
    write_text((set.root / "metrics.json").string(), detail::dump(to_json(report)));
    return report;
}

// The synthetic scene recorded in the manifest, if the artifacts came from the oracle.
inline std::optional<providers::SyntheticSceneSpec> recorded_scene(const std::string& dir) {
    const json manifest = read_json_file(std::filesystem::path(dir) / kManifestName, "manifest");
    if (!manifest.contains("scene") || manifest["scene"].is_null()) return std::nullopt;
    try {
        return manifest["scene"].get<providers::SyntheticSceneSpec>();
    } catch (const json::exception& e) {
        throw ManifestError(std::string("manifest: bad scene record: ") + e.what());
    }
}

}  // namespace gsscene::io
