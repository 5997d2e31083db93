#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gsscene/io/codec.hpp"
#include "gsscene/io/ply.hpp"
#include "gsscene/pipeline/stages.hpp"

namespace gsscene::io {

using nlohmann::json;

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kManifestFormat = "gsscene-artifacts";
inline constexpr int kManifestVersion = 1;

inline json pose_to_json(const geometry::CameraPose& p) {
    json r = json::array();
    for (int i = 0; i < 3; ++i) r.push_back({p.rotation(i, 0), p.rotation(i, 1), p.rotation(i, 2)});
    return {{"rotation", r}, {"translation", {p.translation.x(), p.translation.y(), p.translation.z()}}};
}

inline geometry::CameraPose pose_from_json(const json& j) {
    geometry::CameraPose p;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) p.rotation(i, k) = j.at("rotation").at(i).at(k).get<double>();
        p.translation[i] = j.at("translation").at(i).get<double>();
    }
    return p;
}

inline json intrinsics_to_json(const geometry::CameraIntrinsics& k) {
    return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

inline geometry::CameraIntrinsics intrinsics_from_json(const json& j) {
    geometry::CameraIntrinsics k;
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
    k.validate();
    return k;
}

inline json train_report_to_json(const optim::TrainReport& r) {
    json events = json::array();
    for (const auto& e : r.densify_events) {
        events.push_back({{"iteration", e.iteration}, {"clones", e.clones}, {"splits", e.splits}, {"pruned", e.pruned}});
    }
    return {{"max_iterations", r.max_iterations},
            {"iterations_run", r.iterations_run},
            {"scene_radius", r.scene_radius},
            {"losses", r.losses},
            {"primitive_counts", r.primitive_counts},
            {"densify_events", events},
            {"final_psnr", r.final_psnr},
            {"final_ssim", r.final_ssim}};
}

inline json stage1_report_to_json(const pipeline::Stage1Report& r) {
    json anchors = json::array();
    for (const auto& a : r.anchors) {
        anchors.push_back({{"anchor", a.anchor},
                           {"scale", a.alignment.scale},
                           {"shift", a.alignment.shift},
                           {"overlap_pixels", a.overlap_pixels},
                           {"fused_points", a.fused_points}});
    }
    return {{"anchors", anchors},
            {"points_before_prune", r.points_before_prune},
            {"stretched_removed", r.prune.removed},
            {"stretched_threshold", r.prune.threshold},
            {"train", train_report_to_json(r.train)}};
}

inline json stage2_report_to_json(const pipeline::Stage2Report& r) {
    return {{"uncovered_before", r.uncovered_before},
            {"uncovered_after", r.uncovered_after},
            {"inpainted_pixels", r.inpainted_pixels},
            {"train", train_report_to_json(r.train)}};
}

namespace detail {

inline std::string view_name(int index, const char* suffix) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03d%s", index, suffix);
    return buf;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Records every file as it is written so that a failure can leave a partial manifest behind.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {}

    void bytes(const std::string& rel, const Bytes& data) {
        const auto path = root_ / rel;
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw FormatError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        write_file(path.string(), data);
        written_.push_back(rel);
    }

    void text(const std::string& rel, const std::string& s) { bytes(rel, Bytes(s.begin(), s.end())); }

    const std::vector<std::string>& written() const { return written_; }
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
    std::vector<std::string> written_;
};

}  // namespace detail

// Writes the complete artifact directory. `scene` (the synthetic scene when the oracle produced
// the views) and `provider` are recorded in the manifest. Any IO failure leaves a manifest with
// "complete": false listing the files written so far and raises PersistenceError.
inline json write_artifacts(const pipeline::SceneArtifacts& art, const std::string& dir, const std::string& provider,
                            const std::optional<json>& scene = std::nullopt) {
    detail::ArtifactWriter w(dir);
    const std::string manifest_path = (w.root() / kManifestName).string();
    json manifest = {{"format", kManifestFormat}, {"version", kManifestVersion}, {"complete", false},
                     {"provider", provider}, {"scene", scene ? *scene : json(nullptr)}};
    try {
        w.text("config.json", detail::dump(json(art.config)));
        manifest["config"] = "config.json";
        json views = json::array();
        for (const auto& v : art.views) {
            const std::string image = "views/" + detail::view_name(v.index, ".png");
            const std::string mask = "masks/" + detail::view_name(v.index, ".png");
            const std::string known = "masks/" + detail::view_name(v.index, "_known.png");
            json rec = {{"index", v.index},
                        {"kind", pipeline::to_string(v.kind)},
                        {"pose", pose_to_json(v.pose)},
                        {"intrinsics", intrinsics_to_json(v.intrinsics)},
                        {"image", image},
                        {"mask", mask},
                        {"known", known}};
            w.bytes(image, encode_png_rgb(v.image));
            w.bytes(mask, encode_png_mask(v.supervision));
            w.bytes(known, encode_png_mask(v.known));
            if (v.depth) {
                const std::string depth = "depth/" + detail::view_name(v.index, ".f32");
                rec["depth"] = depth;
                w.bytes(depth, encode_f32(*v.depth));
                w.text("depth/" + detail::view_name(v.index, ".json"),
                       detail::dump({{"width", v.depth->width()}, {"height", v.depth->height()}, {"units", "meters"},
                                     {"encoding", "float32_le"}, {"kind", "z_depth"}}));
            }
            views.push_back(rec);
        }
        manifest["views"] = views;
        w.bytes("cloud_pN.ply", encode_point_ply(art.point_cloud));
        manifest["point_cloud"] = "cloud_pN.ply";
        w.bytes("gaussians_g0.ply", encode_splat_ply(art.g0));
        w.bytes("gaussians_g1.ply", encode_splat_ply(art.g1));
        manifest["gaussians"] = {{"g0", "gaussians_g0.ply"}, {"g1", "gaussians_g1.ply"}};
        w.text("report_stage1.json", detail::dump(stage1_report_to_json(art.stage1)));
        manifest["reports"] = {{"stage1", "report_stage1.json"}};
        if (art.g2) {
            w.bytes("gaussians_g2.ply", encode_splat_ply(*art.g2));
            manifest["gaussians"]["g2"] = "gaussians_g2.ply";
        }
        if (art.stage2) {
            w.text("report_stage2.json", detail::dump(stage2_report_to_json(*art.stage2)));
            manifest["reports"]["stage2"] = "report_stage2.json";
        }
        manifest["complete"] = art.g2.has_value() && art.stage2.has_value();
        w.text(kManifestName, detail::dump(manifest));
    } catch (const Error& e) {
        manifest["complete"] = false;
        manifest["written"] = w.written();
        manifest["error"] = e.what();
        try {
            write_text(manifest_path, detail::dump(manifest));
        } catch (const Error&) {
        }
        throw PersistenceError(std::string("writing artifacts failed: ") + e.what(), manifest_path);
    }
    return manifest;
}

inline json read_json_file(const std::filesystem::path& path, const char* what) {
    Bytes raw;
    try {
        raw = read_file(path.string());
    } catch (const FormatError&) {
        throw ManifestError(std::string(what) + " not found: " + path.string());
    }
    try {
        return json::parse(raw.begin(), raw.end());
    } catch (const json::exception& e) {
        throw ManifestError(std::string(what) + " is not valid JSON: " + e.what());
    }
}

struct LoadedView {
    int index = 0;
    pipeline::ViewKind kind = pipeline::ViewKind::initial;
    geometry::CameraPose pose;
    geometry::CameraIntrinsics intrinsics;
    ColorImage image;
    PixelMask supervision;
};

inline pipeline::ViewKind view_kind_from_string(const std::string& s) {
    using pipeline::ViewKind;
    for (auto k : {ViewKind::initial, ViewKind::anchor, ViewKind::refine, ViewKind::zoom}) {
        if (s == pipeline::to_string(k)) return k;
    }
    throw ManifestError("manifest: unknown view kind '" + s + "'");
}

// Parsed artifact directory. Throws ManifestError if the manifest or a file it lists is missing.
struct ArtifactSet {
    std::filesystem::path root;
    json manifest;
    pipeline::PipelineConfig config;
    std::vector<LoadedView> views;

    static ArtifactSet open(const std::string& dir) {
        ArtifactSet a;
        a.root = dir;
        a.manifest = read_json_file(a.root / kManifestName, "manifest");
        try {
            if (a.manifest.at("format") != kManifestFormat) throw ManifestError("manifest: unexpected format");
            if (!a.manifest.at("complete").get<bool>()) throw ManifestError("manifest: artifact set is incomplete");
            a.config = pipeline::config_from_json(read_json_file(a.root / a.manifest.at("config").get<std::string>(), "config"));
            for (const auto& v : a.manifest.at("views")) {
                LoadedView lv;
                lv.index = v.at("index").get<int>();
                lv.kind = view_kind_from_string(v.at("kind").get<std::string>());
                lv.pose = pose_from_json(v.at("pose"));
                lv.intrinsics = intrinsics_from_json(v.at("intrinsics"));
                lv.image = decode_png_rgb(a.file(v.at("image").get<std::string>()));
                lv.supervision = decode_png_mask(a.file(v.at("mask").get<std::string>()));
                a.views.push_back(std::move(lv));
            }
        } catch (const json::exception& e) {
            throw ManifestError(std::string("manifest: ") + e.what());
        } catch (const ConfigError& e) {
            throw ManifestError(std::string("manifest: ") + e.what());
        }
        return a;
    }

    Bytes file(const std::string& rel) const {
        try {
            return read_file((root / rel).string());
        } catch (const FormatError&) {
            throw ManifestError("artifact missing: " + (root / rel).string());
        }
    }

    bool has_stage(const std::string& stage) const {
        return manifest.contains("gaussians") && manifest["gaussians"].contains(stage);
    }

    splat::GaussianCloud gaussians(const std::string& stage) const {
        if (!has_stage(stage)) throw ManifestError("manifest: no gaussians for stage " + stage);
        return decode_splat_ply(file(manifest["gaussians"][stage].get<std::string>()));
    }

    std::string gaussians_path(const std::string& stage) const {
        if (!has_stage(stage)) throw ManifestError("manifest: no gaussians for stage " + stage);
        return (root / manifest["gaussians"][stage].get<std::string>()).string();
    }
};

}  // namespace gsscene::io
