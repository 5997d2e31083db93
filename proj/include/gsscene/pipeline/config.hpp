#pragma once

#include <json.hpp>

#include <cstdint>
#include <set>
#include <string>

#include "gsscene/image.hpp"

namespace gsscene::pipeline {

// Every generation hyperparameter. Defaults are the full-scale settings; anchor_count in
// [7, 16] and refine_cameras_per_anchor in [3, 6] are the recommended ranges, smaller values
// are accepted for desk-scale runs.
struct PipelineConfig {
    std::string prompt = "a cozy living room";
    int width = 704;
    int height = 512;
    double fov_deg = 55.0;
    int anchor_count = 14;
    double anchor_step_deg = 25.0;
    int refine_cameras_per_anchor = 4;
    int zoom_view_count = 8;
    double zoom_fov_factor = 0.5;
    double refine_translation_radius = 0.15;
    double refine_rotation_jitter_deg = 5.0;
    int dilation_stage1 = 14;
    int dilation_stage2 = 5;
    int stage1_iterations = 1000;
    int stage2_iterations = 2000;
    double coverage_alpha_threshold = 0.5;
    int point_radius_px = 1;
    Vec3 background = Vec3::Zero();
    std::uint64_t seed = 0;

    int refine_view_count() const { return anchor_count * refine_cameras_per_anchor; }
    int total_view_count() const { return 1 + anchor_count + refine_view_count() + zoom_view_count; }

    void validate() const {
        auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
        if (width < 32 || height < 32) fail("width and height must be at least 32");
        if (!(fov_deg > 0 && fov_deg < 180)) fail("fov_deg must lie in (0, 180)");
        if (!(anchor_step_deg > 0 && anchor_step_deg < 180)) fail("anchor_step_deg must lie in (0, 180)");
        if (anchor_count < 0 || refine_cameras_per_anchor < 0 || zoom_view_count < 0) fail("view counts must be non-negative");
        if (!(zoom_fov_factor > 0 && zoom_fov_factor <= 1)) fail("zoom_fov_factor must lie in (0, 1]");
        if (!(refine_translation_radius >= 0)) fail("refine_translation_radius must be non-negative");
        if (!(refine_rotation_jitter_deg >= 0 && refine_rotation_jitter_deg < 180)) fail("refine_rotation_jitter_deg must lie in [0, 180)");
        if (dilation_stage1 < 0 || dilation_stage2 < 0) fail("dilation radii must be non-negative");
        if (stage1_iterations < 0 || stage2_iterations < 0) fail("iteration caps must be non-negative");
        if (!(coverage_alpha_threshold > 0 && coverage_alpha_threshold < 1)) fail("coverage_alpha_threshold must lie in (0, 1)");
        if (point_radius_px < 0) fail("point_radius_px must be non-negative");
        if (!((background.array() >= 0).all() && (background.array() <= 1).all())) fail("background must lie in [0, 1]");
    }
};

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
    j = {{"prompt", c.prompt},
         {"width", c.width},
         {"height", c.height},
         {"fov_deg", c.fov_deg},
         {"anchor_count", c.anchor_count},
         {"anchor_step_deg", c.anchor_step_deg},
         {"refine_cameras_per_anchor", c.refine_cameras_per_anchor},
         {"zoom_view_count", c.zoom_view_count},
         {"zoom_fov_factor", c.zoom_fov_factor},
         {"refine_translation_radius", c.refine_translation_radius},
         {"refine_rotation_jitter_deg", c.refine_rotation_jitter_deg},
         {"dilation_stage1", c.dilation_stage1},
         {"dilation_stage2", c.dilation_stage2},
         {"stage1_iterations", c.stage1_iterations},
         {"stage2_iterations", c.stage2_iterations},
         {"coverage_alpha_threshold", c.coverage_alpha_threshold},
         {"point_radius_px", c.point_radius_px},
         {"background", {c.background.x(), c.background.y(), c.background.z()}},
         {"seed", c.seed}};
}

// Missing keys keep their defaults; unknown keys and type mismatches are config errors.
inline PipelineConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    PipelineConfig c;
    const nlohmann::json defaults = c;
    for (const auto& [key, value] : j.items()) {
        if (!defaults.contains(key)) throw ConfigError("config: unknown key '" + key + "'");
    }
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
        };
        auto get_int = [&](const char* key, int& field) {
            if (!j.contains(key)) return;
            if (!j.at(key).is_number_integer()) throw ConfigError(std::string("config: '") + key + "' must be an integer");
            field = j.at(key).get<int>();
        };
        if (j.contains("prompt") && !j.at("prompt").is_string()) throw ConfigError("config: 'prompt' must be a string");
        get("prompt", c.prompt);
        get_int("width", c.width);
        get_int("height", c.height);
        get("fov_deg", c.fov_deg);
        get_int("anchor_count", c.anchor_count);
        get("anchor_step_deg", c.anchor_step_deg);
        get_int("refine_cameras_per_anchor", c.refine_cameras_per_anchor);
        get_int("zoom_view_count", c.zoom_view_count);
        get("zoom_fov_factor", c.zoom_fov_factor);
        get("refine_translation_radius", c.refine_translation_radius);
        get("refine_rotation_jitter_deg", c.refine_rotation_jitter_deg);
        get_int("dilation_stage1", c.dilation_stage1);
        get_int("dilation_stage2", c.dilation_stage2);
        get_int("stage1_iterations", c.stage1_iterations);
        get_int("stage2_iterations", c.stage2_iterations);
        get("coverage_alpha_threshold", c.coverage_alpha_threshold);
        get_int("point_radius_px", c.point_radius_px);
        if (j.contains("background")) {
            const auto& b = j.at("background");
            if (!b.is_array() || b.size() != 3) throw ConfigError("config: 'background' must be an RGB triple");
            c.background = Vec3(b[0].get<double>(), b[1].get<double>(), b[2].get<double>());
        }
        if (j.contains("seed")) {
            if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0)) {
                throw ConfigError("config: 'seed' must be a non-negative integer");
            }
            c.seed = j.at("seed").get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace gsscene::pipeline
