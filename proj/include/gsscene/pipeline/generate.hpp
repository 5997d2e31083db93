#pragma once

#include <optional>
#include <string>

#include "gsscene/io/artifacts.hpp"
#include "gsscene/pipeline/stages.hpp"

namespace gsscene::pipeline {

// Both stages end to end, persisted to `output_dir`.
inline SceneArtifacts generate(const PipelineConfig& cfg, providers::Provider& provider, const std::string& output_dir,
                               const std::string& provider_name, const std::optional<nlohmann::json>& scene = std::nullopt,
                               const TrainingOptions& opts = {}) {
    SceneArtifacts art = run_pipeline(cfg, provider, opts);
    io::write_artifacts(art, output_dir, provider_name, scene);
    return art;
}

}  // namespace gsscene::pipeline
