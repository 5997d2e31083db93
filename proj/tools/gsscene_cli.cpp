#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "gsscene/io/eval.hpp"
#include "gsscene/pipeline/generate.hpp"
#include "gsscene/providers/remote.hpp"
#include "gsscene/providers/synthetic.hpp"

namespace {

using namespace gsscene;

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kProvider = 3, kIo = 4 };

pipeline::PipelineConfig load_config(const std::string& path) {
    io::Bytes raw;
    try {
        raw = io::read_file(path);
    } catch (const FormatError& e) {
        throw ConfigError(e.what());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(raw.begin(), raw.end());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return pipeline::config_from_json(j);
}

std::vector<double> parse_numbers(const std::string& text, std::size_t count, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(std::string(what) + ": '" + item + "' is not a number");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.size() != count) throw ConfigError(std::string(what) + ": expected " + std::to_string(count) + " values");
    return out;
}

int run_generate(const std::string& config_path, const std::optional<std::string>& prompt,
                 const std::string& provider_kind, const std::string& gateway_url, const std::optional<std::uint64_t>& seed,
                 const std::string& out) {
    auto cfg = load_config(config_path);
    if (prompt) cfg.prompt = *prompt;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    if (provider_kind == "synthetic") {
        const auto scene = providers::SyntheticSceneSpec::from_seed(cfg.seed);
        providers::OracleProvider provider(scene);
        pipeline::generate(cfg, provider, out, provider_kind, nlohmann::json(scene));
    } else {
        providers::RemoteConfig rc;
        rc.base_url = gateway_url;
        providers::RemoteProvider provider(rc);
        pipeline::generate(cfg, provider, out, provider_kind);
    }
    std::cout << "artifacts written to " << out << "\n";
    return kOk;
}

int run_eval(const std::string& dir, bool against_oracle) {
    std::optional<providers::SyntheticSceneSpec> scene;
    if (against_oracle) {
        scene = io::recorded_scene(dir);
        if (!scene) throw ManifestError("--against-oracle: artifacts were not produced by the synthetic provider");
    }
    const auto report = io::run_eval(dir, scene);
    for (const auto& s : report.stages) {
        std::printf("%s  training PSNR %.3f dB  SSIM %.4f  all-view PSNR %.3f dB  SSIM %.4f", s.stage.c_str(),
                    s.mean_psnr_training, s.mean_ssim_training, s.mean_psnr_all, s.mean_ssim_all);
        if (s.mean_psnr_oracle) std::printf("  oracle PSNR %.3f dB  SSIM %.4f", *s.mean_psnr_oracle, *s.mean_ssim_oracle);
        std::printf("\n");
    }
    return kOk;
}

int run_render(const std::string& ply, const std::string& pose_text, double fov, const std::string& size,
               const std::string& out) {
    const auto p = parse_numbers(pose_text, 6, "--pose");
    std::smatch m;
    static const std::regex kSize(R"((\d+)x(\d+))");
    if (!std::regex_match(size, m, kSize)) throw ConfigError("--size must look like WxH");
    const int w = std::stoi(m[1]);
    const int h = std::stoi(m[2]);
    if (w < 1 || h < 1) throw ConfigError("--size must be positive");
    if (!(fov > 0 && fov < 180)) throw ConfigError("--fov must lie in (0, 180)");
    const auto cloud = io::import_ply(ply);
    const auto pose = geometry::CameraPose::from_center(geometry::euler_rotation(p[0], p[1], p[2]), Vec3(p[3], p[4], p[5]));
    const auto render = splat::rasterize(cloud, pose, geometry::intrinsics_from_fov(fov, w, h), {});
    io::write_file(out, io::encode_png_rgb(render.image));
    return kOk;
}

int run_export(const std::string& dir, const std::string& stage, const std::string& out) {
    const auto set = io::ArtifactSet::open(dir);
    io::write_file(out, set.file(set.manifest["gaussians"].value(stage, std::string())));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-to-scene Gaussian splatting"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "run both stages and write an artifact directory");
    std::string config_path, provider_kind = "synthetic", gateway_url = "http://127.0.0.1:8000", gen_out;
    std::optional<std::string> prompt;
    std::optional<std::uint64_t> seed;
    gen->add_option("--config", config_path, "pipeline config JSON")->required();
    gen->add_option("--prompt", prompt, "override the configured prompt");
    gen->add_option("--provider", provider_kind, "synthetic or remote")->check(CLI::IsMember({"synthetic", "remote"}));
    gen->add_option("--gateway-url", gateway_url, "model gateway base URL");
    gen->add_option("--seed", seed, "override the configured seed");
    gen->add_option("--out", gen_out, "output directory")->required();

    auto* ev = app.add_subcommand("eval", "score G_0, G_1 and G_2 of an artifact directory");
    std::string eval_dir;
    bool against_oracle = false;
    ev->add_option("--artifacts", eval_dir, "artifact directory")->required();
    ev->add_flag("--against-oracle", against_oracle, "also compare with fresh renders of the recorded synthetic scene");

    auto* ren = app.add_subcommand("render", "render a splat PLY from a camera");
    std::string ply, pose_text, size = "704x512", ren_out;
    double fov = 55.0;
    ren->add_option("--ply", ply, "splat PLY")->required();
    ren->add_option("--pose", pose_text, "yaw,pitch,roll in degrees then the camera center tx,ty,tz")->required();
    ren->add_option("--fov", fov, "vertical field of view in degrees");
    ren->add_option("--size", size, "WxH");
    ren->add_option("--out", ren_out, "output PNG")->required();

    auto* exp = app.add_subcommand("export", "copy a stage's Gaussians out of an artifact directory");
    std::string exp_dir, stage, exp_out;
    exp->add_option("--artifacts", exp_dir, "artifact directory")->required();
    exp->add_option("--stage", stage, "g1 or g2")->required()->check(CLI::IsMember({"g1", "g2"}));
    exp->add_option("--out", exp_out, "output PLY")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*gen) return run_generate(config_path, prompt, provider_kind, gateway_url, seed, gen_out);
        if (*ev) return run_eval(eval_dir, against_oracle);
        if (*ren) return run_render(ply, pose_text, fov, size, ren_out);
        if (*exp) return run_export(exp_dir, stage, exp_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const TransportError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kProvider;
    } catch (const ProtocolError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kProvider;
    } catch (const ContractViolation& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kProvider;
    } catch (const PersistenceError& e) {
        std::cerr << "io error: " << e.what() << " (manifest: " << e.manifest_path() << ")\n";
        return kIo;
    } catch (const FormatError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIo;
    } catch (const ManifestError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOther;
}
