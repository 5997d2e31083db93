#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "gsscene/io/artifacts.hpp"
#include "support.hpp"

using namespace gsscene;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GSSCENE_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

const char* kSmallConfig = R"({
  "width": 48, "height": 32, "anchor_count": 1, "refine_cameras_per_anchor": 1,
  "zoom_view_count": 1, "dilation_stage1": 3, "dilation_stage2": 2,
  "stage1_iterations": 5, "stage2_iterations": 5, "seed": 11
})";

}  // namespace

TEST(Cli, GenerateEvalExportRender) {
    const auto dir = test_support::temp_dir("cli_flow");
    write(dir / "cfg.json", kSmallConfig);
    const auto out = dir / "run";
    ASSERT_EQ(run_cli("generate --config " + (dir / "cfg.json").string() + " --prompt 'a quiet study' --out " + out.string()), 0);
    const auto manifest = io::read_json_file(out / "manifest.json", "manifest");
    EXPECT_TRUE(manifest.at("complete").get<bool>());
    EXPECT_EQ(io::read_json_file(out / "config.json", "config").at("prompt"), "a quiet study");

    EXPECT_EQ(run_cli("eval --artifacts " + out.string() + " --against-oracle"), 0);
    EXPECT_TRUE(fs::exists(out / "metrics.json"));

    const auto ply = dir / "g2.ply";
    EXPECT_EQ(run_cli("export --artifacts " + out.string() + " --stage g2 --out " + ply.string()), 0);
    EXPECT_EQ(io::read_file(ply.string()), io::read_file((out / "gaussians_g2.ply").string()));

    const auto png = dir / "view.png";
    EXPECT_EQ(run_cli("render --ply " + ply.string() + " --pose 10,0,0,0,0,0 --size 40x30 --out " + png.string()), 0);
    const auto img = io::decode_png_rgb(io::read_file(png.string()));
    EXPECT_EQ(img.width(), 40);
    EXPECT_EQ(img.height(), 30);
}

TEST(Cli, SeedOverrideIsRecorded) {
    const auto dir = test_support::temp_dir("cli_seed");
    write(dir / "cfg.json", kSmallConfig);
    ASSERT_EQ(run_cli("generate --config " + (dir / "cfg.json").string() + " --seed 12 --out " + (dir / "a").string()), 0);
    EXPECT_EQ(io::read_json_file(dir / "a" / "config.json", "config").at("seed"), 12);
}

TEST(Cli, ConfigErrorsExitWithTwo) {
    const auto dir = test_support::temp_dir("cli_config");
    write(dir / "bad.json", R"({"width": 48, "colour": 1})");
    write(dir / "broken.json", "{");
    write(dir / "small.json", R"({"width": 8})");
    EXPECT_EQ(run_cli("generate --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()), 2);
    EXPECT_EQ(run_cli("generate --config " + (dir / "broken.json").string() + " --out " + (dir / "o").string()), 2);
    EXPECT_EQ(run_cli("generate --config " + (dir / "small.json").string() + " --out " + (dir / "o").string()), 2);
    EXPECT_EQ(run_cli("generate --config " + (dir / "missing.json").string() + " --out " + (dir / "o").string()), 2);
    EXPECT_EQ(run_cli("generate --out " + (dir / "o").string()), 2);
    EXPECT_EQ(run_cli("render --ply x.ply --pose 1,2,3 --out x.png"), 2);
    EXPECT_EQ(run_cli("bogus"), 2);
}

TEST(Cli, UnreachableGatewayExitsWithThree) {
    const auto dir = test_support::temp_dir("cli_remote");
    write(dir / "cfg.json", kSmallConfig);
    EXPECT_EQ(run_cli("generate --config " + (dir / "cfg.json").string() +
                      " --provider remote --gateway-url http://127.0.0.1:1 --out " + (dir / "o").string()),
              3);
}

TEST(Cli, IoErrorsExitWithFour) {
    const auto dir = test_support::temp_dir("cli_io");
    EXPECT_EQ(run_cli("eval --artifacts " + (dir / "nothing").string()), 4);
    EXPECT_EQ(run_cli("export --artifacts " + (dir / "nothing").string() + " --stage g1 --out x.ply"), 4);
    write(dir / "bad.ply", "ply\nformat ascii 1.0\nend_header\n");
    EXPECT_EQ(run_cli("render --ply " + (dir / "bad.ply").string() + " --pose 0,0,0,0,0,0 --out " +
                      (dir / "x.png").string()),
              4);
    write(dir / "cfg.json", kSmallConfig);
    write(dir / "blocker", "file");
    EXPECT_EQ(run_cli("generate --config " + (dir / "cfg.json").string() + " --out " + (dir / "blocker").string()), 4);
}
