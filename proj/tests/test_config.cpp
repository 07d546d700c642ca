#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "commands.hpp"

using namespace reso;
using namespace reso::cli;
using nlohmann::json;

namespace {

json small_scene() {
    return json::parse(R"({"shape": {"type": "unit_sphere", "surface_n": 80, "volume_n": 256}})");
}

std::string temp_dir(const std::string& name) {
    const auto p = std::filesystem::path(::testing::TempDir()) / name;
    std::filesystem::remove_all(p);
    return p.string();
}

}  // namespace

TEST(Config, Defaults) {
    const SceneConfig c = parse_config(json::object());
    EXPECT_EQ(c.case_id(), 0);
    EXPECT_EQ(c.surface_n, 320);
    EXPECT_EQ(c.volume_n, 600);
    EXPECT_EQ(c.centers.size(), 1u);
    EXPECT_FALSE(c.window.has_value());
}

TEST(Config, FullDocument) {
    const SceneConfig c = parse_config(json::parse(R"({
        "shape": {"type": "unit_sphere", "surface_n": 80, "volume_n": 256},
        "inclusions": [{"center": [0, 0, 0]}, {"center": [3, 0, 0]}],
        "material": {"case": "fixed", "v2": [2.0, 3.0], "rho": 4.0, "eps": 0.3},
        "solver": {"window": {"re": [0.5, 2.0], "im": [-1.0, 0.0]}, "grid": [10, 9],
                   "eps_list": [0.08, 0.04], "tol_newton": 1e-10, "max_iters": 30},
        "output": {"dir": "somewhere"}})"));
    EXPECT_EQ(c.centers.size(), 2u);
    EXPECT_EQ(c.v2_list, (std::vector<double>{2.0, 3.0}));
    EXPECT_DOUBLE_EQ(c.rho, 4.0);
    EXPECT_DOUBLE_EQ(c.scene_eps, 0.3);
    ASSERT_TRUE(c.window.has_value());
    EXPECT_EQ(c.window->n_re, 10);
    EXPECT_EQ(c.window->n_im, 9);
    EXPECT_EQ(c.out_dir, "somewhere");
    const Scene sc = build_scene(c);
    EXPECT_EQ(sc.count(), 2u);
    EXPECT_DOUBLE_EQ(sc.eps, 0.3);
}

TEST(Config, RegimeSceneUsesUnitScale) {
    const SceneConfig c = parse_config(json::parse(R"({"material": {"case": 2, "rho": 2.0, "eps": 0.3}})"));
    EXPECT_EQ(c.case_id(), 2);
    EXPECT_DOUBLE_EQ(build_scene(c).eps, 1.0);
}

TEST(Config, Rejections) {
    const char* bad[] = {
        R"({"colour": 1})",
        R"({"shape": {"type": "cube"}})",
        R"({"shape": {"type": "mesh"}})",
        R"({"shape": {"type": "mesh", "path": "/nonexistent/mesh.off"}})",
        R"({"shape": {"surface_n": 10}})",
        R"({"material": {"case": 5}})",
        R"({"material": {"case": "soft"}})",
        R"({"material": {"v2": "fast"}})",
        R"({"material": {"eps": -1}})",
        R"({"material": {"case": 2, "rho": [1, 2]}})",
        R"({"inclusions": [{"center": [0, 0]}]})",
        R"({"inclusions": []})",
        R"({"material": {"rho": [1, 2]}})",
        R"({"solver": {"eps_list": [0.02, 0.04]}})",
        R"({"solver": {"eps_list": [0.04, 0.0]}})",
        R"({"solver": {"window": {"re": [2, 1], "im": [-1, 0]}}})",
        R"({"solver": {"window": {"re": [0, 1], "im": [-1, 0]}, "grid": [4, 4]}})",
        R"({"solver": {"branch": "other"}})",
        R"({"solver": {"max_iters": 0}})",
        R"({"output": {"dir": 3}})",
    };
    for (const char* doc : bad) EXPECT_THROW(parse_config(json::parse(doc)), ConfigError) << doc;
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, EpsList) {
    EXPECT_EQ(parse_eps_list("0.08,0.04,0.02"), (std::vector<double>{0.08, 0.04, 0.02}));
    EXPECT_THROW(parse_eps_list(""), ConfigError);
    EXPECT_THROW(parse_eps_list("0.04,0.08"), ConfigError);
    EXPECT_THROW(parse_eps_list("0.1,abc"), ConfigError);
    EXPECT_THROW(parse_eps_list("0.1x"), ConfigError);
    EXPECT_EQ(default_eps_list(4, "zero"), (std::vector<double>{0.04, 0.01, 0.0025}));
    EXPECT_EQ(default_eps_list(2, ""), (std::vector<double>{0.08, 0.04, 0.02}));
}

TEST(Config, LoadFromFile) {
    const std::string path = ::testing::TempDir() + "reso_cfg.json";
    std::ofstream(path) << small_scene().dump();
    EXPECT_EQ(load_config(path).surface_n, 80);
    std::ofstream(path) << "{ not json";
    EXPECT_THROW(load_config(path), ConfigError);
}

TEST(Commands, Oracles) {
    EXPECT_NEAR(neumann_ball_oracle(), 2.081575977818101 * 2.081575977818101, 1e-8);
    EXPECT_NEAR(newton_ball_top(), 0.40528473456935109, 1e-15);
}

TEST(Commands, FreeSceneScanIsEmpty) {
    json j = small_scene();
    j["material"] = {{"case", "fixed"}, {"v2", 1.0}, {"rho", 1.0}, {"eps", 0.1}};
    j["solver"] = {{"window", {{"re", {0.5, 2.5}}, {"im", {-1.0, 0.0}}}}, {"grid", {8, 8}}};
    SceneConfig c = parse_config(j);
    c.out_dir = temp_dir("reso_free");
    std::filesystem::create_directories(c.out_dir);
    const CommandResult r = cmd_resonances(c);
    EXPECT_TRUE(r.ok());
    const json out = r.to_json();
    EXPECT_EQ(out["command"], "resonances");
    EXPECT_TRUE(out["ok"].get<bool>());
    ASSERT_FALSE(r.files.empty());
    std::ifstream csv(r.files.front());
    std::string header, row;
    std::getline(csv, header);
    EXPECT_EQ(header.rfind("case,branch,eps,re_kappa,im_kappa", 0), 0u);
    EXPECT_FALSE(static_cast<bool>(std::getline(csv, row)));
}

TEST(Commands, ResonancesNeedAWindow) {
    json j = small_scene();
    j["material"] = {{"case", "fixed"}, {"v2", 2.0}, {"rho", 3.0}};
    SceneConfig c = parse_config(j);
    c.out_dir = temp_dir("reso_nowin");
    EXPECT_THROW(cmd_resonances(c), ConfigError);
}

TEST(Commands, IdentitiesOnSmallMesh) {
    SceneConfig c = parse_config(small_scene());
    c.out_dir = temp_dir("reso_ident");
    std::filesystem::create_directories(c.out_dir);
    const CommandResult r = cmd_identities(c);
    EXPECT_GE(r.checks.size(), 5u);
    for (const Check& ch : r.checks) {
        EXPECT_TRUE(ch.pass) << ch.name << " " << ch.value;
        EXPECT_LE(ch.value, ch.threshold) << ch.name;
    }
}

TEST(Commands, DumpWritesPencil) {
    json j = small_scene();
    j["material"] = {{"case", "fixed"}, {"v2", 2.0}, {"rho", 3.0}};
    SceneConfig c = parse_config(j);
    c.out_dir = temp_dir("reso_dump");
    std::filesystem::create_directories(c.out_dir);
    const CommandResult r = cmd_dump(c, cd(1.0, -0.1));
    ASSERT_EQ(r.files.size(), 1u);
    std::ifstream in(r.files.front());
    std::size_t lines = 0;
    for (std::string s; std::getline(in, s);) ++lines;
    const Scene sc = build_scene(c);
    const std::size_t n = sc.surface.size() + sc.volume.size();
    EXPECT_EQ(lines, n * n);
}
