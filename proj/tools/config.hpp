#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reso/geometry.hpp"
#include "reso/operators.hpp"
#include "reso/resonance_finder.hpp"

namespace reso::cli {

/// Scene plus solver knobs, as read from one JSON document.
struct SceneConfig {
    std::string shape_type = "unit_sphere";  ///< unit_sphere | mesh
    std::string mesh_path;
    int surface_n = 320;
    int volume_n = 600;
    std::vector<Vec3> centers{Vec3::Zero()};
    double scene_eps = 1.0;  ///< inclusion scale for fixed materials

    std::string material_case = "fixed";  ///< "1".."4" or "fixed"
    double v2 = 1.0, v12 = 0.0, rho = 1.0, rho1 = 0.0;
    std::vector<double> v2_list, rho_list;
    bool rho_inf = false, v_inf = false;

    std::optional<SearchWindow> window;
    std::vector<double> eps_list;
    double tol_newton = 1e-12;
    int max_iters = 25;
    std::string branch = "nu";  ///< regime 4: nu | zero
    int mode = 0;               ///< regime 1/4 mode index
    int count = 6;              ///< eigenpairs for spectrum / neumann
    double kid_ratio = 1.0;
    int kid_depth = 1;

    std::string out_dir = "out";

    int case_id() const;  ///< 0 for fixed
};

/// Parses and validates; throws ConfigError with the offending key.
SceneConfig parse_config(const nlohmann::json& j);
SceneConfig load_config(const std::string& path);

/// Parses a comma-separated list of positive decreasing numbers.
std::vector<double> parse_eps_list(const std::string& s);

/// Builds the reference scene (eps = 1 in regime mode, scene_eps otherwise).
Scene build_scene(const SceneConfig& c);
StaticOptions static_options(const SceneConfig& c);

}  // namespace reso::cli
