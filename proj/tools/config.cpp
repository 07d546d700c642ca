#include "config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace reso::cli {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

double number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError(key + ": expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& key) {
    if (!j.is_number_integer()) throw ConfigError(key + ": expected an integer");
    return j.get<int>();
}

std::vector<double> number_list(const json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError(key + ": expected an array");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(number(x, key));
    return out;
}

std::array<double, 2> range(const json& j, const std::string& key) {
    const auto v = number_list(j, key);
    if (v.size() != 2) throw ConfigError(key + ": expected [min, max]");
    return {v[0], v[1]};
}

void check_eps_list(const std::vector<double>& e) {
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!(e[i] > 0.0)) throw ConfigError("solver.eps_list: entries must be positive");
        if (i && !(e[i] < e[i - 1])) throw ConfigError("solver.eps_list: entries must be decreasing");
    }
}

}  // namespace

int SceneConfig::case_id() const {
    if (material_case == "fixed") return 0;
    return std::stoi(material_case);
}

SceneConfig parse_config(const json& j) {
    check_keys(j, "config", {"shape", "inclusions", "material", "solver", "output"});
    SceneConfig c;
    if (j.contains("shape")) {
        const json& s = j["shape"];
        check_keys(s, "shape", {"type", "path", "surface_n", "volume_n"});
        if (s.contains("type")) {
            if (!s["type"].is_string()) throw ConfigError("shape.type: expected a string");
            c.shape_type = s["type"].get<std::string>();
        }
        if (c.shape_type != "unit_sphere" && c.shape_type != "mesh")
            throw ConfigError("shape.type: must be \"unit_sphere\" or \"mesh\"");
        if (s.contains("path")) {
            if (!s["path"].is_string()) throw ConfigError("shape.path: expected a string");
            c.mesh_path = s["path"].get<std::string>();
        }
        if (c.shape_type == "mesh") {
            if (c.mesh_path.empty()) throw ConfigError("shape.path: required for mesh shapes");
            if (!std::filesystem::exists(c.mesh_path)) throw ConfigError("shape.path: file not found: " + c.mesh_path);
        }
        if (s.contains("surface_n")) c.surface_n = integer(s["surface_n"], "shape.surface_n");
        if (s.contains("volume_n")) c.volume_n = integer(s["volume_n"], "shape.volume_n");
        if (c.surface_n < 20) throw ConfigError("shape.surface_n: must be at least 20");
        if (c.volume_n < 1) throw ConfigError("shape.volume_n: must be positive");
    }
    if (j.contains("inclusions")) {
        const json& inc = j["inclusions"];
        if (!inc.is_array() || inc.empty()) throw ConfigError("inclusions: expected a nonempty array");
        c.centers.clear();
        for (const auto& e : inc) {
            check_keys(e, "inclusions[]", {"center"});
            if (!e.contains("center")) throw ConfigError("inclusions[]: missing center");
            const auto v = number_list(e["center"], "inclusions[].center");
            if (v.size() != 3) throw ConfigError("inclusions[].center: expected [x, y, z]");
            c.centers.emplace_back(v[0], v[1], v[2]);
        }
    }
    if (j.contains("material")) {
        const json& m = j["material"];
        check_keys(m, "material", {"case", "v2", "v12", "rho", "rho1", "rho_inf", "v_inf", "eps"});
        if (m.contains("case")) {
            const json& cs = m["case"];
            if (cs.is_string()) {
                if (cs.get<std::string>() != "fixed") throw ConfigError("material.case: must be 1, 2, 3, 4 or \"fixed\"");
                c.material_case = "fixed";
            } else if (cs.is_number_integer() && cs.get<int>() >= 1 && cs.get<int>() <= 4) {
                c.material_case = std::to_string(cs.get<int>());
            } else {
                throw ConfigError("material.case: must be 1, 2, 3, 4 or \"fixed\"");
            }
        }
        if (m.contains("v2")) {
            if (m["v2"].is_array()) c.v2_list = number_list(m["v2"], "material.v2");
            else c.v2 = number(m["v2"], "material.v2");
        }
        if (m.contains("rho")) {
            if (m["rho"].is_array()) c.rho_list = number_list(m["rho"], "material.rho");
            else c.rho = number(m["rho"], "material.rho");
        }
        if (m.contains("v12")) c.v12 = number(m["v12"], "material.v12");
        if (m.contains("rho1")) c.rho1 = number(m["rho1"], "material.rho1");
        if (m.contains("eps")) c.scene_eps = number(m["eps"], "material.eps");
        if (m.contains("rho_inf")) {
            if (!m["rho_inf"].is_boolean()) throw ConfigError("material.rho_inf: expected a boolean");
            c.rho_inf = m["rho_inf"].get<bool>();
        }
        if (m.contains("v_inf")) {
            if (!m["v_inf"].is_boolean()) throw ConfigError("material.v_inf: expected a boolean");
            c.v_inf = m["v_inf"].get<bool>();
        }
        if (!(c.scene_eps > 0.0)) throw ConfigError("material.eps: must be positive");
    }
    if (j.contains("solver")) {
        const json& s = j["solver"];
        check_keys(s, "solver", {"window", "grid", "eps_list", "tol_newton", "max_iters", "branch", "mode", "count",
                                 "kid_ratio", "kid_depth"});
        if (s.contains("window")) {
            check_keys(s["window"], "solver.window", {"re", "im"});
            if (!s["window"].contains("re") || !s["window"].contains("im"))
                throw ConfigError("solver.window: needs re and im ranges");
            SearchWindow w;
            const auto re = range(s["window"]["re"], "solver.window.re");
            const auto im = range(s["window"]["im"], "solver.window.im");
            w.re_min = re[0];
            w.re_max = re[1];
            w.im_min = im[0];
            w.im_max = im[1];
            c.window = w;
        }
        if (s.contains("grid")) {
            if (!c.window) c.window = SearchWindow{};
            const auto g = number_list(s["grid"], "solver.grid");
            if (g.size() != 2) throw ConfigError("solver.grid: expected [nx, ny]");
            c.window->n_re = static_cast<int>(g[0]);
            c.window->n_im = static_cast<int>(g[1]);
        }
        if (c.window) c.window->validate();
        if (s.contains("eps_list")) c.eps_list = number_list(s["eps_list"], "solver.eps_list");
        check_eps_list(c.eps_list);
        if (s.contains("tol_newton")) c.tol_newton = number(s["tol_newton"], "solver.tol_newton");
        if (s.contains("max_iters")) c.max_iters = integer(s["max_iters"], "solver.max_iters");
        if (s.contains("branch")) {
            if (!s["branch"].is_string()) throw ConfigError("solver.branch: expected a string");
            c.branch = s["branch"].get<std::string>();
            if (c.branch != "nu" && c.branch != "zero") throw ConfigError("solver.branch: must be \"nu\" or \"zero\"");
        }
        if (s.contains("mode")) c.mode = integer(s["mode"], "solver.mode");
        if (s.contains("count")) c.count = integer(s["count"], "solver.count");
        if (s.contains("kid_ratio")) c.kid_ratio = number(s["kid_ratio"], "solver.kid_ratio");
        if (s.contains("kid_depth")) c.kid_depth = integer(s["kid_depth"], "solver.kid_depth");
        if (!(c.tol_newton > 0.0)) throw ConfigError("solver.tol_newton: must be positive");
        if (c.max_iters < 1) throw ConfigError("solver.max_iters: must be positive");
        if (c.mode < 0 || c.count < 1) throw ConfigError("solver.mode/count: out of range");
    }
    if (j.contains("output")) {
        check_keys(j["output"], "output", {"dir"});
        if (j["output"].contains("dir")) {
            if (!j["output"]["dir"].is_string()) throw ConfigError("output.dir: expected a string");
            c.out_dir = j["output"]["dir"].get<std::string>();
        }
    }
    if (!c.v2_list.empty() && c.v2_list.size() != c.centers.size())
        throw ConfigError("material.v2: per-inclusion list length differs from inclusions");
    if (!c.rho_list.empty() && c.rho_list.size() != c.centers.size())
        throw ConfigError("material.rho: per-inclusion list length differs from inclusions");
    if (c.material_case != "fixed" && (!c.v2_list.empty() || !c.rho_list.empty()))
        throw ConfigError("material: per-inclusion lists need case \"fixed\"");
    return c;
}

SceneConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

std::vector<double> parse_eps_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ConfigError("--eps: bad number '" + item + "'");
        }
        if (used != item.size()) throw ConfigError("--eps: bad number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("--eps: empty list");
    check_eps_list(out);
    return out;
}

Scene build_scene(const SceneConfig& c) {
    Scene sc;
    if (c.shape_type == "mesh") {
        sc.surface = load_mesh(c.mesh_path);
        const int shells = std::max(1, static_cast<int>(std::lround(static_cast<double>(c.volume_n) / sc.surface.size())));
        sc.volume = make_mesh_volume_quadrature(sc.surface, shells);
    } else {
        sc.surface = make_unit_sphere_quadrature(c.surface_n);
        sc.volume = make_ball_volume_quadrature(c.volume_n);
    }
    sc.centers = c.centers;
    Material& m = sc.material;
    m.mode = static_cast<MaterialCase>(c.case_id());
    m.v2 = c.v2;
    m.v12 = c.v12;
    m.rho = c.rho;
    m.rho1 = c.rho1;
    m.fixed_v2 = c.v2_list;
    m.fixed_rho = c.rho_list;
    m.rho_inf = c.rho_inf;
    m.v_inf = c.v_inf;
    sc.eps = c.case_id() == 0 ? c.scene_eps : 1.0;
    sc.validate();
    return sc;
}

StaticOptions static_options(const SceneConfig& c) {
    StaticOptions o;
    o.kid_ratio = c.kid_ratio;
    o.kid_depth = c.kid_depth;
    return o;
}

}  // namespace reso::cli
