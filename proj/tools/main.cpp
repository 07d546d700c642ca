#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

using namespace reso;
using namespace reso::cli;

namespace {

struct Flags {
    std::string config, eps, out, kappa = "1,0";
    int case_id = 0;
    bool quiet = false;
};

SceneConfig resolve(const Flags& f) {
    SceneConfig c = f.config.empty() ? parse_config(nlohmann::json::object()) : load_config(f.config);
    if (f.case_id) {
        if (f.case_id < 1 || f.case_id > 4) throw ConfigError("--case: must be 1, 2, 3 or 4");
        if (!c.v2_list.empty() || !c.rho_list.empty()) throw ConfigError("--case: config has per-inclusion materials");
        c.material_case = std::to_string(f.case_id);
    }
    if (!f.eps.empty()) c.eps_list = parse_eps_list(f.eps);
    if (!f.out.empty()) c.out_dir = f.out;
    return c;
}

cd parse_kappa(const std::string& s) {
    const auto comma = s.find(',');
    try {
        if (comma == std::string::npos) return {std::stod(s), 0.0};
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ConfigError("--kappa: expected re,im");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resonances of small acoustic inclusions"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config, "scene JSON document")->check(CLI::ExistingFile);
    app.add_option("--case", f.case_id, "material regime 1-4 (overrides the config)");
    app.add_option("--eps", f.eps, "comma-separated decreasing eps list");
    app.add_option("--out", f.out, "output directory");
    app.add_flag("--quiet", f.quiet, "only warnings and errors on stderr");

    const std::vector<std::pair<std::string, std::string>> names = {
        {"identities", "layer-potential identity suite"},
        {"minnaert", "Minnaert data of the reference inclusion"},
        {"spectrum", "top eigenpairs of the Newton potential"},
        {"neumann", "interior Neumann eigenpairs of the limit problem"},
        {"resonances", "resonance sweep (regime) or window scan (fixed material)"},
        {"compare", "direct resonances against the asymptotic expansion"},
        {"dump", "write the pencil at one kappa"}};
    for (const auto& [n, d] : names) {
        auto* sub = app.add_subcommand(n, d);
        sub->fallthrough();
        if (n == "dump") sub->add_option("--kappa", f.kappa, "wavenumber re,im");
    }
    CLI11_PARSE(app, argc, argv);
    spdlog::set_default_logger(spdlog::stderr_color_mt("resolab"));
    spdlog::set_level(f.quiet ? spdlog::level::warn : spdlog::level::info);

    const std::string cmd = app.get_subcommands().front()->get_name();
    CommandResult res;
    res.command = cmd;
    int code = 0;
    try {
        const SceneConfig cfg = resolve(f);
        if (cmd == "identities") res = cmd_identities(cfg);
        else if (cmd == "minnaert") res = cmd_minnaert(cfg);
        else if (cmd == "spectrum") res = cmd_spectrum(cfg);
        else if (cmd == "neumann") res = cmd_neumann(cfg);
        else if (cmd == "resonances") res = cmd_resonances(cfg);
        else if (cmd == "compare") res = cmd_compare(cfg);
        else res = cmd_dump(cfg, parse_kappa(f.kappa));
        for (const auto& c : res.checks)
            spdlog::info("{} {}: {:.3e} (threshold {:.1e}) {}", c.pass ? "PASS" : "FAIL", c.name, c.value, c.threshold,
                         c.detail);
        code = res.ok() ? 0 : 1;
        std::filesystem::create_directories(cfg.out_dir);
        const std::string path = cfg.out_dir + "/" + cmd + "_summary.json";
        res.files.push_back(path);
        std::ofstream(path) << res.to_json().dump(2) << '\n';
    } catch (const ConfigError& e) {
        spdlog::error("configuration: {}", e.what());
        res.summary["error"] = std::string("configuration: ") + e.what();
        code = 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        res.summary["error"] = e.what();
        code = 1;
    }
    nlohmann::json j = res.to_json();
    if (code != 0) j["ok"] = false;
    std::cout << j.dump(2) << std::endl;
    return code;
}
