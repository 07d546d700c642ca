#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "reso/asymptotics.hpp"

namespace reso::cli {

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string detail;
};

struct CommandResult {
    std::string command;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<Check> checks;
    std::vector<std::string> files;  ///< outputs written

    bool ok() const;
    /// summary plus the checks, files and overall status.
    nlohmann::json to_json() const;
};

/// Result of following one asymptotic branch over the eps list.
struct BranchRun {
    int case_id = 0;
    std::string branch;  ///< "" or "nu" / "zero" in regime 4
    ExpansionResult expansion;
    std::vector<double> eps;
    std::vector<Resonance> direct;
    std::vector<cd> predicted, predicted_discrete;
    std::vector<double> gap, gap_discrete;
    std::vector<double> param;     ///< eps, or sqrt(eps) on the zero branch
    std::vector<double> remainder; ///< quantity whose log-log slope is reported
    double order = 0.0;            ///< fitted remainder order in param
    double order_formula = 0.0;    ///< same against the closed-form prediction
};

/// Default eps list of a regime when the config has none.
std::vector<double> default_eps_list(int case_id, const std::string& branch);

BranchRun run_branch(const SceneConfig& cfg, const Operators& ops);

CommandResult cmd_identities(const SceneConfig& cfg);
CommandResult cmd_minnaert(const SceneConfig& cfg);
CommandResult cmd_spectrum(const SceneConfig& cfg);
CommandResult cmd_neumann(const SceneConfig& cfg);
CommandResult cmd_resonances(const SceneConfig& cfg);
CommandResult cmd_compare(const SceneConfig& cfg);
/// Writes the pencil at kappa (fixed material) as `i j re im` lines.
CommandResult cmd_dump(const SceneConfig& cfg, cd kappa);

/// (first positive root of j_1')^2, by bisection on the derivative of the spherical Bessel function.
double neumann_ball_oracle();
/// Top eigenvalue of the unit-ball Newton potential, 4 / pi^2.
double newton_ball_top();

}  // namespace reso::cli
