#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "reso/operators.hpp"

namespace reso {

struct ExpansionResult {
    int case_id = 0;
    bool zero_branch = false;  ///< case-4 sqrt(eps) branch
    int sign = +1;
    cd kappa0 = 0.0;
    cd kappa1 = 0.0;  ///< first-order coefficient (for the zero branch: the relative correction kappa_1)
    /// Leading and first-order coefficients of the discrete pencil itself (regime 4 only),
    /// obtained from its exact small-eps expansion rather than the closed forms above.
    cd kappa0_discrete = 0.0;
    cd kappa1_discrete = 0.0;
    std::map<std::string, double> intermediates;
    Vec phi_circ;  ///< case 2/3 leading boundary density

    /// Predicted resonance at scale eps.
    cd predict(double eps) const;
    /// Same with the discrete-pencil coefficients where available (regime 4), else predict().
    cd predict_discrete(double eps) const;
};

void to_json(nlohmann::json& j, const ExpansionResult& r);

/// Regime 1: soft velocity contrast, mode_index counts eigenvalues of N0 from the top.
ExpansionResult expand_case1(const Operators& ops, int mode_index = 0, int sign = +1);
/// Regime 2: Minnaert-type surface mode.
ExpansionResult expand_case2(const Operators& ops, int sign = +1);
/// Regime 3: mixed scaling.
ExpansionResult expand_case3(const Operators& ops, int sign = +1);
/// Regime 4: interior Neumann modes, mode_index counts distinct nu > 0 from the bottom.
ExpansionResult expand_case4(const Operators& ops, int mode_index = 0, int sign = +1);
/// Regime 4 zero-energy branch kappa = sign sqrt(rho) omega_M (1 + kappa_1 eps) sqrt(eps).
ExpansionResult expand_case4_zero(const Operators& ops, int sign = +1);

/// Relative gap under which neighbouring eigenvalues count as degenerate.
inline constexpr double kSimpleGap = 1e-6;

}  // namespace reso
