#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "reso/asymptotics.hpp"
#include "reso/resonance_finder.hpp"

using namespace reso;

TEST(Asymptotics, Regime1PureVelocity) {
    const Operators ops = fixtures::ball_scene(fixtures::regime(1));
    const ExpansionResult r = expand_case1(ops);
    EXPECT_EQ(r.kappa1.real(), 0.0);  // the trace term drops exactly when rho_1 = v_1 = 0
    EXPECT_EQ(r.kappa0.imag(), 0.0);
    const auto ref = oracle::radial_newton_top();
    EXPECT_NEAR(r.kappa0.real(), 1.0 / std::sqrt(ref.lambda), 1e-2 / std::sqrt(ref.lambda));
    const double im_ref = -ref.mean * ref.mean / (8.0 * oracle::kPi * ref.lambda * ref.lambda);
    EXPECT_NEAR(r.kappa1.imag(), im_ref, 2e-2 * std::abs(im_ref));
    EXPECT_NEAR(r.intermediates.at("lambda"), ref.lambda, 1e-2 * ref.lambda);
}

TEST(Asymptotics, Regime1DensityTermIsOdd) {
    const ExpansionResult a = expand_case1(fixtures::ball_scene(fixtures::regime(1, 1.0, 1.0, 0.0, 0.3)));
    const ExpansionResult b = expand_case1(fixtures::ball_scene(fixtures::regime(1, 1.0, 1.0, 0.0, -0.3)));
    EXPECT_NEAR(a.kappa1.real(), -b.kappa1.real(), 1e-14);
    EXPECT_NEAR(a.kappa1.imag(), b.kappa1.imag(), 1e-14);
    EXPECT_GT(std::abs(a.kappa1.real()), 0.0);
}

TEST(Asymptotics, Regime1BranchAntisymmetry) {
    const Operators ops = fixtures::ball_scene(fixtures::regime(1, 1.5, 1.0, 0.2, 0.1));
    const ExpansionResult p = expand_case1(ops, 0, +1), m = expand_case1(ops, 0, -1);
    EXPECT_NEAR(p.predict(0.1).real(), -m.predict(0.1).real(), 1e-14);
    EXPECT_NEAR(p.kappa1.real(), -m.kappa1.real(), 1e-14);
    EXPECT_NEAR(p.kappa1.imag(), m.kappa1.imag(), 1e-14);
    EXPECT_LE(p.kappa1.imag(), 0.0);
    EXPECT_THROW(expand_case1(ops, 0, 2), std::invalid_argument);
}

TEST(Asymptotics, Regime1RejectsDegenerateMode) {
    // the second N0 eigenvalue of the ball belongs to the threefold l = 1 multiplet
    EXPECT_THROW(expand_case1(fixtures::ball_scene(fixtures::regime(1)), 1), DomainError);
}

TEST(Asymptotics, Regime2BallValues) {
    const ExpansionResult r = expand_case2(fixtures::ball_scene(fixtures::regime(2)));
    EXPECT_NEAR(r.kappa0.real(), std::sqrt(3.0), 1e-2 * std::sqrt(3.0));
    EXPECT_NEAR(r.kappa1.imag(), -1.5, 0.03 * 1.5);
    EXPECT_NEAR(r.kappa1.real(), 0.0, 1e-15);
}

TEST(Asymptotics, Regime2Scalings) {
    const ExpansionResult a = expand_case2(fixtures::ball_scene(fixtures::regime(2)));
    const ExpansionResult b = expand_case2(fixtures::ball_scene(fixtures::regime(2, 1.0, 4.0)));
    EXPECT_NEAR(b.kappa0.real(), 2.0 * a.kappa0.real(), 1e-12);
    EXPECT_NEAR(b.kappa1.imag(), 4.0 * a.kappa1.imag(), 1e-12);
    const ExpansionResult c = expand_case2(fixtures::ball_scene(fixtures::regime(2, 1.0, 1.0, 0.6)));
    EXPECT_NEAR(c.kappa1.real() - a.kappa1.real(), 0.3 * a.kappa0.real(), 1e-12);
    EXPECT_NEAR(c.kappa1.imag(), a.kappa1.imag(), 1e-14);
    const ExpansionResult m = expand_case2(fixtures::ball_scene(fixtures::regime(2, 1.0, 1.0, 0.6)), -1);
    EXPECT_NEAR(m.kappa1.real(), -c.kappa1.real(), 1e-14);
    EXPECT_NEAR(m.kappa1.imag(), c.kappa1.imag(), 1e-14);
}

TEST(Asymptotics, Regime3LeadingTermAndLinearity) {
    const ExpansionResult two = expand_case2(fixtures::ball_scene(fixtures::regime(2, 1.0, 2.0)));
    const ExpansionResult three = expand_case3(fixtures::ball_scene(fixtures::regime(3, 2.25, 2.0)));
    EXPECT_NEAR(three.kappa0.real(), 1.5 * two.kappa0.real(), 1e-12);
    // rho_1 enters linearly: the second difference vanishes, the first is the slope
    auto k1 = [](double rho1) { return expand_case3(fixtures::ball_scene(fixtures::regime(3, 1.0, 1.0, 0.0, rho1))).kappa1; };
    const cd lo = k1(-0.2), mid = k1(0.0), hi = k1(0.2);
    EXPECT_LE(std::abs(hi - 2.0 * mid + lo), 1e-10 * std::abs(mid));
    EXPECT_GT(std::abs(hi - lo), 1e-6);
}

TEST(Asymptotics, Regime3SweepMatchesExpansion) {
    // the remainder against the closed form saturates near 8e-4 (kappa_0 of the discrete pencil sits
    // 4e-4 below sqrt(v^2 rho) omega_M), so compare fitted coefficients instead of a slope
    const Operators ops = fixtures::ball_scene(fixtures::regime(3));
    const ExpansionResult ex = expand_case3(ops);
    const std::vector<double> eps{0.08, 0.04, 0.02, 0.01};
    const SweepResult s = sweep([&](double e) { return make_pencil(ops, e, 3); }, eps, ex.predict(0.08),
                                [&](double e) { return ex.predict(e); }, {}, [&](double e) { return ex.predict(e); });
    std::vector<double> re, im;
    for (const auto& r : s.branch) {
        EXPECT_LT(r.kappa.imag(), 1e-6);
        EXPECT_LE(r.residual, 1e-8);
        re.push_back(r.kappa.real());
        im.push_back(r.kappa.imag());
    }
    const auto cr = polyfit(eps, re, 2), ci = polyfit(eps, im, 2);
    EXPECT_NEAR(cr[0], ex.kappa0.real(), 1e-3 * ex.kappa0.real());
    EXPECT_NEAR(std::abs(ci[0]), 0.0, 1e-4);
    EXPECT_NEAR(cr[1], ex.kappa1.real(), 0.05 * std::abs(ex.kappa1));
    EXPECT_NEAR(ci[1], ex.kappa1.imag(), 0.05 * std::abs(ex.kappa1));
}

TEST(Asymptotics, Regime4NeumannBranch) {
    const Operators ops = fixtures::ball_scene(fixtures::regime(4));
    const ExpansionResult r = expand_case4(ops);
    const double nu = r.intermediates.at("nu");
    EXPECT_NEAR(r.kappa0.real(), std::sqrt(nu), 1e-12);
    // v_1 = 0: kappa^(1) = (1/2) sqrt(nu) rho v <gamma_0 u, phi>
    EXPECT_NEAR(r.kappa1.real(), 0.5 * std::sqrt(nu) * r.intermediates.at("gamma0u_phi"), 1e-12);
    EXPECT_EQ(r.kappa1.imag(), 0.0);
    EXPECT_LE(r.intermediates.at("scalar_spread"), 1e-8);
    // the discrete first-order coefficient stays close to the closed form
    EXPECT_NEAR(r.kappa1_discrete.real(), r.kappa1.real(), 0.1 * std::abs(r.kappa1.real()));
    const ExpansionResult v1 = expand_case4(fixtures::ball_scene(fixtures::regime(4, 1.0, 1.0, 0.5)));
    EXPECT_NEAR(r.kappa1.real() - v1.kappa1.real(), 0.25 * std::sqrt(nu), 1e-12);
}

TEST(Asymptotics, Regime4ZeroBranch) {
    const Operators ops = fixtures::ball_scene(fixtures::regime(4));
    const ExpansionResult r = expand_case4_zero(ops);
    EXPECT_TRUE(r.zero_branch);
    EXPECT_NEAR(r.kappa0.real(), std::sqrt(ops.minnaert().omega2), 1e-12);
    EXPECT_NEAR(r.kappa0_discrete.real(), r.kappa0.real(), 1e-2 * r.kappa0.real());
    // kappa_1 is linear in rho (both eps-derivatives carry the factor 2 rho)
    const ExpansionResult r2 = expand_case4_zero(fixtures::ball_scene(fixtures::regime(4, 1.0, 2.0)));
    EXPECT_NEAR(r2.kappa1.real(), 2.0 * r.kappa1.real(), 1e-10 * std::abs(r.kappa1.real()));
    // prediction on the branch: kappa / sqrt(eps) -> +-sqrt(rho) omega_M
    EXPECT_NEAR(std::abs(r.predict(1e-8) / 1e-4 - r.kappa0), 0.0, 1e-6);
    const ExpansionResult m = expand_case4_zero(ops, -1);
    EXPECT_NEAR(std::abs(m.predict(0.01) + r.predict(0.01)), 0.0, 1e-14);
}

TEST(Asymptotics, JsonCarriesIntermediates) {
    const ExpansionResult r = expand_case2(fixtures::ball_scene(fixtures::regime(2)));
    nlohmann::json j;
    to_json(j, r);
    EXPECT_EQ(j["case"], 2);
    EXPECT_TRUE(j["intermediates"].contains("omega_M"));
    EXPECT_TRUE(j["intermediates"].contains("c_Omega"));
    EXPECT_FALSE(j.contains("kappa1_discrete"));
}
