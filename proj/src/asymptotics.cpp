#include "reso/asymptotics.hpp"

#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace reso {

cd ExpansionResult::predict(double eps) const {
    if (zero_branch) return static_cast<double>(sign) * kappa0 * (1.0 + kappa1 * eps) * std::sqrt(eps);
    return static_cast<double>(sign) * kappa0 + kappa1 * eps;
}

cd ExpansionResult::predict_discrete(double eps) const {
    if (case_id != 4) return predict(eps);
    if (zero_branch)
        return static_cast<double>(sign) * kappa0_discrete * (1.0 + kappa1_discrete * eps) * std::sqrt(eps);
    return static_cast<double>(sign) * kappa0_discrete + kappa1_discrete * eps;
}

void to_json(nlohmann::json& j, const ExpansionResult& r) {
    auto cplx = [](cd z) { return nlohmann::json::array({z.real(), z.imag()}); };
    j = nlohmann::json{{"case", r.case_id},
                       {"zero_branch", r.zero_branch},
                       {"sign", r.sign},
                       {"kappa0", cplx(r.kappa0)},
                       {"kappa1", cplx(r.kappa1)},
                       {"intermediates", r.intermediates}};
    if (r.case_id == 4) {
        j["kappa0_discrete"] = cplx(r.kappa0_discrete);
        j["kappa1_discrete"] = cplx(r.kappa1_discrete);
    }
}

namespace {

void check_sign(int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("expansion: branch sign must be +1 or -1");
}

double dot_w(const Vec& w, const Vec& a, const Vec& b) { return w.dot(a.cwiseProduct(b)); }

CVec solve_perp_complex(const Operators& ops, const CVec& b) {
    Mat rhs(b.size(), 2);
    rhs.col(0) = b.real();
    rhs.col(1) = b.imag();
    const Mat x = ops.solve_perp(rhs);
    return x.col(0).cast<cd>() + kI * x.col(1).cast<cd>();
}


/// d kappa / d eps at eps = 0 of the regime-4 pencil along a Neumann branch: with right null
/// vectors X = (U, F) of the limit pencil M0 and left null vectors Y, the derivative is the
/// (scalar) eigenvalue of -(Y^T M_kappa X)^{-1} (Y^T M_eps X).
cd neumann_branch_slope(const Operators& ops, double nu, double k0, const Mat& U, const Mat& F) {
    const Material& mat = ops.scene().material;
    const StaticBlocks& sb = ops.blocks();
    const Vec& wv = ops.scene().volume.weights;
    const Vec& ws = ops.scene().surface.weights;
    const Eigen::Index nv = wv.size(), ns = ws.size(), n = nv + ns, m = U.cols();
    const double v2 = mat.v2, rho = mat.rho;
    Mat M0(n, n);
    M0.topLeftCorner(nv, nv) = -k0 * k0 * sb.N0;
    M0.topLeftCorner(nv, nv).diagonal().array() += v2;
    M0.topRightCorner(nv, ns) = -k0 * k0 * sb.SLv;
    M0.bottomLeftCorner(ns, nv) = sb.B0;
    M0.bottomRightCorner(ns, ns) = sb.K0s;
    M0.bottomRightCorner(ns, ns).diagonal().array() += 0.5;
    // left null space by block inverse iteration on M0^T
    RealLU lu(Mat(M0.transpose()));
    Mat Y(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < n; ++i) Y(i, j) = std::cos(0.7 * static_cast<double>(i + 1) * static_cast<double>(j + 1));
    for (int it = 0; it < 3; ++it) {
        if (!lu.singular()) Y = lu.solve(Y);
        Y = Eigen::HouseholderQR<Mat>(Y).householderQ() * Mat::Identity(n, m);
    }
    Mat X(n, m);
    X.topRows(nv) = U;
    X.bottomRows(ns) = F;
    // M_kappa X = -2 k0 (N0 U + SLv F) = -2 k0 U / nu on the null space
    const CMat A = (-2.0 * k0 / nu) * (Y.topRows(nv).transpose() * U).cast<cd>();
    CMat MeX(n, m);
    const CVec one_v = CVec::Ones(nv);
    for (Eigen::Index j = 0; j < m; ++j) {
        const cd fl = (kI / kFourPi) * (wv.dot(U.col(j)) + ws.dot(F.col(j)));
        MeX.col(j).head(nv) = (mat.v12 * U.col(j)).cast<cd>() - k0 * k0 * k0 * fl * one_v;
        MeX.col(j).tail(ns) = (-2.0 * rho * (sb.B0 * U.col(j) + sb.K0s * F.col(j))).cast<cd>();
    }
    const CMat B = Y.cast<cd>().transpose() * MeX;
    const CMat K = -A.fullPivLu().solve(B);
    const cd mean = K.trace() / static_cast<double>(m);
    const double spread = (K - mean * CMat::Identity(m, m)).norm();
    if (spread > 1e-4 * std::abs(mean))
        spdlog::warn("neumann_branch_slope: non-scalar first-order coupling (spread {:.2e})", spread);
    return mean;
}

}  // namespace

ExpansionResult expand_case1(const Operators& ops, int mode_index, int sign) {
    check_sign(sign);
    if (mode_index < 0) throw std::invalid_argument("expand_case1: negative mode index");
    const Material& mat = ops.scene().material;
    const StaticBlocks& sb = ops.blocks();
    const Vec& wv = ops.scene().volume.weights;
    const Vec& ws = ops.scene().surface.weights;
    const SpectralResult sp = ops.newton_spectrum(mode_index + 2);
    const double lambda = sp.eigenvalues(mode_index);
    auto close = [&](int j) { return std::abs(sp.eigenvalues(j) - lambda) <= kSimpleGap * std::abs(lambda); };
    if ((mode_index > 0 && close(mode_index - 1)) || (mode_index + 1 < sp.eigenvalues.size() && close(mode_index + 1)))
        throw DomainError("expand_case1: eigenvalue of N0 is not simple");
    const Vec e = sp.eigenvectors.col(mode_index);
    const Vec g0 = sb.T0 * e / lambda;
    const Vec g1 = sb.B0 * e / lambda;
    const double one_e = wv.sum() == 0.0 ? 0.0 : wv.dot(e);
    const double g0g1 = dot_w(ws, g0, g1);
    const double v = std::sqrt(mat.v2);
    ExpansionResult r;
    r.case_id = 1;
    r.sign = sign;
    r.kappa0 = v / std::sqrt(lambda);
    const double re = mat.v12 / (2.0 * v * std::sqrt(lambda)) - 0.5 * mat.rho1 * v * std::sqrt(lambda) * g0g1;
    const double im = -mat.v2 / (8.0 * kPi * lambda * lambda) * one_e * one_e;
    r.kappa1 = cd(sign * re, im);
    r.intermediates = {{"lambda", lambda}, {"one_e", one_e}, {"gamma0e_gamma1e", g0g1}, {"residual", sp.residuals(mode_index)}};
    return r;
}

ExpansionResult expand_case2(const Operators& ops, int sign) {
    check_sign(sign);
    const Material& mat = ops.scene().material;
    const MinnaertData m = ops.minnaert();
    const StaticBlocks& sb = ops.blocks();
    const double wm = std::sqrt(m.omega2);
    ExpansionResult r;
    r.case_id = 2;
    r.sign = sign;
    r.kappa0 = std::sqrt(mat.rho) * wm;
    r.kappa1 = cd(sign * 0.5 * mat.v12 * std::sqrt(mat.rho) * wm, -m.volume / (8.0 * kPi) * mat.rho * m.omega2 * m.omega2);
    const Vec phi_perp = ops.solve_perp(Mat(sb.B0 * Vec::Ones(sb.B0.cols())));
    r.phi_circ = m.psi - mat.rho * m.omega2 * phi_perp;
    r.intermediates = {{"omega_M", wm}, {"c_Omega", m.c_omega}, {"volume", m.volume}};
    return r;
}

ExpansionResult expand_case3(const Operators& ops, int sign) {
    check_sign(sign);
    const Material& mat = ops.scene().material;
    const MinnaertData m = ops.minnaert();
    const StaticBlocks& sb = ops.blocks();
    const Vec& wv = ops.scene().volume.weights;
    const Vec& ws = ops.scene().surface.weights;
    const Eigen::Index nv = wv.size();
    const double rho = mat.rho, v2 = mat.v2, w2 = m.omega2, c = m.c_omega, vol = m.volume;
    const double k0 = std::sqrt(v2 * rho * w2);
    const Vec one_v = Vec::Ones(nv);

    auto P = [&](const Vec& x) -> Vec { return m.psi * (ws.dot(x) / c); };
    auto bracket = [&](const Vec& a, const Vec& b) { return dot_w(ws, a, sb.S0 * b); };  // [a, b]_{-1/2}

    const Vec phi_perp0 = ops.solve_perp(Mat(sb.B0 * one_v));
    const Vec u0 = rho * w2 * one_v;
    const Vec phi0 = m.psi - rho * w2 * phi_perp0;
    const Vec Pphi0 = P(phi0), Qphi0 = phi0 - Pphi0;

    // order-eps block applied to (u0, phi0), with the sign flipped
    const CVec sl1 = (kI / kFourPi) * ws.dot(Pphi0) * CVec::Ones(nv);
    const CVec u_hat = -((mat.v12 * u0 - k0 * k0 * sb.N0 * u0).cast<cd>() +
                         k0 * k0 * ((v2 * sb.SLv * Pphi0).cast<cd>() - k0 * sl1 - (sb.SLv * Qphi0).cast<cd>()));
    const Vec phi_hat = -(-2.0 * rho * sb.B0 * u0 + k0 * k0 * sb.K2s * Pphi0 - 2.0 * rho * sb.K0s * Qphi0 +
                          (mat.rho1 - rho * rho) * Pphi0);

    // solve D Phi (kappa, u, phi) = (0, u_hat, phi_hat) for kappa
    const CVec rhs_b = phi_hat.cast<cd>() - sb.B0.cast<cd>() * u_hat / v2;
    const CVec phi_star_perp = solve_perp_complex(ops, rhs_b);
    auto cbracket = [&](const Vec& x, const CVec& y) -> cd { return (ws.cwiseProduct(x)).cast<cd>().dot(sb.S0.cast<cd>() * y); };
    auto cP = [&](const CVec& x) -> CVec { return m.psi.cast<cd>() * (ws.cast<cd>().dot(x) / c); };

    Eigen::Matrix2cd a;
    a(0, 0) = -vol / v2;
    a(0, 1) = c * rho;
    a(1, 0) = (wv.dot(u0) - bracket(phi0, phi_perp0)) / v2;
    a(1, 1) = c;
    Eigen::Vector2cd b;
    b(0) = cbracket(phi0, cP(rhs_b));
    b(1) = -wv.cast<cd>().dot(u0.cast<cd>().cwiseProduct(u_hat)) / v2 - cbracket(phi0, phi_star_perp);
    if (std::abs(a.determinant()) < 1e-14 * std::abs(a(0, 1) * a(1, 0)))
        throw DomainError("expand_case3: singular reduced system");
    const Eigen::Vector2cd sol = a.fullPivLu().solve(b);
    const cd khat = sol(0), cphi = sol(1);

    ExpansionResult r;
    r.case_id = 3;
    r.sign = sign;
    r.kappa0 = k0;
    r.kappa1 = static_cast<double>(sign) * (khat - cphi * k0 * k0) / (2.0 * k0);
    r.phi_circ = phi0;
    r.intermediates = {{"omega_M", std::sqrt(w2)}, {"c_Omega", c}, {"volume", vol}, {"det", std::abs(a.determinant())}};
    return r;
}

ExpansionResult expand_case4(const Operators& ops, int mode_index, int sign) {
    check_sign(sign);
    if (mode_index < 0) throw std::invalid_argument("expand_case4: negative mode index");
    const Material& mat = ops.scene().material;
    const Vec& wv = ops.scene().volume.weights;
    const Vec& ws = ops.scene().surface.weights;
    const std::vector<NeumannPair> pairs = ops.neumann_eigenpairs(8 * (mode_index + 1) + 8);
    // group into distinct values
    std::vector<std::vector<const NeumannPair*>> groups;
    for (const auto& p : pairs) {
        if (!groups.empty() && std::abs(groups.back().front()->nu - p.nu) <= kSimpleGap * p.nu)
            groups.back().push_back(&p);
        else
            groups.push_back({&p});
    }
    if (mode_index >= static_cast<int>(groups.size())) throw DomainError("expand_case4: not enough Neumann modes");
    const auto& g = groups[mode_index];
    const double nu = g.front()->nu;
    const int mult = static_cast<int>(g.size());

    // weighted orthonormal basis of the eigenspace; the maps u -> phi, u -> trace are linear
    const Eigen::Index nv = wv.size(), ns = ws.size();
    Mat U(nv, mult), F(ns, mult), T(ns, mult);
    for (int j = 0; j < mult; ++j) {
        U.col(j) = g[j]->u;
        F.col(j) = g[j]->phi;
        T.col(j) = g[j]->trace_u;
    }
    const Vec sq = wv.cwiseSqrt();
    Eigen::HouseholderQR<Mat> qr(sq.asDiagonal() * U);
    const Mat R = qr.matrixQR().topRows(mult).triangularView<Eigen::Upper>();
    const Mat Rinv = R.inverse();
    U = U * Rinv;
    F = F * Rinv;
    T = T * Rinv;
    Mat G(mult, mult);
    for (int i = 0; i < mult; ++i)
        for (int j = 0; j < mult; ++j) G(i, j) = dot_w(ws, T.col(i), F.col(j));
    const double gbar = G.trace() / mult;
    const double spread = (G - gbar * Mat::Identity(mult, mult)).norm();
    if (mult > 1) {
        spdlog::info("expand_case4: nu = {:.6f} has multiplicity {}, scalar-check spread {:.2e}", nu, mult, spread);
        if (spread > 1e-4 * std::abs(gbar))
            throw DomainError("expand_case4: degenerate Neumann eigenvalue with non-scalar coupling");
    }
    const double v = std::sqrt(mat.v2);
    const cd k1_discrete = neumann_branch_slope(ops, nu, static_cast<double>(sign) * v * std::sqrt(nu), U, F);
    ExpansionResult r;
    r.case_id = 4;
    r.sign = sign;
    r.kappa0 = v * std::sqrt(nu);
    r.kappa0_discrete = r.kappa0;
    r.kappa1_discrete = k1_discrete;
    r.kappa1 = static_cast<double>(sign) * 0.5 * std::sqrt(nu) * (mat.rho * v * gbar - mat.v12 / v);
    r.intermediates = {{"nu", nu},
                       {"gamma0u_phi", gbar},
                       {"multiplicity", static_cast<double>(mult)},
                       {"scalar_spread", spread},
                       {"phi_residual", g.front()->phi_residual}};
    return r;
}

ExpansionResult expand_case4_zero(const Operators& ops, int sign) {
    check_sign(sign);
    const Material& mat = ops.scene().material;
    const MinnaertData m = ops.minnaert();
    const StaticBlocks& sb = ops.blocks();
    const Vec& wv = ops.scene().volume.weights;
    const Eigen::Index nv = wv.size();
    const double rho = mat.rho, v2 = mat.v2, w2 = m.omega2, vol = m.volume;
    const double v4 = v2 * v2;
    const double c0 = 1.0;
    const Vec one_v = Vec::Ones(nv);
    const Vec b1 = sb.B0 * one_v;
    (void)nv;

    // closed-form first correction
    const double q = w2 / (1.0 + v4 * w2);
    const Vec du0 = -2.0 * rho * c0 * q * one_v;
    const Vec dphi0 = -2.0 * rho * c0 * ops.solve_perp(Mat(sb.K0s * m.psi - q * (v4 * m.psi - b1))).col(0);
    const double d3f = -wv.dot(sb.N0 * du0 + sb.SLv * dphi0);
    const double kappa1 = d3f / (4.0 * c0 * vol);

    // expansion of the discrete pencil itself: kappa = sqrt(eps) z, z^2 = z0^2 (1 + 2 kappa_1 eps)
    const Vec& ws = ops.scene().surface.weights;
    const double g = ws.dot(m.psi_null);
    const Vec s = sb.SLv * m.psi_null;
    const Vec b = sb.B0.transpose() * ws;
    const double z02 = -rho * v2 * g / b.dot(s);
    const Vec u1 = z02 / v2 * s;
    const Vec phi1 = -ops.solve_perp(Mat(sb.B0 * u1 + rho * m.psi_null)).col(0);
    const double corrected =
        0.5 * (mat.v12 / v2 + rho + mat.rho1 / rho + z02 / (rho * g * v2) * (b.dot(sb.N0 * u1) + b.dot(sb.SLv * phi1)));

    ExpansionResult r;
    r.case_id = 4;
    r.zero_branch = true;
    r.sign = sign;
    r.kappa0 = std::sqrt(rho * v2 * w2);
    r.kappa1 = kappa1;
    r.kappa0_discrete = std::sqrt(z02);
    r.kappa1_discrete = corrected;
    r.intermediates = {{"omega_M", std::sqrt(w2)}, {"volume", vol}, {"d_eps_d2_kappa_f0", d3f}, {"c0", c0},
                       {"z0_discrete", std::sqrt(z02)}};
    return r;
}

}  // namespace reso
