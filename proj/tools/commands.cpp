#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <spdlog/spdlog.h>

#include "svg.hpp"

namespace reso::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Check make_check(std::string name, double value, double threshold, bool pass, std::string detail = {}) {
    return Check{std::move(name), value, threshold, pass, std::move(detail)};
}

/// |value - target| <= rel * |target|
Check relative_check(std::string name, double value, double target, double rel) {
    const double err = std::abs(value - target) / std::abs(target);
    return make_check(std::move(name), err, rel, err <= rel,
                      "value " + std::to_string(value) + " vs " + std::to_string(target));
}

bool unit_ball(const SceneConfig& c) { return c.shape_type == "unit_sphere"; }

json complex_json(cd z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

std::string output_path(const SceneConfig& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return (fs::path(c.out_dir) / name).string();
}

Operators make_operators(const SceneConfig& cfg) { return Operators(build_scene(cfg), static_options(cfg)); }

/// Weighted similarity D A D^{-1}, D = diag(sqrt(w)).
CMat weighted(const Mat& a, const Vec& w) {
    const Vec s = w.cwiseSqrt();
    return (s.asDiagonal() * a * s.cwiseInverse().asDiagonal()).cast<cd>();
}

std::string branch_name(const SceneConfig& cfg) { return cfg.case_id() == 4 ? cfg.branch : std::string(); }

}  // namespace

bool CommandResult::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

json CommandResult::to_json() const {
    json j = summary;
    j["command"] = command;
    json cs = json::array();
    for (const auto& c : checks)
        cs.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass},
                      {"detail", c.detail}});
    j["checks"] = cs;
    j["files"] = files;
    j["ok"] = ok();
    return j;
}

double neumann_ball_oracle() {
    // j_1'(x) = 2 cos x / x^2 - 2 sin x / x^3 + sin x / x changes sign once on [1, 3].
    auto dj1 = [](double x) { return 2.0 * std::cos(x) / (x * x) - 2.0 * std::sin(x) / (x * x * x) + std::sin(x) / x; };
    double a = 1.0, b = 3.0;
    for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
        const double m = 0.5 * (a + b);
        (dj1(a) * dj1(m) <= 0.0 ? b : a) = m;
    }
    const double x = 0.5 * (a + b);
    return x * x;
}

double newton_ball_top() { return 4.0 / (kPi * kPi); }

std::vector<double> default_eps_list(int case_id, const std::string& branch) {
    if (case_id == 4 && branch == "zero") return {0.04, 0.01, 0.0025};
    return {0.08, 0.04, 0.02};
}

BranchRun run_branch(const SceneConfig& cfg, const Operators& ops) {
    BranchRun run;
    run.case_id = cfg.case_id();
    if (run.case_id < 1 || run.case_id > 4) throw ConfigError("material.case: a regime (1-4) is required for a sweep");
    run.branch = branch_name(cfg);
    switch (run.case_id) {
        case 1: run.expansion = expand_case1(ops, cfg.mode); break;
        case 2: run.expansion = expand_case2(ops); break;
        case 3: run.expansion = expand_case3(ops); break;
        default:
            run.expansion = run.branch == "zero" ? expand_case4_zero(ops) : expand_case4(ops, cfg.mode);
    }
    const ExpansionResult& ex = run.expansion;
    const bool zero = run.branch == "zero";
    run.eps = cfg.eps_list.empty() ? default_eps_list(run.case_id, run.branch) : cfg.eps_list;
    RefineOptions opt;
    opt.max_iters = cfg.max_iters;
    opt.tol_step = cfg.tol_newton;
    const int cid = run.case_id;
    SweepResult sw = sweep([&](double e) { return make_pencil(ops, e, cid); }, run.eps, ex.predict(run.eps.front()),
                           [&](double e) { return ex.predict_discrete(e); }, {},
                           [&](double e) { return ex.predict(e); }, opt);
    run.direct = sw.branch;
    std::vector<double> rem_formula;
    for (std::size_t i = 0; i < run.eps.size(); ++i) {
        const double e = run.eps[i];
        const cd k = run.direct[i].kappa;
        run.predicted.push_back(ex.predict(e));
        run.predicted_discrete.push_back(ex.predict_discrete(e));
        run.gap.push_back(std::abs(k - run.predicted.back()));
        run.gap_discrete.push_back(std::abs(k - run.predicted_discrete.back()));
        if (zero) {
            // Re kappa / sqrt(eps) = z0 (1 + kappa_1 eps) + ...: the first-order term decays like t^2, t = sqrt(eps).
            // Im kappa / sqrt(eps) is O(t^3) and is left out.
            const double t = std::sqrt(e);
            run.param.push_back(t);
            run.remainder.push_back(std::abs((k / t).real() - (ex.kappa0_discrete * double(ex.sign)).real()));
            rem_formula.push_back(std::abs((k / t).real() - ex.kappa0.real()));
        } else {
            run.param.push_back(e);
            run.remainder.push_back(run.gap_discrete.back());
            rem_formula.push_back(run.gap.back());
        }
    }
    if (run.eps.size() >= 2) {
        run.order = loglog_slope(run.param, run.remainder);
        run.order_formula = loglog_slope(run.param, rem_formula);
    }
    return run;
}

CommandResult cmd_identities(const SceneConfig& cfg) {
    CommandResult res;
    res.command = "identities";
    const Operators ops = make_operators(cfg);
    const StaticBlocks& b = ops.blocks();
    const Vec& w = ops.scene().surface.weights;
    const double area = w.sum();
    const Eigen::Index n = w.size();
    const Vec one = Vec::Ones(n);

    const Vec s1 = b.S0 * one;
    const double s1_err = (s1 - one).cwiseAbs().maxCoeff();
    if (unit_ball(cfg)) res.checks.push_back(make_check("S0*1 = 1 per entry", s1_err, 5e-3, s1_err <= 5e-3));

    const double k1_err = (b.K0 * one + 0.5 * one).cwiseAbs().maxCoeff();
    res.checks.push_back(make_check("K0*1 = -1/2", k1_err, 1e-12, k1_err <= 1e-12));

    const CMat S = weighted(b.S0, w), K = weighted(b.K0, w), Ks = weighted(b.K0s, w);
    const double cal = norm2_estimate(S * Ks - K * S) / (norm2_estimate(S) * norm2_estimate(K));
    res.checks.push_back(make_check("Calderon S0 K0* - K0 S0", cal, 1e-2, cal <= 1e-2, "relative to |S0||K0|"));

    // Gauss law for the single layer of the unit density: interior flux 0, exterior flux -|Gamma|.
    const Vec in = b.K0s * one + 0.5 * one, out = b.K0s * one - 0.5 * one;
    const double g_int = std::max(std::abs(w.dot(in)), std::abs(w.dot(out) + area)) / area;
    res.checks.push_back(make_check("Gauss values (integrated)", g_int, 1e-12, g_int <= 1e-12));
    double g_pt = 0.0;
    if (unit_ball(cfg)) {
        g_pt = std::max(in.cwiseAbs().maxCoeff(), (out + one).cwiseAbs().maxCoeff());
        res.checks.push_back(make_check("Gauss values (pointwise, sphere)", g_pt, 5e-3, g_pt <= 5e-3,
                                        "interior 0, exterior -1"));
    }

    CVec ev;
    CMat evec;
    general_eigen(b.K0, ev, evec);
    double lo = 1e300, hi = -1e300, im = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        lo = std::min(lo, ev[i].real());
        hi = std::max(hi, ev[i].real());
        im = std::max(im, std::abs(ev[i].imag()));
    }
    const double excess = std::max({0.0, -0.5 - lo, hi - 0.5});
    res.checks.push_back(make_check("K0 spectrum within [-1/2, 1/2]", excess, 0.05, excess <= 0.05,
                                    "min " + std::to_string(lo) + ", max " + std::to_string(hi)));

    res.summary = {{"surface_nodes", n},
                   {"area", area},
                   {"mesh_width", ops.scene().surface.mesh_width()},
                   {"s0_one_max_error", s1_err},
                   {"k0_one_max_error", k1_err},
                   {"calderon_relative", cal},
                   {"gauss_integrated", g_int},
                   {"gauss_pointwise", g_pt},
                   {"k0_spectrum", {{"min_re", lo}, {"max_re", hi}, {"max_abs_im", im}}}};
    return res;
}

CommandResult cmd_minnaert(const SceneConfig& cfg) {
    CommandResult res;
    res.command = "minnaert";
    const Operators ops = make_operators(cfg);
    const MinnaertData m = ops.minnaert();
    if (unit_ball(cfg)) res.checks.push_back(relative_check("omega_M^2 vs 3 (unit ball)", m.omega2, 3.0, 1e-2));
    res.checks.push_back(make_check("c_omega > 0", m.c_omega, 0.0, m.c_omega > 0.0));
    const double pmin = m.psi.minCoeff();
    res.checks.push_back(make_check("psi > 0", pmin, 0.0, pmin > 0.0));
    res.summary = {{"omega2", m.omega2},
                   {"omega", std::sqrt(m.omega2)},
                   {"c_omega", m.c_omega},
                   {"volume", m.volume},
                   {"psi", std::vector<double>(m.psi.data(), m.psi.data() + m.psi.size())},
                   {"psi_null", std::vector<double>(m.psi_null.data(), m.psi_null.data() + m.psi_null.size())}};
    return res;
}

CommandResult cmd_spectrum(const SceneConfig& cfg) {
    CommandResult res;
    res.command = "spectrum";
    const Operators ops = make_operators(cfg);
    const SpectralResult s = ops.newton_spectrum(cfg.count);
    bool ordered = s.eigenvalues.size() > 0 && s.eigenvalues.minCoeff() > 0.0;
    for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i) ordered = ordered && s.eigenvalues[i] <= s.eigenvalues[i - 1];
    res.checks.push_back(make_check("eigenvalues positive and descending", ordered ? 1.0 : 0.0, 1.0, ordered));
    const double rmax = s.residuals.size() ? s.residuals.maxCoeff() : 0.0;
    res.checks.push_back(make_check("eigenpair residuals", rmax, 1e-8, rmax <= 1e-8));
    if (unit_ball(cfg) && s.eigenvalues.size())
        res.checks.push_back(relative_check("top eigenvalue vs 4/pi^2 (unit ball)", s.eigenvalues[0], newton_ball_top(), 1e-2));
    res.summary = {{"eigenvalues", std::vector<double>(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size())},
                   {"residuals", std::vector<double>(s.residuals.data(), s.residuals.data() + s.residuals.size())}};
    return res;
}

CommandResult cmd_neumann(const SceneConfig& cfg) {
    CommandResult res;
    res.command = "neumann";
    const Operators ops = make_operators(cfg);
    const auto pairs = ops.neumann_eigenpairs(cfg.count);
    json arr = json::array();
    bool positive = !pairs.empty();
    double flux = 0.0;
    const Vec& ws = ops.scene().surface.weights;
    for (const auto& p : pairs) {
        positive = positive && p.nu > 0.0;
        flux = std::max(flux, std::abs(ws.dot(ops.blocks().B0 * p.u)));
        arr.push_back({{"nu", p.nu}, {"multiplicity", p.multiplicity}, {"phi_residual", p.phi_residual}});
    }
    res.checks.push_back(make_check("nu > 0", positive ? 1.0 : 0.0, 1.0, positive));
    res.checks.push_back(make_check("zero boundary flux <1, B0 u>", flux, 1e-10, flux <= 1e-10));
    if (unit_ball(cfg) && !pairs.empty())
        res.checks.push_back(relative_check("first nu vs (j1' root)^2 (unit ball)", pairs.front().nu, neumann_ball_oracle(), 2e-2));
    res.summary = {{"pairs", arr}, {"oracle_nu", neumann_ball_oracle()}};
    return res;
}

namespace {

void sweep_csv(std::ostream& out, const BranchRun& run) {
    out << "case,branch,eps,re_kappa,im_kappa,residual,iters,re_predicted,im_predicted,gap,re_predicted_discrete,"
           "im_predicted_discrete,gap_discrete,re_kappa_sqrt_eps,im_kappa_sqrt_eps,slope\r\n";
    out.precision(15);
    for (std::size_t i = 0; i < run.direct.size(); ++i) {
        const Resonance& r = run.direct[i];
        const cd ks = r.kappa / std::sqrt(run.eps[i]);
        out << run.case_id << ',' << run.branch << ',' << run.eps[i] << ',' << r.kappa.real() << ',' << r.kappa.imag()
            << ',' << r.residual << ',' << r.iters << ',' << run.predicted[i].real() << ',' << run.predicted[i].imag()
            << ',' << run.gap[i] << ',' << run.predicted_discrete[i].real() << ',' << run.predicted_discrete[i].imag()
            << ',' << run.gap_discrete[i] << ',' << ks.real() << ',' << ks.imag() << ',' << run.order << "\r\n";
    }
}

void fixed_csv(std::ostream& out, const std::vector<Resonance>& rows) {
    out << "case,branch,eps,re_kappa,im_kappa,residual,iters\r\n";
    out.precision(15);
    for (const auto& r : rows)
        out << 0 << ",," << r.eps << ',' << r.kappa.real() << ',' << r.kappa.imag() << ',' << r.residual << ','
            << r.iters << "\r\n";
}

json branch_rows(const BranchRun& run) {
    json rows = json::array();
    for (std::size_t i = 0; i < run.direct.size(); ++i) {
        const cd k = run.direct[i].kappa;
        rows.push_back({{"eps", run.eps[i]},
                        {"direct", complex_json(k)},
                        {"predicted", complex_json(run.predicted[i])},
                        {"predicted_discrete", complex_json(run.predicted_discrete[i])},
                        {"abs_gap", run.gap[i]},
                        {"rel_gap", run.gap[i] / std::abs(k)},
                        {"abs_gap_discrete", run.gap_discrete[i]},
                        {"rel_gap_discrete", run.gap_discrete[i] / std::abs(k)},
                        {"residual", run.direct[i].residual},
                        {"iters", run.direct[i].iters}});
    }
    return rows;
}

void add_structural_checks(CommandResult& res, const std::vector<Resonance>& found, double tol_residual) {
    double im_max = -1e300, r_max = 0.0;
    for (const auto& r : found) {
        im_max = std::max(im_max, r.kappa.imag());
        r_max = std::max(r_max, r.residual);
    }
    if (found.empty()) return;
    res.checks.push_back(make_check("Im kappa* < 1e-6", im_max, 1e-6, im_max < 1e-6));
    res.checks.push_back(make_check("certified residual", r_max, tol_residual, r_max <= tol_residual));
}

json expansion_json(const ExpansionResult& ex) {
    json j;
    to_json(j, ex);
    return j;
}

}  // namespace

CommandResult cmd_resonances(const SceneConfig& cfg) {
    CommandResult res;
    res.command = "resonances";
    const Operators ops = make_operators(cfg);
    const std::string csv = output_path(cfg, "resonances.csv"), svg = output_path(cfg, "resonances.svg");
    RefineOptions opt;
    opt.max_iters = cfg.max_iters;
    opt.tol_step = cfg.tol_newton;

    if (cfg.case_id() == 0) {
        if (!cfg.window) throw ConfigError("solver.window: required for a fixed-material scan");
        const Pencil p = make_pencil(ops, cfg.scene_eps, 0);
        const ScanResult sc = scan(p, *cfg.window);
        std::vector<Resonance> found;
        int failed = 0;
        for (cd seed : sc.candidates) {
            try {
                Resonance r = refine(p, seed, opt, &*cfg.window);
                const bool dup = std::any_of(found.begin(), found.end(), [&](const Resonance& f) {
                    return std::abs(f.kappa - r.kappa) <= 1e-8 * std::max(1.0, std::abs(r.kappa));
                });
                if (!dup) found.push_back(std::move(r));
            } catch (const FinderError& e) {
                ++failed;
                spdlog::warn("candidate {}{:+}i not refined: {}", seed.real(), seed.imag(), e.what());
            }
        }
        std::sort(found.begin(), found.end(), [](const Resonance& a, const Resonance& b) { return a.kappa.real() < b.kappa.real(); });
        if (found.empty()) spdlog::warn("no resonances in the window (free scene or empty window)");
        {
            std::ofstream out(csv, std::ios::binary);
            fixed_csv(out, found);
        }
        ScatterSeries s{"direct", "#1f77b4", false, {}};
        for (const auto& r : found) s.points.push_back(r.kappa);
        std::ofstream so(svg);
        write_scatter_svg(so, {s}, "Resonances in the search window");
        add_structural_checks(res, found, RefineOptions{}.tol_residual);
        json list = json::array();
        for (const auto& r : found) list.push_back({{"kappa", complex_json(r.kappa)}, {"residual", r.residual}, {"iters", r.iters}});
        const double smin = sc.sigma.empty() ? 0.0 : *std::min_element(sc.sigma.begin(), sc.sigma.end());
        res.summary = {{"case", 0}, {"eps", cfg.scene_eps}, {"candidates", sc.candidates.size()},
                       {"unrefined", failed}, {"sigma_min", smin}, {"resonances", list}};
        res.files = {csv, svg};
        return res;
    }

    const BranchRun run = run_branch(cfg, ops);
    {
        std::ofstream out(csv, std::ios::binary);
        sweep_csv(out, run);
    }
    ScatterSeries d{"direct", "#1f77b4", false, {}}, a{"asymptotic", "#d62728", true, run.predicted};
    for (const auto& r : run.direct) d.points.push_back(r.kappa);
    std::vector<ScatterSeries> series{d, a};
    if (run.case_id == 4) series.push_back({"discrete expansion", "#2ca02c", true, run.predicted_discrete});
    {
        std::ofstream so(svg);
        write_scatter_svg(so, series, "Resonance branch, regime " + std::to_string(run.case_id) +
                                          (run.branch.empty() ? "" : " (" + run.branch + ")"));
    }
    add_structural_checks(res, run.direct, RefineOptions{}.tol_residual);
    res.summary = {{"case", run.case_id}, {"branch", run.branch}, {"expansion", expansion_json(run.expansion)},
                   {"rows", branch_rows(run)}, {"slope", run.order}, {"slope_formula", run.order_formula},
                   {"slope_parameter", run.branch == "zero" ? "sqrt_eps" : "eps"}};
    res.files = {csv, svg};
    return res;
}

CommandResult cmd_compare(const SceneConfig& cfg) {
    CommandResult res;
    res.command = "compare";
    const Operators ops = make_operators(cfg);
    const BranchRun run = run_branch(cfg, ops);
    const std::string csv = output_path(cfg, "compare.csv");
    {
        std::ofstream out(csv, std::ios::binary);
        out << "eps,re_direct,im_direct,re_asymptotic,im_asymptotic,abs_gap,rel_gap,abs_gap_discrete,rel_gap_discrete\r\n";
        out.precision(15);
        for (std::size_t i = 0; i < run.direct.size(); ++i) {
            const cd k = run.direct[i].kappa;
            out << run.eps[i] << ',' << k.real() << ',' << k.imag() << ',' << run.predicted[i].real() << ','
                << run.predicted[i].imag() << ',' << run.gap[i] << ',' << run.gap[i] / std::abs(k) << ','
                << run.gap_discrete[i] << ',' << run.gap_discrete[i] / std::abs(k) << "\r\n";
        }
    }
    add_structural_checks(res, run.direct, RefineOptions{}.tol_residual);
    res.summary = {{"case", run.case_id}, {"branch", run.branch}, {"expansion", expansion_json(run.expansion)},
                   {"rows", branch_rows(run)}, {"fitted_order", run.order}, {"fitted_order_formula", run.order_formula},
                   {"order_parameter", run.branch == "zero" ? "sqrt_eps" : "eps"}};
    res.files = {csv};
    return res;
}

CommandResult cmd_dump(const SceneConfig& cfg, cd kappa) {
    CommandResult res;
    res.command = "dump";
    const Operators ops = make_operators(cfg);
    const Operators scaled = ops.with_eps(cfg.case_id() == 0 ? cfg.scene_eps : 1.0);
    const QMatrix q = assemble_q(scaled, kappa, Form::Full);
    const std::string path = output_path(cfg, "q_matrix.txt");
    dump_matrix(q.m, path);
    res.summary = {{"kappa", complex_json(kappa)}, {"dim", q.dim()}};
    res.files = {path};
    return res;
}

}  // namespace reso::cli
