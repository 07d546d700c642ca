#include "reso/operators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <type_traits>

#include <spdlog/spdlog.h>

#include "reso/quadrature.hpp"

namespace reso {

namespace {

struct Pair {
    double a = 0.0, b = 0.0;
    Pair& operator+=(const Pair& o) {
        a += o.a;
        b += o.b;
        return *this;
    }
};
Pair operator*(double s, const Pair& p) { return {s * p.a, s * p.b}; }

double laplace(const Vec3& x, const Vec3& y) { return 1.0 / (kFourPi * (x - y).norm()); }

struct PanelInfo {
    PointRule rule;
    Vec3 centroid;
    double diameter;
};

/// Integral over one cell of (G, n_t . grad_t G) or of (G, G) written as boundary integrals,
/// valid for any target position including the cell boundary and interior.
Pair cell_by_divergence(const Cell& cell, const Vec3& t, const Vec3& nt, const StaticOptions& opt) {
    std::vector<TriPatch> tris;
    std::vector<SideQuad> quads;
    cell.faces(tris, quads);
    auto f = [&](const Vec3& y, const Vec3& n) -> Pair {
        const Vec3 d = y - t;
        const double r = d.norm();
        if (r < 1e-300) return {};
        return {d.dot(n) / (8.0 * kPi * r), -nt.dot(n) / (kFourPi * r)};
    };
    Pair acc;
    for (const auto& tri : tris) {
        if (auto loc = tri.locate(t)) {
            acc += integrate_patch_singular<Pair>(tri, (*loc)[0], (*loc)[1], f, opt.duffy_order);
        } else {
            acc += integrate_patch_adaptive<Pair>(tri, t, f, opt.near_ratio, opt.max_depth);
        }
    }
    for (const auto& q : quads) acc += integrate_quad_adaptive<Pair>(q, t, f, opt.near_ratio, opt.max_depth);
    return acc;
}

/// Cached rules of one volume cell: whole cell, its 8 children and its 64 grandchildren.
struct CellRules {
    PointRule r0, r1, r2;
    Vec3 node;
    double diameter = 0.0;
    std::vector<Cell> kids;
    std::vector<Vec3> kid_node;
    std::vector<double> kid_diameter;
    std::vector<int> kid_offset;

    CellRules() = default;
    explicit CellRules(const Cell& c) : r0(cell_rule(c, 0, 3)), r1(cell_rule(c, 1, 2)), node(c.node()), diameter(c.diameter()) {
        kid_offset.push_back(0);
        for (const auto& k1 : c.split())
            for (const auto& k2 : k1.split()) {
                kids.push_back(k2);
                kid_node.push_back(k2.node());
                kid_diameter.push_back(k2.diameter());
                r2.append(cell_rule(k2, 0, 2));
                kid_offset.push_back(static_cast<int>(r2.w.size()));
            }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string to_string(BlockKind k) {
    switch (k) {
        case BlockKind::Newton: return "N";
        case BlockKind::SingleLayerVol: return "1_Omega SL";
        case BlockKind::NormalNewton: return "gamma_1^- N";
        case BlockKind::NormalSingle: return "gamma_1 SL";
        case BlockKind::TraceNewton: return "gamma_0 N";
        case BlockKind::S0: return "S0";
        case BlockKind::K0: return "K0";
    }
    return "?";
}

Mat weight_symmetrize(const Mat& a, const Vec& w) {
    Mat wa = w.asDiagonal() * a;
    Mat s = 0.5 * (wa + wa.transpose());
    return w.cwiseInverse().asDiagonal() * s;
}

StaticBlocks assemble_static(const SurfaceQuadrature& surface, const VolumeQuadrature& volume,
                             const StaticOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::Index ns = static_cast<Eigen::Index>(surface.size());
    const Eigen::Index nv = static_cast<Eigen::Index>(volume.size());
    const auto& xs = surface.nodes;
    const auto& nx = surface.normals;
    const auto& ys = volume.nodes;
    const Vec& ws = surface.weights;
    const Vec& wv = volume.weights;

    std::vector<PanelInfo> panels(ns);
    for (Eigen::Index j = 0; j < ns; ++j) {
        const TriPatch& p = surface.patches[j];
        panels[j] = {patch_rule(p), p.centroid(), p.diameter()};
    }

    StaticBlocks sb;
    // ---- boundary to boundary
    Mat S(ns, ns), K(ns, ns);
    for (Eigen::Index i = 0; i < ns; ++i) {
        const Vec3& x = xs[i];
        auto f = [&](const Vec3& y, const Vec3& n) -> Pair {
            const Vec3 d = x - y;
            const double r = d.norm();
            return {1.0 / (kFourPi * r), n.dot(d) / (kFourPi * r * r * r)};
        };
        for (Eigen::Index j = 0; j < ns; ++j) {
            if (i == j) {
                const TriPatch& p = surface.patches[j];
                auto loc = p.locate(x);
                const double u = loc ? (*loc)[0] : 1.0 / 3.0, w = loc ? (*loc)[1] : 1.0 / 3.0;
                S(i, j) = integrate_patch_singular<double>(
                    p, u, w, [&](const Vec3& y, const Vec3&) { return laplace(x, y); }, opt.duffy_order);
                K(i, j) = 0.0;
                continue;
            }
            const PanelInfo& pj = panels[j];
            Pair v;
            if ((x - pj.centroid).norm() >= opt.near_ratio * pj.diameter)
                v = integrate_rule<Pair>(pj.rule, f);
            else
                v = integrate_patch_adaptive<Pair>(surface.patches[j], x, f, opt.near_ratio, opt.max_depth);
            S(i, j) = v.a;
            K(i, j) = v.b;
        }
        K(i, i) = -0.5 - K.row(i).sum();
    }
    sb.S0 = weight_symmetrize(S, ws);
    sb.K0 = K;
    sb.K0s = ws.cwiseInverse().asDiagonal() * K.transpose() * ws.asDiagonal();
    if (opt.verbose) spdlog::info("static boundary blocks: {:.2f} s", seconds_since(t0));

    // ---- boundary to volume
    sb.SLv.resize(nv, ns);
    for (Eigen::Index i = 0; i < nv; ++i) {
        const Vec3& y0 = ys[i];
        auto f = [&](const Vec3& y, const Vec3&) { return laplace(y0, y); };
        for (Eigen::Index j = 0; j < ns; ++j) {
            const PanelInfo& pj = panels[j];
            if ((y0 - pj.centroid).norm() >= opt.near_ratio * pj.diameter)
                sb.SLv(i, j) = integrate_rule<double>(pj.rule, f);
            else
                sb.SLv(i, j) = integrate_patch_adaptive<double>(surface.patches[j], y0, f, opt.near_ratio,
                                                                opt.max_depth);
        }
    }
    if (opt.verbose) spdlog::info("static 1_Omega SL block: {:.2f} s", seconds_since(t0));

    // ---- volume sources
    std::vector<CellRules> cells(nv);
    for (Eigen::Index j = 0; j < nv; ++j) cells[j] = CellRules(volume.cells[j]);
    const double far_ratio = 4.0, mid_ratio = 2.0;
    const double kid_ratio = opt.kid_ratio;
    const int kid_depth = opt.kid_depth;
    auto cell_integral = [&](auto tag, Eigen::Index j, const Vec3& t, const Vec3& nt, auto&& g) {
        using T = decltype(tag);
        const CellRules& cr = cells[j];
        const double ratio = (t - cr.node).norm() / cr.diameter;
        if (ratio >= far_ratio) return integrate_rule<T>(cr.r0, g);
        if (ratio >= mid_ratio) return integrate_rule<T>(cr.r1, g);
        if (!volume.cells[j].contains(t, 1e-9)) {
            T acc{};
            for (std::size_t k = 0; k < cr.kids.size(); ++k) {
                if ((t - cr.kid_node[k]).norm() >= kid_ratio * cr.kid_diameter[k]) {
                    for (int q = cr.kid_offset[k]; q < cr.kid_offset[k + 1]; ++q) acc += cr.r2.w[q] * g(cr.r2.y[q], Vec3::Zero());
                } else {
                    acc += integrate_cell_adaptive<T>(cr.kids[k], t, g, kid_ratio, kid_depth);
                }
            }
            return acc;
        }
        const Pair v = cell_by_divergence(volume.cells[j], t, nt, opt);
        if constexpr (std::is_same_v<T, Pair>)
            return v;
        else
            return v.a;
    };

    Mat N(nv, nv);
    for (Eigen::Index i = 0; i < nv; ++i) {
        const Vec3& t = ys[i];
        auto g = [&](const Vec3& y, const Vec3&) { return laplace(t, y); };
        for (Eigen::Index j = 0; j < nv; ++j) N(i, j) = cell_integral(double{}, j, t, Vec3::Zero(), g);
    }
    sb.N0 = weight_symmetrize(N, wv);
    if (opt.verbose) spdlog::info("static N0 block: {:.2f} s", seconds_since(t0));

    sb.T0.resize(ns, nv);
    sb.B0.resize(ns, nv);
    for (Eigen::Index i = 0; i < ns; ++i) {
        const Vec3& t = xs[i];
        const Vec3& n = nx[i];
        auto g = [&](const Vec3& y, const Vec3&) -> Pair {
            const Vec3 d = t - y;
            const double r = d.norm();
            return {1.0 / (kFourPi * r), -n.dot(d) / (kFourPi * r * r * r)};
        };
        for (Eigen::Index j = 0; j < nv; ++j) {
            const Pair v = cell_integral(Pair{}, j, t, n, g);
            sb.T0(i, j) = v.a;
            sb.B0(i, j) = v.b;
        }
    }
    if (opt.verbose) spdlog::info("static trace blocks: {:.2f} s", seconds_since(t0));

    // ---- point-rule series kernels
    sb.K2s = Mat::Zero(ns, ns);
    sb.K3s = Mat::Zero(ns, ns);
    for (Eigen::Index i = 0; i < ns; ++i)
        for (Eigen::Index j = 0; j < ns; ++j) {
            if (i == j) continue;
            const Vec3 d = xs[i] - xs[j];
            const double nd = nx[i].dot(d);
            sb.K2s(i, j) = -nd / (8.0 * kPi * d.norm()) * ws(j);
            sb.K3s(i, j) = nd / (12.0 * kPi) * ws(j);
        }
    sb.ball_radius = (3.0 * wv / kFourPi).array().pow(1.0 / 3.0);
    return sb;
}

// ---------------------------------------------------------------- Operators

Operators::Operators(Scene scene, const StaticOptions& opt)
    : scene_(std::move(scene)),
      blocks_(std::make_shared<StaticBlocks>(assemble_static(scene_.surface, scene_.volume, opt))) {}

Operators::Operators(Scene scene, std::shared_ptr<const StaticBlocks> blocks)
    : scene_(std::move(scene)), blocks_(std::move(blocks)) {}

Operators Operators::with_eps(double eps) const {
    Operators out = *this;
    out.scene_.eps = eps;
    return out;
}

CMat Operators::reference(BlockKind kind, cd k, bool derivative) const {
    const StaticBlocks& sb = *blocks_;
    const auto& xs = scene_.surface.nodes;
    const auto& nx = scene_.surface.normals;
    const auto& ys = scene_.volume.nodes;
    const Vec& ws = scene_.surface.weights;
    const Vec& wv = scene_.volume.weights;
    const Eigen::Index ns = static_cast<Eigen::Index>(xs.size());
    const Eigen::Index nv = static_cast<Eigen::Index>(ys.size());
    CMat m;
    switch (kind) {
        case BlockKind::Newton: {
            m = derivative ? CMat::Zero(nv, nv) : CMat(sb.N0.cast<cd>());
            for (Eigen::Index j = 0; j < nv; ++j)
                for (Eigen::Index i = 0; i < nv; ++i) {
                    if (i == j) {
                        const double a = sb.ball_radius(i);
                        m(i, i) += derivative ? ball_self_difference_dk(k, a) : ball_self_difference(k, a);
                    } else {
                        const double r = (ys[i] - ys[j]).norm();
                        m(i, j) += wv(j) * (derivative ? green_difference_dk(k, r) : green_difference(k, r));
                    }
                }
            break;
        }
        case BlockKind::SingleLayerVol: {
            m = derivative ? CMat::Zero(nv, ns) : CMat(sb.SLv.cast<cd>());
            for (Eigen::Index j = 0; j < ns; ++j)
                for (Eigen::Index i = 0; i < nv; ++i) {
                    const double r = (ys[i] - xs[j]).norm();
                    m(i, j) += ws(j) * (derivative ? green_difference_dk(k, r) : green_difference(k, r));
                }
            break;
        }
        case BlockKind::NormalNewton: {
            m = derivative ? CMat::Zero(ns, nv) : CMat(sb.B0.cast<cd>());
            for (Eigen::Index j = 0; j < nv; ++j)
                for (Eigen::Index i = 0; i < ns; ++i) {
                    const Vec3 d = xs[i] - ys[j];
                    const double r = d.norm(), nd = nx[i].dot(d);
                    m(i, j) += wv(j) * (derivative ? dn_green_difference_dk(k, r, nd) : dn_green_difference(k, r, nd));
                }
            break;
        }
        case BlockKind::NormalSingle: {
            m = derivative ? CMat::Zero(ns, ns) : CMat(sb.K0s.cast<cd>());
            for (Eigen::Index j = 0; j < ns; ++j)
                for (Eigen::Index i = 0; i < ns; ++i) {
                    if (i == j) continue;
                    const Vec3 d = xs[i] - xs[j];
                    const double r = d.norm(), nd = nx[i].dot(d);
                    m(i, j) += ws(j) * (derivative ? dn_green_difference_dk(k, r, nd) : dn_green_difference(k, r, nd));
                }
            break;
        }
        case BlockKind::TraceNewton:
            m = derivative ? CMat::Zero(ns, nv) : CMat(sb.T0.cast<cd>());
            break;
        case BlockKind::S0:
            m = derivative ? CMat::Zero(ns, ns) : CMat(sb.S0.cast<cd>());
            break;
        case BlockKind::K0:
            m = derivative ? CMat::Zero(ns, ns) : CMat(sb.K0.cast<cd>());
            break;
    }
    return m;
}

namespace {

int scale_power(BlockKind kind) {
    switch (kind) {
        case BlockKind::Newton:
        case BlockKind::TraceNewton: return 2;
        case BlockKind::SingleLayerVol:
        case BlockKind::NormalNewton:
        case BlockKind::S0: return 1;
        case BlockKind::NormalSingle:
        case BlockKind::K0: return 0;
    }
    return 0;
}

std::pair<Space::Kind, Space::Kind> spaces_of(BlockKind kind) {
    using K = Space::Kind;
    switch (kind) {
        case BlockKind::Newton: return {K::Volume, K::Volume};
        case BlockKind::SingleLayerVol: return {K::Volume, K::Boundary};
        case BlockKind::NormalNewton:
        case BlockKind::TraceNewton: return {K::Boundary, K::Volume};
        case BlockKind::NormalSingle:
        case BlockKind::S0:
        case BlockKind::K0: return {K::Boundary, K::Boundary};
    }
    return {K::Volume, K::Volume};
}

}  // namespace

OperatorBlock Operators::assemble(BlockKind kind, cd kappa, std::size_t l_row, std::size_t l_col,
                                  bool derivative) const {
    if (l_row >= scene_.count() || l_col >= scene_.count())
        throw std::out_of_range("assemble: inclusion index out of range");
    OperatorBlock out;
    out.kind = kind;
    out.kappa = kappa;
    const auto [rk, ck] = spaces_of(kind);
    out.row_space = {rk, l_row};
    out.col_space = {ck, l_col};
    const double e = scene_.eps;
    if (l_row == l_col) {
        const int p = scale_power(kind) + (derivative ? 1 : 0);
        out.entries = std::pow(e, p) * reference(kind, e * kappa, derivative);
        return out;
    }
    const PlacedInclusion A = place(scene_, l_row);
    const PlacedInclusion B = place(scene_, l_col);
    const bool row_vol = rk == Space::Kind::Volume;
    const bool col_vol = ck == Space::Kind::Volume;
    const auto& tgt = row_vol ? A.volume_nodes : A.surface_nodes;
    const auto& src = col_vol ? B.volume_nodes : B.surface_nodes;
    const Vec& w = col_vol ? B.volume_weights : B.surface_weights;
    const Eigen::Index nr = static_cast<Eigen::Index>(tgt.size());
    const Eigen::Index nc = static_cast<Eigen::Index>(src.size());
    out.entries.resize(nr, nc);
    const bool normal = kind == BlockKind::NormalNewton || kind == BlockKind::NormalSingle;
    const bool dynamic = !(kind == BlockKind::S0 || kind == BlockKind::K0 || kind == BlockKind::TraceNewton);
    const cd k = dynamic ? kappa : cd(0.0);
    for (Eigen::Index j = 0; j < nc; ++j)
        for (Eigen::Index i = 0; i < nr; ++i) {
            const Vec3 d = tgt[i] - src[j];
            const double r = d.norm();
            cd v;
            if (kind == BlockKind::K0) {
                v = derivative ? cd(0.0) : green_normal_deriv(0.0, tgt[i], src[j], B.normals[j], false);
            } else if (normal) {
                const double nd = A.normals[i].dot(d);
                v = derivative ? dn_green_difference_dk(k, r, nd) : green_normal_deriv(k, tgt[i], src[j], A.normals[i], true);
            } else {
                v = derivative ? (dynamic ? green_difference_dk(k, r) : cd(0.0)) : green(k, r);
            }
            out.entries(i, j) = v * w(j);
        }
    return out;
}

OperatorBlock Operators::assemble_series(SeriesKind kind) const {
    const StaticBlocks& sb = *blocks_;
    OperatorBlock out;
    out.kappa = 0.0;
    const Vec& ws = scene_.surface.weights;
    const Vec& wv = scene_.volume.weights;
    const Eigen::Index ns = ws.size(), nv = wv.size();
    switch (kind) {
        case SeriesKind::N1:
            out.kind = BlockKind::Newton;
            out.row_space = out.col_space = {Space::Kind::Volume, 0};
            out.entries = (kI / kFourPi) * CVec::Ones(nv) * wv.transpose().cast<cd>();
            break;
        case SeriesKind::SL1:
            out.kind = BlockKind::SingleLayerVol;
            out.row_space = {Space::Kind::Volume, 0};
            out.col_space = {Space::Kind::Boundary, 0};
            out.entries = (kI / kFourPi) * CVec::Ones(nv) * ws.transpose().cast<cd>();
            break;
        case SeriesKind::K2star:
            out.kind = BlockKind::NormalSingle;
            out.row_space = out.col_space = {Space::Kind::Boundary, 0};
            out.entries = sb.K2s.cast<cd>();
            break;
        case SeriesKind::K3star:
            out.kind = BlockKind::NormalSingle;
            out.row_space = out.col_space = {Space::Kind::Boundary, 0};
            out.entries = kI * sb.K3s.cast<cd>();
            break;
    }
    (void)ns;
    return out;
}

MinnaertData Operators::minnaert() const {
    if (minnaert_) return *minnaert_;
    const StaticBlocks& sb = *blocks_;
    RealLU lu(sb.S0);
    if (lu.singular()) throw std::runtime_error("minnaert: S0 is singular (degenerate mesh)");
    MinnaertData m;
    m.psi = lu.solve(Vec(Vec::Ones(sb.S0.rows())));
    m.c_omega = scene_.surface.weights.dot(m.psi);
    m.volume = scene_.volume.weights.sum();
    m.omega2 = m.c_omega / m.volume;
    const Vec& ws = scene_.surface.weights;
    const Eigen::Index ns = ws.size();
    RealLU alu(Mat(0.5 * Mat::Identity(ns, ns) + sb.K0s + m.psi * ws.transpose()));
    if (alu.singular()) throw std::runtime_error("minnaert: singular double-layer system");
    m.psi_null = alu.solve(m.psi);
    m.psi_null *= m.c_omega / ws.dot(m.psi_null);
    minnaert_ = std::make_shared<MinnaertData>(m);
    return m;
}

OperatorBlock Operators::projector(ProjectorKind which) const {
    const MinnaertData m = minnaert();
    const Vec& ws = scene_.surface.weights;
    const Eigen::Index ns = ws.size();
    Mat p;
    switch (which) {
        case ProjectorKind::P0:
            p = Vec::Ones(ns) * (ws.cwiseProduct(m.psi)).transpose() / m.c_omega;
            break;
        case ProjectorKind::Pstar:
            p = m.psi * ws.transpose() / m.c_omega;
            break;
        case ProjectorKind::Pperp:
            p = Mat::Identity(ns, ns) - m.psi * ws.transpose() / m.c_omega;
            break;
    }
    OperatorBlock out;
    out.kind = BlockKind::NormalSingle;
    out.row_space = out.col_space = {Space::Kind::Boundary, 0};
    out.entries = p.cast<cd>();
    return out;
}

SpectralResult Operators::newton_spectrum(int k) const {
    const StaticBlocks& sb = *blocks_;
    const Vec& wv = scene_.volume.weights;
    const Vec sq = wv.cwiseSqrt();
    Mat a = sq.asDiagonal() * sb.N0 * sq.cwiseInverse().asDiagonal();
    a = 0.5 * (a + a.transpose()).eval();
    Vec vals;
    Mat vecs;
    symmetric_eigen(a, vals, vecs);
    k = std::min<int>(k, static_cast<int>(vals.size()));
    SpectralResult out;
    out.eigenvalues = vals.head(k);
    out.eigenvectors.resize(wv.size(), k);
    out.residuals.resize(k);
    const double nrm = sb.N0.norm();
    for (int j = 0; j < k; ++j) {
        Vec e = sq.cwiseInverse().cwiseProduct(vecs.col(j));
        const double mean = wv.dot(e);
        if (mean < 0.0 || (std::abs(mean) < 1e-12 && e(0) < 0.0)) e = -e;
        out.eigenvectors.col(j) = e;
        const Vec r = sb.N0 * e - vals(j) * e;
        out.residuals(j) = std::sqrt(wv.dot(r.cwiseProduct(r))) / nrm;
    }
    return out;
}

Mat Operators::solve_perp(const Mat& b) const {
    const StaticBlocks& sb = *blocks_;
    const MinnaertData m = minnaert();
    const Vec& ws = scene_.surface.weights;
    const Eigen::Index ns = ws.size();
    Mat a = 0.5 * Mat::Identity(ns, ns) + sb.K0s + m.psi * ws.transpose();
    RealLU lu(a);
    if (lu.singular()) throw std::runtime_error("solve_perp: singular restricted operator");
    Mat pb = b - m.psi * (ws.transpose() * b) / m.c_omega;
    return lu.solve(pb);
}

std::vector<NeumannPair> Operators::neumann_eigenpairs(int k) const {
    // Limit problem of the regime-4 pencil: (nu^{-1} - N0) u = SLv phi, B0 u + (1/2 + K0*) phi = 0.
    // With phi = -X u + c psi_null the boundary flux of u vanishes and c is eliminated by an
    // oblique projection along s = SLv psi_null.
    const StaticBlocks& sb = *blocks_;
    const MinnaertData m = minnaert();
    const Vec& wv = scene_.volume.weights;
    const Vec& ws = scene_.surface.weights;
    const Eigen::Index nv = wv.size();
    const Mat X = solve_perp(sb.B0);
    const Mat L0 = sb.N0 - sb.SLv * X;
    const Vec s = sb.SLv * m.psi_null;
    const Vec b = sb.B0.transpose() * ws;
    const double bs = b.dot(s);
    const Mat Pi = Mat::Identity(nv, nv) - s * b.transpose() / bs;
    const Mat L = Pi * L0 * Pi;
    CVec vals;
    CMat vecs;
    general_eigen(L, vals, vecs);

    struct Cand {
        double mu;
        Vec u;
    };
    std::vector<Cand> cands;
    const double scale = vals.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < vals.size(); ++j) {
        const cd mu = vals(j);
        if (std::abs(mu.imag()) > 1e-6 * std::abs(mu.real())) continue;
        if (mu.real() <= 1e-10 * scale) {
            if (mu.real() < -1e-10 * scale)
                spdlog::warn("neumann_eigenpairs: discarding nonpositive mode mu = {:.3e}", mu.real());
            continue;
        }
        Vec u = vecs.col(j).real();
        if (u.norm() < 1e-8 * vecs.col(j).norm()) u = vecs.col(j).imag();
        cands.push_back({mu.real(), u});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.mu > b.mu; });

    std::vector<NeumannPair> out;
    for (std::size_t c = 0; c < cands.size() && static_cast<int>(out.size()) < k; ++c) {
        NeumannPair p;
        p.nu = 1.0 / cands[c].mu;
        Vec u = Pi * cands[c].u;
        u /= std::sqrt(wv.dot(u.cwiseProduct(u)));
        Eigen::Index imax = 0;
        u.cwiseAbs().maxCoeff(&imax);
        if (u(imax) < 0.0) u = -u;
        const double coef = -b.dot(L0 * u) / bs;
        p.phi = -X * u + coef * m.psi_null;
        p.trace_u = p.nu * (sb.T0 * u + sb.S0 * p.phi);
        const Vec r = u / p.nu - sb.N0 * u - sb.SLv * p.phi;
        p.phi_residual = std::sqrt(wv.dot(r.cwiseProduct(r)));
        p.u = u;
        int mult = 0;
        for (const auto& q : cands)
            if (std::abs(q.mu - cands[c].mu) <= 1e-6 * cands[c].mu) ++mult;
        p.multiplicity = mult;
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace reso
