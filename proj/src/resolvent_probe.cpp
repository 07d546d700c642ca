#include "reso/resolvent_probe.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "reso/quadrature.hpp"

namespace reso {

namespace {

constexpr int kRadialOrder = 16;
constexpr double kNearRatio = 2.0;   // point rule beyond this many diameters
constexpr int kNearDepth = 4;

// Composite Gauss-Legendre on [a, b] with panels no longer than h.
template <class F>
cd radial_integral(double a, double b, double h, F&& f) {
    if (!(b > a)) return 0.0;
    const GaussRule& g = gauss01(kRadialOrder);
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
    const double len = (b - a) / panels;
    cd acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * len;
        for (std::size_t i = 0; i < g.x.size(); ++i) acc += g.w[i] * len * f(lo + len * g.x[i]);
    }
    return acc;
}

double rho_tilde(double rho) { return 2.0 * (rho - 1.0) / (rho + 1.0); }

}  // namespace

cd GaussianSource::value(const Vec3& x) const {
    const double r2 = (x - center).squaredNorm();
    return amplitude * std::exp(-r2 / (2.0 * width * width));
}

FreeField free_resolvent(cd kappa, const GaussianSource& src, const Vec3& x) {
    if (!(src.width > 0.0)) throw std::invalid_argument("free_resolvent: Gaussian width must be positive");
    const Vec3 d = x - src.center;
    const double r = d.norm();
    const double rmax = src.support_radius();
    const double h = 0.5 * src.width;
    auto f = [&](double s) { return src.amplitude * std::exp(-s * s / (2.0 * src.width * src.width)); };
    FreeField out;
    const cd k = kappa;
    if (r < 1e-12 * src.width) {
        out.value = radial_integral(0.0, rmax, h, [&](double s) { return f(s) * s * std::exp(kI * k * s); });
        return out;
    }
    // small kappa: sin(ks)/k -> s
    auto sinc_k = [&](double s) { return std::abs(k) * s < 1e-8 ? cd(s) : std::sin(k * s) / k; };
    const cd inner = radial_integral(0.0, std::min(r, rmax), h, [&](double s) { return f(s) * s * sinc_k(s); });
    const cd outer = r < rmax ? radial_integral(r, rmax, h, [&](double s) { return f(s) * s * std::exp(kI * k * s); })
                              : cd(0.0);
    const cd e = std::exp(kI * k * r);
    const cd sr = sinc_k(r);  // sin(kr)/k
    out.value = e / r * inner + sr / r * outer;
    // radial derivative; the boundary terms cancel
    const cd de = e * (kI * k * r - 1.0) / (r * r);
    const cd cr = std::cos(k * r);
    const cd ds = (r * cr - sr) / (r * r);
    const cd du = de * inner + ds * outer;
    out.gradient = du * (d / r).cast<cd>();
    return out;
}

ResolventProbe::ResolventProbe(Operators ops) : ops_(std::move(ops)) {
    const Scene& sc = ops_.scene();
    const std::size_t n = sc.count();
    const auto nv = static_cast<Eigen::Index>(ops_.nv()), ns = static_cast<Eigen::Index>(ops_.ns());
    vol_weights_.resize(n * nv);
    surf_weights_.resize(n * ns);
    for (std::size_t l = 0; l < n; ++l) {
        const PlacedInclusion p = place(sc, l);
        vol_nodes_.insert(vol_nodes_.end(), p.volume_nodes.begin(), p.volume_nodes.end());
        surf_nodes_.insert(surf_nodes_.end(), p.surface_nodes.begin(), p.surface_nodes.end());
        normals_.insert(normals_.end(), p.normals.begin(), p.normals.end());
        vol_weights_.segment(static_cast<Eigen::Index>(l) * nv, nv) = p.volume_weights;
        surf_weights_.segment(static_cast<Eigen::Index>(l) * ns, ns) = p.surface_weights;
    }
    for (const auto& c : sc.volume.cells) cell_diam_.push_back(sc.eps * c.diameter());
    for (const auto& t : sc.surface.patches) patch_diam_.push_back(sc.eps * t.diameter());
    min_spacing_ = 0.5 * sc.eps * sc.surface.mesh_width();
}

CMat ResolventProbe::full_block(BlockKind kind, cd kappa) const {
    const std::size_t n = ops_.scene().count();
    const bool row_vol = kind == BlockKind::Newton || kind == BlockKind::SingleLayerVol;
    const bool col_vol = kind == BlockKind::Newton || kind == BlockKind::NormalNewton;
    const auto nr = static_cast<Eigen::Index>(row_vol ? ops_.nv() : ops_.ns());
    const auto nc = static_cast<Eigen::Index>(col_vol ? ops_.nv() : ops_.ns());
    CMat m(static_cast<Eigen::Index>(n) * nr, static_cast<Eigen::Index>(n) * nc);
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t j = 0; j < n; ++j)
            m.block(static_cast<Eigen::Index>(l) * nr, static_cast<Eigen::Index>(j) * nc, nr, nc) =
                ops_.assemble(kind, kappa, l, j).entries;
    return m;
}

ResolventProbe::Traces ResolventProbe::gaussian_traces(cd kappa, const GaussianSource& src) const {
    Traces t;
    const auto nv = static_cast<Eigen::Index>(vol_nodes_.size());
    const auto ns = static_cast<Eigen::Index>(surf_nodes_.size());
    t.volume_values.resize(nv);
    t.resolvent_volume.resize(nv);
    t.resolvent_flux.resize(ns);
    for (Eigen::Index i = 0; i < nv; ++i) {
        t.volume_values(i) = src.value(vol_nodes_[i]);
        t.resolvent_volume(i) = free_resolvent(kappa, src, vol_nodes_[i]).value;
    }
    // dot() would conjugate the complex gradient
    for (Eigen::Index i = 0; i < ns; ++i)
        t.resolvent_flux(i) = (free_resolvent(kappa, src, surf_nodes_[i]).gradient.transpose() * normals_[i].cast<cd>())(0);
    return t;
}

ProbeDensities ResolventProbe::solve(cd kappa, const Traces& t, Form form) const {
    if (!(kappa.imag() > 0.0)) throw DomainError("resolvent probe: Im kappa must be positive");
    if (form != Form::Full && form != Form::Not1 && form != Form::VolumeOnly && form != Form::SurfaceOnly)
        throw std::invalid_argument("resolvent probe: unsupported form " + to_string(form));
    const Scene& sc = ops_.scene();
    const std::size_t n = sc.count();
    const auto nv = static_cast<Eigen::Index>(ops_.nv()), ns = static_cast<Eigen::Index>(ops_.ns());
    const bool vol = form != Form::SurfaceOnly, bnd = form != Form::VolumeOnly;
    const QMatrix q = assemble_q(ops_, kappa, form);
    CVec rhs(q.dim());
    const cd k2 = kappa * kappa;
    for (std::size_t l = 0; l < n; ++l) {
        const double v2 = sc.material.v2_at(sc.eps, l);
        const double rt = rho_tilde(sc.material.rho_at(sc.eps, l));
        const auto L = static_cast<Eigen::Index>(l);
        if (vol) {
            const double cv = form == Form::Not1 ? 1.0 : v2 - 1.0;
            // Delta R g = -g - k^2 R g
            rhs.segment(q.offset({Space::Kind::Volume, l}), nv) =
                cv * (-t.volume_values.segment(L * nv, nv) - k2 * t.resolvent_volume.segment(L * nv, nv));
        }
        if (bnd) {
            const double cb = form == Form::Not1 ? 1.0 : rt;
            rhs.segment(q.offset({Space::Kind::Boundary, l}), ns) = cb * t.resolvent_flux.segment(L * ns, ns);
        }
    }
    ComplexLU lu(q.m);
    if (lu.singular()) throw std::runtime_error("resolvent probe: singular Q (discretization failure)");
    const CVec x = lu.solve(rhs);
    ProbeDensities d;
    d.kappa = kappa;
    d.volume = CVec::Zero(static_cast<Eigen::Index>(n) * nv);
    d.boundary = CVec::Zero(static_cast<Eigen::Index>(n) * ns);
    if (vol) d.volume = x.head(q.volume_dim());
    if (bnd) d.boundary = x.tail(static_cast<Eigen::Index>(n) * ns);
    return d;
}

ProbeDensities ResolventProbe::densities(cd kappa, const GaussianSource& src, Form form) const {
    if (!(kappa.imag() > 0.0)) throw DomainError("resolvent probe: Im kappa must be positive");
    return solve(kappa, gaussian_traces(kappa, src), form);
}

CVec ResolventProbe::evaluate(const ProbeDensities& d, const std::vector<Vec3>& points) const {
    const Scene& sc = ops_.scene();
    const double e = sc.eps;
    const cd k = d.kappa;
    const std::size_t n = sc.count();
    const std::size_t nv = ops_.nv(), ns = ops_.ns();
    const bool cells = sc.volume.cells.size() == nv, patches = sc.surface.patches.size() == ns;
    CVec out = CVec::Zero(static_cast<Eigen::Index>(points.size()));
    for (std::size_t p = 0; p < points.size(); ++p) {
        const Vec3& x = points[p];
        cd acc = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const Vec3 xr = (x - sc.centers[l]) / e;
            auto g = [&](const Vec3& y, const Vec3&) { return green(k, e * (xr - y).norm()); };
            for (std::size_t j = 0; j < nv; ++j) {
                const std::size_t J = l * nv + j;
                const cd a = d.volume(static_cast<Eigen::Index>(J));
                if (a == 0.0) continue;
                const double r = (x - vol_nodes_[J]).norm();
                if (cells && r < kNearRatio * cell_diam_[j])
                    acc += a * e * e * e * integrate_cell_adaptive<cd>(sc.volume.cells[j], xr, g, kNearRatio, kNearDepth);
                else
                    acc += a * vol_weights_(static_cast<Eigen::Index>(J)) * green(k, r);
            }
            for (std::size_t j = 0; j < ns; ++j) {
                const std::size_t J = l * ns + j;
                const cd phi = d.boundary(static_cast<Eigen::Index>(J));
                if (phi == 0.0) continue;
                const double r = (x - surf_nodes_[J]).norm();
                if (patches && r < kNearRatio * patch_diam_[j])
                    acc += phi * e * e * integrate_patch_adaptive<cd>(sc.surface.patches[j], xr, g, kNearRatio, kNearDepth);
                else
                    acc += phi * surf_weights_(static_cast<Eigen::Index>(J)) * green(k, r);
            }
        }
        out(static_cast<Eigen::Index>(p)) = acc;
    }
    return out;
}

ProbeField ResolventProbe::apply_resolvent_difference(cd kappa, const GaussianSource& src,
                                                      const std::vector<Vec3>& points, Form form) const {
    for (const auto& x : points) {
        for (const auto& y : vol_nodes_)
            if ((x - y).norm() < min_spacing_)
                throw std::invalid_argument("resolvent probe: evaluation point within half a mesh width of a node");
        for (const auto& y : surf_nodes_)
            if ((x - y).norm() < min_spacing_)
                throw std::invalid_argument("resolvent probe: evaluation point within half a mesh width of a node");
    }
    ProbeField f;
    f.points = points;
    f.kappa = kappa;
    f.source = src;
    f.values = evaluate(densities(kappa, src, form), points);
    return f;
}

CVec ResolventProbe::total_field(cd kappa, const GaussianSource& src, const std::vector<Vec3>& points) const {
    CVec u = evaluate(densities(kappa, src), points);
    for (std::size_t i = 0; i < points.size(); ++i) u(static_cast<Eigen::Index>(i)) += free_resolvent(kappa, src, points[i]).value;
    return u;
}

TransmissionReport ResolventProbe::check_transmission(cd kappa, const GaussianSource& src, int stride,
                                                     double spacing) const {
    if (stride < 1) throw std::invalid_argument("check_transmission: stride must be positive");
    if (!(spacing > 0.0)) throw std::invalid_argument("check_transmission: spacing must be positive");
    const Scene& sc = ops_.scene();
    const double h = spacing * sc.eps * sc.surface.mesh_width();
    const std::size_t ns = ops_.ns();
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < surf_nodes_.size(); i += static_cast<std::size_t>(stride)) picked.push_back(i);
    std::vector<Vec3> pts;
    for (std::size_t i : picked)
        for (int side : {1, -1})
            for (int m = 1; m <= 3; ++m) pts.push_back(surf_nodes_[i] + side * m * h * normals_[i]);
    const CVec u = total_field(kappa, src, pts);
    // quadratic through t = h, 2h, 3h: value and slope at t = 0
    const double cv[3] = {3.0, -3.0, 1.0};
    const double cs[3] = {-2.5 / h, 4.0 / h, -1.5 / h};
    double jump = 0.0, umax = 0.0, flux = 0.0, fmax = 0.0;
    for (std::size_t s = 0; s < picked.size(); ++s) {
        const double rho = sc.material.rho_at(sc.eps, picked[s] / ns);
        cd up = 0.0, um = 0.0, dp = 0.0, dm = 0.0;
        for (int m = 0; m < 3; ++m) {
            const cd a = u(static_cast<Eigen::Index>(6 * s + m)), b = u(static_cast<Eigen::Index>(6 * s + 3 + m));
            up += cv[m] * a;
            um += cv[m] * b;
            dp += cs[m] * a;
            dm -= cs[m] * b;  // interior samples run against the normal
        }
        jump = std::max(jump, std::abs(up - um));
        umax = std::max({umax, std::abs(up), std::abs(um)});
        flux = std::max(flux, std::abs(rho * dp - dm));
        fmax = std::max({fmax, std::abs(dm), std::abs(rho * dp)});
    }
    TransmissionReport r;
    r.samples = static_cast<int>(picked.size());
    r.dirichlet_jump = umax > 0.0 ? jump / umax : 0.0;
    r.neumann_mismatch = fmax > 0.0 ? flux / fmax : 0.0;
    return r;
}

double ResolventProbe::pseudo_resolvent_residual(cd k1, cd k2, const GaussianSource& src,
                                                 const std::vector<Vec3>& points) const {
    if (!(k1.imag() > 0.0) || !(k2.imag() > 0.0)) throw DomainError("pseudo-resolvent: Im kappa must be positive");
    const cd dk = k1 * k1 - k2 * k2;
    if (std::abs(dk) == 0.0) throw std::invalid_argument("pseudo-resolvent: kappa_1^2 = kappa_2^2");
    const Traces t1 = gaussian_traces(k1, src), t2 = gaussian_traces(k2, src);
    const ProbeDensities x1 = solve(k1, t1, Form::Full), x2 = solve(k2, t2, Form::Full);
    ProbeDensities x2_at_k1 = x2;
    x2_at_k1.kappa = k1;

    // g = Rt_k2 f on the inclusions; R_k1 g and its flux through the free identity
    const CMat N1 = full_block(BlockKind::Newton, k1), N2 = full_block(BlockKind::Newton, k2);
    const CMat V1 = full_block(BlockKind::SingleLayerVol, k1), V2 = full_block(BlockKind::SingleLayerVol, k2);
    const CMat B1 = full_block(BlockKind::NormalNewton, k1), B2 = full_block(BlockKind::NormalNewton, k2);
    const CMat K1 = full_block(BlockKind::NormalSingle, k1), K2 = full_block(BlockKind::NormalSingle, k2);
    Traces tg;
    tg.volume_values = t2.resolvent_volume + N2 * x2.volume + V2 * x2.boundary;
    tg.resolvent_volume =
        (t1.resolvent_volume - t2.resolvent_volume + (N1 - N2) * x2.volume + (V1 - V2) * x2.boundary) / dk;
    tg.resolvent_flux = (t1.resolvent_flux - t2.resolvent_flux + (B1 - B2) * x2.volume + (K1 - K2) * x2.boundary) / dk;
    const ProbeDensities y = solve(k1, tg, Form::Full);

    CVec free_diff(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i)
        free_diff(static_cast<Eigen::Index>(i)) =
            free_resolvent(k1, src, points[i]).value - free_resolvent(k2, src, points[i]).value;
    const CVec L1x1 = evaluate(x1, points), L2x2 = evaluate(x2, points);
    const CVec L1x2 = evaluate(x2_at_k1, points), L1y = evaluate(y, points);
    const CVec lhs = free_diff + L1x1 - L2x2;
    // (k1^2 - k2^2) Rt_k1 Rt_k2 f = (R1 - R2) f + (L1 - L2) x2 + (k1^2 - k2^2) L1 y
    const CVec rhs = free_diff + L1x2 - L2x2 + dk * L1y;
    const double scale = lhs.norm();
    return scale > 0.0 ? (lhs - rhs).norm() / scale : (lhs - rhs).norm();
}

void write_field_csv(std::ostream& out, const ProbeField& field) {
    out << "x,y,z,re_u,im_u\r\n";
    out.precision(15);
    for (std::size_t i = 0; i < field.points.size(); ++i) {
        const Vec3& p = field.points[i];
        const cd v = field.values(static_cast<Eigen::Index>(i));
        out << p.x() << ',' << p.y() << ',' << p.z() << ',' << v.real() << ',' << v.imag() << "\r\n";
    }
}

}  // namespace reso
