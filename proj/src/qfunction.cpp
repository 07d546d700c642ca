#include "reso/qfunction.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace reso {

std::string to_string(Form f) {
    switch (f) {
        case Form::Full: return "Full";
        case Form::Not1: return "Not1";
        case Form::VolumeOnly: return "VolumeOnly";
        case Form::SurfaceOnly: return "SurfaceOnly";
        case Form::GeneralWZ: return "GeneralWZ";
        case Form::Rescaled: return "Rescaled";
    }
    return "?";
}

Eigen::Index QMatrix::offset(const Space& s) const {
    if (s.inclusion >= inclusions) throw std::out_of_range("QMatrix: inclusion index out of range");
    const auto l = static_cast<Eigen::Index>(s.inclusion);
    if (s.kind == Space::Kind::Volume) {
        if (nv == 0) throw std::invalid_argument("QMatrix: form has no volume part");
        return l * nv;
    }
    if (ns == 0) throw std::invalid_argument("QMatrix: form has no boundary part");
    return volume_dim() + l * ns;
}

CMat QMatrix::block(const Space& row, const Space& col) const {
    return m.block(offset(row), offset(col), extent(row), extent(col));
}

Vec pencil_weights(const Operators& ops, Form form) {
    const Scene& sc = ops.scene();
    const double e = form == Form::Rescaled ? 1.0 : sc.eps;
    const auto n = static_cast<Eigen::Index>(sc.count());
    const Eigen::Index nv = form == Form::SurfaceOnly ? 0 : static_cast<Eigen::Index>(ops.nv());
    const Eigen::Index ns = form == Form::VolumeOnly ? 0 : static_cast<Eigen::Index>(ops.ns());
    Vec w(n * (nv + ns));
    for (Eigen::Index l = 0; l < n; ++l) {
        if (nv) w.segment(l * nv, nv) = sc.volume.weights * (e * e * e);
        if (ns) w.segment(n * nv + l * ns, ns) = sc.surface.weights * (e * e);
    }
    return w;
}

namespace {

struct RowCoefficients {
    double diag_v = 0.0;  ///< constant on the volume diagonal
    double vol = 0.0;     ///< multiplies kappa^2 N and kappa^2 SL in volume rows
    double diag_b = 0.0;  ///< constant on the boundary diagonal
    double bnd = 0.0;     ///< multiplies B and K* in boundary rows
};

double rho_tilde(double rho) { return 2.0 * (rho - 1.0) / (rho + 1.0); }

RowCoefficients coefficients(const Material& mat, double eps, std::size_t l, Form form) {
    const double v2 = mat.v2_at(eps, l);
    const double rho = mat.rho_at(eps, l);
    const double rt = rho_tilde(rho);
    RowCoefficients c;
    switch (form) {
        case Form::VolumeOnly:
            if (rt != 0.0) throw DomainError("VolumeOnly form: needs rho = 1 on every inclusion");
            c = {v2, v2 - 1.0, 1.0, -rt};
            break;
        case Form::SurfaceOnly:
            if (v2 != 1.0) throw DomainError("SurfaceOnly form: needs v = 1 on every inclusion");
            c = {v2, v2 - 1.0, 1.0, -rt};
            break;
        case Form::Full:
        case Form::Rescaled:
            c = {v2, v2 - 1.0, 1.0, -rt};
            break;
        case Form::Not1: {
            if (v2 == 1.0) throw DomainError("Not1 form: v^2 - 1 = 0");
            if (rt == 0.0) throw DomainError("Not1 form: density contrast vanishes");
            c = {v2 / (v2 - 1.0), 1.0, 1.0 / rt, -1.0};
            break;
        }
        case Form::GeneralWZ: {
            double w = 1.0, z = 0.5;
            if (!mat.v_inf) {
                if (v2 == 1.0) throw DomainError("GeneralWZ form: v^2 - 1 = 0");
                w = v2 / (v2 - 1.0);
            }
            if (!mat.rho_inf) {
                if (rt == 0.0) throw DomainError("GeneralWZ form: density contrast vanishes");
                z = 1.0 / rt;
            }
            c = {w, 1.0, z, -1.0};
            break;
        }
    }
    return c;
}

}  // namespace

QMatrix assemble_q(const Operators& ops, cd kappa, Form form, bool derivative) {
    const Scene& sc = ops.scene();
    QMatrix q;
    q.kappa = kappa;
    q.eps = sc.eps;
    q.form = form;
    q.material = sc.material;
    q.inclusions = sc.count();
    q.nv = form == Form::SurfaceOnly ? 0 : static_cast<Eigen::Index>(ops.nv());
    q.ns = form == Form::VolumeOnly ? 0 : static_cast<Eigen::Index>(ops.ns());
    const Eigen::Index n = q.volume_dim() + static_cast<Eigen::Index>(q.inclusions) * q.ns;
    q.m = CMat::Zero(n, n);
    const cd k2 = kappa * kappa;
    // kappa^2 X_kappa or its kappa-derivative
    auto weighted = [&](BlockKind kind, std::size_t l, std::size_t m) -> CMat {
        const CMat x = ops.assemble(kind, kappa, l, m, false).entries;
        if (!derivative) return k2 * x;
        return 2.0 * kappa * x + k2 * ops.assemble(kind, kappa, l, m, true).entries;
    };
    for (std::size_t l = 0; l < q.inclusions; ++l) {
        const RowCoefficients c = coefficients(sc.material, sc.eps, l, form);
        for (std::size_t m = 0; m < q.inclusions; ++m) {
            const Space vl{Space::Kind::Volume, l}, vm{Space::Kind::Volume, m};
            const Space bl{Space::Kind::Boundary, l}, bm{Space::Kind::Boundary, m};
            if (q.nv) {
                auto tl = q.m.block(q.offset(vl), q.offset(vm), q.nv, q.nv);
                if (c.vol != 0.0) tl = c.vol * weighted(BlockKind::Newton, l, m);
                if (l == m && !derivative) tl.diagonal().array() += c.diag_v;
            }
            if (q.nv && q.ns) {
                if (c.vol != 0.0)
                    q.m.block(q.offset(vl), q.offset(bm), q.nv, q.ns) = c.vol * weighted(BlockKind::SingleLayerVol, l, m);
                if (c.bnd != 0.0)
                    q.m.block(q.offset(bl), q.offset(vm), q.ns, q.nv) =
                        c.bnd * ops.assemble(BlockKind::NormalNewton, kappa, l, m, derivative).entries;
            }
            if (q.ns) {
                auto br = q.m.block(q.offset(bl), q.offset(bm), q.ns, q.ns);
                if (c.bnd != 0.0) br = c.bnd * ops.assemble(BlockKind::NormalSingle, kappa, l, m, derivative).entries;
                if (l == m && !derivative) br.diagonal().array() += c.diag_b;
            }
        }
    }
    return q;
}

std::array<int, 3> rescaling_exponents(int case_id) {
    switch (case_id) {
        case 1: return {2, 1, 1};
        case 2: return {0, 1, 1};
        case 3: return {1, 1, 1};
        case 4: return {2, 1, 1};
        default: break;
    }
    throw std::invalid_argument("rescaled pencil: unsupported regime " + std::to_string(case_id));
}

int splitting_power(int case_id) {
    switch (case_id) {
        case 2: return 2;
        case 3: return 1;
        default: return 0;
    }
}

QMatrix assemble_rescaled(const Operators& ops, cd kappa, double eps, int case_id, bool derivative) {
    if (!(eps > 0.0)) throw std::invalid_argument("rescaled pencil: eps must be positive");
    const auto abc = rescaling_exponents(case_id);
    Operators scaled = ops.with_eps(eps);
    scaled.mutable_scene().material.mode = static_cast<MaterialCase>(case_id);
    QMatrix q = assemble_q(scaled, kappa, Form::Full, derivative);
    q.form = Form::Rescaled;
    q.abc = abc;
    q.case_id = case_id;
    const double a = abc[0], b = abc[1], c = abc[2];
    const Eigen::Index vd = q.volume_dim(), bd = q.dim() - vd;
    q.m.topRows(vd) *= std::pow(eps, -a);
    q.m.bottomRows(bd) *= 0.5 * std::pow(eps, -c);
    q.m.rightCols(bd) *= std::pow(eps, a - b);
    const int s = splitting_power(case_id);
    if (s > 0) {
        // boundary columns act on P phi + eps^s P_perp phi = eps^s phi + (1 - eps^s) P phi
        const MinnaertData md = ops.minnaert();
        const Vec& w = ops.scene().surface.weights;
        const double es = std::pow(eps, s);
        const CVec psi = md.psi.cast<cd>() / md.c_omega;
        const CVec wc = w.cast<cd>();
        for (std::size_t l = 0; l < q.inclusions; ++l) {
            auto cols = q.m.middleCols(q.offset({Space::Kind::Boundary, l}), q.ns);
            const CVec mp = cols * psi;
            cols *= es;
            cols.noalias() += (1.0 - es) * mp * wc.transpose();
        }
    }
    return q;
}

SingularPair smallest_singular(const CMat& q, const Vec& w) {
    if (q.rows() != q.cols()) throw std::invalid_argument("smallest_singular: matrix must be square");
    CMat a = q;
    Vec sq;
    if (w.size()) {
        if (w.size() != q.rows()) throw std::invalid_argument("smallest_singular: weight size mismatch");
        sq = w.cwiseSqrt();
        a = sq.asDiagonal() * q * sq.cwiseInverse().asDiagonal();
    }
    SingularPair r = a.rows() <= kDenseSvdLimit ? smallest_singular_svd(a) : smallest_singular_inverse(a);
    if (w.size()) r.right = sq.cwiseInverse().asDiagonal() * r.right;
    return r;
}

SingularPair smallest_singular(const QMatrix& q, const Operators& ops) {
    return smallest_singular(q.m, pencil_weights(ops, q.form));
}

void dump_matrix(const CMat& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_matrix: cannot open " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << i << ' ' << j << ' ' << m(i, j).real() << ' ' << m(i, j).imag() << '\n';
}

}  // namespace reso
