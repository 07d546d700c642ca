#pragma once

#include <vector>

#include "reso/geometry.hpp"

namespace reso {

/// Gauss-Legendre nodes and weights on [0,1].
struct GaussRule {
    std::vector<double> x, w;
};
const GaussRule& gauss01(int n);

/// Degree-5 seven-point rule on the reference triangle; weights sum to 1/2.
struct TriRule {
    std::vector<std::array<double, 2>> p;
    std::vector<double> w;
};
const TriRule& tri7();

/// Flattened point rule: positions, unit normals (surface only) and weights.
struct PointRule {
    std::vector<Vec3> y;
    std::vector<Vec3> n;
    std::vector<double> w;
    void append(const PointRule& o) {
        y.insert(y.end(), o.y.begin(), o.y.end());
        n.insert(n.end(), o.n.begin(), o.n.end());
        w.insert(w.end(), o.w.begin(), o.w.end());
    }
};

PointRule patch_rule(const TriPatch& p, int depth = 0);
PointRule quad_rule(const SideQuad& q, int order = 4);
PointRule cell_rule(const Cell& c, int depth = 0, int radial = 2);

/// Integrates f(y, n_y) over a patch with one seven-point rule.
template <class T, class F>
T integrate_rule(const PointRule& r, F&& f) {
    T acc{};
    for (std::size_t k = 0; k < r.y.size(); ++k) acc += r.w[k] * f(r.y[k], r.n.empty() ? Vec3::Zero() : r.n[k]);
    return acc;
}

/// Adaptive subdivision until every piece satisfies dist(x, piece) >= ratio * diameter.
template <class T, class F>
T integrate_patch_adaptive(const TriPatch& p, const Vec3& x, F&& f, double ratio, int max_depth) {
    const double d = (x - p.centroid()).norm();
    if (max_depth <= 0 || d >= ratio * p.diameter()) return integrate_rule<T>(patch_rule(p), f);
    T acc{};
    for (const auto& c : p.split()) acc += integrate_patch_adaptive<T>(c, x, f, ratio, max_depth - 1);
    return acc;
}

template <class T, class F>
T integrate_quad_adaptive(const SideQuad& q, const Vec3& x, F&& f, double ratio, int max_depth) {
    const double d = (x - q.centroid()).norm();
    if (max_depth <= 0 || d >= ratio * q.diameter()) return integrate_rule<T>(quad_rule(q), f);
    T acc{};
    for (const auto& c : q.split()) acc += integrate_quad_adaptive<T>(c, x, f, ratio, max_depth - 1);
    return acc;
}

template <class T, class F>
T integrate_cell_adaptive(const Cell& c, const Vec3& x, F&& f, double ratio, int max_depth, int radial = 2) {
    const double d = (x - c.node()).norm();
    if (max_depth <= 0 || d >= ratio * c.diameter()) return integrate_rule<T>(cell_rule(c, 0, radial), f);
    T acc{};
    for (const auto& k : c.split()) acc += integrate_cell_adaptive<T>(k, x, f, ratio, max_depth - 1, radial);
    return acc;
}

/// Integral over a patch whose reference point (u0,w0) carries a 1/r-type singularity.
/// The patch is split into three triangles around the singular point, each mapped from
/// the unit square by a Duffy transform that cancels the singularity.
template <class T, class F>
T integrate_patch_singular(const TriPatch& p, double u0, double w0, F&& f, int order = 12) {
    const GaussRule& g = gauss01(order);
    const double V[3][2] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    T acc{};
    for (int k = 0; k < 3; ++k) {
        const double ax = V[k][0] - u0, ay = V[k][1] - w0;
        const double bx = V[(k + 1) % 3][0] - V[k][0], by = V[(k + 1) % 3][1] - V[k][1];
        const double det = std::abs(ax * by - ay * bx);
        if (det < 1e-14) continue;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            const double xi = g.x[i];
            for (std::size_t j = 0; j < g.x.size(); ++j) {
                const double eta = g.x[j];
                const double u = u0 + xi * (ax + eta * bx);
                const double w = w0 + xi * (ay + eta * by);
                const double wt = g.w[i] * g.w[j] * xi * det * p.jacobian(u, w);
                acc += wt * f(p.point(u, w), p.normal(u, w));
            }
        }
    }
    return acc;
}

}  // namespace reso
