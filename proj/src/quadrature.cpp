#include "reso/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace reso {

const GaussRule& gauss01(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton on the Legendre polynomial from the Chebyshev guess
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = z;
                p0 = 1.0;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        r.x[i] = 0.5 * (1.0 - z);
        r.w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    return cache.emplace(n, std::move(r)).first->second;
}

const TriRule& tri7() {
    static const TriRule rule = [] {
        TriRule r;
        const double a1 = 0.059715871789770, b1 = 0.470142064105115;
        const double a2 = 0.797426985353087, b2 = 0.101286507323456;
        const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
        r.p = {{1.0 / 3.0, 1.0 / 3.0}, {b1, b1}, {a1, b1}, {b1, a1}, {b2, b2}, {a2, b2}, {b2, a2}};
        r.w = {w0, w1, w1, w1, w2, w2, w2};
        for (auto& w : r.w) w *= 0.5;
        return r;
    }();
    return rule;
}

PointRule patch_rule(const TriPatch& p, int depth) {
    PointRule out;
    if (depth > 0) {
        for (const auto& c : p.split()) out.append(patch_rule(c, depth - 1));
        return out;
    }
    const TriRule& t = tri7();
    for (std::size_t k = 0; k < t.w.size(); ++k) {
        const double u = t.p[k][0], w = t.p[k][1];
        out.y.push_back(p.point(u, w));
        out.n.push_back(p.normal(u, w));
        out.w.push_back(t.w[k] * p.jacobian(u, w));
    }
    return out;
}

PointRule quad_rule(const SideQuad& q, int order) {
    PointRule out;
    const GaussRule& g = gauss01(order);
    const double ds = q.s1 - q.s0, dt = q.t1 - q.t0;
    for (std::size_t i = 0; i < g.x.size(); ++i)
        for (std::size_t j = 0; j < g.x.size(); ++j) {
            const double s = q.s0 + ds * g.x[i];
            const double t = q.t0 + dt * g.x[j];
            out.y.push_back(q.point(s, t));
            out.n.push_back(q.n);
            out.w.push_back(g.w[i] * g.w[j] * ds * dt * q.jacobian(s, t));
        }
    return out;
}

PointRule cell_rule(const Cell& c, int depth, int radial) {
    PointRule out;
    if (depth > 0) {
        for (const auto& k : c.split()) out.append(cell_rule(k, depth - 1, radial));
        return out;
    }
    const TriRule& t = tri7();
    const GaussRule& g = gauss01(radial);
    for (std::size_t k = 0; k < t.w.size(); ++k) {
        const double u = t.p[k][0], w = t.p[k][1];
        const Vec3 p = c.base.point(u, w);
        const double h = std::abs((p - c.c).dot(c.base.normal(u, w))) * c.base.jacobian(u, w);
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            const double s = c.a + (c.b - c.a) * g.x[i];
            out.y.push_back(c.c + s * (p - c.c));
            out.w.push_back(t.w[k] * g.w[i] * (c.b - c.a) * s * s * h);
        }
    }
    return out;
}

}  // namespace reso
