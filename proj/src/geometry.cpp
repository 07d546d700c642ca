#include "reso/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace reso {

namespace {

Vec3 project(const Vec3& p, const Vec3& center, double radius) {
    Vec3 d = p - center;
    return center + radius * d / d.norm();
}

double max_pairwise(const std::vector<Vec3>& pts) {
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
    return d;
}

}  // namespace

// ---------------------------------------------------------------- TriPatch

Vec3 TriPatch::point(double u, double w) const {
    Vec3 f = v[0] + u * (v[1] - v[0]) + w * (v[2] - v[0]);
    return spherical ? project(f, center, radius) : f;
}

Vec3 TriPatch::normal(double u, double w) const {
    if (spherical) return orient * (point(u, w) - center) / radius;
    return orient * (v[1] - v[0]).cross(v[2] - v[0]).normalized();
}

double TriPatch::jacobian(double u, double w) const {
    if (!spherical) return (v[1] - v[0]).cross(v[2] - v[0]).norm();
    const Vec3 a = (v[0] - center) / radius;
    const Vec3 b = (v[1] - center) / radius;
    const Vec3 c = (v[2] - center) / radius;
    const Vec3 f = a + u * (b - a) + w * (c - a);
    const double fn = f.norm();
    return radius * radius * std::abs(a.dot(b.cross(c))) / (fn * fn * fn);
}

std::array<TriPatch, 4> TriPatch::split() const {
    auto mid = [&](const Vec3& p, const Vec3& q) {
        Vec3 m = 0.5 * (p + q);
        return spherical ? project(m, center, radius) : m;
    };
    const Vec3 m01 = mid(v[0], v[1]);
    const Vec3 m12 = mid(v[1], v[2]);
    const Vec3 m20 = mid(v[2], v[0]);
    std::array<TriPatch, 4> out;
    const std::array<std::array<Vec3, 3>, 4> verts{{{v[0], m01, m20}, {m01, v[1], m12}, {m20, m12, v[2]}, {m01, m12, m20}}};
    for (int k = 0; k < 4; ++k) {
        out[k] = *this;
        out[k].v = verts[k];
    }
    return out;
}

double TriPatch::area() const {
    if (!spherical) return 0.5 * (v[1] - v[0]).cross(v[2] - v[0]).norm();
    const Vec3 a = (v[0] - center).normalized();
    const Vec3 b = (v[1] - center).normalized();
    const Vec3 c = (v[2] - center).normalized();
    const double num = std::abs(a.dot(b.cross(c)));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den) * radius * radius;
}

double TriPatch::diameter() const {
    double d = std::max({(v[0] - v[1]).norm(), (v[1] - v[2]).norm(), (v[2] - v[0]).norm()});
    if (spherical) {
        // arcs bulge slightly beyond the chord
        d *= 1.0 + 0.25 * (d / radius) * (d / radius);
    }
    return d;
}

std::optional<std::array<double, 2>> TriPatch::locate(const Vec3& x, double tol) const {
    const Vec3 e1 = v[1] - v[0];
    const Vec3 e2 = v[2] - v[0];
    double u = 0.0, w = 0.0;
    const double scale = diameter();
    if (spherical) {
        const Vec3 d = x - center;
        if (std::abs(d.norm() - radius) > tol * std::max(1.0, radius)) return std::nullopt;
        Eigen::Matrix3d m;
        m.col(0) = e1;
        m.col(1) = e2;
        m.col(2) = -d;
        const Vec3 sol = m.partialPivLu().solve(center - v[0]);
        if (sol(2) <= 0.0) return std::nullopt;
        u = sol(0);
        w = sol(1);
    } else {
        const Vec3 n = e1.cross(e2).normalized();
        const Vec3 r = x - v[0];
        if (std::abs(r.dot(n)) > tol * std::max(1.0, scale)) return std::nullopt;
        Eigen::Matrix2d g;
        g << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
        const Eigen::Vector2d rhs(e1.dot(r), e2.dot(r));
        const Eigen::Vector2d sol = g.ldlt().solve(rhs);
        u = sol(0);
        w = sol(1);
    }
    const double eps = 1e-9;
    if (u < -eps || w < -eps || u + w > 1.0 + eps) return std::nullopt;
    return std::array<double, 2>{std::clamp(u, 0.0, 1.0), std::clamp(w, 0.0, 1.0)};
}

TriPatch TriPatch::scaled(const Vec3& c, double s) const {
    TriPatch out = *this;
    for (auto& p : out.v) p = c + s * (p - c);
    out.center = c + s * (center - c);
    out.radius = s * radius;
    return out;
}

// ---------------------------------------------------------------- SideQuad

Vec3 SideQuad::edge(double t) const {
    Vec3 f = p0 + t * (p1 - p0);
    return spherical ? project(f, sphere_center, radius) : f;
}

Vec3 SideQuad::edge_tangent(double t) const {
    const Vec3 d = p1 - p0;
    if (!spherical) return d;
    const Vec3 g = p0 + t * (p1 - p0) - sphere_center;
    const double gn = g.norm();
    return radius * (d / gn - g * (g.dot(d)) / (gn * gn * gn));
}

double SideQuad::jacobian(double s, double t) const {
    return s * (edge(t) - c).cross(edge_tangent(t)).norm();
}

std::array<SideQuad, 4> SideQuad::split() const {
    const double sm = 0.5 * (s0 + s1);
    const double tm = 0.5 * (t0 + t1);
    std::array<SideQuad, 4> out;
    const double sr[2][2] = {{s0, sm}, {sm, s1}};
    const double tr[2][2] = {{t0, tm}, {tm, t1}};
    int k = 0;
    for (auto& s : sr)
        for (auto& t : tr) {
            out[k] = *this;
            out[k].s0 = s[0];
            out[k].s1 = s[1];
            out[k].t0 = t[0];
            out[k].t1 = t[1];
            ++k;
        }
    return out;
}

double SideQuad::diameter() const {
    const double tm = 0.5 * (t0 + t1);
    return max_pairwise({point(s0, t0), point(s0, t1), point(s1, t0), point(s1, t1), point(s1, tm)});
}

// ---------------------------------------------------------------- Cell

double Cell::jacobian(double u, double w, double s) const {
    const Vec3 p = base.point(u, w);
    return s * s * std::abs((p - c).dot(base.normal(u, w))) * base.jacobian(u, w);
}

Vec3 Cell::node() const {
    const double sc = 0.75 * (std::pow(b, 4) - std::pow(a, 4)) / (std::pow(b, 3) - std::pow(a, 3));
    return c + sc * (base.centroid() - c);
}

double Cell::volume() const {
    double height = 0.0;
    if (base.spherical) {
        height = base.radius;
    } else {
        height = std::abs((base.v[0] - c).dot(base.normal(0.0, 0.0)));
    }
    return (std::pow(b, 3) - std::pow(a, 3)) / 3.0 * height * base.area();
}

double Cell::diameter() const {
    std::vector<Vec3> pts;
    for (const auto& p : base.v) {
        pts.push_back(c + a * (p - c));
        pts.push_back(c + b * (p - c));
    }
    double d = max_pairwise(pts);
    if (base.spherical) {
        const double e = base.diameter() * b;
        d = std::max(d, e);
    }
    return d;
}

std::array<Cell, 8> Cell::split() const {
    const double m = 0.5 * (a + b);
    const auto kids = base.split();
    std::array<Cell, 8> out;
    int k = 0;
    for (const auto& bp : kids) {
        out[k++] = Cell{bp, c, a, m};
        out[k++] = Cell{bp, c, m, b};
    }
    return out;
}

bool Cell::contains(const Vec3& x, double tol) const {
    const Vec3 d = x - c;
    if (d.norm() < tol) return a <= tol;
    const Vec3 e1 = base.v[1] - base.v[0];
    const Vec3 e2 = base.v[2] - base.v[0];
    Eigen::Matrix3d m;
    m.col(0) = e1;
    m.col(1) = e2;
    m.col(2) = -d;
    const Vec3 sol = m.partialPivLu().solve(c - base.v[0]);
    if (!(sol(2) > 0.0)) return false;
    const double u = sol(0), w = sol(1);
    if (u < -tol || w < -tol || u + w > 1.0 + tol) return false;
    const Vec3 p = base.point(std::clamp(u, 0.0, 1.0), std::clamp(w, 0.0, 1.0));
    const double s = d.norm() / (p - c).norm();
    return s >= a - tol && s <= b + tol;
}

void Cell::faces(std::vector<TriPatch>& tris, std::vector<SideQuad>& quads) const {
    tris.clear();
    quads.clear();
    tris.push_back(base.scaled(c, b));
    if (a > 0.0) {
        TriPatch inner = base.scaled(c, a);
        inner.orient = -inner.orient;
        tris.push_back(inner);
    }
    for (int k = 0; k < 3; ++k) {
        SideQuad q;
        q.c = c;
        q.p0 = base.v[k];
        q.p1 = base.v[(k + 1) % 3];
        q.spherical = base.spherical;
        q.sphere_center = base.center;
        q.radius = base.radius;
        q.s0 = a;
        q.s1 = b;
        Vec3 n = (q.p0 - c).cross(q.p1 - c).normalized();
        if (n.dot(base.v[(k + 2) % 3] - c) > 0.0) n = -n;
        q.n = n;
        quads.push_back(q);
    }
}

// ---------------------------------------------------------------- quadratures

double SurfaceQuadrature::mesh_width() const {
    return std::sqrt(weights.mean());
}

void icosphere(int level, std::vector<Vec3>& vertices, std::vector<std::array<int, 3>>& faces) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : vertices) p.normalize();
    faces = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
             {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> cache;
        auto mid = [&](int i, int j) {
            auto key = std::minmax(i, j);
            auto it = cache.find(key);
            if (it != cache.end()) return it->second;
            vertices.push_back((0.5 * (vertices[i] + vertices[j])).normalized());
            int id = static_cast<int>(vertices.size()) - 1;
            cache[key] = id;
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            int a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({a, f[1], b});
            next.push_back({c, b, f[2]});
            next.push_back({a, b, c});
        }
        faces.swap(next);
    }
    for (auto& f : faces) {
        const Vec3& a = vertices[f[0]];
        if ((vertices[f[1]] - a).cross(vertices[f[2]] - a).dot(a) < 0.0) std::swap(f[1], f[2]);
    }
}

namespace {

std::vector<TriPatch> sphere_patches(int level) {
    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> faces;
    icosphere(level, verts, faces);
    std::vector<TriPatch> out;
    out.reserve(faces.size());
    for (const auto& f : faces) {
        TriPatch p;
        p.v = {verts[f[0]], verts[f[1]], verts[f[2]]};
        p.spherical = true;
        out.push_back(p);
    }
    return out;
}

SurfaceQuadrature from_patches(std::vector<TriPatch> patches, ShapeTag tag) {
    SurfaceQuadrature q;
    q.shape_tag = tag;
    q.weights.resize(static_cast<Eigen::Index>(patches.size()));
    for (std::size_t i = 0; i < patches.size(); ++i) {
        const TriPatch& p = patches[i];
        q.nodes.push_back(p.centroid());
        q.normals.push_back(p.normal(1.0 / 3.0, 1.0 / 3.0));
        q.weights(static_cast<Eigen::Index>(i)) = p.area();
    }
    q.patches = std::move(patches);
    return q;
}

VolumeQuadrature from_cells(std::vector<Cell> cells, ShapeTag tag) {
    VolumeQuadrature q;
    q.shape_tag = tag;
    q.weights.resize(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        q.nodes.push_back(cells[i].node());
        q.weights(static_cast<Eigen::Index>(i)) = cells[i].volume();
    }
    q.cells = std::move(cells);
    return q;
}

int shell_level(int k, int max_level) {
    const int l = static_cast<int>(std::floor(std::log2(1.05 * k)));
    return std::clamp(l, 0, max_level);
}

long ball_count(int shells, int max_level) {
    long n = 0;
    for (int k = 1; k <= shells; ++k) n += 20L << (2 * shell_level(k, max_level));
    return n;
}

}  // namespace

SurfaceQuadrature make_unit_sphere_quadrature(int n) {
    if (n < 64) throw ConfigError("unit sphere quadrature needs at least 64 nodes");
    int level = 0;
    while ((20L << (2 * level)) < n) ++level;
    return from_patches(sphere_patches(level), ShapeTag::UnitSphere);
}

VolumeQuadrature make_ball_volume_quadrature(int n) {
    if (n < 256) throw ConfigError("ball volume quadrature needs at least 256 cells");
    int best_m = 2, best_l = 0;
    long best = -1;
    for (int m = 2; m <= 32; ++m)
        for (int l = 0; l <= 4; ++l) {
            long c = ball_count(m, l);
            if (c <= n && c > best) {
                best = c;
                best_m = m;
                best_l = l;
            }
        }
    std::vector<Cell> cells;
    for (int k = 1; k <= best_m; ++k) {
        const double a = static_cast<double>(k - 1) / best_m;
        const double b = static_cast<double>(k) / best_m;
        for (const auto& p : sphere_patches(shell_level(k, best_l))) cells.push_back(Cell{p, Vec3::Zero(), a, b});
    }
    return from_cells(std::move(cells), ShapeTag::UnitSphere);
}

SurfaceQuadrature load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mesh file: " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
    }
    std::size_t pos = 0;
    auto next = [&]() -> const std::string& {
        if (pos >= tokens.size()) throw ConfigError("mesh parse error: unexpected end of file");
        return tokens[pos++];
    };
    auto next_num = [&]() {
        const std::string& t = next();
        try {
            std::size_t used = 0;
            double x = std::stod(t, &used);
            if (used != t.size()) throw ConfigError("mesh parse error: bad number '" + t + "'");
            return x;
        } catch (const std::logic_error&) {
            throw ConfigError("mesh parse error: bad number '" + t + "'");
        }
    };
    if (next() != "OFF") throw ConfigError("mesh parse error: missing OFF header");
    const long nv = static_cast<long>(next_num());
    const long nf = static_cast<long>(next_num());
    next_num();
    if (nv < 4 || nf < 4) throw ConfigError("mesh parse error: too few vertices or faces");
    std::vector<Vec3> verts(nv);
    for (auto& p : verts) {
        p.x() = next_num();
        p.y() = next_num();
        p.z() = next_num();
    }
    std::vector<std::array<int, 3>> faces(nf);
    for (auto& f : faces) {
        if (static_cast<int>(next_num()) != 3) throw ConfigError("mesh parse error: only triangles supported");
        for (auto& i : f) {
            i = static_cast<int>(next_num());
            if (i < 0 || i >= nv) throw ConfigError("mesh parse error: vertex index out of range");
        }
    }
    // closed and consistently oriented: every directed edge once, its reverse exactly once
    std::map<std::pair<int, int>, int> directed;
    for (const auto& f : faces)
        for (int k = 0; k < 3; ++k) ++directed[{f[k], f[(k + 1) % 3]}];
    for (const auto& [e, cnt] : directed) {
        if (cnt != 1) throw ConfigError("mesh orientation error: inconsistent or repeated edge");
        auto rev = directed.find({e.second, e.first});
        if (rev == directed.end()) throw ConfigError("mesh orientation error: surface is not closed");
    }
    double signed_volume = 0.0;
    for (const auto& f : faces) signed_volume += verts[f[0]].dot(verts[f[1]].cross(verts[f[2]])) / 6.0;
    if (!(signed_volume > 0.0)) throw ConfigError("mesh orientation error: signed volume is not positive");
    std::vector<TriPatch> patches;
    for (const auto& f : faces) {
        TriPatch p;
        p.v = {verts[f[0]], verts[f[1]], verts[f[2]]};
        if (p.area() <= 0.0) throw ConfigError("mesh error: degenerate triangle");
        patches.push_back(p);
    }
    return from_patches(std::move(patches), ShapeTag::TriMesh);
}

VolumeQuadrature make_mesh_volume_quadrature(const SurfaceQuadrature& surface, int shells) {
    if (shells < 1) throw ConfigError("mesh volume quadrature needs at least one shell");
    if (surface.shape_tag == ShapeTag::UnitSphere) {
        const int target = static_cast<int>(surface.size()) * shells;
        return make_ball_volume_quadrature(std::max(target, 256));
    }
    Vec3 centroid = Vec3::Zero();
    double vol = 0.0;
    for (const auto& p : surface.patches) {
        const double dv = p.v[0].dot(p.v[1].cross(p.v[2])) / 6.0;
        vol += dv;
        centroid += dv * (p.v[0] + p.v[1] + p.v[2]) / 4.0;
    }
    centroid /= vol;
    for (const auto& p : surface.patches) {
        if ((p.v[0] - centroid).dot(p.normal(0.0, 0.0)) <= 1e-12)
            throw ConfigError("mesh volume error: surface is not star-shaped about its centroid");
    }
    std::vector<Cell> cells;
    for (int k = 1; k <= shells; ++k) {
        const double a = static_cast<double>(k - 1) / shells;
        const double b = static_cast<double>(k) / shells;
        for (const auto& p : surface.patches) cells.push_back(Cell{p, centroid, a, b});
    }
    return from_cells(std::move(cells), ShapeTag::TriMesh);
}

// ---------------------------------------------------------------- scene

double Material::v2_at(double eps, std::size_t l) const {
    switch (mode) {
        case MaterialCase::Case1:
        case MaterialCase::Case4:
            return eps * eps * (v2 + v12 * eps);
        case MaterialCase::Case2:
            return 1.0 + v12 * eps;
        case MaterialCase::Case3:
            return eps * (v2 + v12 * eps);
        case MaterialCase::Fixed:
            break;
    }
    if (fixed_v2.empty()) return v2;
    return fixed_v2.at(std::min(l, fixed_v2.size() - 1));
}

double Material::rho_at(double eps, std::size_t l) const {
    switch (mode) {
        case MaterialCase::Case1:
            return 1.0 + rho1 * eps;
        case MaterialCase::Case2:
            return eps * eps * (rho + rho1 * eps);
        case MaterialCase::Case3:
        case MaterialCase::Case4:
            return eps * (rho + rho1 * eps);
        case MaterialCase::Fixed:
            break;
    }
    if (fixed_rho.empty()) return rho;
    return fixed_rho.at(std::min(l, fixed_rho.size() - 1));
}

double Scene::circumradius() const {
    double r = 0.0;
    for (const auto& p : surface.patches)
        for (const auto& q : p.v) r = std::max(r, q.norm());
    for (const auto& x : surface.nodes) r = std::max(r, x.norm());
    return r;
}

void Scene::validate() const {
    if (!(eps > 0.0)) throw ConfigError("scene: eps must be positive");
    if (centers.empty()) throw ConfigError("scene: no inclusions");
    const double r = circumradius();
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j)
            if ((centers[i] - centers[j]).norm() <= 2.0 * eps * r)
                throw ConfigError("scene: inclusions overlap (center distance <= 2 eps circumradius)");
    const Material& m = material;
    if (m.mode == MaterialCase::Fixed) {
        if (!m.fixed_v2.empty() && m.fixed_v2.size() != centers.size())
            throw ConfigError("scene: per-inclusion v2 list has wrong length");
        if (!m.fixed_rho.empty() && m.fixed_rho.size() != centers.size())
            throw ConfigError("scene: per-inclusion rho list has wrong length");
        for (std::size_t l = 0; l < centers.size(); ++l)
            if (!(m.v2_at(eps, l) > 0.0) || !(m.rho_at(eps, l) > 0.0))
                throw ConfigError("scene: material scalars must be positive");
    } else {
        if (!(m.v2 > 0.0) || !(m.rho > 0.0)) throw ConfigError("scene: material scalars must be positive");
        if (m.v12 < 0.0) throw ConfigError("scene: v1^2 must be nonnegative");
    }
}

PlacedInclusion place(const Scene& scene, std::size_t l) {
    if (l >= scene.count()) throw std::out_of_range("place: inclusion index out of range");
    PlacedInclusion out;
    const Vec3& y = scene.centers[l];
    const double e = scene.eps;
    for (const auto& x : scene.surface.nodes) out.surface_nodes.push_back(y + e * x);
    out.normals = scene.surface.normals;
    out.surface_weights = scene.surface.weights * (e * e);
    for (const auto& x : scene.volume.nodes) out.volume_nodes.push_back(y + e * x);
    out.volume_weights = scene.volume.weights * (e * e * e);
    return out;
}

}  // namespace reso
