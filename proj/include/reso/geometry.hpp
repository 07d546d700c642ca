#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reso/linalg.hpp"

namespace reso {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Triangle patch parameterized over the reference triangle {u,v >= 0, u+v <= 1}.
/// A spherical patch is the radial projection of the flat triangle onto the sphere
/// |y - center| = radius; its edges are great-circle arcs.
struct TriPatch {
    std::array<Vec3, 3> v;
    bool spherical = false;
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
    double orient = 1.0;  ///< -1 flips the normal

    Vec3 point(double u, double w) const;
    Vec3 normal(double u, double w) const;
    /// Surface element dA per du dw.
    double jacobian(double u, double w) const;
    std::array<TriPatch, 4> split() const;
    double area() const;
    double diameter() const;
    /// Representative point: image of the flat centroid.
    Vec3 centroid() const { return point(1.0 / 3.0, 1.0 / 3.0); }
    /// Reference coordinates of x if x lies on the patch (within tol).
    std::optional<std::array<double, 2>> locate(const Vec3& x, double tol = 1e-10) const;
    /// Image under y -> c + s (y - c). Spherical patches need c == center.
    TriPatch scaled(const Vec3& c, double s) const;
};

/// Planar ruled face {c + s (q(t) - c) : s in [s0,s1], t in [t0,t1]} where q runs along
/// one edge of a base patch (straight segment, or great-circle arc for spherical bases).
struct SideQuad {
    Vec3 c = Vec3::Zero();
    Vec3 p0 = Vec3::Zero(), p1 = Vec3::Zero();
    bool spherical = false;
    Vec3 sphere_center = Vec3::Zero();
    double radius = 1.0;
    double s0 = 0.0, s1 = 1.0, t0 = 0.0, t1 = 1.0;
    Vec3 n = Vec3::UnitZ();  ///< constant outward unit normal

    Vec3 edge(double t) const;
    Vec3 edge_tangent(double t) const;
    Vec3 point(double s, double t) const { return c + s * (edge(t) - c); }
    /// dS per ds dt.
    double jacobian(double s, double t) const;
    std::array<SideQuad, 4> split() const;
    double diameter() const;
    Vec3 centroid() const { return point(0.5 * (s0 + s1), 0.5 * (t0 + t1)); }
};

/// Radial frustum cell {c + s (p - c) : p in base, s in [a,b]}.
struct Cell {
    TriPatch base;
    Vec3 c = Vec3::Zero();
    double a = 0.0, b = 1.0;

    Vec3 point(double u, double w, double s) const { return c + s * (base.point(u, w) - c); }
    /// dV per du dw ds.
    double jacobian(double u, double w, double s) const;
    Vec3 node() const;
    double volume() const;
    double diameter() const;
    std::array<Cell, 8> split() const;
    bool contains(const Vec3& x, double tol = 1e-10) const;
    /// Outward boundary faces: outer, inner (if a > 0), three sides.
    void faces(std::vector<TriPatch>& tris, std::vector<SideQuad>& quads) const;
};

enum class ShapeTag { UnitSphere, TriMesh };

struct SurfaceQuadrature {
    std::vector<Vec3> nodes;
    std::vector<Vec3> normals;
    Vec weights;
    ShapeTag shape_tag = ShapeTag::UnitSphere;
    std::vector<TriPatch> patches;

    std::size_t size() const { return nodes.size(); }
    double area() const { return weights.sum(); }
    /// Mean panel width sqrt(mean weight).
    double mesh_width() const;
};

struct VolumeQuadrature {
    std::vector<Vec3> nodes;
    Vec weights;
    ShapeTag shape_tag = ShapeTag::UnitSphere;
    std::vector<Cell> cells;

    std::size_t size() const { return nodes.size(); }
    double volume() const { return weights.sum(); }
};

enum class MaterialCase { Case1 = 1, Case2 = 2, Case3 = 3, Case4 = 4, Fixed = 0 };

/// Material description. In case mode the coefficients follow the epsilon laws of the
/// four regimes; in fixed mode per-inclusion values are used as given.
struct Material {
    MaterialCase mode = MaterialCase::Fixed;
    double v2 = 1.0;   ///< leading velocity coefficient squared
    double v12 = 0.0;  ///< first-order velocity coefficient squared
    double rho = 1.0;
    double rho1 = 0.0;
    std::vector<double> fixed_v2;   ///< per inclusion, fixed mode
    std::vector<double> fixed_rho;  ///< per inclusion, fixed mode
    bool v_inf = false;             ///< velocity limit flag (w = 1)
    bool rho_inf = false;           ///< density limit flag (z = 1/2)

    /// Effective v^2 and rho of inclusion l at scale eps.
    double v2_at(double eps, std::size_t l) const;
    double rho_at(double eps, std::size_t l) const;
};

struct Scene {
    SurfaceQuadrature surface;  ///< reference boundary
    VolumeQuadrature volume;    ///< reference inclusion
    std::vector<Vec3> centers{Vec3::Zero()};
    double eps = 1.0;
    Material material;

    std::size_t count() const { return centers.size(); }
    double circumradius() const;
    /// Throws ConfigError if inclusions overlap or material scalars are invalid.
    void validate() const;
};

struct PlacedInclusion {
    std::vector<Vec3> surface_nodes;
    std::vector<Vec3> normals;
    Vec surface_weights;
    std::vector<Vec3> volume_nodes;
    Vec volume_weights;
};

/// Icosphere with face-centered nodes; smallest level with 20*4^k >= n.
SurfaceQuadrature make_unit_sphere_quadrature(int n);
/// Spherical-shell by icosphere cells of the unit ball; largest design with count <= n.
VolumeQuadrature make_ball_volume_quadrature(int n);
/// ASCII OFF triangle mesh; one node per triangle at its centroid.
SurfaceQuadrature load_mesh(const std::string& path);
/// Frustum cells over the mesh triangles towards the volume centroid (star-shaped meshes).
VolumeQuadrature make_mesh_volume_quadrature(const SurfaceQuadrature& surface, int shells);
/// Physical nodes and weights of inclusion l (0-based).
PlacedInclusion place(const Scene& scene, std::size_t l);

/// Icosahedron subdivided `level` times, vertices on the unit sphere.
void icosphere(int level, std::vector<Vec3>& vertices, std::vector<std::array<int, 3>>& faces);

}  // namespace reso
