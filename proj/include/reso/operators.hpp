#pragma once

#include <memory>
#include <string>
#include <vector>

#include "reso/geometry.hpp"
#include "reso/kernels.hpp"

namespace reso {

/// Function space carrying a block row or column.
struct Space {
    enum class Kind { Volume, Boundary } kind = Kind::Volume;
    std::size_t inclusion = 0;
    bool operator==(const Space& o) const { return kind == o.kind && inclusion == o.inclusion; }
};

enum class BlockKind {
    Newton,          ///< N_k : volume -> volume
    SingleLayerVol,  ///< 1_Omega SL_k : boundary -> volume
    NormalNewton,    ///< interior normal trace of N_k : volume -> boundary
    NormalSingle,    ///< normal trace of SL_k (adjoint double layer) : boundary -> boundary
    TraceNewton,     ///< Dirichlet trace of N_0 : volume -> boundary (static)
    S0,              ///< Dirichlet trace of SL_0 : boundary -> boundary (static)
    K0               ///< Dirichlet trace of DL_0 : boundary -> boundary (static)
};

std::string to_string(BlockKind k);

struct OperatorBlock {
    CMat entries;
    Space row_space, col_space;
    cd kappa = 0.0;
    BlockKind kind = BlockKind::Newton;
};

/// kappa = 0 blocks of the reference inclusion, integrated with panel rules.
struct StaticBlocks {
    Mat S0;    ///< weight-symmetrized
    Mat K0;    ///< Gauss-corrected diagonal, K0 1 = -1/2
    Mat K0s;   ///< weighted adjoint of K0
    Mat SLv;   ///< 1_Omega SL_0
    Mat T0;    ///< gamma_0 N_0
    Mat B0;    ///< gamma_1^- N_0
    Mat N0;    ///< weight-symmetrized
    Mat K2s;   ///< point-rule kernel -n_x.(x-y)/(8 pi r), zero diagonal
    Mat K3s;   ///< imaginary part of K3*: n_x.(x-y)/(12 pi)
    Vec ball_radius;  ///< equal-volume radii of the cells
};

struct StaticOptions {
    double near_ratio = 3.0;  ///< distance/diameter ratio below which panels are refined
    int max_depth = 7;
    int duffy_order = 12;
    double kid_ratio = 2.0;  ///< refinement ratio inside cells next to the target
    int kid_depth = 3;
    bool verbose = false;
};

StaticBlocks assemble_static(const SurfaceQuadrature& surface, const VolumeQuadrature& volume,
                             const StaticOptions& opt = {});

struct SpectralResult {
    Vec eigenvalues;   ///< descending
    Mat eigenvectors;  ///< columns, unit weighted L2 norm
    Vec residuals;
};

struct MinnaertData {
    double omega2 = 0.0;
    double c_omega = 0.0;
    double volume = 0.0;
    Vec psi;       ///< S0^{-1} 1
    Vec psi_null;  ///< null vector of 1/2 + K0*, scaled so that its weighted sum equals c_omega
};

struct NeumannPair {
    double nu = 0.0;
    Vec u;          ///< volume vector, unit weighted norm, zero boundary flux (<1, B0 u> = 0)
    Vec phi;        ///< boundary density
    Vec trace_u;    ///< Dirichlet trace of u
    double phi_residual = 0.0;  ///< weighted norm of (nu^{-1} - N0) u - SLv phi
    int multiplicity = 1;
};

enum class ProjectorKind { P0, Pstar, Pperp };

/// Discrete operators of one scene. Static blocks are computed once and shared between copies
/// that differ only in scale, centers or material.
class Operators {
public:
    explicit Operators(Scene scene, const StaticOptions& opt = {});
    Operators(Scene scene, std::shared_ptr<const StaticBlocks> blocks);

    const Scene& scene() const { return scene_; }
    Scene& mutable_scene() { return scene_; }
    const StaticBlocks& blocks() const { return *blocks_; }
    std::shared_ptr<const StaticBlocks> shared_blocks() const { return blocks_; }
    Operators with_eps(double eps) const;

    std::size_t ns() const { return scene_.surface.size(); }
    std::size_t nv() const { return scene_.volume.size(); }

    /// Reference-domain dynamic block at wavenumber k (static part plus point-rule difference),
    /// or its k-derivative.
    CMat reference(BlockKind kind, cd k, bool derivative = false) const;

    /// Physical-scale block between inclusions (l_row, l_col); derivative is d/dkappa.
    OperatorBlock assemble(BlockKind kind, cd kappa, std::size_t l_row, std::size_t l_col,
                           bool derivative = false) const;

    /// Reference-domain series blocks; N1 and SL1 as explicit rank-one products.
    OperatorBlock assemble_series(SeriesKind kind) const;

    MinnaertData minnaert() const;
    OperatorBlock projector(ProjectorKind which) const;
    SpectralResult newton_spectrum(int k) const;
    std::vector<NeumannPair> neumann_eigenpairs(int k) const;

    /// Solves (1/2 + K0*)x = Pperp b on the complement of the constants (x with <1,x> = 0).
    Mat solve_perp(const Mat& b) const;

private:
    Scene scene_;
    std::shared_ptr<const StaticBlocks> blocks_;
    mutable std::shared_ptr<MinnaertData> minnaert_;
};

/// Weighted symmetrization A_ij <- (w_i A_ij + w_j A_ji) / (2 w_i).
Mat weight_symmetrize(const Mat& a, const Vec& w);

}  // namespace reso
