#pragma once

#include <iosfwd>
#include <vector>

#include "reso/qfunction.hpp"

namespace reso {

using CVec3 = Eigen::Vector3cd;

/// Isotropic Gaussian bump amplitude * exp(-|x - center|^2 / (2 width^2)).
struct GaussianSource {
    Vec3 center = Vec3::Zero();
    double width = 0.25;
    cd amplitude = 1.0;

    cd value(const Vec3& x) const;
    /// Radius beyond which the bump is below 1e-22 of its peak.
    double support_radius() const { return 10.0 * width; }
};

struct FreeField {
    cd value = 0.0;
    CVec3 gradient = CVec3::Zero();
};

/// (-Delta - kappa^2)^{-1} applied to a Gaussian and its gradient, by the exact radial reduction
/// u(r) = e^{ikr}/(kr) int_0^r f s sin(ks) ds + sin(kr)/(kr) int_r^inf f s e^{iks} ds.
FreeField free_resolvent(cd kappa, const GaussianSource& src, const Vec3& x);

struct ProbeField {
    std::vector<Vec3> points;
    CVec values;
    cd kappa = 0.0;
    GaussianSource source;
};

/// Densities (volume, boundary) of the resolvent-difference formula, all inclusions stacked.
struct ProbeDensities {
    CVec volume;
    CVec boundary;
    cd kappa = 0.0;
};

struct TransmissionReport {
    double dirichlet_jump = 0.0;    ///< max |u+ - u-| relative to max |u|
    double neumann_mismatch = 0.0;  ///< max |rho d_n u+ - d_n u-| relative to the largest one-sided flux
    int samples = 0;
};

/// Resolvent difference (-A - k^2)^{-1} - (-Delta - k^2)^{-1} applied to Gaussian probes.
class ResolventProbe {
public:
    explicit ResolventProbe(Operators ops);

    const Operators& operators() const { return ops_; }

    /// Solves the Q system for the source. form is Full, Not1, VolumeOnly or SurfaceOnly.
    /// Throws DomainError if Im kappa <= 0, std::runtime_error if Q is singular.
    ProbeDensities densities(cd kappa, const GaussianSource& src, Form form = Form::Full) const;

    /// [R_k 1_Omega^*, SL_k] applied to the densities at arbitrary points, with near-field
    /// integration over the cells and panels next to a point.
    CVec evaluate(const ProbeDensities& d, const std::vector<Vec3>& points) const;

    /// Resolvent difference at points at least half a mesh width away from every quadrature node.
    ProbeField apply_resolvent_difference(cd kappa, const GaussianSource& src, const std::vector<Vec3>& points,
                                          Form form = Form::Full) const;

    /// Free field plus resolvent difference.
    CVec total_field(cd kappa, const GaussianSource& src, const std::vector<Vec3>& points) const;

    /// Field continuity and flux condition on points straddling every stride-th boundary node:
    /// offsets t = h, 2h, 3h along the normal on each side (h = spacing * mesh width), quadratic
    /// extrapolation to the boundary.
    TransmissionReport check_transmission(cd kappa, const GaussianSource& src, int stride = 16,
                                          double spacing = 0.25) const;

    /// Relative residual of (Rt_k1 - Rt_k2) f = (k1^2 - k2^2) Rt_k1 Rt_k2 f at the points, where
    /// Rt = R + difference. Products with the free resolvent use R_k1 R_k2 = (R_k1 - R_k2)/(k1^2 - k2^2).
    double pseudo_resolvent_residual(cd k1, cd k2, const GaussianSource& src, const std::vector<Vec3>& points) const;

private:
    struct Traces {
        CVec volume_values;    ///< g at the volume nodes
        CVec resolvent_volume; ///< R_k g at the volume nodes
        CVec resolvent_flux;   ///< normal derivative of R_k g at the boundary nodes
    };
    ProbeDensities solve(cd kappa, const Traces& t, Form form) const;
    Traces gaussian_traces(cd kappa, const GaussianSource& src) const;
    CMat full_block(BlockKind kind, cd kappa) const;

    Operators ops_;
    std::vector<Vec3> vol_nodes_, surf_nodes_, normals_;
    Vec vol_weights_, surf_weights_;
    std::vector<double> cell_diam_, patch_diam_;
    double min_spacing_ = 0.0;
};

/// CSV with header x,y,z,re_u,im_u.
void write_field_csv(std::ostream& out, const ProbeField& field);

}  // namespace reso
