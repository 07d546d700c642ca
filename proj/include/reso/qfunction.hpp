#pragma once

#include <array>
#include <string>

#include "reso/operators.hpp"

namespace reso {

enum class Form { Full, Not1, VolumeOnly, SurfaceOnly, GeneralWZ, Rescaled };

std::string to_string(Form f);

/// Dense pencil with all volume rows/columns first, then all boundary rows/columns;
/// inclusion l occupies the l-th slice of each part.
struct QMatrix {
    CMat m;
    cd kappa = 0.0;
    double eps = 1.0;
    Form form = Form::Full;
    std::array<int, 3> abc{0, 0, 0};  ///< rescaling exponents (Rescaled form only)
    int case_id = 0;
    Material material;
    std::size_t inclusions = 1;
    Eigen::Index nv = 0;  ///< volume nodes per inclusion (0 for SurfaceOnly)
    Eigen::Index ns = 0;  ///< boundary nodes per inclusion (0 for VolumeOnly)

    Eigen::Index volume_dim() const { return static_cast<Eigen::Index>(inclusions) * nv; }
    Eigen::Index dim() const { return m.rows(); }
    /// Row or column offset of the given space in the dense matrix.
    Eigen::Index offset(const Space& s) const;
    Eigen::Index extent(const Space& s) const { return s.kind == Space::Kind::Volume ? nv : ns; }
    CMat block(const Space& row, const Space& col) const;
};

/// Row/column quadrature weights of the pencil space (volume then boundary), physical scale.
Vec pencil_weights(const Operators& ops, Form form);

/// Q_kappa in the requested unscaled form at the scene's eps and fixed material values.
/// With derivative = true the kappa-derivative pencil is returned.
QMatrix assemble_q(const Operators& ops, cd kappa, Form form, bool derivative = false);

/// Rescaled pencil on the reference domain at scale eps for material regime case_id.
QMatrix assemble_rescaled(const Operators& ops, cd kappa, double eps, int case_id, bool derivative = false);

/// Exponents (a, b, c) and boundary column splitting power s (0 = none) per regime.
std::array<int, 3> rescaling_exponents(int case_id);
int splitting_power(int case_id);

/// Dimension above which the smallest singular pair is found by inverse iteration.
inline constexpr Eigen::Index kDenseSvdLimit = 1200;

/// Smallest singular pair of W^{1/2} Q W^{-1/2}; w empty means unweighted. The returned
/// vector is in unweighted coordinates with unit weighted norm.
SingularPair smallest_singular(const CMat& q, const Vec& w = Vec());
SingularPair smallest_singular(const QMatrix& q, const Operators& ops);

/// ASCII dump, one `i j re im` line per entry.
void dump_matrix(const CMat& m, const std::string& path);

}  // namespace reso
