#pragma once

#include <stdexcept>

#include "reso/linalg.hpp"

namespace reso {

enum class KernelKind { SingleLayer, NormalDerivAtTarget, NormalDerivAtSource };
enum class SeriesKind { N1, SL1, K2star, K3star };

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

constexpr double kPi = 3.14159265358979323846;
constexpr double kFourPi = 4.0 * kPi;
inline const cd kI{0.0, 1.0};

/// exp(i k r) / (4 pi r).
cd green(cd k, double r);

/// Normal derivative of green at the target (d/dn_x) or at the source (d/dn_y).
cd green_normal_deriv(cd k, const Vec3& x, const Vec3& y, const Vec3& n, bool at_target);

/// Kernel of the kappa-series operators. For K2star and K3star n_x is required;
/// the resummed target-normal derivative is K0* + K2* z^2 - K3* z^3 + O(z^4).
cd series_coefficient(SeriesKind kind, const Vec3& x, const Vec3& y, const Vec3* n_x);

/// (G_k - G_0)(r) = (exp(ikr) - 1) / (4 pi r) and its k-derivative i exp(ikr) / (4 pi).
cd green_difference(cd k, double r);
cd green_difference_dk(cd k, double r);

/// d/dn_x (G_k - G_0) for a pair with distance r and ndot = n_x . (x - y), and its k-derivative.
cd dn_green_difference(cd k, double r, double ndot);
cd dn_green_difference_dk(cd k, double r, double ndot);

/// Self term of the volume potential difference for the ball of radius a:
/// integral over the ball of (G_k - G_0)(|y|) dy, and its k-derivative.
cd ball_self_difference(cd k, double a);
cd ball_self_difference_dk(cd k, double a);

}  // namespace reso
