#include "reso/kernels.hpp"

#include <cmath>

namespace reso {

namespace {

// sum_{m>=1} (ix)^m / m!  =  exp(ix) - 1, accurate for small |x|
cd expm1_i(cd x) {
    if (std::abs(x) > 0.1) return std::exp(kI * x) - 1.0;
    cd term = 1.0, acc = 0.0;
    for (int m = 1; m < 30; ++m) {
        term *= kI * x / static_cast<double>(m);
        acc += term;
        if (std::abs(term) < 1e-18 * std::abs(acc)) break;
    }
    return acc;
}

// (ix - 1) exp(ix) + 1 = sum_{m>=2} (ix)^m (m-1)/m!
cd dn_numerator(cd x) {
    if (std::abs(x) > 0.1) return (kI * x - 1.0) * std::exp(kI * x) + 1.0;
    cd pw = kI * x, acc = 0.0;
    double fact = 1.0;
    for (int m = 2; m < 30; ++m) {
        pw *= kI * x;
        fact *= m;
        const cd term = pw * static_cast<double>(m - 1) / fact;
        acc += term;
        if (std::abs(term) < 1e-18 * std::abs(acc)) break;
    }
    return acc;
}

}  // namespace

cd green(cd k, double r) {
    if (!(r > 0.0)) throw DomainError("green: distance must be positive");
    return std::exp(kI * k * r) / (kFourPi * r);
}

cd green_normal_deriv(cd k, const Vec3& x, const Vec3& y, const Vec3& n, bool at_target) {
    const Vec3 d = x - y;
    const double r = d.norm();
    if (!(r > 0.0)) throw DomainError("green_normal_deriv: coincident points");
    const cd gp = (kI * k - 1.0 / r) * std::exp(kI * k * r) / (kFourPi * r);
    const double proj = at_target ? n.dot(d) / r : -n.dot(d) / r;
    return gp * proj;
}

cd series_coefficient(SeriesKind kind, const Vec3& x, const Vec3& y, const Vec3* n_x) {
    switch (kind) {
        case SeriesKind::N1:
        case SeriesKind::SL1:
            return kI / kFourPi;
        case SeriesKind::K2star: {
            if (!n_x) throw std::invalid_argument("series_coefficient: K2star needs a target normal");
            const Vec3 d = x - y;
            const double r = d.norm();
            if (!(r > 0.0)) throw DomainError("series_coefficient: coincident points");
            return -n_x->dot(d) / (8.0 * kPi * r);
        }
        case SeriesKind::K3star: {
            if (!n_x) throw std::invalid_argument("series_coefficient: K3star needs a target normal");
            return kI * n_x->dot(x - y) / (12.0 * kPi);
        }
    }
    return 0.0;
}

cd green_difference(cd k, double r) {
    if (!(r > 0.0)) throw DomainError("green_difference: distance must be positive");
    return expm1_i(k * r) / (kFourPi * r);
}

cd green_difference_dk(cd k, double r) { return kI * std::exp(kI * k * r) / kFourPi; }

cd dn_green_difference(cd k, double r, double ndot) {
    if (!(r > 0.0)) throw DomainError("dn_green_difference: distance must be positive");
    return dn_numerator(k * r) * ndot / (kFourPi * r * r * r);
}

cd dn_green_difference_dk(cd k, double r, double ndot) {
    return -k * std::exp(kI * k * r) * ndot / (kFourPi * r);
}

cd ball_self_difference(cd k, double a) {
    // (exp(ika)(1 - ika) - 1)/k^2 - a^2/2 = a^2 sum_{m>=3} i^m (1-m) (ka)^(m-2) / m!
    const cd x = k * a;
    if (std::abs(x) > 0.1) return (std::exp(kI * x) * (1.0 - kI * x) - 1.0) / (k * k) - 0.5 * a * a;
    cd acc = 0.0, ipow = kI * kI, xp = 1.0;
    double fact = 2.0;
    for (int m = 3; m < 30; ++m) {
        ipow *= kI;
        fact *= m;
        xp = (m == 3) ? x : xp * x;
        const cd term = ipow * static_cast<double>(1 - m) * xp / fact;
        acc += term;
        if (std::abs(term) < 1e-18 * std::abs(acc)) break;
    }
    return a * a * acc;
}

cd ball_self_difference_dk(cd k, double a) {
    const cd x = k * a;
    if (std::abs(x) > 0.1) {
        const cd e = std::exp(kI * x);
        return a * a * e / k - 2.0 * (e * (1.0 - kI * x) - 1.0) / (k * k * k);
    }
    // a^3 sum_{m>=3} i^m (1-m)(m-2) (ka)^(m-3) / m!
    cd acc = 0.0, ipow = kI * kI, xp = 1.0;
    double fact = 2.0;
    for (int m = 3; m < 30; ++m) {
        ipow *= kI;
        fact *= m;
        if (m > 3) xp *= x;
        const cd term = ipow * static_cast<double>((1 - m) * (m - 2)) * xp / fact;
        acc += term;
        if (m > 4 && std::abs(term) < 1e-18 * std::abs(acc)) break;
    }
    return a * a * a * acc;
}

}  // namespace reso
