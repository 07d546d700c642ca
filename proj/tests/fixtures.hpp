#pragma once

#include <map>
#include <memory>
#include <utility>

#include "reso/operators.hpp"

namespace fixtures {

/// Unit-ball operators shared across tests (assembly dominates the runtime).
inline const reso::Operators& ball(int surface_n = 320, int volume_n = 600) {
    static std::map<std::pair<int, int>, std::unique_ptr<reso::Operators>> cache;
    auto& slot = cache[{surface_n, volume_n}];
    if (!slot) {
        reso::Scene sc;
        sc.surface = reso::make_unit_sphere_quadrature(surface_n);
        sc.volume = reso::make_ball_volume_quadrature(volume_n);
        reso::StaticOptions opt;
        opt.kid_ratio = 1.0;
        opt.kid_depth = 1;
        slot = std::make_unique<reso::Operators>(sc, opt);
    }
    return *slot;
}

/// Copy of the cached ball with a different material, scale and centers.
inline reso::Operators ball_scene(const reso::Material& m, double eps = 1.0,
                                  std::vector<reso::Vec3> centers = {reso::Vec3::Zero()}, int surface_n = 320,
                                  int volume_n = 600) {
    const reso::Operators& base = ball(surface_n, volume_n);
    reso::Scene sc = base.scene();
    sc.material = m;
    sc.eps = eps;
    sc.centers = std::move(centers);
    sc.validate();
    return reso::Operators(sc, base.shared_blocks());
}

inline reso::Material fixed(double v2, double rho) {
    reso::Material m;
    m.v2 = v2;
    m.rho = rho;
    return m;
}

inline reso::Material regime(int case_id, double v2 = 1.0, double rho = 1.0, double v12 = 0.0, double rho1 = 0.0) {
    reso::Material m;
    m.mode = static_cast<reso::MaterialCase>(case_id);
    m.v2 = v2;
    m.rho = rho;
    m.v12 = v12;
    m.rho1 = rho1;
    return m;
}

}  // namespace fixtures
