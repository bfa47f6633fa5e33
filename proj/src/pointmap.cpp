#include "rayalign/pointmap.hpp"

#include <cmath>

namespace rayalign {

size_t Pointmap::valid_count() const {
    size_t n = 0;
    for (uint8_t v : valid) n += v != 0;
    return n;
}

Pointmap make_pointmap(const RayField& rays, const RadialMap& radial) {
    if (rays.width != radial.width || rays.height != radial.height) {
        throw DimensionMismatch("make_pointmap: ray field and radial map dimensions differ");
    }
    Pointmap pm(rays.width, rays.height);
    for (size_t i = 0; i < pm.size(); ++i) {
        if (rays.valid[i] && radial.r[i] > 0.0) {
            pm.xyz[i] = rays.dirs[i] * radial.r[i];
            pm.valid[i] = 1;
        }
    }
    return pm;
}

Pointmap transform_pointmap(const Pointmap& pm, const Pose& p) {
    Pointmap out = pm;
    for (size_t i = 0; i < out.size(); ++i) {
        if (out.valid[i]) out.xyz[i] = p.apply(pm.xyz[i]);
    }
    return out;
}

double norm_factor(const Pointmap& pm) {
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < pm.size(); ++i) {
        if (pm.valid[i]) {
            sum += pm.xyz[i].norm();
            ++n;
        }
    }
    if (n == 0) throw EmptyPointmap("norm_factor: no valid pixels");
    return sum / static_cast<double>(n);
}

std::pair<RayField, RadialMap> decompose_pointmap(const Pointmap& pm) {
    RayField rays(pm.width, pm.height);
    RadialMap radial(pm.width, pm.height);
    for (size_t i = 0; i < pm.size(); ++i) {
        if (!pm.valid[i]) continue;
        const double r = pm.xyz[i].norm();
        if (r <= 0.0) continue;
        rays.dirs[i] = pm.xyz[i] / r;
        rays.valid[i] = 1;
        radial.r[i] = r;
    }
    return {std::move(rays), std::move(radial)};
}

}  // namespace rayalign
