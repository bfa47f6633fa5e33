#pragma once

#include <cstdint>
#include <vector>

#include "rayalign/geom.hpp"

namespace rayalign {

// Dense per-pixel fields are stored row-major: index = v * width + u.
// Invalid pixels are encoded in-band (r = 0, direction (0,0,0)) plus a mask
// bit; NaN never appears in a valid field.

/// Per-pixel unit ray directions with a validity mask.
struct RayField {
    int width = 0;
    int height = 0;
    std::vector<Vec3> dirs;
    std::vector<uint8_t> valid;

    RayField() = default;
    RayField(int w, int h)
        : width(w), height(h), dirs(size_t(w) * h, Vec3::Zero()), valid(size_t(w) * h, 0) {}

    size_t size() const { return dirs.size(); }
    int index(int u, int v) const { return v * width + u; }
};

/// Per-pixel radial distance from the optical center (0 = invalid).
struct RadialMap {
    int width = 0;
    int height = 0;
    std::vector<double> r;

    RadialMap() = default;
    RadialMap(int w, int h) : width(w), height(h), r(size_t(w) * h, 0.0) {}

    size_t size() const { return r.size(); }
    int index(int u, int v) const { return v * width + u; }
};

/// Per-pixel confidence, higher = more reliable.
struct ConfidenceMap {
    int width = 0;
    int height = 0;
    std::vector<double> sigma;

    ConfidenceMap() = default;
    ConfidenceMap(int w, int h, double fill = 1.0)
        : width(w), height(h), sigma(size_t(w) * h, fill) {}

    size_t size() const { return sigma.size(); }
    int index(int u, int v) const { return v * width + u; }
};

/// Dense per-pixel 3D points with a validity mask.
struct Pointmap {
    int width = 0;
    int height = 0;
    std::vector<Vec3> xyz;
    std::vector<uint8_t> valid;

    Pointmap() = default;
    Pointmap(int w, int h)
        : width(w), height(h), xyz(size_t(w) * h, Vec3::Zero()), valid(size_t(w) * h, 0) {}

    size_t size() const { return xyz.size(); }
    int index(int u, int v) const { return v * width + u; }
    size_t valid_count() const;
};

/// xyz(u) = d(u) * r(u); a pixel is valid iff the ray is valid and r > 0.
Pointmap make_pointmap(const RayField& rays, const RadialMap& radial);

/// Applies a rigid transform to every valid point; the mask is unchanged.
Pointmap transform_pointmap(const Pointmap& pm, const Pose& p);

/// Mean distance-to-origin over valid pixels. Throws EmptyPointmap.
double norm_factor(const Pointmap& pm);

/// Inverse of make_pointmap: r = ||xyz||, d = xyz / r. Zero points are
/// marked invalid.
std::pair<RayField, RadialMap> decompose_pointmap(const Pointmap& pm);

}  // namespace rayalign
