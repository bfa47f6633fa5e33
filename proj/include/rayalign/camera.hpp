#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "rayalign/pointmap.hpp"

namespace rayalign {

// Direction convention, fixed repo-wide: x right, y down, z forward.
// Spherical parameters (theta, phi): theta is the polar angle measured from
// the -y axis ("up"), phi the azimuth around it with phi = 0 at +z;
// sphere_dir(theta, phi) = (sin t sin p, -cos t, sin t cos p).

struct EquirectSpec {
    int width = 0;
    int height = 0;
};

struct PinholeSpec {
    int width = 0;
    int height = 0;
    double fx = 0, fy = 0, cx = 0, cy = 0;
};

struct FisheyeSpec {
    int width = 0;
    int height = 0;
    double f = 0;  // pixels per radian
    double cx = 0, cy = 0;
    double theta_max = 0;  // field-of-view half angle, radians
};

/// Ray manifold encoded as real spherical-harmonic coefficients c_{l,m}
/// (3-vectors, l = 1..degree, m = -l..l) over a pixel-to-sphere chart.
/// theta_max selects the chart: the full-sphere equirect chart when
/// theta_max = pi, otherwise an azimuthal-equidistant cap of that half-angle
/// centered on the image center.
struct ShSpec {
    int width = 0;
    int height = 0;
    int degree = 3;
    double theta_max = M_PI;
    std::vector<Vec3> coeffs;  // size degree*(degree+2)
};

using CameraSpec = std::variant<EquirectSpec, PinholeSpec, FisheyeSpec, ShSpec>;

int spec_width(const CameraSpec& spec);
int spec_height(const CameraSpec& spec);

/// Throws ConfigError when a spec violates its invariants (non-positive
/// dimensions or focals, theta_max outside (0, pi], coefficient count).
void validate_spec(const CameraSpec& spec);

/// Number of basis functions for degrees 1..L: L(L+2).
inline int sh_basis_count(int degree) { return degree * (degree + 2); }

Vec3 sphere_dir(double theta, double phi);

/// Equirect chart: normalized pixel coords in (0,1)^2 to (theta, phi) with
/// phi = (u - 0.5) 2pi and theta = v pi. Throws OutOfDomain outside (0,1).
std::pair<double, double> pixel_to_sphere(double u, double v);

// Continuous-coordinate directions (pixel units). Field generators sample
// these at pixel centers (index + 0.5).
Vec3 pinhole_direction(const PinholeSpec& spec, double u, double v);
Vec3 fisheye_direction(const FisheyeSpec& spec, double u, double v);  // ignores theta_max
/// Forward equidistant projection of a unit direction to pixel coordinates.
std::pair<double, double> fisheye_project(const FisheyeSpec& spec, const Vec3& dir);

RayField equirect_rays(const EquirectSpec& spec);
RayField pinhole_rays(const PinholeSpec& spec);
RayField fisheye_rays(const FisheyeSpec& spec);

/// Real orthonormal spherical harmonic Y_l^m (no Condon-Shortley phase).
/// Throws InvalidOrder if |m| > l or l < 1... l = 0 is permitted for
/// oracle use even though ray specs start at l = 1.
double sh_basis(int l, int m, double theta, double phi);

/// The chart used by ShSpec: returns (theta, phi) for a pixel center and
/// whether the pixel falls inside the chart (cap corners can exceed pi).
struct ShChartSample {
    double theta = 0;
    double phi = 0;
    bool inside = false;
};
ShChartSample sh_chart(int width, int height, double theta_max, int u, int v);

/// Normalized coefficient-weighted basis sum per pixel (Eq.-of-the-model:
/// d = sum / ||sum||). Pixels with pre-normalization norm < 1e-9 or outside
/// the chart are invalid. Throws CoefficientMismatch.
RayField sh_ray_field(const ShSpec& spec);

struct ShFit {
    ShSpec spec;          // fitted coefficients, chart copied from the request
    double residual_rms;  // per-component LS residual, RMS over valid pixels
};

/// Per-component linear least squares of the field's direction vectors
/// (used as-is, not renormalized) against the basis evaluated on the chart.
/// Throws RankDeficient when the design matrix cannot determine all
/// coefficients.
ShFit fit_sh_coeffs(const RayField& field, int degree, double theta_max);

/// Largest angle between any valid ray and the center pixel's ray; a
/// reasonable theta_max for fitting a forward-facing field.
double angular_extent(const RayField& field);

/// r(u) = Dz(u) * ||((u-cx)/fx, (v-cy)/fy, 1)||; zeros stay invalid.
RadialMap zdepth_to_radial(const PinholeSpec& spec, const std::vector<double>& zdepth);

/// Generates the ray field for any camera description.
RayField make_rays(const CameraSpec& spec);

}  // namespace rayalign
