#include "rayalign/camera.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace rayalign {

int spec_width(const CameraSpec& spec) {
    return std::visit([](const auto& s) { return s.width; }, spec);
}

int spec_height(const CameraSpec& spec) {
    return std::visit([](const auto& s) { return s.height; }, spec);
}

void validate_spec(const CameraSpec& spec) {
    if (spec_width(spec) < 1 || spec_height(spec) < 1) {
        throw ConfigError("camera: width and height must be >= 1");
    }
    if (const auto* p = std::get_if<PinholeSpec>(&spec)) {
        if (p->fx <= 0 || p->fy <= 0) throw ConfigError("pinhole: focal lengths must be > 0");
    } else if (const auto* f = std::get_if<FisheyeSpec>(&spec)) {
        if (f->f <= 0) throw ConfigError("fisheye: focal must be > 0");
        if (!(f->theta_max > 0 && f->theta_max <= M_PI)) {
            throw ConfigError("fisheye: theta_max must be in (0, pi]");
        }
    } else if (const auto* s = std::get_if<ShSpec>(&spec)) {
        if (s->degree < 1) throw ConfigError("sh: degree must be >= 1");
        if (!(s->theta_max > 0 && s->theta_max <= M_PI)) {
            throw ConfigError("sh: theta_max must be in (0, pi]");
        }
        if (static_cast<int>(s->coeffs.size()) != sh_basis_count(s->degree)) {
            throw ConfigError("sh: coefficient count does not match degree");
        }
    }
}

Vec3 sphere_dir(double theta, double phi) {
    const double st = std::sin(theta);
    return Vec3(st * std::sin(phi), -std::cos(theta), st * std::cos(phi));
}

std::pair<double, double> pixel_to_sphere(double u, double v) {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
        throw OutOfDomain("pixel_to_sphere: normalized coordinate outside (0,1)");
    }
    return {v * M_PI, (u - 0.5) * 2.0 * M_PI};
}

RayField equirect_rays(const EquirectSpec& spec) {
    RayField field(spec.width, spec.height);
    for (int v = 0; v < spec.height; ++v) {
        const double vn = (v + 0.5) / spec.height;
        for (int u = 0; u < spec.width; ++u) {
            const double un = (u + 0.5) / spec.width;
            const auto [theta, phi] = pixel_to_sphere(un, vn);
            field.dirs[field.index(u, v)] = sphere_dir(theta, phi);
            field.valid[field.index(u, v)] = 1;
        }
    }
    return field;
}

Vec3 pinhole_direction(const PinholeSpec& spec, double u, double v) {
    return Vec3((u - spec.cx) / spec.fx, (v - spec.cy) / spec.fy, 1.0).normalized();
}

RayField pinhole_rays(const PinholeSpec& spec) {
    RayField field(spec.width, spec.height);
    for (int v = 0; v < spec.height; ++v) {
        for (int u = 0; u < spec.width; ++u) {
            field.dirs[field.index(u, v)] = pinhole_direction(spec, u + 0.5, v + 0.5);
            field.valid[field.index(u, v)] = 1;
        }
    }
    return field;
}

Vec3 fisheye_direction(const FisheyeSpec& spec, double u, double v) {
    const double du = u - spec.cx;
    const double dv = v - spec.cy;
    const double rho = std::hypot(du, dv);
    const double theta = rho / spec.f;
    const double alpha = std::atan2(dv, du);
    return Vec3(std::sin(theta) * std::cos(alpha), std::sin(theta) * std::sin(alpha),
                std::cos(theta));
}

std::pair<double, double> fisheye_project(const FisheyeSpec& spec, const Vec3& dir) {
    const double theta = std::atan2(std::hypot(dir.x(), dir.y()), dir.z());
    const double alpha = std::atan2(dir.y(), dir.x());
    const double rho = spec.f * theta;
    return {spec.cx + rho * std::cos(alpha), spec.cy + rho * std::sin(alpha)};
}

RayField fisheye_rays(const FisheyeSpec& spec) {
    RayField field(spec.width, spec.height);
    for (int v = 0; v < spec.height; ++v) {
        for (int u = 0; u < spec.width; ++u) {
            const double rho = std::hypot(u + 0.5 - spec.cx, v + 0.5 - spec.cy);
            if (rho / spec.f > spec.theta_max) continue;  // outside the FoV mask
            field.dirs[field.index(u, v)] = fisheye_direction(spec, u + 0.5, v + 0.5);
            field.valid[field.index(u, v)] = 1;
        }
    }
    return field;
}

double sh_basis(int l, int m, double theta, double phi) {
    const int am = std::abs(m);
    if (l < 0 || am > l) throw InvalidOrder("sh_basis: |m| must be <= l");
    const double x = std::cos(theta);
    const double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI) *
                                  std::exp(std::lgamma(l - am + 1) - std::lgamma(l + am + 1)));
    const double p = std::assoc_legendre(unsigned(l), unsigned(am), x);
    if (m == 0) return norm * p;
    if (m > 0) return M_SQRT2 * norm * std::cos(m * phi) * p;
    return M_SQRT2 * norm * std::sin(am * phi) * p;
}

ShChartSample sh_chart(int width, int height, double theta_max, int u, int v) {
    ShChartSample s;
    const double un = (u + 0.5) / width;
    const double vn = (v + 0.5) / height;
    if (theta_max >= M_PI - 1e-12) {
        std::tie(s.theta, s.phi) = pixel_to_sphere(un, vn);
        s.inside = true;
        return s;
    }
    const double a = 2.0 * un - 1.0;
    const double b = 2.0 * vn - 1.0;
    s.theta = std::hypot(a, b) * theta_max;
    s.phi = std::atan2(b, a);
    s.inside = s.theta <= M_PI;
    return s;
}

RayField sh_ray_field(const ShSpec& spec) {
    if (static_cast<int>(spec.coeffs.size()) != sh_basis_count(spec.degree)) {
        throw CoefficientMismatch("sh_ray_field: coefficient count does not match degree");
    }
    RayField field(spec.width, spec.height);
    for (int v = 0; v < spec.height; ++v) {
        for (int u = 0; u < spec.width; ++u) {
            const ShChartSample c = sh_chart(spec.width, spec.height, spec.theta_max, u, v);
            if (!c.inside) continue;
            Vec3 sum = Vec3::Zero();
            int k = 0;
            for (int l = 1; l <= spec.degree; ++l) {
                for (int m = -l; m <= l; ++m, ++k) {
                    sum += spec.coeffs[k] * sh_basis(l, m, c.theta, c.phi);
                }
            }
            const double n = sum.norm();
            if (n < 1e-9) continue;  // degenerate sum, leave invalid
            field.dirs[field.index(u, v)] = sum / n;
            field.valid[field.index(u, v)] = 1;
        }
    }
    return field;
}

ShFit fit_sh_coeffs(const RayField& field, int degree, double theta_max) {
    const int n_basis = sh_basis_count(degree);
    std::vector<int> rows;
    for (int v = 0; v < field.height; ++v) {
        for (int u = 0; u < field.width; ++u) {
            const int i = field.index(u, v);
            if (!field.valid[i]) continue;
            if (!sh_chart(field.width, field.height, theta_max, u, v).inside) continue;
            rows.push_back(i);
        }
    }
    if (static_cast<int>(rows.size()) < n_basis) {
        throw RankDeficient("fit_sh_coeffs: fewer valid pixels than basis functions");
    }

    Eigen::MatrixXd a(rows.size(), n_basis);
    Eigen::MatrixXd b(rows.size(), 3);
    for (size_t r = 0; r < rows.size(); ++r) {
        const int i = rows[r];
        const int u = i % field.width;
        const int v = i / field.width;
        const ShChartSample c = sh_chart(field.width, field.height, theta_max, u, v);
        int k = 0;
        for (int l = 1; l <= degree; ++l) {
            for (int m = -l; m <= l; ++m, ++k) {
                a(r, k) = sh_basis(l, m, c.theta, c.phi);
            }
        }
        b.row(r) = field.dirs[i].transpose();
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < n_basis) {
        throw RankDeficient("fit_sh_coeffs: design matrix is rank deficient");
    }
    const Eigen::MatrixXd coeffs = qr.solve(b);

    ShFit fit;
    fit.spec.width = field.width;
    fit.spec.height = field.height;
    fit.spec.degree = degree;
    fit.spec.theta_max = theta_max;
    fit.spec.coeffs.resize(n_basis);
    for (int k = 0; k < n_basis; ++k) fit.spec.coeffs[k] = coeffs.row(k).transpose();
    fit.residual_rms = std::sqrt((a * coeffs - b).squaredNorm() / double(rows.size()));
    return fit;
}

double angular_extent(const RayField& field) {
    const int ci = field.index(field.width / 2, field.height / 2);
    if (!field.valid[ci]) throw NoValidPixels("angular_extent: center pixel invalid");
    const Vec3 center = field.dirs[ci];
    double worst = 0.0;
    for (size_t i = 0; i < field.size(); ++i) {
        if (!field.valid[i]) continue;
        worst = std::max(worst, std::acos(std::clamp(center.dot(field.dirs[i]), -1.0, 1.0)));
    }
    return worst;
}

RadialMap zdepth_to_radial(const PinholeSpec& spec, const std::vector<double>& zdepth) {
    if (zdepth.size() != size_t(spec.width) * spec.height) {
        throw DimensionMismatch("zdepth_to_radial: map size does not match spec");
    }
    RadialMap radial(spec.width, spec.height);
    for (int v = 0; v < spec.height; ++v) {
        for (int u = 0; u < spec.width; ++u) {
            const int i = radial.index(u, v);
            if (zdepth[i] <= 0.0) continue;
            const double x = (u + 0.5 - spec.cx) / spec.fx;
            const double y = (v + 0.5 - spec.cy) / spec.fy;
            radial.r[i] = zdepth[i] * std::sqrt(x * x + y * y + 1.0);
        }
    }
    return radial;
}

RayField make_rays(const CameraSpec& spec) {
    validate_spec(spec);
    return std::visit(
        [](const auto& s) -> RayField {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, EquirectSpec>) return equirect_rays(s);
            if constexpr (std::is_same_v<T, PinholeSpec>) return pinhole_rays(s);
            if constexpr (std::is_same_v<T, FisheyeSpec>) return fisheye_rays(s);
            if constexpr (std::is_same_v<T, ShSpec>) return sh_ray_field(s);
        },
        spec);
}

}  // namespace rayalign
