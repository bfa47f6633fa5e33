#include "rayalign/geom.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace rayalign {

namespace {
constexpr double kOrthoTol = 1e-9;
}

Rotation Rotation::from_matrix(const Mat3& m) {
    if ((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
        std::abs(m.determinant() - 1.0) > 1e-6) {
        throw Error("Rotation::from_matrix: matrix is not a rotation");
    }
    Rotation r;
    r.m_ = m;
    return r;
}

Rotation Rotation::from_axis_angle(const Vec3& axis_angle) {
    Rotation r;
    r.m_ = so3_exp(axis_angle);
    return r;
}

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (n < 1e-12) throw ZeroVector("Rotation::from_quaternion: zero quaternion");
    Eigen::Quaterniond q(w / n, x / n, y / n, z / n);
    Rotation r;
    r.m_ = q.toRotationMatrix();
    return r;
}

Rotation Rotation::orthonormalized() const {
    Eigen::JacobiSVD<Mat3> svd(m_, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
        Mat3 d = Mat3::Identity();
        d(2, 2) = -1.0;
        r = svd.matrixU() * d * svd.matrixV().transpose();
    }
    Rotation out;
    out.m_ = r;
    return out;
}

Mat3 so3_exp(const Vec3& w) {
    const double theta = w.norm();
    Mat3 k;
    k << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    if (theta < 1e-12) {
        return Mat3::Identity() + k;
    }
    const Mat3 kn = k / theta;
    return Mat3::Identity() + std::sin(theta) * kn + (1.0 - std::cos(theta)) * kn * kn;
}

Pose Pose::from_matrix(const Mat4& m) {
    if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
        throw Error("Pose::from_matrix: last row is not (0,0,0,1)");
    }
    return Pose(Rotation::from_matrix(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>());
}

Pose Pose::inverse() const {
    const Rotation rt = rotation.inverse();
    return Pose(rt, -rt.apply(translation));
}

Mat4 Pose::matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation.matrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
}

Pose compose(const Pose& a, const Pose& b) {
    return Pose(a.rotation * b.rotation, a.rotation.apply(b.translation) + a.translation);
}

Pose relative_pose(const Pose& p_i, const Pose& p_j) {
    return compose(p_j, p_i.inverse());
}

double geodesic_angle(const Rotation& r1, const Rotation& r2) {
    const double tr = (r1.matrix().transpose() * r2.matrix()).trace();
    return std::acos(std::clamp((tr - 1.0) / 2.0, -1.0, 1.0));
}

double direction_angle(const Vec3& t1, const Vec3& t2) {
    const double n1 = t1.norm();
    const double n2 = t2.norm();
    if (n1 < 1e-12 || n2 < 1e-12) throw ZeroVector("direction_angle: zero-length input");
    return std::acos(std::clamp(t1.dot(t2) / (n1 * n2), -1.0, 1.0));
}

SimilarityTransform umeyama_align(const std::vector<Vec3>& src,
                                  const std::vector<Vec3>& dst,
                                  bool with_scale) {
    if (src.size() != dst.size() || src.size() < 3) {
        throw DegenerateConfiguration("umeyama_align: need >= 3 correspondences of equal length");
    }
    const double n = static_cast<double>(src.size());

    Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
    for (size_t k = 0; k < src.size(); ++k) {
        mu_s += src[k];
        mu_d += dst[k];
    }
    mu_s /= n;
    mu_d /= n;

    Mat3 cov = Mat3::Zero();
    double var_s = 0.0;
    for (size_t k = 0; k < src.size(); ++k) {
        const Vec3 ds = src[k] - mu_s;
        const Vec3 dd = dst[k] - mu_d;
        cov += dd * ds.transpose();
        var_s += ds.squaredNorm();
    }
    cov /= n;
    var_s /= n;

    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    // Rank of the centered covariance < 2 means the points are collinear or
    // coincident and the rotation is unobservable.
    if (sv(1) <= 1e-12 * std::max(sv(0), 1e-300)) {
        throw DegenerateConfiguration("umeyama_align: rank-deficient configuration");
    }

    Vec3 d_sign = Vec3::Ones();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) {
        d_sign(2) = -1.0;  // flip the smallest singular direction
    }
    const Mat3 r = svd.matrixU() * d_sign.asDiagonal() * svd.matrixV().transpose();

    SimilarityTransform out;
    out.rotation = Rotation::from_matrix(r);
    out.scale = with_scale ? sv.dot(d_sign) / var_s : 1.0;
    if (out.scale <= 0.0) {
        throw DegenerateConfiguration("umeyama_align: non-positive scale");
    }
    out.translation = mu_d - out.scale * out.rotation.apply(mu_s);
    return out;
}

}  // namespace rayalign
