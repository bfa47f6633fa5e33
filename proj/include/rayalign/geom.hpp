#pragma once

#include <Eigen/Core>
#include <vector>

#include "rayalign/errors.hpp"

namespace rayalign {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// A rotation stored as an orthonormal 3x3 matrix with det = +1.
class Rotation {
  public:
    Rotation() : m_(Mat3::Identity()) {}

    /// Wraps a matrix that is already a valid rotation (checked to 1e-9).
    static Rotation from_matrix(const Mat3& m);
    /// Rodrigues construction; the angle is the norm of `axis_angle` (radians).
    static Rotation from_axis_angle(const Vec3& axis_angle);
    /// Construction from a (not necessarily normalized) quaternion (w, x, y, z).
    static Rotation from_quaternion(double w, double x, double y, double z);
    static Rotation identity() { return Rotation(); }

    const Mat3& matrix() const { return m_; }
    Vec3 apply(const Vec3& v) const { return m_ * v; }
    Rotation inverse() const { return Rotation(m_.transpose(), unchecked{}); }
    Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_, unchecked{}); }

    /// Projects back onto SO(3); counteracts round-off drift after long
    /// products of retractions.
    Rotation orthonormalized() const;

  private:
    struct unchecked {};
    Rotation(const Mat3& m, unchecked) : m_(m) {}
    Mat3 m_;
};

/// Rigid transform x -> R x + t.
struct Pose {
    Rotation rotation;
    Vec3 translation = Vec3::Zero();

    Pose() = default;
    Pose(const Rotation& r, const Vec3& t) : rotation(r), translation(t) {}

    static Pose identity() { return Pose(); }
    static Pose from_matrix(const Mat4& m);

    Vec3 apply(const Vec3& v) const { return rotation.apply(v) + translation; }
    Pose inverse() const;
    Mat4 matrix() const;
};

/// Similarity transform x -> s R x + t with s > 0.
struct SimilarityTransform {
    double scale = 1.0;
    Rotation rotation;
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& v) const { return scale * rotation.apply(v) + translation; }
};

/// Composition: compose(a, b).apply(x) == a.apply(b.apply(x)).
Pose compose(const Pose& a, const Pose& b);

/// Relative transform R_rel = R_j R_i^T, t_rel = t_j - R_rel t_i, i.e.
/// p_j ∘ p_i^{-1}. For poses mapping world coordinates into each camera
/// frame this takes frame-i coordinates to frame-j coordinates.
Pose relative_pose(const Pose& p_i, const Pose& p_j);

/// Angle of the rotation r1^T r2, in [0, pi]. The arccos argument is
/// clamped so trace round-off near 0 and pi cannot produce NaN.
double geodesic_angle(const Rotation& r1, const Rotation& r2);

/// Angle between two direction vectors, in [0, pi]. Throws ZeroVector if
/// either norm is below 1e-12.
double direction_angle(const Vec3& t1, const Vec3& t2);

/// Least-squares similarity alignment: minimizes sum ||dst_k - (s R src_k + t)||^2
/// over s (if with_scale), R, t. Standard SVD solution with a sign guard so
/// det(R) = +1 even for reflective configurations. Throws
/// DegenerateConfiguration when the centered source covariance has rank < 2
/// (collinear or coincident points) or the lists are unusable.
SimilarityTransform umeyama_align(const std::vector<Vec3>& src,
                                  const std::vector<Vec3>& dst,
                                  bool with_scale = true);

/// Rodrigues exponential of a tangent 3-vector. Exposed for the optimizer's
/// retraction and for tests.
Mat3 so3_exp(const Vec3& w);

}  // namespace rayalign
