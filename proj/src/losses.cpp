#include "rayalign/losses.hpp"

#include <cmath>

namespace rayalign {

double asym_angular_loss(const std::vector<double>& pred, const std::vector<double>& gt,
                         double alpha) {
    if (pred.size() != gt.size()) throw LengthMismatch("asym_angular_loss: length mismatch");
    double sum = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = std::abs(pred[i] - gt[i]);
        sum += (pred[i] < gt[i]) ? alpha * d : (1.0 - alpha) * d;
    }
    return sum;
}

double total_angular_loss(const std::vector<double>& pred_theta,
                          const std::vector<double>& gt_theta,
                          const std::vector<double>& pred_phi,
                          const std::vector<double>& gt_phi, const LossWeights& weights) {
    return weights.beta * asym_angular_loss(pred_theta, gt_theta, weights.alpha_theta) +
           (1.0 - weights.beta) * asym_angular_loss(pred_phi, gt_phi, weights.alpha_phi);
}

namespace {

double view_term(const Pointmap& pred, const Pointmap& gt) {
    if (pred.width != gt.width || pred.height != gt.height) {
        throw DimensionMismatch("local_regression_loss: dimensions differ");
    }
    // Normalization factors over the same valid set for both maps.
    double eta_pred = 0.0, eta_gt = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (pred.valid[i] && gt.valid[i]) {
            eta_pred += pred.xyz[i].norm();
            eta_gt += gt.xyz[i].norm();
            ++n;
        }
    }
    if (n == 0) throw EmptyPointmap("local_regression_loss: empty valid intersection");
    eta_pred /= double(n);
    eta_gt /= double(n);

    double sum = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (pred.valid[i] && gt.valid[i]) {
            sum += (pred.xyz[i] / eta_pred - gt.xyz[i] / eta_gt).squaredNorm();
        }
    }
    return sum;
}

}  // namespace

double local_regression_loss(const Pointmap& pred1, const Pointmap& gt1, const Pointmap& pred2,
                             const Pointmap& gt2) {
    return view_term(pred1, gt1) + view_term(pred2, gt2);
}

PoseLossResult pose_loss(const Pose& pred, const Rotation& gt_rot, const Vec3& gt_trans,
                         double scale_s, double lambda) {
    PoseLossResult out;
    out.rot = geodesic_angle(pred.rotation, gt_rot);
    out.trans = (pred.translation - scale_s * gt_trans).squaredNorm();
    out.total = lambda * (out.rot + out.trans);
    return out;
}

double total_loss(const LossComponents& components, const LossWeights& weights) {
    return weights.lambda_a * components.angular + weights.lambda_regr * components.regression +
           weights.lambda_pose_total * components.pose;
}

}  // namespace rayalign
