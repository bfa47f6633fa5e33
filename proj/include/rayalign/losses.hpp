#pragma once

#include <vector>

#include "rayalign/pointmap.hpp"

namespace rayalign {

// Reference implementations of the training objectives. Sums run over
// elements/pixels exactly as the formulas are written (no mean reduction),
// so values scale with resolution.

struct LossWeights {
    double alpha_theta = 0.7;
    double alpha_phi = 0.5;
    double beta = 0.5;
    double lambda_pose = 1.0;
    double lambda_a = 1.0;
    double lambda_regr = 1.0;
    double lambda_pose_total = 1.0;
};

/// Quantile (pinball-style) angular loss: underestimates weigh alpha,
/// overestimates weigh 1 - alpha.
double asym_angular_loss(const std::vector<double>& pred, const std::vector<double>& gt,
                         double alpha);

/// beta * L^{alpha_theta}(theta) + (1 - beta) * L^{alpha_phi}(phi).
double total_angular_loss(const std::vector<double>& pred_theta,
                          const std::vector<double>& gt_theta,
                          const std::vector<double>& pred_phi,
                          const std::vector<double>& gt_phi, const LossWeights& weights);

/// Scale-normalized per-view squared regression over the intersection of
/// prediction and ground-truth validity masks.
double local_regression_loss(const Pointmap& pred1, const Pointmap& gt1, const Pointmap& pred2,
                             const Pointmap& gt2);

struct PoseLossResult {
    double rot = 0;
    double trans = 0;
    double total = 0;
};

/// rot = geodesic angle; trans = ||t_pred - s * t_gt||^2; total = lambda * (rot + trans).
PoseLossResult pose_loss(const Pose& pred, const Rotation& gt_rot, const Vec3& gt_trans,
                         double scale_s, double lambda);

struct LossComponents {
    double angular = 0;
    double regression = 0;
    double pose = 0;
};

double total_loss(const LossComponents& components, const LossWeights& weights);

}  // namespace rayalign
