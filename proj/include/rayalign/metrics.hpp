#pragma once

#include <vector>

#include "rayalign/geom.hpp"

namespace rayalign {

struct PairErrors {
    double rot_err_deg = 0;
    double trans_dir_err_deg = 0;
};

/// Percentage of pairs with rotation error strictly below tau degrees.
double rra_at(const std::vector<PairErrors>& errors, double tau_deg);

/// Percentage of pairs with translation-direction error strictly below tau.
double rta_at(const std::vector<PairErrors>& errors, double tau_deg);

/// Mean over integer thresholds 1..tau_max of the percentage of pairs whose
/// max(rot, trans) error is strictly below the threshold.
double maa(const std::vector<PairErrors>& errors, int tau_max_deg = 30);

/// RMSE of camera centers after with-scale similarity alignment of est onto
/// gt. Throws DegenerateConfiguration for unusable configurations.
double ate_rmse(const std::vector<Vec3>& est, const std::vector<Vec3>& gt);

/// Relative-pose errors for every unordered view pair of two equally
/// indexed camera-to-world trajectories. A near-zero translation on only
/// one side scores 180 degrees; on both sides, 0.
std::vector<PairErrors> pairwise_pose_errors(const std::vector<Pose>& est,
                                             const std::vector<Pose>& gt);

}  // namespace rayalign
