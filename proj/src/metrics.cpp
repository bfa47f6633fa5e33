#include "rayalign/metrics.hpp"

#include <cmath>

namespace rayalign {

namespace {

double fraction_below(const std::vector<PairErrors>& errors, double tau,
                      double PairErrors::*field) {
    if (errors.empty()) throw EmptyList("metrics: empty error list");
    size_t hits = 0;
    for (const auto& e : errors) hits += (e.*field < tau);
    return 100.0 * double(hits) / double(errors.size());
}

}  // namespace

double rra_at(const std::vector<PairErrors>& errors, double tau_deg) {
    return fraction_below(errors, tau_deg, &PairErrors::rot_err_deg);
}

double rta_at(const std::vector<PairErrors>& errors, double tau_deg) {
    return fraction_below(errors, tau_deg, &PairErrors::trans_dir_err_deg);
}

double maa(const std::vector<PairErrors>& errors, int tau_max_deg) {
    if (errors.empty()) throw EmptyList("maa: empty error list");
    double acc = 0.0;
    for (int t = 1; t <= tau_max_deg; ++t) {
        size_t hits = 0;
        for (const auto& e : errors) {
            hits += std::max(e.rot_err_deg, e.trans_dir_err_deg) < double(t);
        }
        acc += double(hits) / double(errors.size());
    }
    return 100.0 * acc / double(tau_max_deg);
}

double ate_rmse(const std::vector<Vec3>& est, const std::vector<Vec3>& gt) {
    const SimilarityTransform sim = umeyama_align(est, gt, /*with_scale=*/true);
    double sum = 0.0;
    for (size_t k = 0; k < est.size(); ++k) {
        sum += (sim.apply(est[k]) - gt[k]).squaredNorm();
    }
    return std::sqrt(sum / double(est.size()));
}

std::vector<PairErrors> pairwise_pose_errors(const std::vector<Pose>& est,
                                             const std::vector<Pose>& gt) {
    if (est.size() != gt.size()) throw LengthMismatch("pairwise_pose_errors: size mismatch");
    std::vector<PairErrors> out;
    for (size_t i = 0; i < est.size(); ++i) {
        for (size_t j = i + 1; j < est.size(); ++j) {
            const Pose rel_est = compose(est[i].inverse(), est[j]);
            const Pose rel_gt = compose(gt[i].inverse(), gt[j]);
            PairErrors pe;
            pe.rot_err_deg =
                geodesic_angle(rel_est.rotation, rel_gt.rotation) * 180.0 / M_PI;
            const bool est_zero = rel_est.translation.norm() < 1e-12;
            const bool gt_zero = rel_gt.translation.norm() < 1e-12;
            if (est_zero && gt_zero) {
                pe.trans_dir_err_deg = 0.0;
            } else if (est_zero || gt_zero) {
                pe.trans_dir_err_deg = 180.0;
            } else {
                pe.trans_dir_err_deg =
                    direction_angle(rel_est.translation, rel_gt.translation) * 180.0 / M_PI;
            }
            out.push_back(pe);
        }
    }
    return out;
}

}  // namespace rayalign
