#include "rayalign/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace rayalign {

KdTree3::KdTree3(const std::vector<Vec3>& points) : points_(points) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(points_.size());
    root_ = build(0, static_cast<int>(points_.size()), 0);
}

int KdTree3::build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const int mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) {
                         if (points_[a][axis] != points_[b][axis])
                             return points_[a][axis] < points_[b][axis];
                         return a < b;
                     });
    Node n;
    n.point = order_[mid];
    n.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(n);
    nodes_[self].left = build(lo, mid, depth + 1);
    nodes_[self].right = build(mid + 1, hi, depth + 1);
    return self;
}

int KdTree3::nearest(const Vec3& q) const {
    double best_d2 = std::numeric_limits<double>::infinity();
    int best_idx = -1;
    search(root_, q, best_d2, best_idx);
    return best_idx;
}

void KdTree3::search(int node, const Vec3& q, double& best_d2, int& best_idx) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const double d2 = (points_[n.point] - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && n.point < best_idx)) {
        best_d2 = d2;
        best_idx = n.point;
    }
    const double diff = q[n.axis] - points_[n.point][n.axis];
    const int near_side = diff < 0 ? n.left : n.right;
    const int far_side = diff < 0 ? n.right : n.left;
    search(near_side, q, best_d2, best_idx);
    // The far side may still hold an equal-distance point with a smaller
    // index, so prune only on strict excess.
    if (diff * diff <= best_d2) search(far_side, q, best_d2, best_idx);
}

}  // namespace rayalign
