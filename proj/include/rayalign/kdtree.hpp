#pragma once

#include <vector>

#include "rayalign/geom.hpp"

namespace rayalign {

/// Static 3D KD-tree for exact nearest-neighbor queries. Ties on distance
/// are broken toward the smaller point index, which makes results identical
/// to a linear scan using the same rule.
class KdTree3 {
  public:
    explicit KdTree3(const std::vector<Vec3>& points);

    bool empty() const { return points_.empty(); }

    /// Index of the nearest point to q (smallest index among equals).
    int nearest(const Vec3& q) const;

  private:
    struct Node {
        int point = -1;
        int axis = 0;
        int left = -1;
        int right = -1;
    };

    int build(int lo, int hi, int depth);
    void search(int node, const Vec3& q, double& best_d2, int& best_idx) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace rayalign
