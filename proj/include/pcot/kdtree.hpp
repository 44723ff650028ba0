#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "pcot/point_cloud.hpp"

namespace pcot {

/// Exact 3D kd-tree. The contract is exact agreement with a quadratic
/// scan, including tie handling: candidates are ordered by
/// (squared distance, index), so equal distances resolve to the lowest
/// index. Pruning is conservative on equality to keep that exact.
class KdTree {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    explicit KdTree(const std::vector<Point3>& points);

    std::size_t size() const { return points_.size(); }

    /// Nearest point to `query`, skipping index `exclude`.
    /// Returns (index, distance).
    std::pair<std::size_t, double> nearest(const Point3& query, std::size_t exclude = npos) const;

    /// k nearest points to `query` (skipping `exclude`), ascending by
    /// (distance, index). k must not exceed the number of eligible points.
    std::vector<std::pair<std::size_t, double>> nearest_k(const Point3& query, std::size_t k,
                                                          std::size_t exclude = npos) const;

private:
    struct Node {
        std::size_t point = npos;  // index into points_
        int axis = 0;
        std::size_t left = npos;
        std::size_t right = npos;
    };

    std::size_t build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth);

    struct Best {
        std::size_t index = npos;
        double d2 = std::numeric_limits<double>::infinity();
    };
    void search_nearest(std::size_t node, const Point3& q, std::size_t exclude, Best& best) const;

    struct HeapEntry {
        double d2;
        std::size_t index;
        bool operator<(const HeapEntry& o) const {
            return d2 < o.d2 || (d2 == o.d2 && index < o.index);
        }
    };
    void search_knearest(std::size_t node, const Point3& q, std::size_t k, std::size_t exclude,
                         std::vector<HeapEntry>& heap) const;

    std::vector<Point3> points_;
    std::vector<Node> nodes_;
    std::size_t root_ = npos;
};

}  // namespace pcot
