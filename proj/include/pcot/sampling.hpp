#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "pcot/point_cloud.hpp"

namespace pcot {

/// Per-query k nearest neighbors, each row ascending by (distance, index).
struct NeighborGraph {
    std::size_t k = 0;
    std::vector<std::vector<std::pair<std::size_t, double>>> neighbors;

    /// Debug dump, one "query,rank,neighbor,distance" row per edge.
    void dump_csv(std::ostream& os) const;
};

/// Per-point feature rows of uniform width, aligned by index to a cloud.
struct FeatureTable {
    std::size_t width = 0;
    std::vector<double> data;  // row-major, rows * width

    FeatureTable() = default;
    FeatureTable(std::size_t rows, std::size_t width_) : width(width_), data(rows * width_, 0.0) {}

    std::size_t rows() const { return width == 0 ? 0 : data.size() / width; }
    double* row(std::size_t i) { return data.data() + i * width; }
    const double* row(std::size_t i) const { return data.data() + i * width; }
};

/// Greedy farthest point sampling. Starts at seed_index; every further
/// pick maximizes the minimum distance to the already selected set, ties
/// broken by lowest index.
std::vector<std::size_t> farthest_point_sample(const PointCloud& cloud, std::size_t m,
                                               std::size_t seed_index = 0);

/// k nearest other points for every point (self excluded).
NeighborGraph knn(const PointCloud& cloud, std::size_t k);

/// Inverse-distance-weighted interpolation of source features onto query
/// positions (w = 1/d^power over the k nearest sources). A query within
/// 1e-12 of a source copies that source's feature verbatim.
FeatureTable inverse_distance_interpolate(const PointCloud& sources, const FeatureTable& features,
                                          const PointCloud& queries, std::size_t k = 3,
                                          double power = 2.0);

}  // namespace pcot
