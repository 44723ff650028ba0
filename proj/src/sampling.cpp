#include "pcot/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "pcot/io.hpp"
#include "pcot/kdtree.hpp"
#include "pcot/parallel.hpp"

namespace pcot {

void NeighborGraph::dump_csv(std::ostream& os) const {
    os << "query,rank,neighbor,distance\n";
    for (std::size_t q = 0; q < neighbors.size(); ++q) {
        for (std::size_t r = 0; r < neighbors[q].size(); ++r) {
            os << q << ',' << r << ',' << neighbors[q][r].first << ','
               << format_double(neighbors[q][r].second) << '\n';
        }
    }
}

std::vector<std::size_t> farthest_point_sample(const PointCloud& cloud, std::size_t m,
                                               std::size_t seed_index) {
    const std::size_t n = cloud.size();
    if (n == 0) throw std::invalid_argument("farthest_point_sample: empty cloud");
    if (m < 1 || m > n)
        throw std::invalid_argument("farthest_point_sample: m must be in [1, n], got " +
                                    std::to_string(m));
    if (seed_index >= n)
        throw std::invalid_argument("farthest_point_sample: seed_index out of range");

    std::vector<std::size_t> selected;
    selected.reserve(m);
    selected.push_back(seed_index);

    // min squared distance to the selected set; -1 marks selected points.
    std::vector<double> min_d2(n);
    for (std::size_t j = 0; j < n; ++j) min_d2[j] = squared_distance(cloud[j], cloud[seed_index]);
    min_d2[seed_index] = -1.0;

    for (std::size_t step = 1; step < m; ++step) {
        double best_d2 = -0.5;
        std::size_t best_j = n;
        // Strict > keeps the lowest index on ties.
        for (std::size_t j = 0; j < n; ++j) {
            if (min_d2[j] > best_d2) {
                best_d2 = min_d2[j];
                best_j = j;
            }
        }
        selected.push_back(best_j);
        min_d2[best_j] = -1.0;
        if (step + 1 < m) {
            for (std::size_t j = 0; j < n; ++j) {
                if (min_d2[j] < 0.0) continue;
                const double d2 = squared_distance(cloud[j], cloud[best_j]);
                if (d2 < min_d2[j]) min_d2[j] = d2;
            }
        }
    }
    return selected;
}

NeighborGraph knn(const PointCloud& cloud, std::size_t k) {
    const std::size_t n = cloud.size();
    if (n == 0) throw std::invalid_argument("knn: empty cloud");
    if (k < 1 || k >= n)
        throw std::invalid_argument("knn: k must satisfy 1 <= k < n, got k=" + std::to_string(k) +
                                    " n=" + std::to_string(n));
    const KdTree tree(cloud.points);
    NeighborGraph graph;
    graph.k = k;
    graph.neighbors.resize(n);
    parallel_for(n, [&](std::size_t i) { graph.neighbors[i] = tree.nearest_k(cloud[i], k, i); });
    return graph;
}

FeatureTable inverse_distance_interpolate(const PointCloud& sources, const FeatureTable& features,
                                          const PointCloud& queries, std::size_t k,
                                          double power) {
    if (sources.empty()) throw std::invalid_argument("inverse_distance_interpolate: empty sources");
    if (features.rows() != sources.size())
        throw std::invalid_argument(
            "inverse_distance_interpolate: features not aligned to sources");
    if (k < 1 || k > sources.size())
        throw std::invalid_argument("inverse_distance_interpolate: k must be in [1, |sources|]");
    if (!(power > 0.0) || !std::isfinite(power))
        throw std::invalid_argument("inverse_distance_interpolate: power must be finite and > 0");

    const KdTree tree(sources.points);
    const std::size_t width = features.width;
    FeatureTable out(queries.size(), width);

    parallel_for(queries.size(), [&](std::size_t q) {
        const auto nn = tree.nearest_k(queries[q], k);
        double* dst = out.row(q);
        // A coincident source wins outright; nn is ordered so it is first.
        if (nn[0].second < 1e-12) {
            const double* src = features.row(nn[0].first);
            std::copy(src, src + width, dst);
            return;
        }
        double weight_sum = 0.0;
        for (const auto& [idx, dist] : nn) {
            const double w = 1.0 / std::pow(dist, power);
            weight_sum += w;
            const double* src = features.row(idx);
            for (std::size_t c = 0; c < width; ++c) dst[c] += w * src[c];
        }
        for (std::size_t c = 0; c < width; ++c) dst[c] /= weight_sum;
    });
    return out;
}

}  // namespace pcot
