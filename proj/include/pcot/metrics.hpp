#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pcot/point_cloud.hpp"

namespace pcot {

enum class Reduction { kSum, kMean };

/// A bijection between two equal-size point sets together with its cost
/// under the requested reduction.
struct Assignment {
    std::vector<std::size_t> mapping;  // index in X -> index in Y
    double cost = 0.0;
};

struct MetricConfig {
    // Wasserstein order is fixed at p = 1 throughout (absolute-difference
    // form of the sliced estimator; EMD as the discrete W1).
    static constexpr int kOrderP = 1;

    Reduction emd_reduction = Reduction::kMean;
    std::size_t swd_directions = 128;
    std::uint64_t swd_seed = 0;
    double sinkhorn_regularization = 0.01;
    std::size_t sinkhorn_max_iters = 1000;
    double auction_epsilon = 1e-3;
    // Exact assignment is cubic; above this size evaluate_pair switches to
    // the auction approximation.
    std::size_t emd_exact_cap = 512;
};

struct MetricReport {
    double cd = 0.0;
    double hd = 0.0;
    double emd = 0.0;
    double swd = 0.0;
    std::string emd_kind;  // "exact" or "auction"
};

using Gradient = std::vector<Point3>;

/// Symmetric sum of mean squared nearest-neighbor distances.
double chamfer(const PointCloud& x, const PointCloud& y);

/// max(max_x min_y ||x-y||, max_y min_x ||x-y||), unsquared.
double hausdorff(const PointCloud& x, const PointCloud& y);

inline constexpr std::size_t kEmdExactDefaultCap = 512;
inline constexpr std::size_t kEmdAuctionCap = 8192;

/// Globally optimal bijection cost (Jonker-Volgenant style shortest
/// augmenting paths). Requires |x| == |y| <= cap.
std::pair<double, Assignment> emd_exact(const PointCloud& x, const PointCloud& y,
                                        Reduction reduction = Reduction::kMean,
                                        std::size_t cap = kEmdExactDefaultCap);

/// Epsilon-scaling auction. Always returns the cost of a complete
/// bijection, within n * epsilon of the optimal sum.
double emd_auction(const PointCloud& x, const PointCloud& y, double epsilon,
                   Reduction reduction = Reduction::kMean);

/// Auction bijection itself (sum cost); the optimizer differentiates
/// through the returned correspondence.
Assignment emd_auction_assignment(const PointCloud& x, const PointCloud& y, double epsilon);

/// Entropic OT cost <P, C> with uniform marginals and Euclidean ground
/// cost, iterated in the log domain. Sizes may differ. Stops at max_iters
/// or when the worst marginal violation drops below 1e-9.
double sinkhorn(const PointCloud& x, const PointCloud& y, double regularization,
                std::size_t max_iters);

/// Monte-Carlo sliced Wasserstein (p = 1): per direction, sort both
/// projections and average |paired difference|; then average over the
/// direction set. Requires |x| == |y|.
double swd(const PointCloud& x, const PointCloud& y, const DirectionSet& dirs);

/// Analytic SWD gradient with respect to x. Sort ties (projected pair
/// difference within 1e-12) contribute subgradient 0.
Gradient swd_gradient(const PointCloud& x, const PointCloud& y, const DirectionSet& dirs);

/// Computes value and gradient off one set of sorts.
std::pair<double, Gradient> swd_value_gradient(const PointCloud& x, const PointCloud& y,
                                               const DirectionSet& dirs);

/// Chamfer gradient with respect to x, holding nearest-neighbor
/// correspondences fixed. Exact-tie terms contribute 0.
Gradient chamfer_gradient(const PointCloud& x, const PointCloud& y);

std::pair<double, Gradient> chamfer_value_gradient(const PointCloud& x, const PointCloud& y);

/// All four Table-style metrics for one pair. EMD runs exact when
/// n <= cfg.emd_exact_cap, otherwise auction; emd_kind records which.
MetricReport evaluate_pair(const PointCloud& pred, const PointCloud& gt, const MetricConfig& cfg);

}  // namespace pcot
