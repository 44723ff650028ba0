#include "pcot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pcot/kdtree.hpp"
#include "pcot/parallel.hpp"
#include "pcot/transforms.hpp"

namespace pcot {

namespace {

constexpr double kTieEps = 1e-12;

void require_non_empty(const PointCloud& x, const PointCloud& y, const char* op) {
    if (x.empty() || y.empty())
        throw std::invalid_argument(std::string(op) + ": clouds must be non-empty");
}

// Mean squared nearest-neighbor distance from each point of `from` to the
// set behind `tree`. Per-point terms land in a buffer and are folded in
// index order, so thread count never changes the result.
double mean_sq_nn(const PointCloud& from, const KdTree& tree) {
    std::vector<double> d2(from.size());
    parallel_for(from.size(), [&](std::size_t i) {
        const auto [idx, dist] = tree.nearest(from[i]);
        (void)idx;
        d2[i] = dist * dist;
    });
    double sum = 0.0;
    for (double v : d2) sum += v;
    return sum / static_cast<double>(from.size());
}

double max_nn(const PointCloud& from, const KdTree& tree) {
    std::vector<double> d(from.size());
    parallel_for(from.size(), [&](std::size_t i) { d[i] = tree.nearest(from[i]).second; });
    double best = 0.0;
    for (double v : d) best = std::max(best, v);
    return best;
}

}  // namespace

double chamfer(const PointCloud& x, const PointCloud& y) {
    require_non_empty(x, y, "chamfer");
    const KdTree tree_y(y.points);
    const KdTree tree_x(x.points);
    return mean_sq_nn(x, tree_y) + mean_sq_nn(y, tree_x);
}

double hausdorff(const PointCloud& x, const PointCloud& y) {
    require_non_empty(x, y, "hausdorff");
    const KdTree tree_y(y.points);
    const KdTree tree_x(x.points);
    return std::max(max_nn(x, tree_y), max_nn(y, tree_x));
}

std::pair<double, Gradient> chamfer_value_gradient(const PointCloud& x, const PointCloud& y) {
    require_non_empty(x, y, "chamfer_gradient");
    const KdTree tree_y(y.points);
    const KdTree tree_x(x.points);
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());

    Gradient grad(x.size());
    double value = 0.0;

    // Term 1: each x pulls toward its nearest y. A tie between the two
    // closest neighbors zeroes the term (subgradient choice).
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto nn = tree_y.nearest_k(x[i], std::min<std::size_t>(2, y.size()));
        value += nn[0].second * nn[0].second / nx;
        const bool tied = nn.size() > 1 && nn[1].second - nn[0].second <= kTieEps;
        if (!tied) grad[i] += (x[i] - y[nn[0].first]) * (2.0 / nx);
    }
    // Term 2: each y pulls its nearest x toward itself.
    for (std::size_t j = 0; j < y.size(); ++j) {
        const auto nn = tree_x.nearest_k(y[j], std::min<std::size_t>(2, x.size()));
        value += nn[0].second * nn[0].second / ny;
        const bool tied = nn.size() > 1 && nn[1].second - nn[0].second <= kTieEps;
        if (!tied) grad[nn[0].first] += (x[nn[0].first] - y[j]) * (2.0 / ny);
    }
    return {value, std::move(grad)};
}

Gradient chamfer_gradient(const PointCloud& x, const PointCloud& y) {
    return chamfer_value_gradient(x, y).second;
}

MetricReport evaluate_pair(const PointCloud& pred, const PointCloud& gt,
                           const MetricConfig& cfg) {
    require_non_empty(pred, gt, "evaluate_pair");
    MetricReport report;
    report.cd = chamfer(pred, gt);
    report.hd = hausdorff(pred, gt);
    if (pred.size() != gt.size())
        throw std::invalid_argument("evaluate_pair: EMD/SWD need equal sizes");
    if (pred.size() <= cfg.emd_exact_cap) {
        report.emd = emd_exact(pred, gt, cfg.emd_reduction, cfg.emd_exact_cap).first;
        report.emd_kind = "exact";
    } else {
        report.emd = emd_auction(pred, gt, cfg.auction_epsilon, cfg.emd_reduction);
        report.emd_kind = "auction";
    }
    const DirectionSet dirs = sample_directions(cfg.swd_directions, cfg.swd_seed);
    report.swd = swd(pred, gt, dirs);
    return report;
}

}  // namespace pcot
