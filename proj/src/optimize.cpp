#include "pcot/optimize.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "pcot/rng.hpp"
#include "pcot/transforms.hpp"

namespace pcot {

namespace {

constexpr double kTieEps = 1e-12;

std::pair<double, Gradient> emd_auction_value_gradient(const PointCloud& x, const PointCloud& y,
                                                       double epsilon) {
    const Assignment a = emd_auction_assignment(x, y, epsilon);
    const double n = static_cast<double>(x.size());
    Gradient grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Point3 diff = x[i] - y[a.mapping[i]];
        const double dist = diff.norm();
        if (dist > kTieEps) grad[i] = diff * (1.0 / (dist * n));
    }
    return {a.cost / n, std::move(grad)};
}

}  // namespace

std::string to_string(LossKind k) {
    switch (k) {
        case LossKind::kSwd: return "swd";
        case LossKind::kChamfer: return "chamfer";
        case LossKind::kEmdAuction: return "emd-auction";
    }
    return "unknown";
}

std::string to_string(DirectionResampling r) {
    return r == DirectionResampling::kPerStep ? "per-step" : "fixed";
}

PointCloud init_upsample(const PointCloud& source, std::size_t ratio, double sigma,
                         std::uint64_t seed) {
    if (ratio < 1) throw std::invalid_argument("init_upsample: ratio must be >= 1");
    PointCloud out;
    out.points.reserve(source.size() * ratio);
    out.points = source.points;  // first copy untouched
    for (std::size_t copy = 1; copy < ratio; ++copy) {
        const PointCloud jittered = jitter(source, sigma, derive_seed(seed, copy));
        out.points.insert(out.points.end(), jittered.points.begin(), jittered.points.end());
    }
    return out;
}

OptimizationTrace minimize(const PointCloud& init, const PointCloud& target,
                           const OptimizationConfig& cfg) {
    if (init.empty() || target.empty())
        throw std::invalid_argument("minimize: clouds must be non-empty");
    if (cfg.iterations < 1) throw std::invalid_argument("minimize: iterations must be >= 1");
    if (!(cfg.step_size > 0.0) || !std::isfinite(cfg.step_size))
        throw std::invalid_argument("minimize: step_size must be finite and > 0");
    if (cfg.directions_per_step < 1)
        throw std::invalid_argument("minimize: directions_per_step must be >= 1");
    if ((cfg.loss == LossKind::kSwd || cfg.loss == LossKind::kEmdAuction) &&
        init.size() != target.size())
        throw std::invalid_argument("minimize: swd/emd losses need |init| == |target|");

    const auto start = std::chrono::steady_clock::now();

    OptimizationTrace trace;
    trace.config = cfg;
    trace.losses.reserve(cfg.iterations);

    DirectionSet fixed_dirs;
    if (cfg.loss == LossKind::kSwd && cfg.resample == DirectionResampling::kFixed) {
        fixed_dirs = cfg.fixed_directions.empty()
                         ? sample_directions(cfg.directions_per_step, cfg.seed)
                         : cfg.fixed_directions;
    }

    PointCloud cloud = init;
    double initial_loss = 0.0;
    for (std::size_t step = 0; step < cfg.iterations; ++step) {
        double loss = 0.0;
        Gradient grad;
        switch (cfg.loss) {
            case LossKind::kSwd: {
                const DirectionSet& dirs =
                    cfg.resample == DirectionResampling::kFixed
                        ? fixed_dirs
                        : sample_directions(cfg.directions_per_step, derive_seed(cfg.seed, step));
                std::tie(loss, grad) = swd_value_gradient(cloud, target, dirs);
                break;
            }
            case LossKind::kChamfer:
                std::tie(loss, grad) = chamfer_value_gradient(cloud, target);
                break;
            case LossKind::kEmdAuction:
                std::tie(loss, grad) =
                    emd_auction_value_gradient(cloud, target, cfg.auction_epsilon);
                break;
        }
        trace.losses.push_back(loss);
        if (step == 0) {
            initial_loss = loss;
        } else if (loss > 1e6 * initial_loss) {
            throw std::runtime_error("minimize: diverged at step " + std::to_string(step) +
                                     " (loss " + std::to_string(loss) + " vs initial " +
                                     std::to_string(initial_loss) + "); reduce step_size");
        }
        for (std::size_t i = 0; i < cloud.size(); ++i)
            cloud[i] -= grad[i] * cfg.step_size;
    }

    trace.final_cloud = std::move(cloud);
    trace.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return trace;
}

OptimizationTrace upsample(const PointCloud& source, const PointCloud& target,
                           const OptimizationConfig& cfg) {
    const PointCloud init =
        init_upsample(source, cfg.upsample_ratio, cfg.init_jitter_sigma, cfg.seed);
    return minimize(init, target, cfg);
}

double line_occupancy(const PointCloud& cloud, const std::vector<double>& line_levels,
                      double line_spacing) {
    if (line_levels.empty()) throw std::invalid_argument("line_occupancy: no line levels");
    if (!(line_spacing > 0.0)) throw std::invalid_argument("line_occupancy: bad spacing");
    std::size_t occupied = 0;
    for (const double level : line_levels) {
        for (const Point3& p : cloud.points) {
            if (std::abs(p.z - level) < 0.5 * line_spacing) {
                ++occupied;
                break;
            }
        }
    }
    return static_cast<double>(occupied) / static_cast<double>(line_levels.size());
}

}  // namespace pcot
