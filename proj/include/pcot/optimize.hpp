#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcot/metrics.hpp"
#include "pcot/point_cloud.hpp"

namespace pcot {

enum class LossKind { kSwd, kChamfer, kEmdAuction };

enum class DirectionResampling { kPerStep, kFixed };

std::string to_string(LossKind k);
std::string to_string(DirectionResampling r);

struct OptimizationConfig {
    LossKind loss = LossKind::kSwd;
    std::size_t iterations = 500;
    double step_size = 1.0;
    std::size_t directions_per_step = 32;
    std::size_t upsample_ratio = 2;
    double init_jitter_sigma = 0.02;
    std::uint64_t seed = 0;
    DirectionResampling resample = DirectionResampling::kPerStep;
    double auction_epsilon = 1e-3;
    // Used verbatim when non-empty and resample == kFixed; otherwise fixed
    // directions are sampled from `seed`.
    DirectionSet fixed_directions;
};

struct OptimizationTrace {
    std::vector<double> losses;  // recorded before each step
    PointCloud final_cloud;
    double wall_time_s = 0.0;
    OptimizationConfig config;
};

/// r copies of each source point laid out block-wise; the first block is
/// the untouched source, later blocks are jittered by sigma.
PointCloud init_upsample(const PointCloud& source, std::size_t ratio, double sigma,
                         std::uint64_t seed);

/// Fixed-step gradient descent on the configured loss, treating the
/// points of `init` as free parameters. Per-step direction resampling
/// derives a fresh seed from (seed, step). Aborts with a diagnostic if the
/// loss exceeds 1e6 x its initial value.
OptimizationTrace minimize(const PointCloud& init, const PointCloud& target,
                           const OptimizationConfig& cfg);

/// init_upsample followed by minimize; the final cloud always has
/// ratio * |source| points.
OptimizationTrace upsample(const PointCloud& source, const PointCloud& target,
                           const OptimizationConfig& cfg);

/// Fraction of target scan lines (distinct z levels, spacing inferred from
/// the sorted unique levels) that contain at least one cloud point within
/// half a line spacing. The quantitative proxy for "recovers the scan
/// lines".
double line_occupancy(const PointCloud& cloud, const std::vector<double>& line_levels,
                      double line_spacing);

}  // namespace pcot
