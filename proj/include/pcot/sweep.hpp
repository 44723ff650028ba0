#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pcot/metrics.hpp"
#include "pcot/point_cloud.hpp"

namespace pcot {

/// Known metric names for sweeps: "cd", "hd", "emd", "swd", "sinkhorn".
extern const std::vector<std::string> kSweepMetrics;

/// Perturbation magnitudes with per-metric raw and max-normalized curves.
struct SweepResult {
    std::string kind;  // "jitter" or "rotation"
    std::vector<double> magnitudes;
    std::vector<std::string> metrics;
    std::map<std::string, std::vector<double>> raw;
    std::map<std::string, std::vector<double>> normalized;
    std::uint64_t seed = 0;
    std::uint64_t direction_seed = 0;
    std::string emd_kind;  // which EMD path the curve used

    /// "magnitude,metric,raw,normalized" rows.
    void write_csv(std::ostream& os) const;
};

/// distance(original, jitter(original, sigma)) for each sigma and metric.
/// sigmas must be ascending and start at 0. One DirectionSet (from
/// cfg.swd_seed) is shared by the whole curve.
SweepResult jitter_sweep(const PointCloud& cloud, const std::vector<double>& sigmas,
                         const std::vector<std::string>& metrics, const MetricConfig& cfg,
                         std::uint64_t seed);

/// distance(original, rotate_yaw(original, angle)) per angle and metric.
/// Angles must be ascending and span [0, 2*pi].
SweepResult rotation_sweep(const PointCloud& cloud, const std::vector<double>& angles,
                           const std::vector<std::string>& metrics, const MetricConfig& cfg);

/// Divides each curve by its own maximum; an identically-zero curve stays
/// zero. Idempotent.
std::vector<double> normalize_curve(const std::vector<double>& raw);

/// Default sweep grids: 20 jitter levels log-spaced over
/// [0, 0.1 * cloud radius] (first entry 0) and 25 rotation angles uniform
/// over [0, 2*pi].
std::vector<double> default_jitter_sigmas(double cloud_radius, std::size_t levels = 20);
std::vector<double> default_rotation_angles(std::size_t count = 25);

struct DatasetReport {
    std::vector<std::string> pair_ids;
    std::vector<MetricReport> reports;
    MetricReport aggregate;
    std::vector<std::string> unmatched;  // files present on one side only

    void write_csv(std::ostream& os) const;  // "pair_id,cd,hd,emd,emd_kind,swd"
};

/// Pairs files by name between two directories of .xyz/.bin clouds and
/// evaluates each pair; the aggregate row is the per-metric mean.
DatasetReport evaluate_dataset(const std::string& pred_dir, const std::string& gt_dir,
                               const MetricConfig& cfg);

}  // namespace pcot
