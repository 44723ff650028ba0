#include "pcot/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <ostream>
#include <set>
#include <stdexcept>

#include "pcot/errors.hpp"
#include "pcot/io.hpp"
#include "pcot/rng.hpp"
#include "pcot/transforms.hpp"

namespace pcot {

namespace fs = std::filesystem;

const std::vector<std::string> kSweepMetrics = {"cd", "hd", "emd", "swd", "sinkhorn"};

namespace {

struct MetricEval {
    double value = 0.0;
    std::string emd_kind;
};

MetricEval eval_metric(const std::string& name, const PointCloud& a, const PointCloud& b,
                       const MetricConfig& cfg, const DirectionSet& dirs) {
    MetricEval out;
    if (name == "cd") {
        out.value = chamfer(a, b);
    } else if (name == "hd") {
        out.value = hausdorff(a, b);
    } else if (name == "emd") {
        if (a.size() <= cfg.emd_exact_cap) {
            out.value = emd_exact(a, b, cfg.emd_reduction, cfg.emd_exact_cap).first;
            out.emd_kind = "exact";
        } else {
            out.value = emd_auction(a, b, cfg.auction_epsilon, cfg.emd_reduction);
            out.emd_kind = "auction";
        }
    } else if (name == "swd") {
        out.value = swd(a, b, dirs);
    } else if (name == "sinkhorn") {
        out.value = sinkhorn(a, b, cfg.sinkhorn_regularization, cfg.sinkhorn_max_iters);
    } else {
        throw std::invalid_argument("unknown metric '" + name + "'");
    }
    return out;
}

void validate_metrics(const std::vector<std::string>& metrics) {
    if (metrics.empty()) throw std::invalid_argument("sweep: metric set is empty");
    for (const std::string& m : metrics) {
        if (std::find(kSweepMetrics.begin(), kSweepMetrics.end(), m) == kSweepMetrics.end())
            throw std::invalid_argument("sweep: unknown metric '" + m + "'");
    }
}

SweepResult run_sweep(const PointCloud& cloud, const std::vector<double>& magnitudes,
                      const std::vector<std::string>& metrics, const MetricConfig& cfg,
                      std::uint64_t seed, PerturbationKind kind) {
    SweepResult result;
    result.kind = kind == PerturbationKind::kGaussianJitter ? "jitter" : "rotation";
    result.magnitudes = magnitudes;
    result.metrics = metrics;
    result.seed = seed;
    result.direction_seed = cfg.swd_seed;

    // One direction set for the whole curve so curve shape is not
    // direction-resampling noise.
    const DirectionSet dirs = sample_directions(cfg.swd_directions, cfg.swd_seed);

    for (const std::string& m : metrics) result.raw[m] = {};
    for (std::size_t k = 0; k < magnitudes.size(); ++k) {
        // Magnitude 0 is the identity map by contract; every metric of a
        // cloud against itself is 0, so skip the (approximate) solvers.
        if (magnitudes[k] == 0.0) {
            for (const std::string& m : metrics) result.raw[m].push_back(0.0);
            continue;
        }
        RigidPerturbation p;
        p.kind = kind;
        p.magnitude = magnitudes[k];
        p.seed = derive_seed(seed, k);
        const PointCloud perturbed = apply_perturbation(cloud, p);
        for (const std::string& m : metrics) {
            const MetricEval eval = eval_metric(m, cloud, perturbed, cfg, dirs);
            result.raw[m].push_back(eval.value);
            if (!eval.emd_kind.empty()) result.emd_kind = eval.emd_kind;
        }
    }
    for (const std::string& m : metrics) result.normalized[m] = normalize_curve(result.raw[m]);
    return result;
}

bool is_cloud_file(const fs::path& p) {
    const std::string ext = p.extension().string();
    return ext == ".xyz" || ext == ".xyzb" || ext == ".bin";
}

}  // namespace

std::vector<double> normalize_curve(const std::vector<double>& raw) {
    double max_v = 0.0;
    for (double v : raw) max_v = std::max(max_v, v);
    std::vector<double> out(raw.size(), 0.0);
    if (max_v <= 0.0) return out;  // identically-zero curve stays zero
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / max_v;
    return out;
}

std::vector<double> default_jitter_sigmas(double cloud_radius, std::size_t levels) {
    if (levels < 2) throw std::invalid_argument("default_jitter_sigmas: need >= 2 levels");
    if (!(cloud_radius > 0.0)) throw std::invalid_argument("default_jitter_sigmas: bad radius");
    const double sigma_max = 0.1 * cloud_radius;
    const double sigma_min = 1e-3 * cloud_radius;
    std::vector<double> sigmas{0.0};
    const std::size_t steps = levels - 1;
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = steps == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
        sigmas.push_back(sigma_min * std::pow(sigma_max / sigma_min, t));
    }
    return sigmas;
}

std::vector<double> default_rotation_angles(std::size_t count) {
    if (count < 2) throw std::invalid_argument("default_rotation_angles: need >= 2 angles");
    std::vector<double> angles(count);
    for (std::size_t i = 0; i < count; ++i)
        angles[i] = 2.0 * std::numbers::pi * static_cast<double>(i) /
                    static_cast<double>(count - 1);
    angles.back() = 2.0 * std::numbers::pi;
    return angles;
}

SweepResult jitter_sweep(const PointCloud& cloud, const std::vector<double>& sigmas,
                         const std::vector<std::string>& metrics, const MetricConfig& cfg,
                         std::uint64_t seed) {
    validate_metrics(metrics);
    if (sigmas.empty() || sigmas.front() != 0.0)
        throw std::invalid_argument("jitter_sweep: sigmas must start at 0");
    if (!std::is_sorted(sigmas.begin(), sigmas.end()) ||
        std::adjacent_find(sigmas.begin(), sigmas.end()) != sigmas.end())
        throw std::invalid_argument("jitter_sweep: sigmas must be strictly ascending");
    return run_sweep(cloud, sigmas, metrics, cfg, seed, PerturbationKind::kGaussianJitter);
}

SweepResult rotation_sweep(const PointCloud& cloud, const std::vector<double>& angles,
                           const std::vector<std::string>& metrics, const MetricConfig& cfg) {
    validate_metrics(metrics);
    if (angles.empty() || angles.front() != 0.0)
        throw std::invalid_argument("rotation_sweep: angles must start at 0");
    if (std::abs(angles.back() - 2.0 * std::numbers::pi) > 1e-12)
        throw std::invalid_argument("rotation_sweep: angles must end at 2*pi");
    if (!std::is_sorted(angles.begin(), angles.end()) ||
        std::adjacent_find(angles.begin(), angles.end()) != angles.end())
        throw std::invalid_argument("rotation_sweep: angles must be strictly ascending");
    return run_sweep(cloud, angles, metrics, cfg, 0, PerturbationKind::kYawRotation);
}

void SweepResult::write_csv(std::ostream& os) const {
    os << "magnitude,metric,raw,normalized\n";
    for (std::size_t k = 0; k < magnitudes.size(); ++k) {
        for (const std::string& m : metrics) {
            os << format_double(magnitudes[k]) << ',' << m << ','
               << format_double(raw.at(m)[k]) << ',' << format_double(normalized.at(m)[k])
               << '\n';
        }
    }
}

void DatasetReport::write_csv(std::ostream& os) const {
    os << "pair_id,cd,hd,emd,emd_kind,swd\n";
    for (std::size_t i = 0; i < pair_ids.size(); ++i) {
        const MetricReport& r = reports[i];
        os << pair_ids[i] << ',' << format_double(r.cd) << ',' << format_double(r.hd) << ','
           << format_double(r.emd) << ',' << r.emd_kind << ',' << format_double(r.swd) << '\n';
    }
    os << "mean," << format_double(aggregate.cd) << ',' << format_double(aggregate.hd) << ','
       << format_double(aggregate.emd) << ',' << aggregate.emd_kind << ','
       << format_double(aggregate.swd) << '\n';
}

DatasetReport evaluate_dataset(const std::string& pred_dir, const std::string& gt_dir,
                               const MetricConfig& cfg) {
    if (!fs::is_directory(pred_dir)) throw IoError("evaluate_dataset: not a directory: " + pred_dir);
    if (!fs::is_directory(gt_dir)) throw IoError("evaluate_dataset: not a directory: " + gt_dir);

    std::set<std::string> pred_files, gt_files;
    for (const auto& e : fs::directory_iterator(pred_dir))
        if (e.is_regular_file() && is_cloud_file(e.path()))
            pred_files.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(gt_dir))
        if (e.is_regular_file() && is_cloud_file(e.path()))
            gt_files.insert(e.path().filename().string());

    DatasetReport report;
    for (const std::string& f : pred_files)
        if (!gt_files.count(f)) report.unmatched.push_back("pred-only: " + f);
    for (const std::string& f : gt_files)
        if (!pred_files.count(f)) report.unmatched.push_back("gt-only: " + f);

    for (const std::string& f : pred_files) {
        if (!gt_files.count(f)) continue;
        const PointCloud pred = read_cloud_auto((fs::path(pred_dir) / f).string());
        const PointCloud gt = read_cloud_auto((fs::path(gt_dir) / f).string());
        report.pair_ids.push_back(f);
        report.reports.push_back(evaluate_pair(pred, gt, cfg));
    }
    if (report.reports.empty() && report.unmatched.empty())
        throw IoError("evaluate_dataset: no cloud files found");

    MetricReport& agg = report.aggregate;
    const double n = static_cast<double>(report.reports.size());
    std::set<std::string> kinds;
    for (const MetricReport& r : report.reports) {
        agg.cd += r.cd / n;
        agg.hd += r.hd / n;
        agg.emd += r.emd / n;
        agg.swd += r.swd / n;
        kinds.insert(r.emd_kind);
    }
    agg.emd_kind = kinds.size() == 1 ? *kinds.begin() : "mixed";
    return report;
}

}  // namespace pcot
