// Python bindings: numpy (n, 3) float64 arrays in and out, thin wrappers
// over the C++ operations.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pcot/io.hpp"
#include "pcot/lidar.hpp"
#include "pcot/metrics.hpp"
#include "pcot/optimize.hpp"
#include "pcot/parallel.hpp"
#include "pcot/sampling.hpp"
#include "pcot/sweep.hpp"
#include "pcot/transforms.hpp"
#include "pcot/version.hpp"

namespace py = pybind11;
using namespace pcot;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointCloud cloud_from_array(const DoubleArray& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 3)
        throw std::invalid_argument("expected an (n, 3) array");
    PointCloud cloud;
    const std::size_t n = static_cast<std::size_t>(arr.shape(0));
    cloud.points.reserve(n);
    const double* data = arr.data();
    for (std::size_t i = 0; i < n; ++i)
        cloud.points.push_back({data[3 * i], data[3 * i + 1], data[3 * i + 2]});
    return cloud;
}

py::array_t<double> array_from_cloud(const PointCloud& cloud) {
    py::array_t<double> arr({static_cast<py::ssize_t>(cloud.size()), py::ssize_t(3)});
    double* data = arr.mutable_data();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        data[3 * i] = cloud[i].x;
        data[3 * i + 1] = cloud[i].y;
        data[3 * i + 2] = cloud[i].z;
    }
    return arr;
}

DirectionSet dirs_from_array(const DoubleArray& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 3)
        throw std::invalid_argument("expected an (l, 3) array of unit directions");
    std::vector<Point3> dirs;
    const double* data = arr.data();
    for (py::ssize_t i = 0; i < arr.shape(0); ++i)
        dirs.push_back({data[3 * i], data[3 * i + 1], data[3 * i + 2]});
    return DirectionSet(std::move(dirs), 0);
}

py::array_t<double> array_from_gradient(const Gradient& grad) {
    py::array_t<double> arr({static_cast<py::ssize_t>(grad.size()), py::ssize_t(3)});
    double* data = arr.mutable_data();
    for (std::size_t i = 0; i < grad.size(); ++i) {
        data[3 * i] = grad[i].x;
        data[3 * i + 1] = grad[i].y;
        data[3 * i + 2] = grad[i].z;
    }
    return arr;
}

Reduction reduction_from_string(const std::string& name) {
    if (name == "mean") return Reduction::kMean;
    if (name == "sum") return Reduction::kSum;
    throw std::invalid_argument("reduction must be 'mean' or 'sum'");
}

OptimizationConfig config_from_kwargs(const std::string& loss, std::size_t iterations,
                                      double step_size, std::size_t directions,
                                      std::size_t ratio, double init_sigma, std::uint64_t seed,
                                      const std::string& resample, double auction_epsilon,
                                      const py::object& fixed_directions) {
    OptimizationConfig cfg;
    if (loss == "swd")
        cfg.loss = LossKind::kSwd;
    else if (loss == "chamfer")
        cfg.loss = LossKind::kChamfer;
    else if (loss == "emd-auction")
        cfg.loss = LossKind::kEmdAuction;
    else
        throw std::invalid_argument("loss must be 'swd', 'chamfer' or 'emd-auction'");
    cfg.iterations = iterations;
    cfg.step_size = step_size;
    cfg.directions_per_step = directions;
    cfg.upsample_ratio = ratio;
    cfg.init_jitter_sigma = init_sigma;
    cfg.seed = seed;
    if (resample == "per-step")
        cfg.resample = DirectionResampling::kPerStep;
    else if (resample == "fixed")
        cfg.resample = DirectionResampling::kFixed;
    else
        throw std::invalid_argument("resample must be 'per-step' or 'fixed'");
    cfg.auction_epsilon = auction_epsilon;
    if (!fixed_directions.is_none()) {
        cfg.fixed_directions = dirs_from_array(fixed_directions.cast<DoubleArray>());
        cfg.resample = DirectionResampling::kFixed;
    }
    return cfg;
}

py::dict trace_to_dict(const OptimizationTrace& trace) {
    py::dict out;
    out["losses"] = py::array_t<double>(static_cast<py::ssize_t>(trace.losses.size()),
                                        trace.losses.data());
    out["final_cloud"] = array_from_cloud(trace.final_cloud);
    out["wall_time_s"] = trace.wall_time_s;
    return out;
}

py::dict sweep_to_dict(const SweepResult& result) {
    py::dict out;
    out["kind"] = result.kind;
    out["magnitudes"] = py::array_t<double>(static_cast<py::ssize_t>(result.magnitudes.size()),
                                            result.magnitudes.data());
    py::dict raw, normalized;
    for (const std::string& m : result.metrics) {
        const auto& rv = result.raw.at(m);
        const auto& nv = result.normalized.at(m);
        raw[m.c_str()] = py::array_t<double>(static_cast<py::ssize_t>(rv.size()), rv.data());
        normalized[m.c_str()] =
            py::array_t<double>(static_cast<py::ssize_t>(nv.size()), nv.data());
    }
    out["raw"] = raw;
    out["normalized"] = normalized;
    out["emd_kind"] = result.emd_kind;
    return out;
}

MetricConfig metric_config_from_kwargs(std::size_t directions, std::uint64_t swd_seed,
                                       const std::string& reduction, double auction_epsilon,
                                       double sinkhorn_reg, std::size_t sinkhorn_iters,
                                       std::size_t emd_cap) {
    MetricConfig cfg;
    cfg.swd_directions = directions;
    cfg.swd_seed = swd_seed;
    cfg.emd_reduction = reduction_from_string(reduction);
    cfg.auction_epsilon = auction_epsilon;
    cfg.sinkhorn_regularization = sinkhorn_reg;
    cfg.sinkhorn_max_iters = sinkhorn_iters;
    cfg.emd_exact_cap = emd_cap;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "point-set optimal transport toolkit (CD/HD/EMD/SWD metrics, lidar "
              "decimation, direct upsampling)";
    m.attr("__version__") = kVersion;

    m.def("set_thread_count", &set_thread_count, py::arg("n"),
          "worker cap for parallel kernels (0 = hardware)");

    // io
    m.def("read_xyz", [](const std::string& p) { return array_from_cloud(read_xyz(p)); });
    m.def("write_xyz",
          [](const std::string& p, const DoubleArray& c) { write_xyz(p, cloud_from_array(c)); });
    m.def("read_scan", [](const std::string& p) { return array_from_cloud(read_scan(p)); });
    m.def("write_scan",
          [](const std::string& p, const DoubleArray& c) { write_scan(p, cloud_from_array(c)); });

    // transforms
    m.def(
        "jitter",
        [](const DoubleArray& c, double sigma, std::uint64_t seed) {
            return array_from_cloud(jitter(cloud_from_array(c), sigma, seed));
        },
        py::arg("cloud"), py::arg("sigma"), py::arg("seed") = 0);
    m.def(
        "rotate_yaw",
        [](const DoubleArray& c, double angle) {
            return array_from_cloud(rotate_yaw(cloud_from_array(c), angle));
        },
        py::arg("cloud"), py::arg("angle"));
    m.def(
        "normalize_to_unit_sphere",
        [](const DoubleArray& c) {
            const Normalization norm = normalize_to_unit_sphere(cloud_from_array(c));
            return py::make_tuple(array_from_cloud(norm.cloud),
                                  py::make_tuple(norm.center.x, norm.center.y, norm.center.z),
                                  norm.scale);
        },
        py::arg("cloud"), "returns (cloud, center, scale)");
    m.def(
        "sample_directions",
        [](std::size_t count, std::uint64_t seed) {
            const DirectionSet dirs = sample_directions(count, seed);
            return array_from_cloud(PointCloud(dirs.directions));
        },
        py::arg("count"), py::arg("seed") = 0);

    // metrics
    m.def("chamfer", [](const DoubleArray& x, const DoubleArray& y) {
        return chamfer(cloud_from_array(x), cloud_from_array(y));
    });
    m.def("hausdorff", [](const DoubleArray& x, const DoubleArray& y) {
        return hausdorff(cloud_from_array(x), cloud_from_array(y));
    });
    m.def(
        "emd_exact",
        [](const DoubleArray& x, const DoubleArray& y, const std::string& reduction,
           std::size_t cap) {
            const auto [value, assignment] =
                emd_exact(cloud_from_array(x), cloud_from_array(y),
                          reduction_from_string(reduction), cap);
            py::array_t<std::int64_t> mapping(
                static_cast<py::ssize_t>(assignment.mapping.size()));
            std::int64_t* data = mapping.mutable_data();
            for (std::size_t i = 0; i < assignment.mapping.size(); ++i)
                data[i] = static_cast<std::int64_t>(assignment.mapping[i]);
            return py::make_tuple(value, mapping);
        },
        py::arg("x"), py::arg("y"), py::arg("reduction") = "mean",
        py::arg("cap") = kEmdExactDefaultCap, "returns (cost, mapping)");
    m.def(
        "emd_auction",
        [](const DoubleArray& x, const DoubleArray& y, double epsilon,
           const std::string& reduction) {
            return emd_auction(cloud_from_array(x), cloud_from_array(y), epsilon,
                               reduction_from_string(reduction));
        },
        py::arg("x"), py::arg("y"), py::arg("epsilon") = 1e-3, py::arg("reduction") = "mean");
    m.def(
        "sinkhorn",
        [](const DoubleArray& x, const DoubleArray& y, double regularization,
           std::size_t max_iters) {
            return sinkhorn(cloud_from_array(x), cloud_from_array(y), regularization, max_iters);
        },
        py::arg("x"), py::arg("y"), py::arg("regularization") = 0.01,
        py::arg("max_iters") = 1000);
    m.def(
        "swd",
        [](const DoubleArray& x, const DoubleArray& y, const DoubleArray& dirs) {
            return swd(cloud_from_array(x), cloud_from_array(y), dirs_from_array(dirs));
        },
        py::arg("x"), py::arg("y"), py::arg("directions"));
    m.def(
        "swd_gradient",
        [](const DoubleArray& x, const DoubleArray& y, const DoubleArray& dirs) {
            return array_from_gradient(
                swd_gradient(cloud_from_array(x), cloud_from_array(y), dirs_from_array(dirs)));
        },
        py::arg("x"), py::arg("y"), py::arg("directions"));
    m.def("chamfer_gradient", [](const DoubleArray& x, const DoubleArray& y) {
        return array_from_gradient(chamfer_gradient(cloud_from_array(x), cloud_from_array(y)));
    });
    m.def(
        "evaluate_pair",
        [](const DoubleArray& pred, const DoubleArray& gt, std::size_t directions,
           std::uint64_t swd_seed, const std::string& reduction, double auction_epsilon,
           double sinkhorn_reg, std::size_t sinkhorn_iters, std::size_t emd_cap) {
            const MetricReport r =
                evaluate_pair(cloud_from_array(pred), cloud_from_array(gt),
                              metric_config_from_kwargs(directions, swd_seed, reduction,
                                                        auction_epsilon, sinkhorn_reg,
                                                        sinkhorn_iters, emd_cap));
            py::dict out;
            out["cd"] = r.cd;
            out["hd"] = r.hd;
            out["emd"] = r.emd;
            out["swd"] = r.swd;
            out["emd_kind"] = r.emd_kind;
            return out;
        },
        py::arg("pred"), py::arg("gt"), py::arg("directions") = 128, py::arg("swd_seed") = 0,
        py::arg("reduction") = "mean", py::arg("auction_epsilon") = 1e-3,
        py::arg("sinkhorn_reg") = 0.01, py::arg("sinkhorn_iters") = 1000,
        py::arg("emd_cap") = kEmdExactDefaultCap);

    // sampling
    m.def(
        "farthest_point_sample",
        [](const DoubleArray& c, std::size_t m_, std::size_t seed_index) {
            const auto idx = farthest_point_sample(cloud_from_array(c), m_, seed_index);
            py::array_t<std::int64_t> out(static_cast<py::ssize_t>(idx.size()));
            std::int64_t* data = out.mutable_data();
            for (std::size_t i = 0; i < idx.size(); ++i)
                data[i] = static_cast<std::int64_t>(idx[i]);
            return out;
        },
        py::arg("cloud"), py::arg("m"), py::arg("seed_index") = 0);
    m.def(
        "knn",
        [](const DoubleArray& c, std::size_t k) {
            const NeighborGraph graph = knn(cloud_from_array(c), k);
            const py::ssize_t n = static_cast<py::ssize_t>(graph.neighbors.size());
            py::array_t<std::int64_t> indices({n, static_cast<py::ssize_t>(k)});
            py::array_t<double> distances({n, static_cast<py::ssize_t>(k)});
            std::int64_t* ip = indices.mutable_data();
            double* dp = distances.mutable_data();
            for (py::ssize_t i = 0; i < n; ++i) {
                for (std::size_t r = 0; r < k; ++r) {
                    ip[i * static_cast<py::ssize_t>(k) + static_cast<py::ssize_t>(r)] =
                        static_cast<std::int64_t>(graph.neighbors[i][r].first);
                    dp[i * static_cast<py::ssize_t>(k) + static_cast<py::ssize_t>(r)] =
                        graph.neighbors[i][r].second;
                }
            }
            return py::make_tuple(indices, distances);
        },
        py::arg("cloud"), py::arg("k"), "returns (indices, distances), each (n, k)");
    m.def(
        "inverse_distance_interpolate",
        [](const DoubleArray& sources, const DoubleArray& features, const DoubleArray& queries,
           std::size_t k, double power) {
            if (features.ndim() != 2)
                throw std::invalid_argument("features must be a 2d array");
            FeatureTable table(static_cast<std::size_t>(features.shape(0)),
                               static_cast<std::size_t>(features.shape(1)));
            std::copy(features.data(), features.data() + features.size(), table.data.begin());
            const FeatureTable out =
                inverse_distance_interpolate(cloud_from_array(sources), table,
                                             cloud_from_array(queries), k, power);
            py::array_t<double> result({static_cast<py::ssize_t>(out.rows()),
                                        static_cast<py::ssize_t>(out.width)});
            std::copy(out.data.begin(), out.data.end(), result.mutable_data());
            return result;
        },
        py::arg("sources"), py::arg("features"), py::arg("queries"), py::arg("k") = 3,
        py::arg("power") = 2.0);

    // lidar
    py::class_<RangeImage>(m, "RangeImage")
        .def_readonly("rows", &RangeImage::rows)
        .def_readonly("cols", &RangeImage::cols)
        .def_readonly("collisions", &RangeImage::collisions)
        .def_readonly("skipped_zero_range", &RangeImage::skipped_zero_range)
        .def("occupied_count", &RangeImage::occupied_count)
        .def("collect_points",
             [](const RangeImage& img) { return array_from_cloud(img.collect_points()); })
        .def(
            "decimate",
            [](const RangeImage& img, std::size_t factor, std::size_t phase) {
                return array_from_cloud(decimate_rows(img, factor, phase));
            },
            py::arg("factor"), py::arg("phase") = 0)
        .def(
            "make_pair",
            [](const RangeImage& img, std::size_t factor, std::size_t phase) {
                const auto [low, high] = make_pair(img, factor, phase);
                return py::make_tuple(array_from_cloud(low), array_from_cloud(high));
            },
            py::arg("factor") = 2, py::arg("phase") = 0, "returns (low, high)");
    m.def(
        "rasterize",
        [](const DoubleArray& c, std::size_t rows, std::size_t cols, double fov_up,
           double fov_down) {
            return rasterize(cloud_from_array(c), rows, cols, fov_up, fov_down);
        },
        py::arg("cloud"), py::arg("rows") = kDefaultRows, py::arg("cols") = kDefaultCols,
        py::arg("fov_up_deg") = kDefaultFovUpDeg, py::arg("fov_down_deg") = kDefaultFovDownDeg);
    m.def(
        "extract_patches",
        [](const DoubleArray& c, std::size_t patch_size, std::size_t n_patches,
           std::uint64_t seed) {
            py::list out;
            for (const Patch& patch :
                 extract_patches(cloud_from_array(c), patch_size, n_patches, seed)) {
                py::dict entry;
                entry["points"] = array_from_cloud(patch.points);
                entry["center_index"] = patch.center_index;
                out.append(entry);
            }
            return out;
        },
        py::arg("cloud"), py::arg("patch_size"), py::arg("n_patches"), py::arg("seed") = 0);
    m.def(
        "synthetic_scan",
        [](std::size_t rows, std::size_t cols, double fov_up, double fov_down,
           std::uint64_t seed, double occupancy) {
            return array_from_cloud(
                synthetic_scan(rows, cols, fov_up, fov_down, seed, occupancy));
        },
        py::arg("rows") = kDefaultRows, py::arg("cols") = kDefaultCols,
        py::arg("fov_up_deg") = kDefaultFovUpDeg, py::arg("fov_down_deg") = kDefaultFovDownDeg,
        py::arg("seed") = 0, py::arg("occupancy") = 1.0);

    // optimization
    m.def(
        "init_upsample",
        [](const DoubleArray& source, std::size_t ratio, double sigma, std::uint64_t seed) {
            return array_from_cloud(init_upsample(cloud_from_array(source), ratio, sigma, seed));
        },
        py::arg("source"), py::arg("ratio") = 2, py::arg("sigma") = 0.02, py::arg("seed") = 0);
    m.def(
        "minimize",
        [](const DoubleArray& init, const DoubleArray& target, const std::string& loss,
           std::size_t iterations, double step_size, std::size_t directions, std::uint64_t seed,
           const std::string& resample, double auction_epsilon,
           const py::object& fixed_directions) {
            const OptimizationConfig cfg =
                config_from_kwargs(loss, iterations, step_size, directions, 1, 0.0, seed,
                                   resample, auction_epsilon, fixed_directions);
            return trace_to_dict(minimize(cloud_from_array(init), cloud_from_array(target), cfg));
        },
        py::arg("init"), py::arg("target"), py::arg("loss") = "swd",
        py::arg("iterations") = 500, py::arg("step_size") = 0.5, py::arg("directions") = 32,
        py::arg("seed") = 0, py::arg("resample") = "per-step",
        py::arg("auction_epsilon") = 1e-3, py::arg("fixed_directions") = py::none());
    m.def(
        "upsample",
        [](const DoubleArray& source, const DoubleArray& target, const std::string& loss,
           std::size_t iterations, double step_size, std::size_t directions, std::size_t ratio,
           double init_sigma, std::uint64_t seed, const std::string& resample,
           double auction_epsilon) {
            const OptimizationConfig cfg =
                config_from_kwargs(loss, iterations, step_size, directions, ratio, init_sigma,
                                   seed, resample, auction_epsilon, py::none());
            return trace_to_dict(
                upsample(cloud_from_array(source), cloud_from_array(target), cfg));
        },
        py::arg("source"), py::arg("target"), py::arg("loss") = "swd",
        py::arg("iterations") = 500, py::arg("step_size") = 0.5, py::arg("directions") = 32,
        py::arg("ratio") = 2, py::arg("init_sigma") = 0.02, py::arg("seed") = 0,
        py::arg("resample") = "per-step", py::arg("auction_epsilon") = 1e-3);
    m.def(
        "line_occupancy",
        [](const DoubleArray& cloud, const std::vector<double>& levels, double spacing) {
            return line_occupancy(cloud_from_array(cloud), levels, spacing);
        },
        py::arg("cloud"), py::arg("line_levels"), py::arg("line_spacing"));

    // sweeps
    m.def(
        "jitter_sweep",
        [](const DoubleArray& cloud, const std::vector<double>& sigmas,
           const std::vector<std::string>& metrics, std::uint64_t seed, std::size_t directions,
           std::uint64_t swd_seed, const std::string& reduction, double auction_epsilon,
           double sinkhorn_reg, std::size_t sinkhorn_iters, std::size_t emd_cap) {
            return sweep_to_dict(jitter_sweep(
                cloud_from_array(cloud), sigmas, metrics,
                metric_config_from_kwargs(directions, swd_seed, reduction, auction_epsilon,
                                          sinkhorn_reg, sinkhorn_iters, emd_cap),
                seed));
        },
        py::arg("cloud"), py::arg("sigmas"),
        py::arg("metrics") = std::vector<std::string>{"cd", "hd", "emd", "swd"},
        py::arg("seed") = 0, py::arg("directions") = 128, py::arg("swd_seed") = 0,
        py::arg("reduction") = "mean", py::arg("auction_epsilon") = 1e-3,
        py::arg("sinkhorn_reg") = 0.01, py::arg("sinkhorn_iters") = 1000,
        py::arg("emd_cap") = kEmdExactDefaultCap);
    m.def(
        "rotation_sweep",
        [](const DoubleArray& cloud, const std::vector<double>& angles,
           const std::vector<std::string>& metrics, std::size_t directions,
           std::uint64_t swd_seed, const std::string& reduction, double auction_epsilon,
           double sinkhorn_reg, std::size_t sinkhorn_iters, std::size_t emd_cap) {
            return sweep_to_dict(rotation_sweep(
                cloud_from_array(cloud), angles, metrics,
                metric_config_from_kwargs(directions, swd_seed, reduction, auction_epsilon,
                                          sinkhorn_reg, sinkhorn_iters, emd_cap)));
        },
        py::arg("cloud"), py::arg("angles"),
        py::arg("metrics") = std::vector<std::string>{"cd", "hd", "emd", "swd"},
        py::arg("directions") = 128, py::arg("swd_seed") = 0, py::arg("reduction") = "mean",
        py::arg("auction_epsilon") = 1e-3, py::arg("sinkhorn_reg") = 0.01,
        py::arg("sinkhorn_iters") = 1000, py::arg("emd_cap") = kEmdExactDefaultCap);
    m.def("default_jitter_sigmas", &default_jitter_sigmas, py::arg("cloud_radius"),
          py::arg("levels") = 20);
    m.def("default_rotation_angles", &default_rotation_angles, py::arg("count") = 25);
}
