// pcot command line: lidar ingestion, decimation pairs, patch cutting,
// point-set metrics, sensitivity sweeps, gradient checks and direct
// upsampling, each emitting a run manifest that reproduces the run
// byte-for-byte via `pcot rerun`.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "pcot/errors.hpp"
#include "pcot/io.hpp"
#include "pcot/lidar.hpp"
#include "pcot/metrics.hpp"
#include "pcot/optimize.hpp"
#include "pcot/parallel.hpp"
#include "pcot/rng.hpp"
#include "pcot/sampling.hpp"
#include "pcot/sweep.hpp"
#include "pcot/transforms.hpp"
#include "pcot/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pcot;

namespace {

int run_cli(const std::vector<std::string>& args);  // forward, for rerun

// --- JSON config file support for CLI11 ------------------------------------

class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        input >> j;
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static void collect(const json& j, std::vector<std::string> parents,
                        std::vector<CLI::ConfigItem>& out) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto next = parents;
                next.push_back(key);
                collect(value, next, out);
            } else {
                CLI::ConfigItem item;
                item.parents = parents;
                item.name = key;
                if (value.is_array()) {
                    for (const auto& v : value)
                        item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
                } else {
                    item.inputs.push_back(value.is_string() ? value.get<std::string>()
                                                            : value.dump());
                }
                out.push_back(item);
            }
        }
    }
};

// --- run manifests ----------------------------------------------------------

struct ManifestWriter {
    std::string subcommand;
    std::vector<std::string> args;  // resolved argv able to reproduce the run
    json config = json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void write(const fs::path& out_dir) const {
        json m;
        m["tool"] = "pcot";
        m["version"] = kVersion;
        m["subcommand"] = subcommand;
        m["args"] = args;
        m["config"] = config;
        m["inputs"] = inputs;
        m["outputs"] = outputs;
        m["threads"] = thread_count();
        m["wall_time_ms"] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        std::ofstream out(out_dir / "run_manifest.json");
        if (!out) throw IoError("cannot write manifest in " + out_dir.string());
        out << m.dump(2) << '\n';
    }
};

fs::path prepare_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec || !fs::is_directory(p)) throw IoError("cannot create output directory " + dir);
    return p;
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

// --- shared metric flag block ----------------------------------------------

struct MetricFlags {
    std::size_t dirs = 128;
    std::uint64_t swd_seed = 0;
    std::string reduction = "mean";
    double auction_epsilon = 1e-3;
    double sinkhorn_reg = 0.01;
    std::size_t sinkhorn_iters = 1000;
    std::size_t emd_cap = kEmdExactDefaultCap;

    void attach(CLI::App* cmd) {
        cmd->add_option("--dirs", dirs, "SWD direction count")->capture_default_str();
        cmd->add_option("--swd-seed", swd_seed, "SWD direction seed")->capture_default_str();
        cmd->add_option("--reduction", reduction, "EMD reduction: mean or sum")
            ->check(CLI::IsMember({"mean", "sum"}))
            ->capture_default_str();
        cmd->add_option("--auction-epsilon", auction_epsilon, "auction epsilon")
            ->capture_default_str();
        cmd->add_option("--sinkhorn-reg", sinkhorn_reg, "sinkhorn regularization")
            ->capture_default_str();
        cmd->add_option("--sinkhorn-iters", sinkhorn_iters, "sinkhorn iteration cap")
            ->capture_default_str();
        cmd->add_option("--emd-cap", emd_cap, "size cap for exact assignment")
            ->capture_default_str();
    }

    MetricConfig to_config() const {
        MetricConfig cfg;
        cfg.swd_directions = dirs;
        cfg.swd_seed = swd_seed;
        cfg.emd_reduction = reduction == "sum" ? Reduction::kSum : Reduction::kMean;
        cfg.auction_epsilon = auction_epsilon;
        cfg.sinkhorn_regularization = sinkhorn_reg;
        cfg.sinkhorn_max_iters = sinkhorn_iters;
        cfg.emd_exact_cap = emd_cap;
        return cfg;
    }

    void to_args(std::vector<std::string>& args) const {
        args.insert(args.end(),
                    {"--dirs", fmt(dirs), "--swd-seed", fmt(swd_seed), "--reduction", reduction,
                     "--auction-epsilon", fmt(auction_epsilon), "--sinkhorn-reg",
                     fmt(sinkhorn_reg), "--sinkhorn-iters", fmt(sinkhorn_iters), "--emd-cap",
                     fmt(emd_cap)});
    }

    json to_json() const {
        return {{"dirs", dirs},
                {"swd_seed", swd_seed},
                {"reduction", reduction},
                {"auction_epsilon", auction_epsilon},
                {"sinkhorn_reg", sinkhorn_reg},
                {"sinkhorn_iters", sinkhorn_iters},
                {"emd_cap", emd_cap}};
    }
};

// --- subcommands -------------------------------------------------------------

struct RasterizeCmd {
    std::string in, out_dir;
    std::size_t rows = kDefaultRows, cols = kDefaultCols;
    double fov_up = kDefaultFovUpDeg, fov_down = kDefaultFovDownDeg;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("rasterize", "project a scan into a range image");
        cmd->add_option("--in", in, "input scan (.bin or .xyz)")->required();
        cmd->add_option("--rows", rows)->capture_default_str();
        cmd->add_option("--cols", cols)->capture_default_str();
        cmd->add_option("--fov-up", fov_up, "upper vertical FOV, degrees")->capture_default_str();
        cmd->add_option("--fov-down", fov_down, "lower vertical FOV, degrees")
            ->capture_default_str();
        cmd->add_option("--out-dir", out_dir)->required();
        cmd->callback([this] { run(); });
    }

    void run() const {
        ManifestWriter manifest;
        manifest.subcommand = "rasterize";
        manifest.args = {"rasterize", "--in", in,      "--rows",    fmt(rows),
                         "--cols",    fmt(cols),       "--fov-up",  fmt(fov_up),
                         "--fov-down", fmt(fov_down),  "--out-dir", out_dir};
        manifest.config = {{"in", in},         {"rows", rows},        {"cols", cols},
                           {"fov_up", fov_up}, {"fov_down", fov_down}, {"out_dir", out_dir}};
        manifest.inputs = {in};

        const fs::path dir = prepare_out_dir(out_dir);
        const PointCloud cloud = read_cloud_auto(in);
        const RangeImage img = rasterize(cloud, rows, cols, fov_up, fov_down);
        {
            std::ofstream out(dir / "range_image.txt");
            if (!out) throw IoError("cannot write range_image.txt");
            write_range_dump(out, img);
        }
        manifest.outputs = {"range_image.txt"};
        manifest.write(dir);
        std::cout << "rasterized " << cloud.size() << " points: occupied "
                  << img.occupied_count() << ", collisions " << img.collisions
                  << ", zero-range skipped " << img.skipped_zero_range << '\n';
    }
};

struct DecimateCmd {
    std::string in, out_dir;
    std::size_t factor = 2, phase = 0;
    std::size_t rows = kDefaultRows, cols = kDefaultCols;
    double fov_up = kDefaultFovUpDeg, fov_down = kDefaultFovDownDeg;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("decimate", "build a low/high training pair");
        cmd->add_option("--in", in, "input scan (.bin or .xyz)")->required();
        cmd->add_option("--factor", factor, "keep every factor-th scan line")
            ->capture_default_str();
        cmd->add_option("--phase", phase, "first surviving row")->capture_default_str();
        cmd->add_option("--rows", rows)->capture_default_str();
        cmd->add_option("--cols", cols)->capture_default_str();
        cmd->add_option("--fov-up", fov_up)->capture_default_str();
        cmd->add_option("--fov-down", fov_down)->capture_default_str();
        cmd->add_option("--out-dir", out_dir)->required();
        cmd->callback([this] { run(); });
    }

    void run() const {
        ManifestWriter manifest;
        manifest.subcommand = "decimate";
        manifest.args = {"decimate",  "--in",       in,          "--factor",  fmt(factor),
                         "--phase",   fmt(phase),   "--rows",    fmt(rows),   "--cols",
                         fmt(cols),   "--fov-up",   fmt(fov_up), "--fov-down", fmt(fov_down),
                         "--out-dir", out_dir};
        manifest.config = {{"in", in},       {"factor", factor},   {"phase", phase},
                           {"rows", rows},   {"cols", cols},       {"fov_up", fov_up},
                           {"fov_down", fov_down}, {"out_dir", out_dir}};
        manifest.inputs = {in};

        const fs::path dir = prepare_out_dir(out_dir);
        const PointCloud cloud = read_cloud_auto(in);
        const RangeImage img = rasterize(cloud, rows, cols, fov_up, fov_down);
        const auto [low, high] = make_pair(img, factor, phase);
        write_xyz((dir / "low.xyz").string(), low);
        write_xyz((dir / "high.xyz").string(), high);
        manifest.outputs = {"low.xyz", "high.xyz"};
        manifest.write(dir);
        std::cout << "low " << low.size() << " points, high " << high.size() << " points\n";
    }
};

struct PatchCmd {
    std::string in, out_dir, scan_id;
    std::size_t patch_size = 2048, n_patches = 1;
    std::uint64_t seed = 0;
    bool normalize = false;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("patch", "cut fixed-size patches from a scan");
        cmd->add_option("--in", in)->required();
        cmd->add_option("--patch-size", patch_size)->capture_default_str();
        cmd->add_option("--n-patches", n_patches)->capture_default_str();
        cmd->add_option("--seed", seed)->capture_default_str();
        cmd->add_option("--scan-id", scan_id, "provenance tag (defaults to the input stem)");
        cmd->add_flag("--normalize", normalize, "center and scale each patch to the unit sphere");
        cmd->add_option("--out-dir", out_dir)->required();
        cmd->callback([this] { run(); });
    }

    void run() const {
        const std::string id = scan_id.empty() ? fs::path(in).stem().string() : scan_id;
        ManifestWriter manifest;
        manifest.subcommand = "patch";
        manifest.args = {"patch",       "--in",          in,
                         "--patch-size", fmt(patch_size), "--n-patches",
                         fmt(n_patches), "--seed",        fmt(seed),
                         "--scan-id",    id,              "--out-dir",
                         out_dir};
        if (normalize) manifest.args.push_back("--normalize");
        manifest.config = {{"in", in},
                           {"patch_size", patch_size},
                           {"n_patches", n_patches},
                           {"seed", seed},
                           {"scan_id", id},
                           {"normalized", normalize},
                           {"out_dir", out_dir}};
        manifest.inputs = {in};

        const fs::path dir = prepare_out_dir(out_dir);
        const PointCloud cloud = read_cloud_auto(in);
        const auto patches = extract_patches(cloud, patch_size, n_patches, seed, id);

        json index = json::array();
        for (std::size_t i = 0; i < patches.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "patch_%03zu.xyz", i);
            PointCloud points = patches[i].points;
            json entry = {{"file", name},
                          {"scan_id", patches[i].scan_id},
                          {"center_index", patches[i].center_index},
                          {"seed", seed},
                          {"patch_size", patch_size},
                          {"normalized", normalize}};
            if (normalize) {
                const Normalization norm = normalize_to_unit_sphere(points);
                points = norm.cloud;
                entry["center"] = {norm.center.x, norm.center.y, norm.center.z};
                entry["scale"] = norm.scale;
            }
            write_xyz((dir / name).string(), points);
            index.push_back(entry);
            manifest.outputs.push_back(name);
        }
        write_text(dir / "patches.json", index.dump(2) + "\n");
        manifest.outputs.push_back("patches.json");
        manifest.write(dir);
        std::cout << "wrote " << patches.size() << " patches of " << patch_size << " points\n";
    }
};

struct MetricsCmd {
    std::string pred, gt, pred_dir, gt_dir, out_dir;
    MetricFlags flags;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("metrics", "CD/HD/EMD/SWD report for a pair or dirs");
        cmd->add_option("--pred", pred, "predicted cloud");
        cmd->add_option("--gt", gt, "ground-truth cloud");
        cmd->add_option("--pred-dir", pred_dir, "directory of predicted clouds");
        cmd->add_option("--gt-dir", gt_dir, "directory of ground-truth clouds");
        flags.attach(cmd);
        cmd->add_option("--out-dir", out_dir, "optional; report.csv/json land here");
        cmd->callback([this] { exit_code = run(); });
    }

    int exit_code = 0;

    int run() const {
        const bool pair_mode = !pred.empty() || !gt.empty();
        const bool dir_mode = !pred_dir.empty() || !gt_dir.empty();
        if (pair_mode == dir_mode)
            throw std::invalid_argument("metrics: give either --pred/--gt or --pred-dir/--gt-dir");
        if (pair_mode && (pred.empty() || gt.empty()))
            throw std::invalid_argument("metrics: --pred and --gt are both required");
        if (dir_mode && (pred_dir.empty() || gt_dir.empty()))
            throw std::invalid_argument("metrics: --pred-dir and --gt-dir are both required");

        ManifestWriter manifest;
        manifest.subcommand = "metrics";
        manifest.args = {"metrics"};
        if (pair_mode) {
            manifest.args.insert(manifest.args.end(), {"--pred", pred, "--gt", gt});
            manifest.inputs = {pred, gt};
        } else {
            manifest.args.insert(manifest.args.end(),
                                 {"--pred-dir", pred_dir, "--gt-dir", gt_dir});
            manifest.inputs = {pred_dir, gt_dir};
        }
        flags.to_args(manifest.args);
        manifest.config = flags.to_json();
        manifest.config["pred"] = pred;
        manifest.config["gt"] = gt;
        manifest.config["pred_dir"] = pred_dir;
        manifest.config["gt_dir"] = gt_dir;
        manifest.config["out_dir"] = out_dir;

        const MetricConfig cfg = flags.to_config();
        DatasetReport report;
        if (pair_mode) {
            report.pair_ids.push_back(fs::path(pred).filename().string());
            report.reports.push_back(
                evaluate_pair(read_cloud_auto(pred), read_cloud_auto(gt), cfg));
            report.aggregate = report.reports[0];
        } else {
            report = evaluate_dataset(pred_dir, gt_dir, cfg);
        }

        std::ostringstream csv;
        report.write_csv(csv);
        std::cout << csv.str();
        for (const std::string& miss : report.unmatched)
            std::cerr << "unmatched: " << miss << '\n';

        if (!out_dir.empty()) {
            manifest.args.insert(manifest.args.end(), {"--out-dir", out_dir});
            const fs::path dir = prepare_out_dir(out_dir);
            write_text(dir / "report.csv", csv.str());
            json rows = json::array();
            for (std::size_t i = 0; i < report.pair_ids.size(); ++i) {
                const MetricReport& r = report.reports[i];
                rows.push_back({{"pair_id", report.pair_ids[i]},
                                {"cd", r.cd},
                                {"hd", r.hd},
                                {"emd", r.emd},
                                {"emd_kind", r.emd_kind},
                                {"swd", r.swd}});
            }
            json doc = {{"pairs", rows},
                        {"aggregate",
                         {{"cd", report.aggregate.cd},
                          {"hd", report.aggregate.hd},
                          {"emd", report.aggregate.emd},
                          {"emd_kind", report.aggregate.emd_kind},
                          {"swd", report.aggregate.swd}}},
                        {"unmatched", report.unmatched}};
            write_text(dir / "report.json", doc.dump(2) + "\n");
            manifest.outputs = {"report.csv", "report.json"};
            manifest.write(dir);
        }
        return report.unmatched.empty() ? 0 : 1;
    }
};

struct SweepCmd {
    std::string kind = "jitter", in, out_dir, metrics_list = "cd,hd,emd,swd";
    std::size_t levels = 20, angles = 25;
    std::uint64_t seed = 0;
    bool normalize = false;
    MetricFlags flags;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("sweep", "jitter / rotation sensitivity curves");
        cmd->add_option("--kind", kind)->check(CLI::IsMember({"jitter", "rotation"}))
            ->capture_default_str();
        cmd->add_option("--in", in)->required();
        cmd->add_option("--metrics", metrics_list, "comma-separated: cd,hd,emd,swd,sinkhorn")
            ->capture_default_str();
        cmd->add_option("--levels", levels, "jitter levels")->capture_default_str();
        cmd->add_option("--angles", angles, "rotation angles")->capture_default_str();
        cmd->add_option("--seed", seed)->capture_default_str();
        cmd->add_flag("--normalize", normalize, "normalize the cloud before sweeping");
        flags.attach(cmd);
        cmd->add_option("--out-dir", out_dir)->required();
        cmd->callback([this] { run(); });
    }

    void run() const {
        ManifestWriter manifest;
        manifest.subcommand = "sweep";
        manifest.args = {"sweep",    "--kind",   kind,        "--in",     in,
                         "--metrics", metrics_list, "--levels", fmt(levels), "--angles",
                         fmt(angles), "--seed",   fmt(seed),   "--out-dir", out_dir};
        if (normalize) manifest.args.push_back("--normalize");
        flags.to_args(manifest.args);
        manifest.config = flags.to_json();
        manifest.config["kind"] = kind;
        manifest.config["in"] = in;
        manifest.config["metrics"] = metrics_list;
        manifest.config["levels"] = levels;
        manifest.config["angles"] = angles;
        manifest.config["seed"] = seed;
        manifest.config["normalized"] = normalize;
        manifest.config["normalization_mode"] = "curve-max";
        manifest.config["direction_seed"] = flags.swd_seed;
        manifest.config["out_dir"] = out_dir;
        manifest.inputs = {in};

        std::vector<std::string> metric_names;
        {
            std::istringstream ss(metrics_list);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty()) metric_names.push_back(tok);
            }
        }

        const fs::path dir = prepare_out_dir(out_dir);
        PointCloud cloud = read_cloud_auto(in);
        if (normalize) cloud = normalize_to_unit_sphere(cloud).cloud;

        const MetricConfig cfg = flags.to_config();
        SweepResult result;
        if (kind == "jitter") {
            result = jitter_sweep(cloud, default_jitter_sigmas(cloud.radius(), levels),
                                  metric_names, cfg, seed);
        } else {
            result = rotation_sweep(cloud, default_rotation_angles(angles), metric_names, cfg);
        }
        std::ostringstream csv;
        result.write_csv(csv);
        write_text(dir / "sweep.csv", csv.str());
        manifest.config["emd_kind"] = result.emd_kind;
        manifest.outputs = {"sweep.csv"};
        manifest.write(dir);
        std::cout << "sweep over " << result.magnitudes.size() << " magnitudes x "
                  << result.metrics.size() << " metrics -> " << (dir / "sweep.csv").string()
                  << '\n';
    }
};

struct UpsampleCmd {
    std::string source, target, out_dir, loss = "swd", resample = "per-step";
    std::size_t iters = 500, dirs = 32, ratio = 2;
    double step = 0.5, init_sigma = 0.02, auction_epsilon = 1e-3;
    std::uint64_t seed = 0;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("upsample", "gradient-descent point upsampler");
        cmd->add_option("--source", source, "low-resolution cloud")->required();
        cmd->add_option("--target", target, "high-resolution target cloud")->required();
        cmd->add_option("--loss", loss)->check(CLI::IsMember({"swd", "chamfer", "emd-auction"}))
            ->capture_default_str();
        cmd->add_option("--iters", iters)->capture_default_str();
        cmd->add_option("--step", step)->capture_default_str();
        cmd->add_option("--dirs", dirs, "directions per step")->capture_default_str();
        cmd->add_option("--ratio", ratio, "upsampling ratio")->capture_default_str();
        cmd->add_option("--init-sigma", init_sigma, "init jitter sigma")->capture_default_str();
        cmd->add_option("--seed", seed)->capture_default_str();
        cmd->add_option("--resample", resample)->check(CLI::IsMember({"per-step", "fixed"}))
            ->capture_default_str();
        cmd->add_option("--auction-epsilon", auction_epsilon)->capture_default_str();
        cmd->add_option("--out-dir", out_dir)->required();
        cmd->callback([this] { run(); });
    }

    void run() const {
        ManifestWriter manifest;
        manifest.subcommand = "upsample";
        manifest.args = {"upsample", "--source", source,          "--target",  target,
                         "--loss",   loss,       "--iters",       fmt(iters),  "--step",
                         fmt(step),  "--dirs",   fmt(dirs),       "--ratio",   fmt(ratio),
                         "--init-sigma", fmt(init_sigma), "--seed", fmt(seed), "--resample",
                         resample,   "--auction-epsilon", fmt(auction_epsilon), "--out-dir",
                         out_dir};
        manifest.config = {{"source", source},
                           {"target", target},
                           {"loss", loss},
                           {"iters", iters},
                           {"step", step},
                           {"dirs", dirs},
                           {"ratio", ratio},
                           {"init_sigma", init_sigma},
                           {"seed", seed},
                           {"resample", resample},
                           {"auction_epsilon", auction_epsilon},
                           {"out_dir", out_dir}};
        manifest.inputs = {source, target};

        const fs::path dir = prepare_out_dir(out_dir);
        OptimizationConfig cfg;
        cfg.loss = loss == "swd" ? LossKind::kSwd
                                 : (loss == "chamfer" ? LossKind::kChamfer : LossKind::kEmdAuction);
        cfg.iterations = iters;
        cfg.step_size = step;
        cfg.directions_per_step = dirs;
        cfg.upsample_ratio = ratio;
        cfg.init_jitter_sigma = init_sigma;
        cfg.seed = seed;
        cfg.resample = resample == "fixed" ? DirectionResampling::kFixed
                                           : DirectionResampling::kPerStep;
        cfg.auction_epsilon = auction_epsilon;

        const OptimizationTrace trace =
            upsample(read_cloud_auto(source), read_cloud_auto(target), cfg);

        std::ostringstream csv;
        csv << "step,loss\n";
        for (std::size_t i = 0; i < trace.losses.size(); ++i)
            csv << i << ',' << format_double(trace.losses[i]) << '\n';
        write_text(dir / "trace.csv", csv.str());
        write_xyz((dir / "final.xyz").string(), trace.final_cloud);
        manifest.outputs = {"trace.csv", "final.xyz"};
        manifest.write(dir);
        std::cout << "loss " << format_double(trace.losses.front()) << " -> "
                  << format_double(trace.losses.back()) << " over " << iters << " steps\n";
    }
};

struct GradcheckCmd {
    std::string loss = "swd", out_dir;
    std::size_t n = 24, dirs = 8, configs = 100;
    std::uint64_t seed = 1;
    double h = 1e-5, tolerance = 1e-4;

    void attach(CLI::App& app) {
        CLI::App* cmd =
            app.add_subcommand("gradcheck", "analytic vs finite-difference gradient report");
        cmd->add_option("--loss", loss)->check(CLI::IsMember({"swd", "chamfer"}))
            ->capture_default_str();
        cmd->add_option("--n", n, "points per cloud")->capture_default_str();
        cmd->add_option("--dirs", dirs)->capture_default_str();
        cmd->add_option("--seed", seed)->capture_default_str();
        cmd->add_option("--configs", configs)->capture_default_str();
        cmd->add_option("--fd-step", h, "central difference step")->capture_default_str();
        cmd->add_option("--tolerance", tolerance, "max relative error")->capture_default_str();
        cmd->add_option("--out-dir", out_dir, "optional; gradcheck.csv lands here");
        cmd->callback([this] { exit_code = run(); });
    }

    int exit_code = 0;
    int run() const;
};

struct RerunCmd {
    std::string manifest_path;

    void attach(CLI::App& app) {
        CLI::App* cmd = app.add_subcommand("rerun", "replay a run from its manifest");
        cmd->add_option("--manifest", manifest_path, "run_manifest.json path")->required();
        cmd->callback([this] { exit_code = run(); });
    }

    int exit_code = 0;

    int run() const {
        std::ifstream in(manifest_path);
        if (!in) throw IoError("rerun: cannot open " + manifest_path);
        json m;
        in >> m;
        if (!m.contains("args") || !m["args"].is_array())
            throw std::invalid_argument("rerun: manifest has no args array");
        std::vector<std::string> args;
        for (const auto& a : m["args"]) args.push_back(a.get<std::string>());
        return run_cli(args);
    }
};

// --- gradcheck implementation ------------------------------------------------

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i)
        c.points.push_back({rng.normal(), rng.normal(), rng.normal()});
    return c;
}

// Reject configurations close to sort/NN ties, where the loss is not
// differentiable and finite differences straddle a kink.
bool tie_adjacent_swd(const PointCloud& x, const PointCloud& y, const DirectionSet& dirs,
                      double gap) {
    std::vector<double> px(x.size()), py(y.size());
    for (const Point3& d : dirs.directions) {
        for (std::size_t i = 0; i < x.size(); ++i) px[i] = x[i].dot(d);
        for (std::size_t i = 0; i < y.size(); ++i) py[i] = y[i].dot(d);
        std::sort(px.begin(), px.end());
        std::sort(py.begin(), py.end());
        for (std::size_t i = 0; i + 1 < px.size(); ++i)
            if (px[i + 1] - px[i] < gap) return true;
        for (std::size_t i = 0; i + 1 < py.size(); ++i)
            if (py[i + 1] - py[i] < gap) return true;
        for (std::size_t i = 0; i < px.size(); ++i)
            if (std::abs(px[i] - py[i]) < gap) return true;
    }
    return false;
}

bool tie_adjacent_chamfer(const PointCloud& x, const PointCloud& y, double gap) {
    auto nn_gap_ok = [&](const PointCloud& from, const PointCloud& to) {
        for (const Point3& p : from.points) {
            double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
            for (const Point3& q : to.points) {
                const double d = distance(p, q);
                if (d < d1) {
                    d2 = d1;
                    d1 = d;
                } else if (d < d2) {
                    d2 = d;
                }
            }
            if (d2 - d1 < gap) return false;
        }
        return true;
    };
    return !nn_gap_ok(x, y) || !nn_gap_ok(y, x);
}

int GradcheckCmd::run() const {
    ManifestWriter manifest;
    manifest.subcommand = "gradcheck";
    manifest.args = {"gradcheck", "--loss", loss,        "--n",     fmt(n),
                     "--dirs",    fmt(dirs), "--seed",   fmt(seed), "--configs",
                     fmt(configs), "--fd-step", fmt(h), "--tolerance", fmt(tolerance)};
    manifest.config = {{"loss", loss}, {"n", n},     {"dirs", dirs},          {"seed", seed},
                       {"configs", configs}, {"h", h}, {"tolerance", tolerance},
                       {"out_dir", out_dir}};

    const double tie_gap = 1e-4;
    std::ostringstream csv;
    csv << "config,max_rel_err\n";
    double worst = 0.0;
    std::uint64_t stream = 0;
    for (std::size_t c = 0; c < configs; ++c) {
        PointCloud x, y;
        DirectionSet dset;
        for (;;) {
            x = random_cloud(n, derive_seed(seed, stream++));
            y = random_cloud(n, derive_seed(seed, stream++));
            if (loss == "swd") {
                dset = sample_directions(dirs, derive_seed(seed, stream++));
                if (!tie_adjacent_swd(x, y, dset, tie_gap)) break;
            } else if (!tie_adjacent_chamfer(x, y, tie_gap)) {
                break;
            }
        }

        Gradient analytic;
        std::function<double(const PointCloud&)> f;
        if (loss == "swd") {
            analytic = swd_gradient(x, y, dset);
            f = [&](const PointCloud& c2) { return swd(c2, y, dset); };
        } else {
            analytic = chamfer_gradient(x, y);
            f = [&](const PointCloud& c2) { return chamfer(c2, y); };
        }

        double max_rel = 0.0;
        PointCloud work = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double* coords[3] = {&work.points[i].x, &work.points[i].y, &work.points[i].z};
            const double analytic_c[3] = {analytic[i].x, analytic[i].y, analytic[i].z};
            Point3 fd;
            double* fd_c[3] = {&fd.x, &fd.y, &fd.z};
            for (int k = 0; k < 3; ++k) {
                const double saved = *coords[k];
                *coords[k] = saved + h;
                const double up = f(work);
                *coords[k] = saved - h;
                const double down = f(work);
                *coords[k] = saved;
                *fd_c[k] = (up - down) / (2.0 * h);
            }
            const Point3 diff{analytic_c[0] - fd.x, analytic_c[1] - fd.y, analytic_c[2] - fd.z};
            const double denom = std::max(1e-8, fd.norm());
            max_rel = std::max(max_rel, diff.norm() / denom);
        }
        worst = std::max(worst, max_rel);
        csv << c << ',' << format_double(max_rel) << '\n';
    }

    std::cout << "gradcheck " << loss << ": " << configs << " configurations, max relative error "
              << format_double(worst) << " (tolerance " << format_double(tolerance) << ")\n";
    if (!out_dir.empty()) {
        manifest.args.insert(manifest.args.end(), {"--out-dir", out_dir});
        const fs::path dir = prepare_out_dir(out_dir);
        write_text(dir / "gradcheck.csv", csv.str());
        manifest.outputs = {"gradcheck.csv"};
        manifest.write(dir);
    }
    return worst < tolerance ? 0 : 1;
}

// --- driver -------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"point-set optimal transport toolkit for lidar upsampling experiments"};
    app.set_version_flag("--version", kVersion);
    app.fallthrough();
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file (command line flags override it)");

    std::size_t threads = 0;
    if (const char* env = std::getenv("PCOT_THREADS")) threads = std::strtoul(env, nullptr, 10);
    app.add_option("--threads", threads, "worker cap, 0 = hardware")->capture_default_str();
    // subcommand callbacks run inside parse(); make sure the worker cap is
    // applied before any of them starts computing
    app.parse_complete_callback([&threads] { set_thread_count(threads); });

    RasterizeCmd rasterize_cmd;
    DecimateCmd decimate_cmd;
    PatchCmd patch_cmd;
    MetricsCmd metrics_cmd;
    SweepCmd sweep_cmd;
    UpsampleCmd upsample_cmd;
    GradcheckCmd gradcheck_cmd;
    RerunCmd rerun_cmd;

    rasterize_cmd.attach(app);
    decimate_cmd.attach(app);
    patch_cmd.attach(app);
    metrics_cmd.attach(app);
    sweep_cmd.attach(app);
    upsample_cmd.attach(app);
    gradcheck_cmd.attach(app);
    rerun_cmd.attach(app);
    app.require_subcommand(1);

    std::vector<const char*> argv;
    argv.push_back("pcot");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        set_thread_count(threads);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage problems are validation failures
    }

    if (metrics_cmd.exit_code != 0) return metrics_cmd.exit_code;
    if (gradcheck_cmd.exit_code != 0) return gradcheck_cmd.exit_code;
    if (rerun_cmd.exit_code != 0) return rerun_cmd.exit_code;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run_cli(args);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const EmptyResultError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
