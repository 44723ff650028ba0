#include "pcot/lidar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "pcot/errors.hpp"
#include "pcot/io.hpp"
#include "pcot/kdtree.hpp"
#include "pcot/rng.hpp"
#include "pcot/sampling.hpp"

namespace pcot {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

}  // namespace

std::size_t RangeImage::occupied_count() const {
    std::size_t n = 0;
    for (const Cell& c : cells) n += c.occupied ? 1 : 0;
    return n;
}

PointCloud RangeImage::collect_points() const {
    PointCloud out;
    for (const Cell& c : cells) {
        if (c.occupied) out.points.push_back(source[c.point_index]);
    }
    return out;
}

PointCloud read_scan(const std::string& path, std::size_t* skipped) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_scan: cannot open " + path);
    in.seekg(0, std::ios::end);
    const std::streamoff bytes = in.tellg();
    in.seekg(0);
    if (bytes % 16 != 0)
        throw IoError("read_scan: " + path + " is not a whole number of 16-byte records; " +
                      std::to_string(bytes % 16) + " trailing bytes at offset " +
                      std::to_string(bytes - bytes % 16));
    const std::size_t n = static_cast<std::size_t>(bytes) / 16;
    std::vector<float> raw(n * 4);
    in.read(reinterpret_cast<char*>(raw.data()), bytes);
    if (!in) throw IoError("read_scan: short read from " + path);

    PointCloud cloud;
    cloud.points.reserve(n);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point3 p{static_cast<double>(raw[4 * i]), static_cast<double>(raw[4 * i + 1]),
                       static_cast<double>(raw[4 * i + 2])};
        if (!p.finite()) {
            ++bad;
            continue;
        }
        cloud.points.push_back(p);
    }
    if (skipped) *skipped = bad;
    if (cloud.empty()) throw IoError("read_scan: no valid records in " + path);
    return cloud;
}

void write_scan(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_scan: cannot open " + path);
    std::vector<float> raw;
    raw.reserve(cloud.size() * 4);
    for (const Point3& p : cloud.points) {
        raw.push_back(static_cast<float>(p.x));
        raw.push_back(static_cast<float>(p.y));
        raw.push_back(static_cast<float>(p.z));
        raw.push_back(0.0f);  // intensity placeholder
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!out) throw IoError("write_scan: write failed for " + path);
}

RangeImage rasterize(const PointCloud& cloud, std::size_t rows, std::size_t cols,
                     double fov_up_deg, double fov_down_deg) {
    if (cloud.empty()) throw std::invalid_argument("rasterize: empty cloud");
    if (rows < 1 || cols < 1) throw std::invalid_argument("rasterize: rows and cols must be >= 1");
    if (!(fov_up_deg > fov_down_deg))
        throw std::invalid_argument("rasterize: fov_up must exceed fov_down");

    RangeImage img;
    img.rows = rows;
    img.cols = cols;
    img.fov_up_deg = fov_up_deg;
    img.fov_down_deg = fov_down_deg;
    img.cells.assign(rows * cols, {});
    img.source = cloud;

    const double fov_up = fov_up_deg * kDegToRad;
    const double fov_down = fov_down_deg * kDegToRad;
    const double fov_span = fov_up - fov_down;

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Point3& p = cloud[i];
        const double range = p.norm();
        if (range < 1e-9) {
            ++img.skipped_zero_range;
            continue;
        }
        const double elevation = std::asin(std::clamp(p.z / range, -1.0, 1.0));
        const double azimuth = std::atan2(p.y, p.x);

        long row = static_cast<long>(
            std::floor((fov_up - elevation) / fov_span * static_cast<double>(rows)));
        row = std::clamp<long>(row, 0, static_cast<long>(rows) - 1);

        long col = static_cast<long>(
            std::floor((azimuth + kPi) / (2.0 * kPi) * static_cast<double>(cols)));
        if (col == static_cast<long>(cols)) col = 0;  // azimuth exactly +pi wraps
        col = std::clamp<long>(col, 0, static_cast<long>(cols) - 1);

        RangeImage::Cell& cell = img.at(static_cast<std::size_t>(row),
                                        static_cast<std::size_t>(col));
        if (!cell.occupied) {
            cell = {true, range, i};
        } else {
            ++img.collisions;
            if (range < cell.depth) cell = {true, range, i};  // nearer return wins
        }
    }
    return img;
}

PointCloud decimate_rows(const RangeImage& img, std::size_t factor, std::size_t phase) {
    if (factor < 2) throw std::invalid_argument("decimate_rows: factor must be >= 2");
    if (img.rows % factor != 0)
        throw std::invalid_argument("decimate_rows: factor " + std::to_string(factor) +
                                    " does not divide row count " + std::to_string(img.rows));
    if (phase >= factor) throw std::invalid_argument("decimate_rows: phase must be < factor");

    PointCloud out;
    for (std::size_t r = phase; r < img.rows; r += factor) {
        for (std::size_t c = 0; c < img.cols; ++c) {
            const RangeImage::Cell& cell = img.at(r, c);
            if (cell.occupied) out.points.push_back(img.source[cell.point_index]);
        }
    }
    if (out.empty())
        throw EmptyResultError("decimate_rows: no occupied cells in the surviving rows");
    return out;
}

std::vector<Patch> extract_patches(const PointCloud& cloud, std::size_t patch_size,
                                   std::size_t n_patches, std::uint64_t seed,
                                   const std::string& scan_id) {
    if (patch_size < 1 || patch_size > cloud.size())
        throw std::invalid_argument("extract_patches: patch_size must be in [1, n]");
    if (n_patches < 1 || n_patches > cloud.size())
        throw std::invalid_argument("extract_patches: n_patches must be in [1, n]");

    const std::size_t seed_index =
        static_cast<std::size_t>(derive_seed(seed, 0x70617463) % cloud.size());
    const std::vector<std::size_t> centers =
        farthest_point_sample(cloud, n_patches, seed_index);

    const KdTree tree(cloud.points);
    std::vector<Patch> patches;
    patches.reserve(n_patches);
    for (const std::size_t center : centers) {
        Patch patch;
        patch.scan_id = scan_id;
        patch.center_index = center;
        const auto nn = tree.nearest_k(cloud[center], patch_size);  // center itself is rank 0
        patch.points.points.reserve(patch_size);
        for (const auto& [idx, dist] : nn) patch.points.points.push_back(cloud[idx]);
        patches.push_back(std::move(patch));
    }
    return patches;
}

std::pair<PointCloud, PointCloud> make_pair(const RangeImage& img, std::size_t factor,
                                            std::size_t phase) {
    PointCloud high = img.collect_points();
    PointCloud low = decimate_rows(img, factor, phase);
    return {std::move(low), std::move(high)};
}

void write_range_dump(std::ostream& os, const RangeImage& img) {
    os << "# pcot range image rows=" << img.rows << " cols=" << img.cols
       << " fov_up_deg=" << format_double(img.fov_up_deg)
       << " fov_down_deg=" << format_double(img.fov_down_deg) << '\n';
    for (std::size_t r = 0; r < img.rows; ++r) {
        for (std::size_t c = 0; c < img.cols; ++c) {
            if (c) os << ' ';
            const RangeImage::Cell& cell = img.at(r, c);
            os << (cell.occupied ? format_double(cell.depth) : "0");
        }
        os << '\n';
    }
}

PointCloud synthetic_scan(std::size_t rows, std::size_t cols, double fov_up_deg,
                          double fov_down_deg, std::uint64_t seed, double occupancy,
                          double range_min, double range_max) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("synthetic_scan: bad grid size");
    if (!(fov_up_deg > fov_down_deg)) throw std::invalid_argument("synthetic_scan: bad fov");
    if (!(occupancy > 0.0) || occupancy > 1.0)
        throw std::invalid_argument("synthetic_scan: occupancy must be in (0, 1]");

    const double fov_up = fov_up_deg * kDegToRad;
    const double fov_down = fov_down_deg * kDegToRad;
    const double fov_span = fov_up - fov_down;

    Rng rng(seed);
    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(static_cast<double>(rows * cols) * occupancy));
    for (std::size_t r = 0; r < rows; ++r) {
        const double elevation =
            fov_up - (static_cast<double>(r) + 0.5) / static_cast<double>(rows) * fov_span;
        for (std::size_t c = 0; c < cols; ++c) {
            const double range = range_min + (range_max - range_min) * rng.uniform();
            const bool keep = occupancy >= 1.0 || rng.uniform() < occupancy;
            if (!keep) continue;
            const double azimuth =
                (static_cast<double>(c) + 0.5) / static_cast<double>(cols) * 2.0 * kPi - kPi;
            const double cos_el = std::cos(elevation);
            cloud.points.push_back({range * cos_el * std::cos(azimuth),
                                    range * cos_el * std::sin(azimuth),
                                    range * std::sin(elevation)});
        }
    }
    return cloud;
}

}  // namespace pcot
