#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pcot/point_cloud.hpp"

namespace pcot {

inline constexpr std::size_t kDefaultRows = 64;
inline constexpr std::size_t kDefaultCols = 2048;
// HDL-64E style vertical field of view; the row count 64 implies it.
inline constexpr double kDefaultFovUpDeg = 2.0;
inline constexpr double kDefaultFovDownDeg = -24.8;

/// Cylindrical grid of lidar returns: row = scan ring (elevation bin),
/// column = azimuth bin. Keeps a copy of the source cloud so occupied
/// cells can hand back the original points, not grid centers.
struct RangeImage {
    struct Cell {
        bool occupied = false;
        double depth = 0.0;          // range in meters
        std::size_t point_index = 0; // into source
    };

    std::size_t rows = 0;
    std::size_t cols = 0;
    double fov_up_deg = 0.0;
    double fov_down_deg = 0.0;
    std::vector<Cell> cells;  // row-major
    PointCloud source;
    std::size_t skipped_zero_range = 0;
    std::size_t collisions = 0;

    const Cell& at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
    Cell& at(std::size_t r, std::size_t c) { return cells[r * cols + c]; }
    std::size_t occupied_count() const;
    /// Occupied cells' original points in row-major order.
    PointCloud collect_points() const;
};

/// Fixed-size neighborhood cut from a scan, with provenance.
struct Patch {
    PointCloud points;
    std::string scan_id;
    std::size_t center_index = 0;
};

/// Reads a binary scan of little-endian float32 (x, y, z, intensity)
/// records; intensity is dropped. Records with non-finite coordinates are
/// skipped and counted into *skipped when given.
PointCloud read_scan(const std::string& path, std::size_t* skipped = nullptr);

/// Writer for the same record layout (intensity written as 0).
void write_scan(const std::string& path, const PointCloud& cloud);

/// Projects a cloud into an H x W cylindrical grid. Row from elevation
/// (asin(z/range)) against the vertical field of view, column from
/// azimuth (atan2(y, x)). Cell collisions keep the nearer return;
/// zero-range points are skipped and counted.
RangeImage rasterize(const PointCloud& cloud, std::size_t rows = kDefaultRows,
                     std::size_t cols = kDefaultCols, double fov_up_deg = kDefaultFovUpDeg,
                     double fov_down_deg = kDefaultFovDownDeg);

/// Keeps rows with index ≡ phase (mod factor) and returns their original
/// points. factor must divide the row count; an empty result is an error.
PointCloud decimate_rows(const RangeImage& img, std::size_t factor, std::size_t phase = 0);

/// FPS-seeded patch cutter: n_patches centers by farthest point sampling,
/// each patch = the center's patch_size nearest neighbors (center
/// included), ascending by distance.
std::vector<Patch> extract_patches(const PointCloud& cloud, std::size_t patch_size,
                                   std::size_t n_patches, std::uint64_t seed,
                                   const std::string& scan_id = "");

/// (low, high) training pair: high = every occupied return, low = the
/// decimated rows.
std::pair<PointCloud, PointCloud> make_pair(const RangeImage& img, std::size_t factor,
                                            std::size_t phase = 0);

/// Text dump of the depth grid (0 = empty cell), one row per line.
void write_range_dump(std::ostream& os, const RangeImage& img);

/// Synthetic scan on exact grid ray directions: one return per cell at the
/// bin center, range drawn uniformly from [range_min, range_max]. Useful
/// as a round-trip oracle because rasterize maps every point back to its
/// generating cell. occupancy < 1 drops cells at random.
PointCloud synthetic_scan(std::size_t rows, std::size_t cols, double fov_up_deg,
                          double fov_down_deg, std::uint64_t seed, double occupancy = 1.0,
                          double range_min = 5.0, double range_max = 40.0);

}  // namespace pcot
