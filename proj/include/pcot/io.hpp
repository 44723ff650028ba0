#pragma once

#include <iosfwd>
#include <string>

#include "pcot/point_cloud.hpp"

namespace pcot {

/// Text interchange format: one "x y z" line per point, printed with 17
/// significant digits so round trips are exact.
PointCloud read_xyz(const std::string& path);
void write_xyz(const std::string& path, const PointCloud& cloud);

/// Binary cloud format: little-endian float32 triples, nothing else.
PointCloud read_cloud_bin(const std::string& path);
void write_cloud_bin(const std::string& path, const PointCloud& cloud);

/// Loads .xyz or .bin by extension (scan .bin files use read_scan).
PointCloud read_cloud_auto(const std::string& path);

/// Shortest-representation float formatting used by every CSV/text writer
/// ("%.17g"), so outputs are byte-stable across runs.
std::string format_double(double v);

}  // namespace pcot
