#include "pcot/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pcot/errors.hpp"
#include "pcot/lidar.hpp"

namespace pcot {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

PointCloud read_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_xyz: cannot open " + path);
    PointCloud cloud;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        Point3 p;
        if (!(ss >> p.x >> p.y >> p.z))
            throw IoError("read_xyz: parse error at " + path + ":" + std::to_string(lineno));
        cloud.points.push_back(p);
    }
    if (cloud.empty()) throw IoError("read_xyz: empty cloud in " + path);
    return cloud;
}

void write_xyz(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path);
    if (!out) throw IoError("write_xyz: cannot open " + path);
    for (const Point3& p : cloud.points) {
        out << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.z)
            << '\n';
    }
    if (!out) throw IoError("write_xyz: write failed for " + path);
}

PointCloud read_cloud_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_cloud_bin: cannot open " + path);
    in.seekg(0, std::ios::end);
    const std::streamoff bytes = in.tellg();
    in.seekg(0);
    if (bytes % 12 != 0)
        throw IoError("read_cloud_bin: " + path + " length " + std::to_string(bytes) +
                      " is not a multiple of 12-byte records (trailing bytes at offset " +
                      std::to_string(bytes - bytes % 12) + ")");
    const std::size_t n = static_cast<std::size_t>(bytes) / 12;
    std::vector<float> raw(n * 3);
    in.read(reinterpret_cast<char*>(raw.data()), bytes);
    if (!in) throw IoError("read_cloud_bin: short read from " + path);
    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        cloud.points.push_back(
            {static_cast<double>(raw[3 * i]), static_cast<double>(raw[3 * i + 1]),
             static_cast<double>(raw[3 * i + 2])});
    }
    if (cloud.empty()) throw IoError("read_cloud_bin: empty cloud in " + path);
    return cloud;
}

void write_cloud_bin(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_cloud_bin: cannot open " + path);
    std::vector<float> raw;
    raw.reserve(cloud.size() * 3);
    for (const Point3& p : cloud.points) {
        raw.push_back(static_cast<float>(p.x));
        raw.push_back(static_cast<float>(p.y));
        raw.push_back(static_cast<float>(p.z));
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(float)));
    if (!out) throw IoError("write_cloud_bin: write failed for " + path);
}

PointCloud read_cloud_auto(const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".xyz" || ext == ".txt") return read_xyz(path);
    if (ext == ".xyzb") return read_cloud_bin(path);
    if (ext == ".bin") return read_scan(path);  // KITTI-style 4-float records
    throw IoError("read_cloud_auto: unknown extension on " + path +
                  " (expected .xyz, .xyzb or .bin)");
}

}  // namespace pcot
