#include "pcot/point_cloud.hpp"

#include <algorithm>
#include <cmath>

namespace pcot {

Point3 PointCloud::centroid() const {
    Point3 c;
    for (const Point3& p : points) c += p;
    const double n = static_cast<double>(points.size());
    return {c.x / n, c.y / n, c.z / n};
}

double PointCloud::radius() const {
    const Point3 c = centroid();
    double max_d2 = 0.0;
    for (const Point3& p : points) max_d2 = std::max(max_d2, squared_distance(p, c));
    return std::sqrt(max_d2);
}

bool PointCloud::all_finite() const {
    return std::all_of(points.begin(), points.end(), [](const Point3& p) { return p.finite(); });
}

DirectionSet::DirectionSet(std::vector<Point3> dirs, std::uint64_t seed_)
    : directions(std::move(dirs)), seed(seed_) {
    for (const Point3& d : directions) {
        if (std::abs(d.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("DirectionSet: direction is not unit length");
    }
}

}  // namespace pcot
